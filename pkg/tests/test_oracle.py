import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmaplan import projection
from cmaplan.actions import CONCRETE, Plan, identity_action, make_action
from cmaplan.cma import Cma, internal, leaf
from cmaplan.errors import CmaError
from cmaplan.mass import Pd
from cmaplan.oracle import (_route, check_soundness, fold_trace, point_marginal, sample_exec_plan,
                            spd_project)
from cmaplan.projection import project_plan
from cmaplan.state_model import Effect, StateSpace, compile_condition
from cmaplan.synthetic import random_domain, random_spd_fixture

from helpers import uniform_point_interval

SP2 = StateSpace.build({"x": range(2)})
ZERO = compile_condition("x == 0", SP2)
LEAK = make_action("leak", CONCRETE, [
    (ZERO, (0.3, 0.3), Effect.from_table(SP2, {0: [1]})),
    (ZERO, (0.7, 0.7), Effect.identity(SP2)),
    (~ZERO, (1, 1), Effect.identity(SP2)),
])


def test_absorbing_chain_by_hand():
    P0 = Pd(SP2, (1.0, 0.0))
    assert spd_project([LEAK], P0).probs == pytest.approx((0.7, 0.3), abs=1e-15)
    assert spd_project([LEAK, LEAK], P0).probs == pytest.approx((0.49, 0.51), abs=1e-15)
    world = Cma.singleton(SP2.singleton(0))
    out, _ = project_plan([LEAK, LEAK], world)
    assert point_marginal(out) == pytest.approx([0.49, 0.51], abs=1e-15)


def test_identity_plan_always_passes():
    fx = random_domain(3)
    ident = identity_action(fx.space)
    report = check_soundness([ident, ident], fx.world, 100, seed=0)
    assert report.ok and report.samples == 100 and report.instantiations == 1


def test_spd_projection_matches_reference():
    for seed in range(3):
        fx = random_spd_fixture(seed, max_states=24)
        out, _ = project_plan(fx.actions, fx.world)
        P0 = Pd.from_array(fx.space, point_marginal(fx.world))
        want = spd_project(fx.actions, P0)
        assert np.max(np.abs(point_marginal(out) - np.array(want.probs))) <= 1e-12
        assert check_soundness(fx.actions, fx.world, 50, seed=seed).ok


def test_spd_reference_rejects_other_actions():
    P0 = Pd(SP2, (0.5, 0.5))
    wide = make_action("wide", CONCRETE, [(SP2.full, (0.4, 0.6), Effect.identity(SP2)),
                                          (SP2.full, (0.4, 0.6), Effect.identity(SP2))])
    fork = make_action("fork", CONCRETE, [(SP2.full, (1, 1), Effect.from_table(SP2, {0: [0, 1]}))])
    overlap = make_action("overlap", CONCRETE, [(SP2.full, (1, 1), Effect.identity(SP2)),
                                                (ZERO, (1, 1), Effect.identity(SP2))])
    for a in (wide, fork, overlap):
        with pytest.raises(CmaError):
            spd_project([a], P0)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_sampled_traces_conserve_mass(seed):
    fx = random_domain(seed % 50, max_states=12)
    trace = sample_exec_plan(fx.actions, fx.world, seed)
    assert trace.conserves_mass()
    assert abs(trace.p_post.sum() - 1) < 1e-9 and np.all(trace.p_post >= -1e-15)


def test_mass_conservation_many_seeds():
    fx = random_domain(11, max_states=10)
    assert all(sample_exec_plan(fx.actions, fx.world, s).conserves_mass() for s in range(1000))


def test_fold_reproduces_distribution():
    fx = random_domain(5)
    out, _ = project_plan(fx.actions, fx.world)
    trace = sample_exec_plan(fx.actions, fx.world, 9)
    steps = iter(trace.steps)
    routes = [_route(None, None, a, steps) for a in fx.actions]
    numbers, m, final = fold_trace(trace, fx.actions, out, routes, fx.world, 1e-9)
    assert np.allclose(final, trace.p_post, atol=1e-12)
    assert abs(sum(w for _, w in m.branches) - 1) < 1e-9


def test_trace_serialises():
    fx = random_domain(2)
    d = sample_exec_plan(fx.actions, fx.world, 4).to_dict()
    assert len(d["steps"]) == len(fx.actions)
    assert abs(sum(d["pPre"]) - 1) < 1e-9 and abs(sum(d["pPost"]) - 1) < 1e-9
    json.dumps(d)


def test_thread_count_keeps_verdict(monkeypatch):
    fx = random_domain(7)
    one = check_soundness(fx.actions, fx.world, 60, seed=3, workers=1)
    monkeypatch.setenv("CMA_PLAN_THREADS", "4")
    many = check_soundness(fx.actions, fx.world, 60, seed=3)
    assert one.to_dict() == many.to_dict()


def test_uniform_point_mutant_is_caught(monkeypatch):
    fx = random_domain(1, exact_length=True)
    assert check_soundness(fx.actions, fx.world, 100, seed=0).ok
    monkeypatch.setattr(projection, "_effect_interval", uniform_point_interval)
    bad = check_soundness(fx.actions, fx.world, 100, seed=0)
    assert not bad.ok
    assert bad.first_failure["violation"] and bad.first_failure["instantiation"]


def test_abstract_plan_needs_hierarchy():
    from cmaplan.synthetic import tour_hierarchy, tour_world
    h = tour_hierarchy(0)
    with pytest.raises(CmaError):
        check_soundness([h.action("K")], tour_world(), 5, seed=0)
    report = check_soundness([h.action("K")], tour_world(), 20, seed=0, hierarchy=h)
    assert report.ok and report.instantiations == 3 and report.samples == 60
