import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmaplan.actions import ABSTRACT, CONCRETE, identity_action, make_action
from cmaplan.cma import CONDITION, Cma, depth, internal, leaf, node_count, validate_cma
from cmaplan.errors import CmaError, InvalidModelError, SpaceMismatchError
from cmaplan.intervals import ONE, UNIT, ProbInterval
from cmaplan.mass import Pd
from cmaplan.oracle import point_marginal, spd_project
from cmaplan.projection import (LooseProb, loose_cond_prob, predicted_node_count,
                                project_action, project_plan)
from cmaplan.state_model import (Effect, EffectRule, StateSpace, compile_condition,
                                 compile_effect)
from cmaplan.synthetic import node_count_fixture, random_domain, random_spd_fixture

SP = StateSpace.build({"fuel": range(7), "ton": range(5)})
FUELED = compile_condition("fuel > 3", SP)
LOW = compile_condition("fuel <= 3", SP)
HAUL = compile_effect([EffectRule("ton", "add", 2, 3), EffectRule("fuel", "add", -2, -1)], SP)
IDLE = compile_effect([EffectRule("fuel", "add", -1, -1)], SP)
DELIVER = make_action("deliver", CONCRETE, [
    (FUELED, (0.7, 0.9), HAUL), (FUELED, (0.1, 0.3), IDLE),
    (LOW, (0.4, 0.6), IDLE), (LOW, (0.4, 0.6), Effect.identity(SP))])


def cond(text):
    return compile_condition(text, SP)


def test_loose_zero_one_unit():
    assert loose_cond_prob(DELIVER, FUELED, cond("fuel == 1")) is LooseProb.ZERO
    assert loose_cond_prob(DELIVER, FUELED, cond("fuel >= 5")) is LooseProb.ONE
    assert loose_cond_prob(DELIVER, FUELED, cond("fuel >= 3")) is LooseProb.UNIT
    assert LooseProb.ONE.interval == ONE and LooseProb.UNIT.interval == UNIT


def test_loose_requires_a_condition():
    with pytest.raises(CmaError):
        loose_cond_prob(DELIVER, cond("fuel == 0"), SP.full)


def test_identity_growth():
    M = Cma.ima(SP, [((0.2, 0.5), cond("fuel < 2")), ((0.5, 0.8), cond("fuel >= 2"))])
    out, stats = project_action(identity_action(SP), M)
    for (path, node), (_, old) in zip(out.leaves, M.leaves):
        assert node.states == old.states
        parent = out.node_at(path[:-1])
        assert parent.role == CONDITION and len(parent.children) == 1
        assert parent.children[0].interval == ProbInterval(1, 1)
        assert out.node_at(path[:-2]).children[path[-2]].interval == ProbInterval(1, 1)
    assert stats.pruned == 0


def test_deliver_on_two_leaf_world_has_depth_three():
    M_pre = Cma.ima(SP, [((0.6, 0.8), cond("fuel >= 4 and ton == 0")),
                         ((0.2, 0.4), cond("fuel >= 2 and fuel <= 5 and ton == 0"))])
    M1, stats = project_action(DELIVER, M_pre)
    assert depth(M1) == 3
    assert stats.pruned == 1
    first, second = M1.root.children
    # fully fueled leaf: one condition branch at [1,1]; straddling leaf: two at [0,1]
    assert [b.interval for b in first.node.children] == [ONE]
    assert [b.interval for b in second.node.children] == [UNIT, UNIT]
    assert [b.interval for b in first.node.children[0].node.children] == \
        [ProbInterval(0.7, 0.9), ProbInterval(0.1, 0.3)]
    haul_leaf = first.node.children[0].node.children[0].node
    assert haul_leaf.states == HAUL.apply(cond("fuel >= 4 and ton == 0"))


def test_straddling_leaf_gains_six_nodes():
    M = Cma.singleton(cond("fuel >= 3 and fuel <= 4"))
    out, stats = project_action(DELIVER, M)
    assert node_count(out) - node_count(M) == 6
    assert all(b.interval == UNIT for b in out.root.children)
    assert stats.consistent_conditions == [2]


def test_prefix_and_inputs_checked():
    M = Cma.ima(SP, [((0.6, 0.7), SP.full), ((0.5, 0.9), SP.full)])
    with pytest.raises(InvalidModelError):
        project_action(DELIVER, M)
    other = StateSpace.build({"q": range(2)})
    with pytest.raises(SpaceMismatchError):
        project_action(DELIVER, Cma.singleton(other.full))
    bad = make_action("bad", CONCRETE, [(FUELED, (1, 1), HAUL)])
    with pytest.raises(InvalidModelError):
        project_action(bad, Cma.singleton(SP.full))


def test_single_action_plan_matches_project_action():
    M = Cma.singleton(SP.full)
    assert project_plan([DELIVER], M)[0] == project_action(DELIVER, M)[0]
    with pytest.raises(CmaError):
        project_plan([], M)


@pytest.mark.parametrize("t,k,n,want", [(1, 1, 3, 4), (2, 2, 2, 21), (1, 3, 2, 13),
                                        (1, 2, 2, 7)])
def test_predicted_node_count(t, k, n, want):
    assert predicted_node_count(t, k, n) == want


def test_chain_of_identical_actions():
    for k in (1, 2, 3):
        for n in (1, 2, 3):
            fx = node_count_fixture(1, k)
            _, stats = project_plan(fx.actions * n, fx.world)
            assert stats.outcome_count == predicted_node_count(1, k, n)
            assert stats.to_dict()["nodeCount"] == stats.outcome_count
            # every node: outcome nodes plus one condition node per expanded leaf
            assert stats.node_count == stats.outcome_count + sum(k ** i for i in range(n))


@pytest.mark.parametrize("seed", range(5))
def test_spd_marginals(seed):
    fx = random_spd_fixture(seed, max_states=24, plan_length=3)
    out, _ = project_plan(fx.actions, fx.world)
    P0 = Pd.from_array(fx.space, point_marginal(fx.world))
    want = spd_project(fx.actions, P0).array
    assert np.max(np.abs(point_marginal(out) - want)) <= 1e-12


def test_abstract_action_uses_state_classes():
    # overlapping conditions: states 0-3 see both branches, 4-6 only the second
    low, all_ = cond("fuel <= 3"), SP.full
    a = make_action("ab", ABSTRACT, [(low, (0, 0.5), IDLE), (all_, (0.5, 1), HAUL)])
    out, _ = project_action(a, Cma.singleton(SP.full))
    kids = out.root.children
    assert [b.interval for b in kids] == [UNIT, UNIT]
    assert [len(b.node.children) for b in kids] == [2, 1]
    assert {b.node.states.bits for b in kids} == {low.bits, (all_ - low).bits}


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_projection_invariants(seed):
    fx = random_domain(seed, max_states=12)
    M = fx.world
    for a in fx.actions:
        out, stats = project_action(a, M)
        assert validate_cma(out).ok
        for path, node in out.walk():
            if node.is_leaf:
                assert node.states
            for br in node.children:
                assert br.interval != ProbInterval(0, 0) or node.role == CONDITION
        # input is a prefix: same intervals along every old path
        for g in M.groups:
            assert out.node_at(g.parent).children[0].interval == g.intervals[0]
            assert [b.interval for b in out.node_at(g.parent).children] == list(g.intervals)
        assert all(c >= 1 for c in stats.consistent_conditions)
        M = out


def test_stats_dict():
    _, stats = project_plan([DELIVER, DELIVER], Cma.singleton(SP.full))
    d = stats.to_dict()
    assert d["initialNodeCount"] == 1 and len(d["steps"]) == 2
    assert d["steps"][-1]["nodeCount"] == d["nodeCount"]
