import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmaplan.errors import SpaceMismatchError
from cmaplan.intervals import (ProbInterval, box_simplex_extreme, feasible_point,
                               group_feasible, sample_box_simplex)
from cmaplan.mass import (AllocationRecord, MassAssignment, Pd, allocation_valid,
                          is_consistent, lower_prob, masses_close, sample_consistent_pd)
from cmaplan.state_model import StateSpace

from helpers import brute_consistent

SP3 = StateSpace.build({"x": range(3)})
M_OVERLAP = MassAssignment.of(SP3, [([0, 1], 0.7), ([1, 2], 0.3)])


def test_interval_invariants():
    with pytest.raises(ValueError):
        ProbInterval(0.6, 0.5)
    with pytest.raises(ValueError):
        ProbInterval(-0.1, 0.5)
    with pytest.raises(ValueError):
        ProbInterval(0.1, 1.2)
    assert ProbInterval(0.2, 0.2).is_point
    assert ProbInterval.clipped(-1e-12, 1 + 1e-12) == ProbInterval(0.0, 1.0)


def test_group_feasibility():
    assert group_feasible([ProbInterval(0.2, 0.5), ProbInterval(0.5, 0.8)])
    assert not group_feasible([ProbInterval(0.6, 0.7), ProbInterval(0.5, 0.9)])
    assert not group_feasible([ProbInterval(0, 0.3), ProbInterval(0, 0.4)])


_groups = st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=5).map(
    lambda pairs: [ProbInterval(min(a, b), max(a, b)) for a, b in pairs]).filter(group_feasible)


@given(_groups, st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_box_simplex_sampler_stays_inside(ivs, seed):
    xs = sample_box_simplex(ivs, np.random.default_rng(seed))
    assert abs(sum(xs) - 1) <= 1e-9
    assert all(iv.contains(x) for iv, x in zip(ivs, xs))
    ys = feasible_point(ivs)
    assert abs(sum(ys) - 1) <= 1e-9 and all(iv.contains(y) for iv, y in zip(ivs, ys))


@given(_groups, st.lists(st.floats(-5, 5), min_size=5, max_size=5))
@settings(max_examples=150, deadline=None)
def test_greedy_extreme_beats_grid(ivs, vals):
    vals = vals[:len(ivs)]
    lo = box_simplex_extreme(ivs, vals)
    hi = box_simplex_extreme(ivs, vals, maximize=True)
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = sample_box_simplex(ivs, rng)
        v = float(np.dot(p, vals))
        assert lo - 1e-9 <= v <= hi + 1e-9


def test_mass_invariants():
    with pytest.raises(ValueError):
        MassAssignment.of(SP3, [([0], 0.5)])
    with pytest.raises(ValueError):
        MassAssignment.of(SP3, [([], 0.5), ([0], 0.5)])
    with pytest.raises(ValueError):
        MassAssignment.of(SP3, [([0], 1.2), ([1], -0.2)])
    # overlapping and repeated focal sets are fine
    m = MassAssignment.of(SP3, [([0, 1], 0.5), ([0, 1], 0.25), ([1, 2], 0.25)])
    assert m.merged() == {0b011: 0.75, 0b110: 0.25}


def test_pd_invariants():
    with pytest.raises(ValueError):
        Pd(SP3, (0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        Pd(SP3, (1.0, 0.0))


def test_lower_prob_examples():
    assert lower_prob(M_OVERLAP, SP3.full) == pytest.approx(1.0)
    assert lower_prob(M_OVERLAP, SP3.empty) == 0.0
    assert lower_prob(M_OVERLAP, SP3.states([0, 1])) == pytest.approx(0.7)


def test_lower_prob_space_mismatch():
    other = StateSpace.build({"y": range(3)})
    with pytest.raises(SpaceMismatchError):
        lower_prob(M_OVERLAP, other.full)


def test_consistency_examples():
    full = MassAssignment.of(SP3, [([0, 1, 2], 1.0)])
    assert is_consistent(Pd(SP3, (0.1, 0.2, 0.7)), full)
    point = MassAssignment.of(SP3, [([0], 1.0)])
    assert not is_consistent(Pd(SP3, (0.5, 0.5, 0.0)), point)
    P = Pd(SP3, (0.4, 0.4, 0.2))
    assert brute_consistent(P, M_OVERLAP)
    for method in ("auto", "unions", "exhaustive", "flow"):
        assert is_consistent(P, M_OVERLAP, method=method)
    bad = Pd(SP3, (0.1, 0.1, 0.8))
    assert not brute_consistent(bad, M_OVERLAP)
    assert not is_consistent(bad, M_OVERLAP, method="unions")
    assert not is_consistent(bad, M_OVERLAP, method="flow")


def test_sample_consistent_examples():
    P, alloc = sample_consistent_pd(MassAssignment.of(SP3, [([2], 1.0)]), 5)
    assert P.probs == (0.0, 0.0, 1.0)
    m = MassAssignment.of(SP3, [([0, 1, 2], 1.0)])
    P, alloc = sample_consistent_pd(m, 1)
    assert abs(sum(P.probs) - 1) < 1e-12 and is_consistent(P, m)
    for seed in range(50):
        P, alloc = sample_consistent_pd(M_OVERLAP, seed)
        assert P.prob(SP3.states([0, 1])) >= 0.7 - 1e-12
        assert allocation_valid(M_OVERLAP, alloc, P)


def test_allocation_certificate_rejects_leaks():
    P, alloc = sample_consistent_pd(M_OVERLAP, 3)
    leaked = AllocationRecord((alloc.splits[0] + np.array([0, 0, 0.01]), alloc.splits[1]))
    assert not allocation_valid(M_OVERLAP, leaked, P)


@st.composite
def mass_and_pd(draw, max_states=10):
    n = draw(st.integers(1, max_states))
    sp = StateSpace.build({"x": range(n)})
    k = draw(st.integers(1, 4))
    focal = [draw(st.sets(st.integers(0, n - 1), min_size=1)) for _ in range(k)]
    w = np.array([draw(st.floats(0.05, 1)) for _ in range(k)])
    w = w / w.sum()
    m = MassAssignment.of(sp, list(zip(focal, w.tolist())))
    p = np.array([draw(st.floats(0, 1)) for _ in range(n)]) + 1e-3
    return m, Pd.from_array(sp, p / p.sum())


@given(mass_and_pd())
@settings(max_examples=300, deadline=None)
def test_union_check_equals_definition(mp):
    m, P = mp
    want = brute_consistent(P, m)
    assert is_consistent(P, m, method="unions") == want
    assert is_consistent(P, m, method="exhaustive") == want
    assert is_consistent(P, m, method="flow") == want


# shifts within a few ulps of the tolerance are float ties, not disagreements
@given(mass_and_pd(max_states=30), st.integers(0, 2**32 - 1),
       st.one_of(st.just(0.0), st.floats(1e-6, 0.2)))
@settings(max_examples=200, deadline=None)
def test_flow_check_equals_unions_on_large_spaces(mp, seed, shift):
    m, _ = mp
    # start consistent, then move some mass between states of the focal
    # union so both verdicts occur
    P, _ = sample_consistent_pd(m, seed)
    arr = P.array.copy()
    union = sorted(set().union(*(set(s) for s, _ in m.branches)))
    src, dst = np.random.default_rng(seed).choice(union, 2)
    d = min(arr[src], shift)
    arr[src] -= d
    arr[dst] += d
    P = Pd.from_array(m.space, arr)
    assert is_consistent(P, m, method="flow") == is_consistent(P, m, method="unions")


@given(mass_and_pd(), st.integers(0, 2**32 - 1))
@settings(max_examples=150, deadline=None)
def test_sampled_pd_is_consistent(mp, seed):
    m, _ = mp
    P, alloc = sample_consistent_pd(m, seed)
    assert is_consistent(P, m) and allocation_valid(m, alloc, P)


@given(mass_and_pd(), st.sets(st.integers(0, 9)), st.sets(st.integers(0, 9)))
@settings(max_examples=150, deadline=None)
def test_lower_prob_monotone(mp, a, b):
    m, _ = mp
    n = m.space.size
    small = m.space.states(x for x in a if x < n)
    big = small | m.space.states(x for x in b if x < n)
    assert lower_prob(m, small) <= lower_prob(m, big) + 1e-12


def test_masses_close():
    assert masses_close({1: 0.5, 2: 0.5}, {2: 0.5, 1: 0.5, 4: 0.0})
    assert not masses_close({1: 0.5}, {1: 0.6})
