import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmaplan.actions import (ABSTRACT, CONCRETE, Action, ActionBranch, Plan, identity_action,
                             instantiate_ima, make_action, validate_action)
from cmaplan.cma import validate_cma
from cmaplan.errors import CmaError, SpaceMismatchError
from cmaplan.intervals import ProbInterval
from cmaplan.state_model import (Effect, EffectRule, StateSpace, compile_condition,
                                 compile_effect, state_decode, state_index)
from cmaplan.synthetic import random_action

SP = StateSpace.build({"fuel": range(7), "ton": range(5)})
FUELED = compile_condition("fuel > 3", SP)
LOW = compile_condition("fuel <= 3", SP)
HAUL = compile_effect([EffectRule("ton", "add", 2, 3)], SP)
IDLE = compile_effect([EffectRule("fuel", "add", -1, -1)], SP)


def deliver(**over):
    rows = [(FUELED, (0.7, 0.9), HAUL), (FUELED, (0.1, 0.3), IDLE),
            (LOW, (0.4, 0.6), IDLE), (LOW, (0.4, 0.6), Effect.identity(SP))]
    for i, row in over.items():
        rows[int(i[1:])] = row
    return make_action("deliver", CONCRETE, rows)


def test_identity_action_valid():
    assert validate_action(identity_action(SP)).ok


def test_deliver_valid():
    rep = validate_action(deliver())
    assert rep.ok and not rep.warnings


def test_overlap_lists_state():
    # widen one condition by a single state (fuel=3, ton=0)
    extra = FUELED | SP.singleton(state_index([3, 0], SP))
    a = deliver(b0=(extra, (0.7, 0.9), HAUL), b1=(extra, (0.1, 0.3), IDLE))
    rep = validate_action(a)
    assert not rep.ok
    msg = str(rep)
    assert "deliver" in msg and "overlap" in msg and str(state_index([3, 0], SP)) in msg


def test_infeasible_condition_group():
    a = deliver(b2=(LOW, (0.3, 0.4), IDLE), b3=(LOW, (0.2, 0.3), Effect.identity(SP)))
    rep = validate_action(a)
    assert not rep.ok and "infeasible" in str(rep) and "0.7" in str(rep)


def test_gap_is_error_for_authored_warning_for_derived():
    gap = LOW - SP.singleton(0)
    rows = [(FUELED, (1, 1), HAUL), (gap, (1, 1), IDLE)]
    authored = make_action("g", ABSTRACT, rows)
    derived = make_action("g", ABSTRACT, rows, derived=True)
    assert not validate_action(authored).ok
    rep = validate_action(derived)
    assert rep.ok and rep.warnings


def test_padding_rules():
    rows = [(SP.full, (1, 1), HAUL), (SP.empty, (0, 0), IDLE)]
    assert validate_action(make_action("p", ABSTRACT, rows)).ok
    rows[1] = (SP.empty, (0, 0.2), IDLE)
    assert not validate_action(make_action("p", ABSTRACT, rows)).ok


def test_abstract_overlap_allowed_infeasible_is_warning():
    rows = [(SP.full, (0.1, 0.2), HAUL), (FUELED, (0.1, 0.2), IDLE)]
    rep = validate_action(make_action("ab", ABSTRACT, rows))
    assert rep.ok and len(rep.warnings) == 2


def test_constructor_guards():
    with pytest.raises(ValueError):
        Action("x", "weird", (ActionBranch(SP.full, ProbInterval(1, 1), HAUL),))
    with pytest.raises(ValueError):
        Action("x", CONCRETE, ())
    other = StateSpace.build({"y": range(2)})
    with pytest.raises(SpaceMismatchError):
        make_action("x", CONCRETE, [(SP.full, (1, 1), Effect.identity(other))])
    with pytest.raises(SpaceMismatchError):
        Plan((identity_action(SP), identity_action(other)))
    with pytest.raises(ValueError):
        Plan(())


def test_atoms_of_concrete_are_conditions():
    a = deliver()
    assert {at.states.bits for at in a.atoms} == {FUELED.bits, LOW.bits}
    assert a.conditions == (FUELED, LOW)


def test_instantiate_identity():
    M = instantiate_ima(identity_action(SP), 5)
    assert len(M.root.children) == 1
    assert M.root.children[0].interval == ProbInterval(1, 1)
    assert M.root.children[0].node.states == SP.singleton(5)


def test_instantiate_deliver_at_fueled_state():
    b = state_index([5, 1], SP)
    M = instantiate_ima(deliver(), b)
    kids = M.root.children
    assert [k.interval for k in kids] == [ProbInterval(0.7, 0.9), ProbInterval(0.1, 0.3)]
    assert {state_decode(x, SP) for x in kids[0].node.states} == {(5, 3), (5, 4)}
    assert {state_decode(x, SP) for x in kids[1].node.states} == {(4, 1)}


def test_instantiate_two_halves():
    e1 = compile_effect([EffectRule("ton", "set", 0, 0)], SP)
    e2 = compile_effect([EffectRule("ton", "set", 4, 4)], SP)
    a = make_action("h", CONCRETE, [(SP.full, (0.5, 0.5), e1), (SP.full, (0.5, 0.5), e2)])
    b = state_index([2, 2], SP)
    M = instantiate_ima(a, b)
    assert [k.node.states for k in M.root.children] == [e1.image(b), e2.image(b)]
    assert all(k.interval == ProbInterval(0.5, 0.5) for k in M.root.children)


def test_instantiate_rejects_abstract():
    a = make_action("ab", ABSTRACT, [(SP.full, (1, 1), HAUL)])
    with pytest.raises(CmaError):
        instantiate_ima(a, 0)


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_instantiated_imas_are_valid(seed):
    rng = np.random.default_rng(seed)
    a = random_action(rng, SP, "r")
    assert validate_action(a).ok
    for b in range(0, SP.size, 3):
        assert validate_cma(instantiate_ima(a, b)).ok
