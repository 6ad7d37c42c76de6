"""Concrete and abstract actions as lists of (condition, interval, effect) triples.

At a state ``b`` the *applicable* branches of an action are those whose
condition contains ``b``; their probabilities lie in their intervals and
sum to one. For a concrete action the conditions partition the state
space, so the applicable branches at ``b`` are exactly the branches of
b's condition. Abstract actions may have overlapping conditions. States
sharing the same applicable branches form an *atom*; for concrete actions
the atoms are the distinct conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .cma import Cma
from .errors import CmaError, SpaceMismatchError
from .intervals import TOL, ProbInterval, group_feasible
from .state_model import Effect, StateSet, StateSpace, describe_set
from .validation import Report

CONCRETE = "concrete"
ABSTRACT = "abstract"


@dataclass(frozen=True)
class ActionBranch:
    condition: StateSet
    interval: ProbInterval
    effect: Effect
    expr: str | None = field(default=None, compare=False)

    @property
    def is_padding(self) -> bool:
        return not self.condition


@dataclass(frozen=True)
class Atom:
    states: StateSet
    branches: tuple[int, ...]


@dataclass(frozen=True)
class Action:
    name: str
    kind: str
    branches: tuple[ActionBranch, ...]
    # set by the abstraction operators; relaxes some validation errors to warnings
    derived: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if self.kind not in (CONCRETE, ABSTRACT):
            raise ValueError(f"action kind must be concrete or abstract, got {self.kind!r}")
        if not self.branches:
            raise ValueError(f"action {self.name!r} has no branches")
        space = self.branches[0].condition.space
        for br in self.branches:
            if br.condition.space != space or br.effect.space != space:
                raise SpaceMismatchError(f"action {self.name!r} mixes state spaces")

    @property
    def space(self) -> StateSpace:
        return self.branches[0].condition.space

    @property
    def is_concrete(self) -> bool:
        return self.kind == CONCRETE

    @cached_property
    def conditions(self) -> tuple[StateSet, ...]:
        """Distinct nonempty condition sets, in order of first appearance."""
        seen: dict[int, StateSet] = {}
        for br in self.branches:
            if br.condition and br.condition.bits not in seen:
                seen[br.condition.bits] = br.condition
        return tuple(seen.values())

    @cached_property
    def atoms(self) -> tuple[Atom, ...]:
        """Classes of states with identical applicable branches, ordered by
        their branch-index signatures. Uncovered states belong to no atom."""
        space = self.space
        masks = np.stack([br.condition.to_mask() for br in self.branches])
        keys, inverse = np.unique(masks.T, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        out = []
        for k, key in enumerate(keys):
            sig = tuple(int(i) for i in np.flatnonzero(key))
            if sig:
                out.append(Atom(StateSet.from_mask(space, inverse == k), sig))
        out.sort(key=lambda a: a.branches)
        return tuple(out)

    def atom_of(self, b: int) -> Atom:
        for atom in self.atoms:
            if b in atom.states:
                return atom
        raise CmaError(f"state {b} is covered by no condition of {self.name!r}")

    @cached_property
    def covered(self) -> StateSet:
        bits = 0
        for br in self.branches:
            bits |= br.condition.bits
        return StateSet(self.space, bits)


@dataclass(frozen=True)
class Plan:
    actions: tuple[Action, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.actions:
            raise ValueError("a plan needs at least one action")
        space = self.actions[0].space
        if any(a.space != space for a in self.actions):
            raise SpaceMismatchError("plan mixes actions over different spaces")

    @property
    def space(self) -> StateSpace:
        return self.actions[0].space

    @property
    def is_concrete(self) -> bool:
        return all(a.is_concrete for a in self.actions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


def _states_str(s: StateSet, limit: int = 8) -> str:
    members = list(s)
    more = "" if len(members) <= limit else f" (+{len(members) - limit} more)"
    return f"{members[:limit]}{more} ({describe_set(s)})"


def validate_action(a: Action, tol: float = TOL) -> Report:
    report = Report()
    where = f"action {a.name}"
    for i, br in enumerate(a.branches):
        if br.is_padding and (br.interval.lo != 0 or br.interval.hi != 0):
            report.error(f"{where} branch {i}", "empty condition requires interval [0,0]")
    gap = ~a.covered
    if gap:
        msg = f"conditions are not exhaustive; uncovered states {_states_str(gap)}"
        if a.derived:
            report.warn(where, msg)
        else:
            report.error(where, msg)
    if a.is_concrete:
        conds = a.conditions
        for i in range(len(conds)):
            for j in range(i + 1, len(conds)):
                overlap = conds[i] & conds[j]
                if overlap:
                    report.error(where, f"conditions {i} and {j} overlap on states "
                                        f"{_states_str(overlap)}")
        for ci, cond in enumerate(conds):
            ivs = [br.interval for br in a.branches if br.condition == cond]
            if not group_feasible(ivs, tol):
                report.error(where, f"condition {ci} has infeasible intervals "
                                    f"(sum lo = {sum(i.lo for i in ivs):.6g}, "
                                    f"sum hi = {sum(i.hi for i in ivs):.6g})")
    else:
        for atom in a.atoms:
            ivs = [a.branches[i].interval for i in atom.branches]
            if not group_feasible(ivs, tol):
                report.warn(where, f"applicable branches {list(atom.branches)} on states "
                                   f"{_states_str(atom.states)} have infeasible intervals")
    return report


def instantiate_ima(a: Action, b: int) -> Cma:
    """The IMA describing the outcome of executing ``a`` at state ``b``."""
    if not a.is_concrete:
        raise CmaError(f"cannot instantiate abstract action {a.name!r}")
    atom = a.atom_of(b)
    return Cma.ima(a.space, [(a.branches[i].interval, a.branches[i].effect.image(b))
                             for i in atom.branches])


def make_action(name: str, kind: str,
                branches: Sequence[tuple[StateSet, ProbInterval | tuple[float, float], Effect]],
                derived: bool = False) -> Action:
    out = []
    for cond, iv, eff in branches:
        if not isinstance(iv, ProbInterval):
            iv = ProbInterval(*iv)
        out.append(ActionBranch(cond, iv, eff))
    return Action(name, kind, tuple(out), derived)


def identity_action(space: StateSpace, name: str = "noop") -> Action:
    return make_action(name, CONCRETE, [(space.full, (1.0, 1.0), Effect.identity(space))])
