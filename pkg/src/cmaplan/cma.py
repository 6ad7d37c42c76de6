"""Constraint mass assignments: interval-weighted trees over state sets.

A tree encodes a set of mass assignments. Pick one number per branch,
inside the branch interval, such that every sibling group sums to one;
the mass of a leaf's state set is the product of the numbers on its path.
An IMA is the depth-one special case.

Number assignments are plain dicts keyed by the *path* of the node a
branch leads to (tuple of child positions from the root).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidModelError, SpaceMismatchError, WitnessError
from .intervals import ONE, TOL, ProbInterval, box_simplex_extreme, group_feasible, \
    sample_box_simplex
from .mass import MassAssignment, as_rng, masses_close
from .state_model import StateSet, StateSpace, describe_set
from .validation import Report

Path = tuple[int, ...]
NumberAssignment = dict[Path, float]

WORLD = "world"
CONDITION = "condition"


@dataclass(frozen=True)
class Node:
    """Tree node. Leaves carry a state set; internal nodes may carry one
    as a label (projection records the set each node stands for)."""

    states: StateSet | None = None
    children: tuple["Branch", ...] = ()
    role: str = WORLD

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class Branch:
    interval: ProbInterval
    node: Node
    tag: int | None = None


def leaf(states: StateSet) -> Node:
    return Node(states)


def internal(*branches: tuple[ProbInterval | tuple[float, float], Node]) -> Node:
    out = []
    for iv, child in branches:
        if not isinstance(iv, ProbInterval):
            iv = ProbInterval(*iv)
        out.append(Branch(iv, child))
    return Node(None, tuple(out))


@dataclass(frozen=True)
class Group:
    """A sibling group: the branches leaving one internal node."""

    parent: Path
    paths: tuple[Path, ...]
    intervals: tuple[ProbInterval, ...]


@dataclass(frozen=True)
class Cma:
    space: StateSpace
    root: Node

    @classmethod
    def ima(cls, space: StateSpace,
            branches: Sequence[tuple[ProbInterval | tuple[float, float], StateSet]]) -> "Cma":
        return cls(space, internal(*((iv, leaf(s)) for iv, s in branches)))

    @classmethod
    def singleton(cls, states: StateSet) -> "Cma":
        """Depth-zero world: all mass on one state set."""
        return cls(states.space, leaf(states))

    def walk(self) -> Iterator[tuple[Path, Node]]:
        """Preorder traversal yielding (path, node)."""
        stack: list[tuple[Path, Node]] = [((), self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for j in range(len(node.children) - 1, -1, -1):
                stack.append((path + (j,), node.children[j].node))

    @cached_property
    def groups(self) -> tuple[Group, ...]:
        out = []
        for path, node in self.walk():
            if node.children:
                out.append(Group(path,
                                 tuple(path + (j,) for j in range(len(node.children))),
                                 tuple(b.interval for b in node.children)))
        return tuple(out)

    @cached_property
    def leaves(self) -> tuple[tuple[Path, Node], ...]:
        return tuple((p, n) for p, n in self.walk() if n.is_leaf)

    @cached_property
    def branch_paths(self) -> tuple[Path, ...]:
        return tuple(p for g in self.groups for p in g.paths)

    def node_at(self, path: Path) -> Node:
        node = self.root
        for j in path:
            node = node.children[j].node
        return node


@dataclass(frozen=True)
class UtilityFn:
    space: StateSpace
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.space.size:
            raise ValueError("utility table length differs from the state space size")
        if not all(np.isfinite(values)):
            raise ValueError("utility values must be finite")

    def scaled(self, alpha: float, beta: float) -> "UtilityFn":
        return UtilityFn(self.space, tuple(alpha * v + beta for v in self.values))


def validate_cma(M: Cma, tol: float = TOL) -> Report:
    report = Report()
    for path, node in M.walk():
        where = "root" if not path else "path " + ".".join(map(str, path))
        if node.states is not None and node.states.space != M.space:
            report.error(where, "state set belongs to another space")
        if node.is_leaf:
            if node.states is None or not node.states:
                report.error(where, "leaf state set is empty")
        elif not group_feasible([b.interval for b in node.children], tol):
            ivs = [b.interval for b in node.children]
            report.error(where, "infeasible sibling group "
                         f"(sum lo = {sum(i.lo for i in ivs):.6g}, "
                         f"sum hi = {sum(i.hi for i in ivs):.6g}): "
                         + " ".join(str(i) for i in ivs))
    return report


def require_valid(M: Cma) -> None:
    report = validate_cma(M)
    if not report.ok:
        raise InvalidModelError(f"invalid CMA:\n{report}", report)


def path_products(M: Cma, numbers: NumberAssignment) -> list[tuple[Path, StateSet, float]]:
    """Product of the assigned numbers along each root-to-leaf path."""
    out = []
    stack: list[tuple[Path, Node, float]] = [((), M.root, 1.0)]
    while stack:
        path, node, w = stack.pop()
        if node.is_leaf:
            out.append((path, node.states, w))
            continue
        for j in range(len(node.children) - 1, -1, -1):
            p = path + (j,)
            stack.append((p, node.children[j].node, w * numbers[p]))
    return out


def ma_from_products(space: StateSpace, products) -> MassAssignment:
    """Merge leaves with equal sets and drop zero-mass leaves."""
    merged: dict[int, float] = {}
    sets: dict[int, StateSet] = {}
    for _, states, w in products:
        if w > 0:
            merged[states.bits] = merged.get(states.bits, 0.0) + w
            sets[states.bits] = states
    return MassAssignment(space, tuple((sets[k], v) for k, v in merged.items()))


def sample_numbers(M: Cma, seed) -> NumberAssignment:
    rng = as_rng(seed)
    numbers: NumberAssignment = {}
    for g in M.groups:
        for p, x in zip(g.paths, sample_box_simplex(g.intervals, rng)):
            numbers[p] = x
    return numbers


def sample_ma(M: Cma, seed) -> tuple[MassAssignment, NumberAssignment]:
    """Draw a member MA of ``M`` together with the numbers that generate it."""
    require_valid(M)
    numbers = sample_numbers(M, seed)
    return ma_from_products(M.space, path_products(M, numbers)), numbers


def check_witness(M: Cma, numbers: NumberAssignment, tol: float = TOL) -> str | None:
    """First constraint the numbers violate, or None if they are a valid
    assignment for ``M``. Raises WitnessError on a shape mismatch."""
    expected = set(M.branch_paths)
    if expected != set(numbers):
        missing = sorted(expected - set(numbers))
        extra = sorted(set(numbers) - expected)
        raise WitnessError(f"witness does not match tree: missing {missing[:5]}, "
                           f"extra {extra[:5]}")
    for g in M.groups:
        xs = [float(numbers[p]) for p in g.paths]
        for p, iv, x in zip(g.paths, g.intervals, xs):
            if not iv.contains(x, tol):
                return f"number {x!r} at path {p} outside interval {iv}"
        if abs(sum(xs) - 1.0) > tol:
            return f"sibling group under {g.parent} sums to {sum(xs)!r}"
    return None


def contains_ma(M: Cma, m: MassAssignment, numbers: NumberAssignment,
                tol: float = TOL) -> bool:
    """Witness-based membership test ``m ∈ M``."""
    if m.space != M.space:
        raise SpaceMismatchError("MA and CMA over different spaces")
    if check_witness(M, numbers, tol) is not None:
        return False
    produced: dict[int, float] = {}
    for _, states, w in path_products(M, numbers):
        produced[states.bits] = produced.get(states.bits, 0.0) + w
    return masses_close(produced, m.merged(), tol)


def flatten(M: Cma) -> Cma:
    """Collapse a tree into an IMA with one branch per root-to-leaf path.

    Path intervals multiply endpoint-wise; equal leaf sets are kept apart.
    """
    require_valid(M)
    if depth(M) == 1:
        return M
    branches = []
    for path, node in M.leaves:
        lo = hi = 1.0
        cur = M.root
        for j in path:
            iv = cur.children[j].interval
            lo *= iv.lo
            hi *= iv.hi
            cur = cur.children[j].node
        branches.append(Branch(ProbInterval.clipped(lo, min(1.0, hi)), leaf(node.states)))
    out = Cma(M.space, Node(None, tuple(branches)))
    require_valid(out)
    return out


def flatten_witness(M: Cma, numbers: NumberAssignment) -> NumberAssignment:
    """Numbers for ``flatten(M)`` reproducing the MA generated by ``numbers``."""
    if depth(M) == 1:
        return dict(numbers)
    products = {path: w for path, _, w in path_products(M, numbers)}
    return {(j,): products[path] for j, (path, _) in enumerate(M.leaves)}


def eu_interval(M: Cma, u: UtilityFn) -> tuple[float, float]:
    """Tight bounds on expected utility over every distribution in ℘(M)."""
    require_valid(M)
    if u.space != M.space:
        raise SpaceMismatchError("utility and CMA over different spaces")
    values = u.values

    def bound(node: Node) -> tuple[float, float]:
        if node.is_leaf:
            vs = [values[b] for b in node.states]
            return min(vs), max(vs)
        kids = [bound(b.node) for b in node.children]
        ivs = [b.interval for b in node.children]
        return (box_simplex_extreme(ivs, [k[0] for k in kids]),
                box_simplex_extreme(ivs, [k[1] for k in kids], maximize=True))

    return bound(M.root)


def node_count(M: Cma) -> int:
    return sum(1 for _ in M.walk())


def depth(M: Cma) -> int:
    return max(len(p) for p, _ in M.leaves)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def to_dot(M: Cma, name: str = "cma") -> str:
    lines = [f"digraph \"{name}\" {{", "  node [fontname=\"Helvetica\"];"]
    ids: dict[Path, str] = {}
    for k, (path, node) in enumerate(M.walk()):
        ids[path] = f"n{k}"
        label = describe_set(node.states) if node.states is not None else ""
        if node.is_leaf:
            shape = "box"
        elif node.role == CONDITION:
            shape = "diamond"
        else:
            shape = "ellipse"
        label = label.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  n{k} [shape={shape}, label="{label}"];')
    for path, node in M.walk():
        for j, br in enumerate(node.children):
            iv = br.interval
            lines.append(f'  {ids[path]} -> {ids[path + (j,)]} '
                         f'[label="[{_fmt(iv.lo)},{_fmt(iv.hi)}]"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def perfect_tree(space: StateSpace, states: StateSet, branching: int, levels: int) -> Cma:
    """Uniform tree with equal point intervals; handy for counting checks."""
    iv = ProbInterval.point(1.0 / branching)

    def build(level: int) -> Node:
        if level == levels:
            return leaf(states)
        return Node(None, tuple(Branch(iv, build(level + 1)) for _ in range(branching)))

    return Cma(space, build(0))


__all__ = [
    "Branch", "Cma", "Group", "Node", "NumberAssignment", "ONE", "Path", "UtilityFn",
    "check_witness", "contains_ma", "depth", "eu_interval",
    "flatten", "flatten_witness", "internal", "leaf", "ma_from_products", "node_count",
    "path_products", "perfect_tree", "require_valid", "sample_ma", "sample_numbers",
    "to_dot", "validate_cma",
]
