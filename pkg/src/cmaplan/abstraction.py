"""Intra-, inter- and sequential abstraction, and abstraction hierarchies.

Each operator returns an abstract :class:`~cmaplan.actions.Action`. The
private ``_intra``/``_inter``/``_seq`` variants also return a branch map
saying which member branches feed each abstract branch; hierarchies keep
those maps so the oracle can replay concrete executions on abstract plans.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .actions import ABSTRACT, CONCRETE, Action, ActionBranch, Plan, validate_action
from .errors import CmaError, SpaceMismatchError
from .intervals import ProbInterval
from .state_model import StateSet
from .validation import Report


def _merge_pair(b1: ActionBranch, b2: ActionBranch) -> ActionBranch:
    i1, i2 = b1.interval, b2.interval
    cond = b1.condition | b2.condition
    lo = min(i1.lo, i2.lo)
    if b1.condition.intersects(b2.condition):
        hi = min(1.0, i1.hi + i2.hi)
    else:
        hi = max(i1.hi, i2.hi)
    if b1.is_padding:
        effect = b2.effect
    elif b2.is_padding:
        effect = b1.effect
    else:
        effect = b1.effect.union(b2.effect)
    return ActionBranch(cond, ProbInterval(lo, hi), effect)


def _intra(a: Action, groups: Sequence[Sequence[int]], name: str | None = None):
    n = len(a.branches)
    used: set[int] = set()
    for g in groups:
        if len(g) < 2:
            raise CmaError("an intra-abstraction group needs at least two branches")
        for i in g:
            if not 0 <= i < n:
                raise CmaError(f"branch index {i} out of range for {a.name!r}")
            if i in used:
                raise CmaError(f"branch {i} appears in more than one group")
            used.add(i)
    first = {min(g): tuple(g) for g in groups}
    branches, mapping = [], []
    for i in range(n):
        if i in first:
            g = first[i]
            merged = a.branches[g[0]]
            for j in g[1:]:
                merged = _merge_pair(merged, a.branches[j])
            branches.append(merged)
            mapping.append(g)
        elif i not in used:
            branches.append(a.branches[i])
            mapping.append((i,))
    out = Action(name or f"intra({a.name})", ABSTRACT, tuple(branches), derived=True)
    return out, tuple(mapping)


def intra_abstract(a: Action, group: Sequence[int], name: str | None = None) -> Action:
    """Bundle the branches listed in ``group`` into one abstract branch.

    The merged condition is the union of the members'; the effect is the
    pointwise union. The interval hull is used when the conditions are
    disjoint (only one member can fire at any state); when they overlap the
    upper end becomes the capped sum of upper ends. Larger groups fold
    pairwise left to right. Other branches are kept as they are.
    """
    return _intra(a, [group], name)[0]


def _inter(a1: Action, a2: Action, pairing: Sequence[int] | None = None,
           name: str | None = None):
    if a1.space != a2.space:
        raise SpaceMismatchError("cannot inter-abstract actions over different spaces")
    size = max(len(a1.branches), len(a2.branches))
    if pairing is None:
        pairing = list(range(size))
    if sorted(pairing) != list(range(size)):
        raise CmaError(f"pairing {list(pairing)} is not a bijection on {size} branches")
    branches, mapping = [], []
    for k in range(size):
        j = pairing[k]
        left = a1.branches[k] if k < len(a1.branches) else None
        right = a2.branches[j] if j < len(a2.branches) else None
        if left is None or right is None:
            real = left or right
            iv = real.interval
            br = ActionBranch(real.condition, ProbInterval(0.0, iv.hi), real.effect)
        else:
            cond = left.condition | right.condition
            lo = min(left.interval.lo, right.interval.lo)
            if left.condition != right.condition:
                # on states only one member covers, the other member routes nothing here
                lo = 0.0
            hi = max(left.interval.hi, right.interval.hi)
            br = ActionBranch(cond, ProbInterval(lo, hi), left.effect.union(right.effect))
        branches.append(br)
        mapping.append((k if left is not None else None, j if right is not None else None))
    out = Action(name or f"inter({a1.name},{a2.name})", ABSTRACT, tuple(branches),
                 derived=True)
    return out, tuple(mapping)


def inter_abstract(a1: Action, a2: Action, pairing: Sequence[int] | None = None,
                   name: str | None = None) -> Action:
    """Abstract two alternative actions branch by branch.

    The shorter action is padded with empty-condition, zero-interval
    branches. ``pairing[k]`` names the branch of ``a2`` paired with branch
    ``k`` of ``a1`` (index order by default). Each pair yields the union of
    conditions and effects and the interval hull; the lower end drops to 0
    when the paired conditions differ.
    """
    return _inter(a1, a2, pairing, name)[0]


def _seq(a1: Action, a2: Action, name: str | None = None):
    if a1.space != a2.space:
        raise SpaceMismatchError("cannot sequence actions over different spaces")
    space = a1.space
    branches, mapping = [], []
    for i, b1 in enumerate(a1.branches):
        if b1.is_padding:
            continue
        images = b1.effect.images
        for j, b2 in enumerate(a2.branches):
            if b2.is_padding:
                continue
            c2 = b2.condition.bits
            regress = 0
            clean = True
            for b in b1.condition:
                img = images[b]
                if img & c2:
                    regress |= 1 << b
                    clean &= img & ~c2 == 0
            if not regress:
                continue
            cond = StateSet(space, regress)
            lo = b1.interval.lo * b2.interval.lo if clean else 0.0
            hi = b1.interval.hi * b2.interval.hi
            branches.append(ActionBranch(cond, ProbInterval.clipped(lo, hi),
                                         b1.effect.then(b2.effect)))
            mapping.append((i, j))
    if not branches:
        raise CmaError(f"sequencing {a1.name!r} and {a2.name!r} leaves no branch")
    out = Action(name or f"seq({a1.name},{a2.name})", ABSTRACT, tuple(branches),
                 derived=True)
    return out, tuple(mapping)


def seq_abstract(a1: Action, a2: Action, name: str | None = None) -> Action:
    """Collapse ``a1`` followed by ``a2`` into one abstract action.

    Every branch pair gives a branch whose condition is the part of a1's
    condition from which a1's effect can reach a2's condition; pairs with
    an empty condition are dropped. The effect is the composition and the
    interval multiplies endpoints. The lower product is only kept when
    a1's effect lands entirely inside a2's condition from every state of
    the new condition; otherwise the lower end is 0.
    """
    return _seq(a1, a2, name)[0]


# -- hierarchies --------------------------------------------------------------

LEAF, INTER, SEQ, INTRA = "concrete", "inter", "sequential", "intra"


@dataclass(frozen=True)
class HNode:
    name: str
    kind: str
    children: tuple[str, ...] = ()
    action: Action | None = None
    merges: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(self, "merges", tuple(tuple(g) for g in self.merges))
        if self.kind == LEAF:
            if self.action is None or not self.action.is_concrete:
                raise CmaError(f"hierarchy leaf {self.name!r} needs a concrete action")
        elif self.kind in (INTER, SEQ):
            if len(self.children) < 2:
                raise CmaError(f"{self.kind} node {self.name!r} needs at least two children")
        elif self.kind == INTRA:
            if len(self.children) != 1 or not self.merges:
                raise CmaError(f"intra node {self.name!r} needs one child and merge groups")
        else:
            raise CmaError(f"unknown hierarchy node kind {self.kind!r}")


@dataclass(frozen=True)
class Derivation:
    """One way a hierarchy node expands to concrete actions.

    ``parts`` holds the child derivations used: the chosen child for an
    inter node (with ``choice`` its position), every child for a
    sequential node, the only child for an intra node.
    """

    node: str
    parts: tuple["Derivation", ...] = ()
    choice: int = -1

    def concrete_names(self) -> tuple[str, ...]:
        if not self.parts:
            return (self.node,)
        return tuple(itertools.chain.from_iterable(p.concrete_names() for p in self.parts))


@dataclass
class Hierarchy:
    """Tree of abstraction relationships over concrete actions.

    Derived actions are computed on first use and cached, together with the
    branch maps the oracle needs.
    """

    nodes: dict[str, HNode]
    _derived: dict[str, tuple[Action, tuple]] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, nodes: Sequence[HNode]) -> "Hierarchy":
        table: dict[str, HNode] = {}
        for n in nodes:
            if n.name in table:
                raise CmaError(f"duplicate hierarchy node {n.name!r}")
            table[n.name] = n
        h = cls(table)
        for n in nodes:
            for c in n.children:
                if c not in table:
                    raise CmaError(f"node {n.name!r} refers to unknown child {c!r}")
        h._check_acyclic()
        return h

    def _check_acyclic(self) -> None:
        state: dict[str, int] = {}

        def visit(name: str) -> None:
            if state.get(name) == 1:
                raise CmaError(f"cycle in hierarchy through {name!r}")
            if state.get(name) == 2:
                return
            state[name] = 1
            for c in self.nodes[name].children:
                visit(c)
            state[name] = 2

        for name in self.nodes:
            visit(name)

    @property
    def roots(self) -> list[str]:
        children = {c for n in self.nodes.values() for c in n.children}
        return [name for name in self.nodes if name not in children]

    def node(self, name: str) -> HNode:
        try:
            return self.nodes[name]
        except KeyError:
            raise CmaError(f"unknown hierarchy node {name!r}") from None

    def _derive(self, name: str) -> tuple[Action, tuple]:
        if name in self._derived:
            return self._derived[name]
        node = self.node(name)
        if node.kind == LEAF:
            result = (node.action, ())
        elif node.kind == INTRA:
            child, _ = self._derive(node.children[0])
            action, mapping = _intra(child, node.merges, name)
            result = (action, mapping)
        elif node.kind == INTER:
            acc, _ = self._derive(node.children[0])
            maps = tuple((k,) for k in range(len(acc.branches)))
            for pos, cname in enumerate(node.children[1:], start=1):
                child, _ = self._derive(cname)
                acc, pair_map = _inter(acc, child, name=name)
                maps = tuple(
                    (maps[l] if l is not None else (None,) * pos) + (r,)
                    for l, r in pair_map)
            result = (acc, maps)
        else:
            acc, _ = self._derive(node.children[0])
            maps = tuple((k,) for k in range(len(acc.branches)))
            for cname in node.children[1:]:
                child, _ = self._derive(cname)
                acc, pair_map = _seq(acc, child, name=name)
                maps = tuple(maps[l] + (r,) for l, r in pair_map)
            result = (acc, maps)
        self._derived[name] = result
        return result

    def action(self, name: str) -> Action:
        return self._derive(name)[0]

    def branch_map(self, name: str) -> tuple:
        """Member-branch provenance of every branch of the node's action.

        intra: tuple of merged child branch indices; inter: per child the
        paired branch index or None; sequential: per child the branch
        index along the chain.
        """
        return self._derive(name)[1]

    def derivations(self, name: str) -> list[Derivation]:
        node = self.node(name)
        if node.kind == LEAF:
            return [Derivation(name)]
        if node.kind == INTRA:
            return [Derivation(name, (d,)) for d in self.derivations(node.children[0])]
        if node.kind == INTER:
            return [Derivation(name, (d,), pos)
                    for pos, c in enumerate(node.children) for d in self.derivations(c)]
        return [Derivation(name, tuple(combo)) for combo in
                itertools.product(*(self.derivations(c) for c in node.children))]

    def instantiations(self, name: str) -> list[Plan]:
        """Distinct concrete plans the node stands for, in derivation order."""
        seen: dict[tuple[str, ...], Plan] = {}
        for d in self.derivations(name):
            names = d.concrete_names()
            if names not in seen:
                seen[names] = Plan(tuple(self.node(n).action for n in names))
        return list(seen.values())

    def validate(self) -> Report:
        report = Report()
        for name in self.nodes:
            try:
                action = self.action(name)
            except CmaError as exc:
                report.error(f"hierarchy node {name}", str(exc))
                continue
            report.extend(validate_action(action))
        return report


def plan_instantiations(h: Hierarchy, names: Sequence[str]) -> list[tuple[tuple[Derivation, ...], Plan]]:
    """Concrete instantiations of an abstract plan given as node names.

    Returns (derivations, concrete plan) pairs, one per distinct plan.
    """
    seen: dict[tuple[str, ...], tuple[tuple[Derivation, ...], Plan]] = {}
    for combo in itertools.product(*(h.derivations(n) for n in names)):
        flat = tuple(itertools.chain.from_iterable(d.concrete_names() for d in combo))
        if flat not in seen:
            seen[flat] = (combo, Plan(tuple(h.node(n).action for n in flat)))
    return list(seen.values())


__all__ = [
    "CONCRETE", "Derivation", "HNode", "Hierarchy", "INTER", "INTRA", "LEAF", "SEQ",
    "inter_abstract", "intra_abstract", "plan_instantiations", "seq_abstract",
]
