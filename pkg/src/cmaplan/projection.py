"""CMA-project: sound projection of actions and plans on CMA worlds.

Every leaf ``B`` of the world tree grows one child per condition class that
``B`` intersects, labelled with the loose conditional probability, and
under it one grandchild per applicable branch holding ``E(B ∩ c)``.
Classes that ``B`` misses are pruned. The input tree stays intact above
the new growth.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .actions import Action, Plan, validate_action
from .cma import CONDITION, Branch, Cma, Node, require_valid
from .errors import CmaError, InvalidModelError, SpaceMismatchError
from .intervals import ONE, UNIT, ProbInterval
from .state_model import StateSet


class LooseProb(enum.Enum):
    ZERO = "0"
    ONE = "1"
    UNIT = "[0,1]"

    @property
    def interval(self) -> ProbInterval:
        return {LooseProb.ZERO: ProbInterval(0.0, 0.0), LooseProb.ONE: ONE,
                LooseProb.UNIT: UNIT}[self]


def _loose(classes: Sequence[StateSet], c: StateSet, B: StateSet) -> LooseProb:
    if not B.intersects(c):
        return LooseProb.ZERO
    others = sum(1 for d in classes if d.bits != c.bits and B.intersects(d))
    return LooseProb.ONE if others == 0 else LooseProb.UNIT


def loose_cond_prob(a: Action, c: StateSet, B: StateSet) -> LooseProb:
    """Three-valued bound on the share of B's mass that falls under ``c``.

    ``c`` must be one of ``a.conditions`` (for a concrete action these are
    its partition blocks). Zero if B misses c, one if c is the only
    condition B meets, and the unit interval otherwise.
    """
    if all(c.bits != d.bits for d in a.conditions):
        raise CmaError(f"set is not a condition of action {a.name!r}")
    return _loose(a.conditions, c, B)


@dataclass
class StepStats:
    action: str
    node_count: int
    outcome_count: int
    pruned: int
    consistent_conditions: list[int] = field(default_factory=list)
    duplicate_leaves: int = 0

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "nodeCount": self.outcome_count,
            "totalNodeCount": self.node_count,
            "pruned": self.pruned,
            "consistentConditions": list(self.consistent_conditions),
            "duplicateLeaves": self.duplicate_leaves,
        }


@dataclass
class ProjectionStats:
    """Per-step growth statistics.

    ``outcome_count`` counts the root and every outcome node, leaving out
    the intermediate condition nodes. That is the granularity at which a
    step adds ``t*k`` children per leaf, so it is the count compared with
    :func:`predicted_node_count`. ``node_count`` counts every node.
    """

    initial_nodes: int
    initial_outcomes: int
    steps: list[StepStats] = field(default_factory=list)

    @property
    def node_count(self) -> int:
        return self.steps[-1].node_count if self.steps else self.initial_nodes

    @property
    def outcome_count(self) -> int:
        return self.steps[-1].outcome_count if self.steps else self.initial_outcomes

    def to_dict(self) -> dict:
        return {
            "nodeCount": self.outcome_count,
            "totalNodeCount": self.node_count,
            "initialNodeCount": self.initial_outcomes,
            "steps": [s.to_dict() for s in self.steps],
        }


def _effect_interval(a: Action, i: int) -> ProbInterval:
    return a.branches[i].interval


def _count(M: Cma) -> tuple[int, int]:
    total = cond = 0
    for _, node in M.walk():
        total += 1
        cond += node.role == CONDITION
    return total, total - cond


def project_action(a: Action, M: Cma, *, check: bool = True) -> tuple[Cma, StepStats]:
    if a.space != M.space:
        raise SpaceMismatchError("action and world over different spaces")
    if check:
        report = validate_action(a)
        if not report.ok:
            raise InvalidModelError(f"cannot project invalid action:\n{report}", report)
        require_valid(M)
    atoms = a.atoms
    classes = [atom.states for atom in atoms]
    stats = StepStats(a.name, 0, 0, 0)
    added = [0, 0]  # condition nodes, outcome nodes

    def grow_leaf(node: Node) -> Node:
        B = node.states
        hit = [k for k, s in enumerate(classes) if B.intersects(s)]
        stats.pruned += len(classes) - len(hit)
        stats.consistent_conditions.append(len(hit))
        if not hit:
            raise CmaError(f"leaf {sorted(B)} meets no condition of {a.name!r}")
        cond_branches = []
        for k in hit:
            part = B & classes[k]
            pl = _loose(classes, classes[k], B)
            kids = []
            seen = set()
            for i in atoms[k].branches:
                out = a.branches[i].effect.apply(part)
                if out.bits in seen:
                    stats.duplicate_leaves += 1
                seen.add(out.bits)
                kids.append(Branch(_effect_interval(a, i), Node(out), i))
            added[1] += len(kids)
            cond_branches.append(Branch(pl.interval, Node(part, tuple(kids), CONDITION), k))
        added[0] += len(hit)
        return Node(B, tuple(cond_branches), node.role)

    def grow(node: Node) -> Node:
        if node.is_leaf:
            return grow_leaf(node)
        return Node(node.states,
                    tuple(Branch(b.interval, grow(b.node), b.tag) for b in node.children),
                    node.role)

    total, outcomes = _count(M)
    out = Cma(M.space, grow(M.root))
    stats.node_count = total + added[0] + added[1]
    stats.outcome_count = outcomes + added[1]
    return out, stats


def project_plan(p: Plan | Sequence[Action], M: Cma, *,
                 check: bool = True) -> tuple[Cma, ProjectionStats]:
    actions = p.actions if isinstance(p, Plan) else tuple(p)
    if not actions:
        raise CmaError("cannot project an empty plan")
    total, outcomes = _count(M)
    stats = ProjectionStats(total, outcomes)
    for a in actions:
        M, step = project_action(a, M, check=check)
        stats.steps.append(step)
    return M, stats


def predicted_node_count(t: int, k: int, n: int) -> int:
    """Nodes after projecting n actions with t consistent conditions of k
    branches each on a single-node world: the geometric sum of (tk)^i."""
    if t < 1 or k < 1 or n < 0:
        raise ValueError("need t >= 1, k >= 1, n >= 0")
    r = t * k
    if r == 1:
        return n + 1
    return (r ** (n + 1) - 1) // (r - 1)
