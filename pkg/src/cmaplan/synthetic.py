"""Generators for test and benchmark fixtures.

All generators are pure functions of their seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .abstraction import INTER, INTRA, LEAF, SEQ, HNode, Hierarchy
from .actions import CONCRETE, Action, make_action
from .cma import Branch, Cma, Node, UtilityFn, leaf
from .intervals import ProbInterval
from .mass import as_rng
from .state_model import Effect, EffectRule, StateSet, StateSpace, compile_condition, \
    compile_effect


@dataclass
class Fixture:
    space: StateSpace
    actions: list[Action]
    world: Cma


def node_count_fixture(t: int, k: int) -> Fixture:
    """One attribute with t values and one condition per value; every
    branch resets the attribute to its full range, so every leaf stays the
    whole space and meets all t conditions after each step."""
    space = StateSpace.build({"x": range(t)})
    reset = compile_effect([EffectRule("x", "set", 0, t - 1)], space)
    branches = []
    for v in range(t):
        cond = compile_condition(f"x == {v}", space)
        branches += [(cond, (1.0 / k, 1.0 / k), reset)] * k
    action = make_action(f"step_t{t}_k{k}", CONCRETE, branches)
    return Fixture(space, [action], Cma.singleton(space.full))


def _random_subset(rng: np.random.Generator, space: StateSpace, max_size: int | None = None) -> StateSet:
    n = space.size
    size = int(rng.integers(1, (max_size or n) + 1))
    return space.states(rng.choice(n, size=size, replace=False).tolist())


def random_intervals(rng: np.random.Generator, k: int, point: bool = False) -> list[ProbInterval]:
    """k intervals around a random point of the simplex, so the group is
    always feasible."""
    p = rng.dirichlet(np.ones(k))
    if point:
        return [ProbInterval(float(x), float(x)) for x in p]
    out = []
    for x in p:
        lo = x * (1 - rng.uniform(0, 0.6))
        hi = x + (1 - x) * rng.uniform(0, 0.4)
        out.append(ProbInterval(float(max(lo, 0.0)), float(min(hi, 1.0))))
    return out


def _random_partition(rng: np.random.Generator, space: StateSpace, blocks: int) -> list[StateSet]:
    blocks = min(blocks, space.size)
    labels = np.concatenate([np.arange(blocks), rng.integers(0, blocks, space.size - blocks)])
    rng.shuffle(labels)
    return [StateSet.from_mask(space, labels == j) for j in range(blocks)]


def _random_effect(rng: np.random.Generator, space: StateSpace, max_image: int,
                   deterministic: bool = False) -> Effect:
    if not deterministic and rng.random() < 0.3:
        name = space.names[int(rng.integers(len(space.names)))]
        lo = int(rng.integers(-1, 2))
        rule = EffectRule(name, "add", lo, lo + int(rng.integers(0, 2)))
        return compile_effect([rule], space)
    table = {}
    for b in range(space.size):
        size = 1 if deterministic else int(rng.integers(1, min(max_image, space.size) + 1))
        table[b] = rng.choice(space.size, size=size, replace=False).tolist()
    return Effect.from_table(space, table)


def random_action(rng: np.random.Generator, space: StateSpace, name: str, *,
                  max_conditions: int = 3, max_branches: int = 3, max_image: int = 3,
                  spd: bool = False) -> Action:
    blocks = int(rng.integers(1, max_conditions + 1))
    branches = []
    for cond in _random_partition(rng, space, blocks):
        k = int(rng.integers(1, max_branches + 1))
        for iv in random_intervals(rng, k, point=spd):
            branches.append((cond, iv, _random_effect(rng, space, max_image, deterministic=spd)))
    return make_action(name, CONCRETE, branches)


def random_cma(rng: np.random.Generator, space: StateSpace, *, max_depth: int = 3,
               max_children: int = 3, max_leaves: int = 8, max_leaf_size: int | None = None,
               point: bool = False, singleton_leaves: bool = False) -> Cma:
    """A random valid CMA whose sibling intervals always admit a number
    assignment."""
    budget = [max_leaves]

    def make_leaf() -> Node:
        if singleton_leaves:
            return leaf(space.singleton(int(rng.integers(space.size))))
        return leaf(_random_subset(rng, space, max_leaf_size))

    def build(level: int) -> Node:
        if level >= max_depth or budget[0] <= 1 or (level > 0 and rng.random() < 0.4):
            return make_leaf()
        k = int(rng.integers(2, max_children + 1))
        k = min(k, budget[0])
        budget[0] -= k - 1
        ivs = random_intervals(rng, k, point=point)
        return Node(None, tuple(Branch(iv, build(level + 1)) for iv in ivs))

    return Cma(space, build(0))


def random_space(rng: np.random.Generator, max_states: int) -> StateSpace:
    """One or two attributes, at most ``max_states`` states in total."""
    if max_states >= 4 and rng.random() < 0.6:
        nx = int(rng.integers(2, max(3, int(np.sqrt(max_states))) + 1))
        ny = int(rng.integers(2, max(2, max_states // nx) + 1))
        return StateSpace.build({"x": range(nx), "y": range(ny)})
    return StateSpace.build({"x": range(int(rng.integers(2, max_states + 1)))})


def random_domain(seed, *, max_states: int = 16, plan_length: int = 3,
                  max_branches: int = 3, exact_length: bool = False) -> Fixture:
    """Random concrete plan and world for the soundness suites."""
    rng = as_rng(seed)
    space = random_space(rng, max_states)
    length = plan_length if exact_length else int(rng.integers(1, plan_length + 1))
    actions = [random_action(rng, space, f"a{i}", max_branches=max_branches)
               for i in range(length)]
    world = random_cma(rng, space, max_leaves=6)
    return Fixture(space, actions, world)


def random_spd_fixture(seed, *, max_states: int = 64, plan_length: int = 4) -> Fixture:
    """Point intervals, partitioning conditions, deterministic effects and a
    world with singleton leaves."""
    rng = as_rng(seed)
    space = random_space(rng, max_states)
    length = int(rng.integers(1, plan_length + 1))
    actions = [random_action(rng, space, f"s{i}", spd=True) for i in range(length)]
    world = random_cma(rng, space, max_depth=2, max_children=4, max_leaves=10,
                       point=True, singleton_leaves=True)
    return Fixture(space, actions, world)


def small_eu_fixture(seed, *, max_states: int = 6, max_nodes: int = 7) -> tuple[Cma, UtilityFn]:
    """World tree with at most ``max_nodes`` nodes and a random utility."""
    rng = as_rng(seed)
    space = StateSpace.build({"x": range(int(rng.integers(2, max_states + 1)))})
    while True:
        M = random_cma(rng, space, max_depth=2, max_children=3, max_leaves=4)
        if sum(1 for _ in M.walk()) <= max_nodes:
            break
    u = UtilityFn(space, tuple(float(v) for v in rng.uniform(-1, 1, space.size)))
    return M, u


# -- abstraction hierarchy with the shape of the eighteen-plan example -----------

TOUR_LEAVES = "ABCDEFGH"


def tour_actions(seed=0, space: StateSpace | None = None) -> dict[str, Action]:
    """Eight concrete move actions over a small one-attribute space."""
    rng = as_rng(seed)
    space = space or StateSpace.build({"x": range(6)})
    top = space.attributes[0][1][-1]
    out = {}
    for name in TOUR_LEAVES:
        cut = int(rng.integers(1, top + 1))
        branches = []
        for expr in (f"x < {cut}", f"x >= {cut}"):
            cond = compile_condition(expr, space)
            k = int(rng.integers(1, 3))
            for iv in random_intervals(rng, k):
                lo = int(rng.integers(-1, 2))
                rule = EffectRule("x", "add", lo, lo + int(rng.integers(0, 2)))
                branches.append((cond, iv, compile_effect([rule], space)))
        out[name] = make_action(name, CONCRETE, branches)
    return out


def tour_hierarchy(seed=0, *, with_intra: bool = False, space: StateSpace | None = None) -> Hierarchy:
    """P = seq(N, L, K); N = inter(A, M); M = inter(B, C); L = inter(D, E);
    K = inter(F, G, H).

    ``with_intra`` slots intra nodes in: A becomes an intra node over the
    concrete action A0, and L is read through an intra node L0 that merges
    its first two branches. The concrete instantiations do not change.
    """
    acts = tour_actions(seed, space)
    nodes = [HNode(n, LEAF, action=a) for n, a in acts.items() if not (with_intra and n == "A")]
    if with_intra:
        a = acts["A"]
        renamed = Action("A0", a.kind, a.branches)
        nodes.append(HNode("A0", LEAF, action=renamed))
        nodes.append(HNode("A", INTRA, ("A0",), merges=((0, 1),)))
    nodes += [
        HNode("M", INTER, ("B", "C")),
        HNode("N", INTER, ("A", "M")),
        HNode("L", INTER, ("D", "E")),
        HNode("K", INTER, ("F", "G", "H")),
    ]
    if with_intra:
        nodes.append(HNode("L0", INTRA, ("L",), merges=((0, 1),)))
        nodes.append(HNode("P", SEQ, ("N", "L0", "K")))
    else:
        nodes.append(HNode("P", SEQ, ("N", "L", "K")))
    return Hierarchy.build(nodes)


def tour_world(space: StateSpace | None = None) -> Cma:
    space = space or StateSpace.build({"x": range(6)})
    low = compile_condition("x <= 2", space)
    high = compile_condition("x >= 2", space)
    return Cma(space, Node(None, (
        Branch(ProbInterval(0.3, 0.6), leaf(low)),
        Branch(ProbInterval(0.4, 0.7), Node(None, (
            Branch(ProbInterval(0.5, 1.0), leaf(high)),
            Branch(ProbInterval(0.0, 0.5), leaf(space.singleton(5))),
        ))),
    )))
