"""Reference execution semantics and empirical soundness checks.

Executions are sampled: draw a member MA of the initial world, a
distribution consistent with it, then for every action and every state a
probability vector over the applicable branches (inside their intervals)
and a distribution over each branch's image. The sampled flows are then
folded onto the projected tree of the plan to build an explicit number
assignment (the witness). A sample passes when the witness is valid for
the projected tree and the executed distribution is consistent with the
MA the witness generates.

For abstract plans the concrete flows are routed through the abstract
branches using the hierarchy's branch maps: merged branches add their
members' flows, inter-abstracted branches take the chosen member's flow,
and sequential branches chain their members' flows.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .abstraction import INTER, INTRA, LEAF, Derivation, Hierarchy, plan_instantiations
from .actions import Action, Plan
from .cma import Cma, NumberAssignment, check_witness, contains_ma, path_products, \
    require_valid, sample_numbers
from .errors import CmaError, MappingError
from .intervals import TOL, feasible_point, sample_box_simplex
from .mass import MassAssignment, Pd, as_rng, is_consistent, sample_consistent_pd
from .projection import project_plan
from .cma import ma_from_products


@dataclass
class StepRecord:
    """One executed concrete action.

    ``probs[b, i]`` is the sampled probability of branch i at state b (zero
    for branches not applicable at b); ``transfer[i, b, b']`` is the share
    of a unit of mass at b that leaves through branch i and lands on b'.
    """

    action: str
    atom_of_state: np.ndarray
    probs: np.ndarray
    transfer: np.ndarray

    def to_dict(self) -> dict:
        return {"action": self.action,
                "condition": self.atom_of_state.tolist(),
                "probs": self.probs.tolist(),
                "transfer": self.transfer.tolist()}


@dataclass
class ExecTrace:
    m_pre: MassAssignment
    numbers_pre: NumberAssignment
    splits_pre: tuple[np.ndarray, ...]
    p_pre: np.ndarray
    steps: list[StepRecord] = field(default_factory=list)
    dists: list[np.ndarray] = field(default_factory=list)

    @property
    def p_post(self) -> np.ndarray:
        return self.dists[-1] if self.dists else self.p_pre

    def conserves_mass(self, tol: float = 1e-9) -> bool:
        if abs(self.p_pre.sum() - 1.0) > tol:
            return False
        prev = self.p_pre
        for step, dist in zip(self.steps, self.dists):
            out_per_state = step.transfer.sum(axis=(0, 2))
            if np.any(np.abs(out_per_state - 1.0) > tol):
                return False
            if abs(dist.sum() - prev.sum()) > tol or abs(dist.sum() - 1.0) > tol:
                return False
            prev = dist
        return True

    def to_dict(self) -> dict:
        return {
            "mPre": [{"states": sorted(s), "mass": m} for s, m in self.m_pre.branches],
            "numbersPre": [{"path": list(p), "number": x}
                           for p, x in sorted(self.numbers_pre.items())],
            "pPre": self.p_pre.tolist(),
            "steps": [s.to_dict() for s in self.steps],
            "pPost": self.p_post.tolist(),
        }


def _execute(a: Action, rng: np.random.Generator) -> StepRecord:
    if not a.is_concrete:
        raise CmaError(f"cannot execute abstract action {a.name!r}")
    n = a.space.size
    k = len(a.branches)
    atoms = a.atoms
    atom_of = np.full(n, -1, dtype=np.int64)
    for idx, atom in enumerate(atoms):
        atom_of[atom.states.to_mask()] = idx
    if np.any(atom_of < 0):
        raise CmaError(f"action {a.name!r} is not exhaustive")
    images = [[list(br.effect.image(b)) for b in range(n)] for br in a.branches]
    probs = np.zeros((n, k))
    transfer = np.zeros((k, n, n))
    for b in range(n):
        sig = atoms[atom_of[b]].branches
        ps = sample_box_simplex([a.branches[i].interval for i in sig], rng)
        for i, p in zip(sig, ps):
            probs[b, i] = p
            members = images[i][b]
            transfer[i, b, members] = p * rng.dirichlet(np.ones(len(members)))
    return StepRecord(a.name, atom_of, probs, transfer)


def sample_exec_plan(p: Plan | Sequence[Action], M_pre: Cma, seed) -> ExecTrace:
    """Sample one execution of a concrete plan from a world."""
    actions = p.actions if isinstance(p, Plan) else tuple(p)
    rng = as_rng(seed)
    require_valid(M_pre)
    numbers = sample_numbers(M_pre, rng)
    m_pre = ma_from_products(M_pre.space, path_products(M_pre, numbers))
    pd, alloc = sample_consistent_pd(m_pre, rng)
    trace = ExecTrace(m_pre, numbers, alloc.splits, pd.array)
    dist = pd.array
    for a in actions:
        step = _execute(a, rng)
        dist = dist @ step.transfer.sum(axis=0)
        trace.steps.append(step)
        trace.dists.append(dist)
    return trace


# -- folding executions onto projected trees ----------------------------------

def _route(h: Hierarchy | None, d: Derivation | None, action: Action,
           steps: Iterator[StepRecord]) -> list[np.ndarray]:
    """Per abstract branch, the matrix of unit-mass flows start -> end."""
    if h is None or d is None:
        step = next(steps)
        if step.action != action.name:
            raise MappingError(f"trace step {step.action!r} does not match {action.name!r}")
        return list(step.transfer)
    node = h.node(d.node)
    if node.kind == LEAF:
        return _route(None, None, node.action, steps)
    maps = h.branch_map(d.node)
    if node.kind == INTRA:
        child = h.action(node.children[0])
        inner = _route(h, d.parts[0], child, steps)
        return [sum(inner[i] for i in group) for group in maps]
    if node.kind == INTER:
        child = h.action(node.children[d.choice])
        inner = _route(h, d.parts[0], child, steps)
        zero = np.zeros_like(inner[0])
        return [inner[m[d.choice]] if m[d.choice] is not None else zero for m in maps]
    parts = [_route(h, part, h.action(c), steps) for part, c in zip(d.parts, node.children)]
    return [reduce(np.matmul, (parts[c][m[c]] for c in range(len(parts)))) for m in maps]


def _initial_flows(M_pre: Cma, trace: ExecTrace) -> list[tuple[tuple, object, np.ndarray]]:
    split_of = {s.bits: (vec, mass) for (s, mass), vec in
                zip(trace.m_pre.branches, trace.splits_pre)}
    out = []
    n = M_pre.space.size
    for path, states, w in path_products(M_pre, trace.numbers_pre):
        if w > 0:
            vec, mass = split_of[states.bits]
            flow = vec * (w / mass)
        else:
            flow = np.zeros(n)
        out.append((path, M_pre.node_at(path), flow))
    return out


def fold_trace(trace: ExecTrace, actions: Sequence[Action], projected: Cma,
               routes: Sequence[list[np.ndarray]], M_pre: Cma,
               tol: float = TOL) -> tuple[NumberAssignment, MassAssignment, np.ndarray]:
    """Build the witness numbers, the induced MA and the folded final
    distribution for one trace on the projected tree of ``actions``."""
    numbers: NumberAssignment = dict(trace.numbers_pre)
    frontier = []
    for path, _, flow in _initial_flows(M_pre, trace):
        frontier.append((path, projected.node_at(path), flow))
    for a, R in zip(actions, routes):
        atoms = a.atoms
        masks = [atom.states.to_mask() for atom in atoms]
        nxt = []
        for path, node, f in frontier:
            w = f.sum()
            if node.is_leaf:
                raise MappingError(f"projected tree ends early at {path}")
            cond_ivs = [br.interval for br in node.children]
            default = feasible_point(cond_ivs)
            routed = 0.0
            for ci, cbr in enumerate(node.children):
                k = cbr.tag
                if k is None or not 0 <= k < len(atoms):
                    raise MappingError(f"condition branch {path + (ci,)} has no class tag")
                f_s = f * masks[k]
                w_s = f_s.sum()
                routed += w_s
                cpath = path + (ci,)
                numbers[cpath] = float(w_s / w) if w > 0 else default[ci]
                cnode = cbr.node
                eff_default = feasible_point([br.interval for br in cnode.children])
                out_total = 0.0
                for ei, ebr in enumerate(cnode.children):
                    i = ebr.tag
                    flow = f_s @ R[i]
                    mass = flow.sum()
                    out_total += mass
                    if np.any(flow[~ebr.node.states.to_mask()] > tol):
                        raise MappingError(f"flow outside leaf set at {cpath + (ei,)}")
                    numbers[cpath + (ei,)] = float(mass / w_s) if w_s > 0 else eff_default[ei]
                    nxt.append((cpath + (ei,), ebr.node, flow))
                if abs(out_total - w_s) > tol:
                    raise MappingError(f"flow under {cpath} routed to inapplicable branches")
            if abs(routed - w) > tol:
                raise MappingError(f"flow at {path} falls under a pruned condition")
        frontier = nxt
    leaf_paths = {p for p, _ in projected.leaves}
    if {p for p, _, _ in frontier} != leaf_paths:
        raise MappingError("folded frontier does not match the projected leaves")
    merged: dict[int, float] = {}
    sets = {}
    final = np.zeros(projected.space.size)
    for _, node, f in frontier:
        mass = float(f.sum())
        final += f
        if mass > 0:
            merged[node.states.bits] = merged.get(node.states.bits, 0.0) + mass
            sets[node.states.bits] = node.states
    m = MassAssignment(projected.space, tuple((sets[b], w) for b, w in merged.items()))
    return numbers, m, final


@dataclass
class SoundnessReport:
    samples: int = 0
    passes: int = 0
    instantiations: int = 0
    first_failure: dict | None = None
    leaf_occupancy: float = 0.0

    @property
    def ok(self) -> bool:
        return self.passes == self.samples

    def to_dict(self) -> dict:
        return {"samples": self.samples, "passes": self.passes,
                "instantiations": self.instantiations, "ok": self.ok,
                "leafOccupancy": self.leaf_occupancy,
                "firstFailure": self.first_failure}


def _one_sample(abstract: Sequence[Action], concrete: Plan, derivs, h, M_pre, projected,
                seed_seq, tol):
    trace = sample_exec_plan(concrete, M_pre, np.random.default_rng(seed_seq))
    if not trace.conserves_mass():
        return False, "mass not conserved", trace, 0.0
    steps = iter(trace.steps)
    routes = [_route(h, d, a, steps) for a, d in zip(abstract, derivs)]
    if next(steps, None) is not None:
        raise MappingError("derivation consumed fewer steps than the concrete plan has")
    numbers, m, final = fold_trace(trace, abstract, projected, routes, M_pre, tol)
    if not np.allclose(final, trace.p_post, atol=tol, rtol=0):
        raise MappingError("folded flows disagree with the executed distribution")
    occupancy = len([1 for _, _, w in path_products(projected, numbers) if w > 0]) \
        / len(projected.leaves)
    problem = check_witness(projected, numbers, tol)
    if problem is None and not contains_ma(projected, m, numbers, tol):
        problem = "path products do not reproduce the induced mass assignment"
    if problem is None and not is_consistent(Pd.from_array(projected.space, trace.p_post),
                                             m, tol):
        problem = "executed distribution is inconsistent with the induced MA"
    return problem is None, problem, trace, occupancy


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CMA_PLAN_THREADS", "1")))
    except ValueError:
        return 1


def check_soundness(p: Plan | Sequence[Action], M_pre: Cma, samples: int, seed: int, *,
                    hierarchy: Hierarchy | None = None,
                    instantiations: Sequence[tuple[tuple[Derivation, ...], Plan]] | None = None,
                    tol: float = TOL, workers: int | None = None) -> SoundnessReport:
    """Sample executions of every concrete instantiation of ``p`` and check
    each one lands inside the projection of ``p``.

    A concrete plan is its own only instantiation. For an abstract plan the
    instantiations come from ``hierarchy`` (every step must be one of its
    nodes, or a concrete action); ``samples`` traces are run per
    instantiation.
    """
    abstract = tuple(p.actions if isinstance(p, Plan) else p)
    projected, _ = project_plan(abstract, M_pre)
    if instantiations is None:
        if all(a.is_concrete for a in abstract):
            instantiations = [((None,) * len(abstract), Plan(abstract))]
        else:
            if hierarchy is None:
                raise CmaError("an abstract plan needs its hierarchy")
            names = []
            for a in abstract:
                if a.name not in hierarchy.nodes:
                    raise CmaError(f"action {a.name!r} is not a hierarchy node")
                names.append(a.name)
            instantiations = plan_instantiations(hierarchy, names)
    h = hierarchy
    report = SoundnessReport(instantiations=len(instantiations))
    root = np.random.SeedSequence(seed)
    per_inst = root.spawn(len(instantiations))
    workers = workers or _workers()
    occupancy = 0.0
    for idx, ((derivs, concrete), inst_seq) in enumerate(zip(instantiations, per_inst)):
        seqs = inst_seq.spawn(samples)

        def run(s, derivs=derivs, concrete=concrete):
            return _one_sample(abstract, concrete, derivs, h, M_pre, projected, s, tol)

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                results = list(pool.map(run, seqs))
        else:
            results = [run(s) for s in seqs]
        for j, (passed, problem, trace, occ) in enumerate(results):
            report.samples += 1
            occupancy += occ
            if passed:
                report.passes += 1
            elif report.first_failure is None:
                report.first_failure = {
                    "instantiation": list(concrete.names), "sample": j,
                    "seed": seed, "instantiationIndex": idx,
                    "violation": problem, "trace": trace.to_dict()}
    report.leaf_occupancy = occupancy / report.samples if report.samples else 0.0
    return report


# -- single-distribution reference projector ----------------------------------

def spd_project(p: Plan | Sequence[Action], P0: Pd) -> Pd:
    """Classical forward projection with a stochastic matrix per action.

    Only accepts actions with point intervals, partitioning conditions and
    deterministic (single-state) effects.
    """
    actions = p.actions if isinstance(p, Plan) else tuple(p)
    n = P0.space.size
    dist = np.asarray(P0.probs, dtype=float)
    for a in actions:
        T = np.zeros((n, n))
        covered = np.zeros(n, dtype=int)
        conds = {}
        for br in a.branches:
            if br.interval.lo != br.interval.hi:
                raise CmaError(f"action {a.name!r} has a non-point interval")
            conds[br.condition.bits] = br.condition
        for bits in conds:
            for b in range(n):
                if bits >> b & 1:
                    covered[b] += 1
        if np.any(covered != 1):
            raise CmaError(f"conditions of {a.name!r} do not partition the state space")
        for br in a.branches:
            for b in br.condition:
                succ = list(br.effect.image(b))
                if len(succ) != 1:
                    raise CmaError(f"action {a.name!r} has a nondeterministic effect")
                T[b, succ[0]] += br.interval.lo
        dist = dist @ T
    return Pd.from_array(P0.space, dist)


def point_marginal(M: Cma) -> np.ndarray:
    """State distribution of a world whose intervals are all points and
    whose leaves are singletons."""
    numbers = {}
    for g in M.groups:
        for path, iv in zip(g.paths, g.intervals):
            if not iv.is_point:
                raise CmaError(f"interval {iv} at {path} is not a point")
            numbers[path] = iv.lo
    out = np.zeros(M.space.size)
    for _, states, w in path_products(M, numbers):
        if len(states) != 1:
            raise CmaError("leaf is not a singleton")
        out[next(iter(states))] += w
    return out
