"""Mass assignments, their lower probabilities, and consistent distributions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import networkx as nx
import numpy as np

from .errors import SpaceMismatchError
from .intervals import TOL
from .state_model import StateSet, StateSpace, _iter_bits

# above this many states the exhaustive 2^|Ω| check is not attempted
EXHAUSTIVE_LIMIT = 18


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_space(a: StateSpace, b: StateSpace) -> None:
    if a is not b and a != b:
        raise SpaceMismatchError("objects belong to different state spaces")


@dataclass(frozen=True)
class MassAssignment:
    """Positive masses on nonempty focal sets, summing to one.

    Focal sets may overlap; the same set may appear more than once.
    """

    space: StateSpace
    branches: tuple[tuple[StateSet, float], ...]

    def __post_init__(self):
        branches = tuple((s, float(m)) for s, m in self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise ValueError("a mass assignment needs at least one focal element")
        for s, m in branches:
            _check_space(s.space, self.space)
            if not s:
                raise ValueError("empty focal element (m(∅) must be 0)")
            if not m > 0:
                raise ValueError(f"focal mass must be positive, got {m}")
        total = sum(m for _, m in branches)
        if abs(total - 1.0) > TOL:
            raise ValueError(f"masses sum to {total}, not 1")

    @classmethod
    def of(cls, space: StateSpace, pairs: Iterable[tuple[Iterable[int] | StateSet, float]]):
        """Convenience constructor taking state indices instead of sets."""
        out = []
        for s, m in pairs:
            if not isinstance(s, StateSet):
                s = space.states(s)
            out.append((s, m))
        return cls(space, tuple(out))

    def merged(self) -> dict[int, float]:
        """Focal bit vector -> total mass, duplicates summed."""
        out: dict[int, float] = {}
        for s, m in self.branches:
            out[s.bits] = out.get(s.bits, 0.0) + m
        return out

    def __len__(self) -> int:
        return len(self.branches)


@dataclass(frozen=True)
class Pd:
    space: StateSpace
    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) != self.space.size:
            raise ValueError("distribution length differs from the state space size")
        if min(probs) < -TOL:
            raise ValueError("negative probability")
        if abs(sum(probs) - 1.0) > TOL:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")

    @classmethod
    def from_array(cls, space: StateSpace, arr) -> "Pd":
        return cls(space, tuple(np.asarray(arr, dtype=float).tolist()))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.probs)

    def prob(self, states: StateSet) -> float:
        return float(sum(self.probs[b] for b in states))


@dataclass(frozen=True)
class AllocationRecord:
    """How each focal mass was split over the focal's states.

    ``splits[i]`` is a dense vector over the state space, supported on the
    i-th focal set and summing to its mass.
    """

    splits: tuple[np.ndarray, ...]


def lower_prob(m: MassAssignment, states: StateSet) -> float:
    """Sum of the masses of the focal sets contained in ``states``."""
    _check_space(m.space, states.space)
    outside = ~states.bits
    return float(sum(mass for s, mass in m.branches if s.bits & outside == 0))


def _zeta(values: np.ndarray, n: int) -> np.ndarray:
    """Subset-sum transform: out[B] = sum of values[C] for C ⊆ B."""
    out = values.copy()
    for i in range(n):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 1, :] += view[:, 0, :]
    return out


def is_consistent(P: Pd, m: MassAssignment, tol: float = TOL,
                  method: str = "auto") -> bool:
    """Whether ``P(B) >= sum_{C ⊆ B} m(C)`` holds for every ``B ⊆ Ω``.

    ``method="unions"`` only checks sets that are unions of focal elements,
    which suffices: for any B the focal sets inside B lie inside their union
    B' ⊆ B, so P(B) >= P(B') and the two lower probabilities agree.
    ``method="exhaustive"`` checks all of 2^Ω with two subset-sum
    transforms. ``method="flow"`` asks whether every focal mass can be
    shipped into its own states without any state b receiving more than
    P(b); by Hall's theorem for transport problems this is the same
    condition, and it stays polynomial when there are many focal sets.
    ``auto`` picks the exhaustive form on small spaces and flow otherwise.
    """
    _check_space(P.space, m.space)
    n = P.space.size
    if method == "auto":
        method = "exhaustive" if n <= EXHAUSTIVE_LIMIT else "flow"
    if method == "exhaustive":
        bel = np.zeros(1 << n)
        for s, mass in m.branches:
            bel[s.bits] += mass
        prob = np.zeros(1 << n)
        for b, p in enumerate(P.probs):
            prob[1 << b] = p
        return bool(np.all(_zeta(prob, n) >= _zeta(bel, n) - tol))
    if method == "flow":
        return _flow_consistent(P, m, tol)
    if method != "unions":
        raise ValueError(f"unknown consistency method {method!r}")
    focal = m.merged()
    unions = {0}
    for f in focal:
        unions |= {u | f for u in unions}
    probs = P.probs
    for u in unions:
        if not u:
            continue
        lower = sum(mass for f, mass in focal.items() if f & ~u == 0)
        if sum(probs[b] for b in _iter_bits(u)) < lower - tol:
            return False
    return True


def _flow_consistent(P: Pd, m: MassAssignment, tol: float) -> bool:
    focal = m.merged()
    g = nx.DiGraph()
    for f, mass in focal.items():
        g.add_edge("src", ("f", f), capacity=mass)
        for b in _iter_bits(f):
            g.add_edge(("f", f), ("s", b))  # no capacity attribute: unbounded
    for b, p in enumerate(P.probs):
        g.add_edge(("s", b), "sink", capacity=p)
    if not focal:
        return True
    shipped = nx.maximum_flow_value(g, "src", "sink")
    return shipped >= sum(focal.values()) - tol


def sample_consistent_pd(m: MassAssignment, seed) -> tuple[Pd, AllocationRecord]:
    """Split every focal mass over its states with Dirichlet(1) weights."""
    rng = as_rng(seed)
    n = m.space.size
    total = np.zeros(n)
    splits = []
    for s, mass in m.branches:
        members = list(s)
        vec = np.zeros(n)
        vec[members] = rng.dirichlet(np.ones(len(members))) * mass
        splits.append(vec)
        total += vec
    return Pd.from_array(m.space, total), AllocationRecord(tuple(splits))


def allocation_valid(m: MassAssignment, alloc: AllocationRecord, P: Pd,
                     tol: float = TOL) -> bool:
    """Check an allocation certificate: each split stays inside its focal
    set, carries the focal mass, and the splits add up to ``P``."""
    if len(alloc.splits) != len(m.branches):
        return False
    total = np.zeros(m.space.size)
    for (s, mass), vec in zip(m.branches, alloc.splits):
        outside = ~s.to_mask()
        if np.any(vec < -tol) or np.any(np.abs(vec[outside]) > tol):
            return False
        if abs(vec.sum() - mass) > tol:
            return False
        total += vec
    return bool(np.allclose(total, P.array, atol=tol, rtol=0))


def masses_close(a: dict[int, float], b: dict[int, float], tol: float = TOL) -> bool:
    """Compare two focal->mass maps, ignoring entries below ``tol``."""
    for key in set(a) | set(b):
        if abs(a.get(key, 0.0) - b.get(key, 0.0)) > tol:
            return False
    return True
