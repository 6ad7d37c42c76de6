"""Probability intervals and sum-to-one assignments inside interval boxes.

A *sibling group* is a list of intervals whose numbers must sum to one.
Three questions come up everywhere in the package: is a group feasible,
how to draw a random feasible assignment, and how to optimise a linear
function over the feasible set. All three live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL = 1e-9


@dataclass(frozen=True, order=True)
class ProbInterval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError(f"not a probability interval: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, p: float) -> "ProbInterval":
        return cls(p, p)

    @classmethod
    def clipped(cls, lo: float, hi: float) -> "ProbInterval":
        """Build an interval after clamping rounding noise into [0, 1]."""
        lo = min(max(lo, 0.0), 1.0)
        hi = min(max(hi, 0.0), 1.0)
        return cls(min(lo, hi), hi)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: float, tol: float = TOL) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def __str__(self) -> str:
        return f"[{self.lo:g},{self.hi:g}]"


ZERO = ProbInterval(0.0, 0.0)
ONE = ProbInterval(1.0, 1.0)
UNIT = ProbInterval(0.0, 1.0)


def group_feasible(intervals: Sequence[ProbInterval], tol: float = TOL) -> bool:
    """True iff some assignment inside the intervals sums to one."""
    if not intervals:
        return False
    return (sum(i.lo for i in intervals) <= 1.0 + tol
            and sum(i.hi for i in intervals) >= 1.0 - tol)


def feasible_point(intervals: Sequence[ProbInterval]) -> list[float]:
    """Deterministic feasible assignment: start at the lower bounds and fill
    the remaining mass greedily in sibling order."""
    x = [i.lo for i in intervals]
    rest = 1.0 - sum(x)
    for j, iv in enumerate(intervals):
        if rest <= 0:
            break
        add = min(iv.hi - iv.lo, rest)
        x[j] += add
        rest -= add
    return x


def sample_box_simplex(intervals: Sequence[ProbInterval],
                       rng: np.random.Generator) -> list[float]:
    """Random numbers inside the intervals that sum to exactly one.

    Siblings are visited in random order. Each draws uniformly from the
    range that keeps the remaining siblings feasible; the last one takes
    whatever is left.
    """
    n = len(intervals)
    if n == 0:
        raise ValueError("empty sibling group")
    if not group_feasible(intervals):
        raise ValueError("infeasible sibling group: "
                         + ", ".join(str(i) for i in intervals))
    order = rng.permutation(n)
    los = np.array([intervals[j].lo for j in order])
    his = np.array([intervals[j].hi for j in order])
    later_lo = np.concatenate([np.cumsum(los[::-1])[::-1][1:], [0.0]])
    later_hi = np.concatenate([np.cumsum(his[::-1])[::-1][1:], [0.0]])
    out = [0.0] * n
    drawn = 0.0
    for pos, j in enumerate(order):
        if pos == n - 1:
            x = 1.0 - drawn
            x = min(max(x, intervals[j].lo), intervals[j].hi)
        else:
            a = max(los[pos], 1.0 - later_hi[pos] - drawn)
            b = min(his[pos], 1.0 - later_lo[pos] - drawn)
            x = a if b <= a else rng.uniform(a, b)
        out[j] = float(x)
        drawn += x
    return out


def box_simplex_extreme(intervals: Sequence[ProbInterval],
                        values: Sequence[float],
                        maximize: bool = False) -> float:
    """Optimum of sum(p_c * values_c) over p in the box with sum(p) = 1.

    Greedy: start at lower bounds, then pour the remaining mass into the
    best-valued children first. Exact for this polytope.
    """
    p = [i.lo for i in intervals]
    rest = 1.0 - sum(p)
    order = sorted(range(len(values)), key=lambda c: values[c], reverse=maximize)
    for c in order:
        if rest <= 0:
            break
        add = min(intervals[c].hi - intervals[c].lo, rest)
        p[c] += add
        rest -= add
    # measured from the smallest value so equal values come back exactly
    base = min(values)
    return float(base + sum(pc * (v - base) for pc, v in zip(p, values)))
