"""Brute-force reference computations shared by the test modules.

Nothing here calls into the package's optimisation code; these are the
slow, obvious versions the fast paths are checked against.
"""

import itertools

import numpy as np


def box_simplex_vertices(intervals, tol=1e-12):
    """Vertices of {p : lo <= p <= hi, sum p = 1}: every coordinate but one
    at a bound, the free one taking up the rest."""
    k = len(intervals)
    out = []
    for free in range(k):
        others = [j for j in range(k) if j != free]
        for bounds in itertools.product((0, 1), repeat=len(others)):
            p = [0.0] * k
            for j, side in zip(others, bounds):
                p[j] = intervals[j].hi if side else intervals[j].lo
            rest = 1.0 - sum(p)
            if intervals[free].lo - tol <= rest <= intervals[free].hi + tol:
                p[free] = rest
                out.append(tuple(p))
    return out


def box_simplex_grid(intervals, step=0.05, tol=1e-9):
    """Grid points (all but the last coordinate on the step grid) plus the
    vertices."""
    k = len(intervals)
    axes = []
    for iv in intervals[:-1]:
        lo = np.ceil(iv.lo / step - 1e-9) * step
        pts = list(np.arange(lo, iv.hi + 1e-12, step)) + [iv.lo, iv.hi]
        axes.append(sorted(set(round(x, 12) for x in pts)))
    out = set(box_simplex_vertices(intervals))
    for head in itertools.product(*axes):
        last = 1.0 - sum(head)
        if intervals[-1].lo - tol <= last <= intervals[-1].hi + tol:
            out.add(tuple(head) + (last,))
    if k == 1:
        out.add((1.0,))
    return sorted(out)


def all_number_assignments(M, points=box_simplex_grid):
    """Every combination of per-group points for a small tree."""
    groups = M.groups
    choices = [points(list(g.intervals)) for g in groups]
    for combo in itertools.product(*choices):
        numbers = {}
        for g, p in zip(groups, combo):
            numbers.update(zip(g.paths, p))
        yield numbers


def leaf_masses(M, numbers):
    out = []
    for path, node in M.leaves:
        w = 1.0
        for i in range(1, len(path) + 1):
            w *= numbers[path[:i]]
        out.append((node.states, w))
    return out


def brute_eu_extremes(M, u):
    """Min and max expected utility over grid and vertex number assignments,
    each focal mass sent to its worst or best state."""
    lo, hi = np.inf, -np.inf
    vals = u.values
    for numbers in all_number_assignments(M):
        masses = leaf_masses(M, numbers)
        lo = min(lo, sum(w * min(vals[b] for b in s) for s, w in masses))
        hi = max(hi, sum(w * max(vals[b] for b in s) for s, w in masses))
    return lo, hi


def brute_consistent(P, m, tol=1e-9):
    n = P.space.size
    for r in range(n + 1):
        for B in itertools.combinations(range(n), r):
            Bs = set(B)
            lower = sum(mass for s, mass in m.branches if set(s) <= Bs)
            if sum(P.probs[b] for b in B) < lower - tol:
                return False
    return True


def uniform_point_interval(a, i):
    """Mutant projection rule: every branch gets the point 1/k, k the number
    of branches sharing its condition. Used as a negative control."""
    from cmaplan.intervals import ProbInterval
    cond = a.branches[i].condition
    k = sum(1 for br in a.branches if br.condition == cond)
    return ProbInterval(1 / k, 1 / k)
