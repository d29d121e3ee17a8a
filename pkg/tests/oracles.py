"""Slow, obviously-correct reference computations used only by the tests."""
import itertools
import math
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from hnpoly.measures import AtomicMeasure


def brute_count(G, bound=1.0):
    """Integer points with x^T G x <= bound, by scanning the bounding box."""
    G = np.asarray(G, dtype=float)
    Ginv = np.linalg.inv(G)
    box = [math.floor(math.sqrt(bound * Ginv[i, i]) + 1e-9) for i in range(len(G))]
    count = 0
    for x in itertools.product(*[range(-b, b + 1) for b in box]):
        v = np.array(x)
        if v @ G @ v <= bound * (1 + 1e-12):
            count += 1
    return count


def brute_hn_vertices(G, radius2):
    """Upper hull of (rank F, deg F) over saturations of spans of short vectors.

    k independent integer vectors form a basis of their span M, and the
    saturation of M has index g = gcd of the k x k minors over M, so its
    degree is -1/2 log det(B G B^T) + log g.
    """
    G = np.asarray(G, dtype=float)
    r = len(G)
    Ginv = np.linalg.inv(G)
    box = [math.floor(math.sqrt(radius2 * Ginv[i, i]) + 1e-9) for i in range(r)]
    vecs = []
    for x in itertools.product(*[range(-b, b + 1) for b in box]):
        v = np.array(x)
        # one representative per +-pair
        if any(x) and next(c for c in x if c) > 0 and v @ G @ v <= radius2:
            vecs.append(x)
    best = {0: 0.0, r: -0.5 * math.log(np.linalg.det(G))}
    for k in range(1, r):
        for combo in itertools.combinations(vecs, k):
            g = 0
            for cols in itertools.combinations(range(r), k):
                g = math.gcd(g, abs(_det([[row[c] for c in cols] for row in combo])))
            if g == 0:
                continue
            B = np.array(combo, dtype=float)
            deg = -0.5 * math.log(np.linalg.det(B @ G @ B.T)) + math.log(g)
            best[k] = max(best.get(k, -math.inf), deg)
    return _hull(best)


def _det(A):
    """Integer determinant by cofactor expansion (tiny matrices only)."""
    if len(A) == 1:
        return A[0][0]
    return sum((-1) ** j * A[0][j] * _det([row[:j] + row[j + 1:] for row in A[1:]]) for j in range(len(A)))


def _hull(points):
    ks = sorted(points)
    hull = []
    for k in ks:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (points[b] - points[a]) * (k - a) <= (points[k] - points[a]) * (b - a) + 1e-10:
                hull.pop()
            else:
                break
        hull.append(k)
    return [(k, points[k]) for k in hull]


def quantile_w1(nu1, nu2, grid=20000):
    """Midpoint-rule integral of |F1* - F2*| over [0, 1]."""
    def q(nu, s):
        acc = 0.0
        for x, m in reversed(nu.atoms):
            acc += float(m)
            if s < acc:
                return x
        return nu.atoms[0][0]
    return sum(abs(q(nu1, (i + 0.5) / grid) - q(nu2, (i + 0.5) / grid)) for i in range(grid)) / grid


def polygon_by_integration(nu, t):
    """P(nu)(t) = integral_0^t F*(s) ds, summing the quantile pieces."""
    acc_mass = Fraction(0)
    val = 0.0
    for x, m in reversed(nu.atoms):
        take = min(m, max(Fraction(t) - acc_mass, Fraction(0)))
        val += float(take) * x
        acc_mass += m
    return val


# -- hypothesis strategies ------------------------------------------------------

positions = st.floats(min_value=-20, max_value=20, allow_nan=False, allow_infinity=False)


@st.composite
def prob_measures(draw, max_atoms=8):
    k = draw(st.integers(1, max_atoms))
    xs = draw(st.lists(positions, min_size=k, max_size=k))
    ws = draw(st.lists(st.integers(1, 20), min_size=k, max_size=k))
    total = sum(ws)
    return AtomicMeasure.from_pairs((x, Fraction(w, total)) for x, w in zip(xs, ws))


def random_measure(rng, max_atoms=8, spread=5.0):
    k = int(rng.integers(1, max_atoms + 1))
    xs = rng.uniform(-spread, spread, k)
    ws = rng.integers(1, 20, k)
    total = int(ws.sum())
    return AtomicMeasure.from_pairs((float(x), Fraction(int(w), total)) for x, w in zip(xs, ws))
