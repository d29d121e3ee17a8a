"""Integer points in ellipsoids, Gram-matrix LLL and small integer linear algebra.

Enumeration runs on a floating Cholesky factor with a small slack on every
radius; points that land within the slack of the boundary are re-decided in
exact rational arithmetic from the (exact) rational value of the float Gram
entries.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded

DEFAULT_BUDGET = 2_000_000
REL_TOL = 1e-9


class _Counter:
    __slots__ = ("left", "what")

    def __init__(self, budget, what):
        self.left = budget
        self.what = what

    def tick(self, k=1):
        self.left -= k
        if self.left < 0:
            raise BudgetExceeded(f"{self.what}: enumeration budget exhausted")


def _fp_factor(G: np.ndarray):
    """Return (q, mu) with x^T G x = sum_i q_i (x_i + sum_{j>i} mu_ij x_j)^2."""
    L = np.linalg.cholesky(G)
    R = L.T
    q = np.diag(R) ** 2
    mu = R / np.diag(R)[:, None]
    return q, mu


def exact_form(G_exact, v) -> Fraction:
    r = len(v)
    total = Fraction(0)
    for i in range(r):
        if v[i] == 0:
            continue
        row = G_exact[i]
        s = Fraction(0)
        for j in range(r):
            if v[j]:
                s += row[j] * v[j]
        total += s * v[i]
    return total


def exact_gram(G: np.ndarray):
    return [[Fraction(float(x)) for x in row] for row in G]


def enumerate_vectors(G, bound: float, budget: int = DEFAULT_BUDGET, exact: bool = True,
                      include_zero: bool = False) -> list[tuple[tuple[int, ...], float]]:
    """All integer x with x^T G x <= bound, as (x, float norm) pairs.

    With ``exact=False`` boundary cases are kept (over-inclusion within a
    relative slack of 1e-9), which is what branch-and-bound callers want.
    """
    G = np.asarray(G, dtype=float)
    r = G.shape[0]
    q, mu = _fp_factor(G)
    tol = REL_TOL * max(1.0, abs(bound))
    hi_bound = bound + tol
    counter = _Counter(budget, "enumerate_vectors")
    Gx = exact_gram(G) if exact else None
    bound_exact = Fraction(bound) if exact else None
    out = []
    x = [0] * r

    def rec(i, rem):
        counter.tick()
        c = -sum(mu[i, j] * x[j] for j in range(i + 1, r))
        rho = math.sqrt(max(rem, 0.0) / q[i])
        for m in range(math.ceil(c - rho), math.floor(c + rho) + 1):
            d = m - c
            rem2 = rem - q[i] * d * d
            if rem2 < 0:
                continue
            x[i] = m
            if i == 0:
                norm = hi_bound - rem2
                if not include_zero and not any(x):
                    continue
                if exact and norm > bound - tol:
                    if exact_form(Gx, x) > bound_exact:
                        continue
                out.append((tuple(x), norm))
            else:
                rec(i - 1, rem2)
        x[i] = 0

    rec(r - 1, hi_bound)
    return out


def count_vectors(G, bound: float, budget: int = DEFAULT_BUDGET) -> int:
    """Exact number of integer x (zero included) with x^T G x <= bound."""
    G = np.asarray(G, dtype=float)
    r = G.shape[0]
    q, mu = _fp_factor(G)
    tol = REL_TOL * max(1.0, abs(bound))
    hi_bound = bound + tol
    counter = _Counter(budget, "count_vectors")
    Gx = exact_gram(G)
    bound_exact = Fraction(bound)
    x = [0] * r

    def last_level(rem_hi):
        # integers m with q0 (m - c)^2 <= rem, decided exactly near the ends
        c = -sum(mu[0, j] * x[j] for j in range(1, r))
        rho_hi = math.sqrt(max(rem_hi, 0.0) / q[0])
        rho_lo = math.sqrt(max(rem_hi - 2 * tol, 0.0) / q[0])
        a_hi, b_hi = math.ceil(c - rho_hi), math.floor(c + rho_hi)
        if b_hi < a_hi:
            return 0
        a_lo, b_lo = math.ceil(c - rho_lo), math.floor(c + rho_lo)
        if b_lo < a_lo:
            a_lo, b_lo = a_hi, a_hi - 1
        total = b_lo - a_lo + 1
        for m in list(range(a_hi, a_lo)) + list(range(b_lo + 1, b_hi + 1)):
            x[0] = m
            if exact_form(Gx, x) <= bound_exact:
                total += 1
        x[0] = 0
        return total

    def rec(i, rem):
        counter.tick()
        if i == 0:
            return last_level(rem)
        c = -sum(mu[i, j] * x[j] for j in range(i + 1, r))
        rho = math.sqrt(max(rem, 0.0) / q[i])
        total = 0
        for m in range(math.ceil(c - rho), math.floor(c + rho) + 1):
            d = m - c
            rem2 = rem - q[i] * d * d
            if rem2 < 0:
                continue
            x[i] = m
            total += rec(i - 1, rem2)
        x[i] = 0
        return total

    return rec(r - 1, hi_bound)


def shortest_vector(G, budget: int = DEFAULT_BUDGET) -> tuple[tuple[int, ...], Fraction]:
    """A shortest nonzero vector and its exact squared norm (w.r.t. the float Gram)."""
    G = np.asarray(G, dtype=float)
    U = lll_reduce(G)
    reduced = U @ G @ U.T
    bound = float(min(np.diag(reduced)))
    Gx = exact_gram(G)
    best = None
    for v, _ in enumerate_vectors(G, bound, budget, exact=False):
        val = exact_form(Gx, v)
        if best is None or val < best[1]:
            best = (v, val)
    if best is None:
        raise RuntimeError("no nonzero vector found below an attained bound")
    return best


def lll_reduce(G, delta: float = 0.99) -> np.ndarray:
    """Integer unimodular U (rows = new basis) with U G U^T LLL-reduced."""
    G = np.asarray(G, dtype=float)
    r = G.shape[0]
    U = np.eye(r, dtype=np.int64)

    def gso(M):
        Gm = M @ G @ M.T
        mu = np.zeros((r, r))
        bstar = np.zeros(r)
        for i in range(r):
            for j in range(i):
                mu[i, j] = (Gm[i, j] - sum(mu[j, l] * mu[i, l] * bstar[l] for l in range(j))) / bstar[j]
            bstar[i] = Gm[i, i] - sum(mu[i, l] ** 2 * bstar[l] for l in range(i))
        return mu, bstar

    k = 1
    guard = 0
    while k < r:
        guard += 1
        if guard > 100_000:
            break
        mu, bstar = gso(U.astype(float))
        for j in range(k - 1, -1, -1):
            qj = round(mu[k, j])
            if qj:
                U[k] -= qj * U[j]
                mu, bstar = gso(U.astype(float))
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            U[[k, k - 1]] = U[[k - 1, k]]
            k = max(k - 1, 1)
    return U


def egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    return a, x0, y0


def complete_unimodular(c) -> np.ndarray:
    """Unimodular integer matrix whose first row is the primitive vector c."""
    c = [int(v) for v in c]
    m = len(c)
    vinv = [[int(i == j) for j in range(m)] for i in range(m)]
    cur = list(c)
    for j in range(1, m):
        a, b = cur[0], cur[j]
        if b == 0:
            continue
        g, x, y = egcd(a, b)
        # column op on (0, j) by [[x, -b/g], [y, a/g]]; row op on vinv by its inverse
        cur[0], cur[j] = g, 0
        r0, rj = vinv[0], vinv[j]
        vinv[0] = [(a // g) * u + (b // g) * w for u, w in zip(r0, rj)]
        vinv[j] = [-y * u + x * w for u, w in zip(r0, rj)]
    if abs(cur[0]) != 1:
        raise ValueError("vector is not primitive")
    if cur[0] == -1:
        vinv[0] = [-u for u in vinv[0]]
    M = np.array(vinv, dtype=np.int64)
    assert list(M[0]) == c
    return M


def int_det(M) -> int:
    """Determinant of a square integer matrix (Bareiss, exact)."""
    A = [[int(v) for v in row] for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def saturation_index(B) -> int:
    """Index of span_Z(rows of B) inside its saturation (gcd of maximal minors)."""
    B = np.asarray(B, dtype=np.int64)
    k, r = B.shape
    g = 0
    for cols in combinations(range(r), k):
        g = math.gcd(g, abs(int_det(B[:, cols])))
        if g == 1:
            return 1
    return g


def rref_key(rows) -> tuple:
    """Reduced row echelon form over Q: a canonical key for the spanned subspace."""
    A = [[Fraction(int(v)) for v in row] for row in rows]
    if not A:
        return ()
    ncols = len(A[0])
    piv_row = 0
    for col in range(ncols):
        p = next((i for i in range(piv_row, len(A)) if A[i][col] != 0), None)
        if p is None:
            continue
        A[piv_row], A[p] = A[p], A[piv_row]
        pv = A[piv_row][col]
        A[piv_row] = [v / pv for v in A[piv_row]]
        for i in range(len(A)):
            if i != piv_row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[piv_row])]
        piv_row += 1
        if piv_row == len(A):
            break
    return tuple(tuple(row) for row in A[:piv_row])


def iter_primitive_halfspace(vectors) -> Iterator:
    """Keep primitive vectors whose first nonzero coordinate is positive."""
    for v, norm in vectors:
        first = next(a for a in v if a != 0)
        if first < 0:
            continue
        g = 0
        for a in v:
            g = math.gcd(g, a)
        if g == 1:
            yield v, norm
