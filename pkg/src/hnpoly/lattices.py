"""Hermitian vector bundles over Spec Z, presented as Gram matrices.

A lattice of rank r is Z^r with the inner product given by ``gram``.
``log_index`` is log #(E / Z s_1 + ... + Z s_r) when the Gram matrix is that
of a full-rank sublattice; it only enters the degree, and the enumeration
routines need it to be zero (the whole lattice must be the one enumerated).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .enumeration import (
    DEFAULT_BUDGET,
    _Counter,
    complete_unimodular,
    count_vectors,
    enumerate_vectors,
    iter_primitive_halfspace,
    lll_reduce,
    rref_key,
    shortest_vector,
)
from .errors import BudgetExceeded
from .measures import AtomicMeasure
from .polygons import Polygon, polygon_of

# Hermite constants gamma_k, known exactly up to rank 8
_HERMITE = {
    1: 1.0,
    2: 2 / math.sqrt(3),
    3: 2 ** (1 / 3),
    4: math.sqrt(2),
    5: 8 ** (1 / 5),
    6: (64 / 3) ** (1 / 6),
    7: 64 ** (1 / 7),
    8: 2.0,
}
ENUM_RANK_LIMIT = 12


def hermite_bound(k: int) -> float:
    """gamma_k for k <= 8, Blichfeldt's upper bound beyond."""
    if k in _HERMITE:
        return _HERMITE[k]
    return (2 / math.pi) * math.gamma(2 + k / 2) ** (2 / k)


@dataclass(frozen=True, eq=False)
class HermitianLattice:
    gram: np.ndarray
    log_index: float = 0.0

    def __post_init__(self):
        g = np.array(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
            raise ValueError("gram must be a non-empty square matrix")
        if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise ValueError("gram must be symmetric")
        g = (g + g.T) / 2
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise ValueError("gram must be positive definite") from None
        if self.log_index < 0:
            raise ValueError("log_index is the log of an index, hence >= 0")
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    @property
    def rank(self) -> int:
        return self.gram.shape[0]

    @classmethod
    def diagonal(cls, entries) -> "HermitianLattice":
        return cls(np.diag(np.asarray(entries, dtype=float)))

    @classmethod
    def from_slopes(cls, slopes) -> "HermitianLattice":
        """Orthogonal sum of rank-one lattices L_s (basis vector of norm e^{-s})."""
        return cls.diagonal(np.exp(-2 * np.asarray(slopes, dtype=float)))

    @classmethod
    def line(cls, a: float) -> "HermitianLattice":
        """L_a: the unit has norm e^{-a}, so deg L_a = a."""
        return cls(np.array([[math.exp(-2 * a)]]))

    def twist(self, a: float) -> "HermitianLattice":
        """E tensor L_a."""
        return HermitianLattice(self.gram * math.exp(-2 * a), self.log_index)

    def sublattice(self, rows) -> "HermitianLattice":
        B = np.asarray(rows, dtype=float)
        return HermitianLattice(B @ self.gram @ B.T)

    def is_diagonal(self) -> bool:
        return not np.any(self.gram - np.diag(np.diag(self.gram)))

    def to_json(self) -> dict:
        return {"rank": self.rank, "gram": self.gram.tolist(), "log_index": self.log_index}

    @classmethod
    def from_json(cls, data: dict) -> "HermitianLattice":
        lat = cls(np.array(data["gram"], dtype=float), float(data.get("log_index", 0.0)))
        if "rank" in data and int(data["rank"]) != lat.rank:
            raise ValueError("rank does not match the Gram matrix")
        return lat


@dataclass(frozen=True, eq=False)
class LatticeMap:
    """phi: E_Q -> F_Q given by an integer matrix acting on coordinate columns."""

    matrix: np.ndarray
    source: HermitianLattice
    target: HermitianLattice

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=np.int64)
        if M.shape != (self.target.rank, self.source.rank):
            raise ValueError("matrix must be rank(F) x rank(E)")
        object.__setattr__(self, "matrix", M)

    @property
    def is_injective(self) -> bool:
        return np.linalg.matrix_rank(self.matrix.astype(float)) == self.source.rank


def _check_enumerable(E: HermitianLattice):
    if E.log_index != 0:
        raise ValueError("enumeration needs a Gram matrix of the lattice itself (log_index = 0)")
    if E.rank > ENUM_RANK_LIMIT:
        raise ValueError(f"rank {E.rank} is above the enumeration limit {ENUM_RANK_LIMIT}")


def degree(E: HermitianLattice) -> float:
    sign, logdet = np.linalg.slogdet(E.gram)
    return E.log_index - 0.5 * logdet


def slope(E: HermitianLattice) -> float:
    return degree(E) / E.rank


def h0(E: HermitianLattice, budget: int = DEFAULT_BUDGET) -> float:
    """log #{v in E : |v| <= 1}, by exact enumeration."""
    _check_enumerable(E)
    return math.log(count_vectors(E.gram, 1.0, budget))


def first_minimum(E: HermitianLattice, budget: int = DEFAULT_BUDGET) -> float:
    """min |v|^2 over nonzero v in E."""
    _check_enumerable(E)
    return float(shortest_vector(E.gram, budget)[1])


# -- Harder-Narasimhan polygon -------------------------------------------------


@dataclass
class HNPolygon:
    """Vertices (rank, degree) of the HN polygon on [0, rank] and the flag.

    ``bases[i]`` is an integer basis (rows) of the flag member of rank
    ``vertices[i][0]``; ranks increase along the list, so the flag is read
    from the largest-slope member outwards.
    """

    rank: int
    vertices: list[tuple[int, float]]
    bases: list[np.ndarray]
    certified: bool = True
    nodes: int = 0

    @property
    def slopes(self) -> list[float]:
        v = self.vertices
        return [(d1 - d0) / (r1 - r0) for (r0, d0), (r1, d1) in zip(v, v[1:])]

    def __call__(self, x: float) -> float:
        for (r0, d0), (r1, d1) in zip(self.vertices, self.vertices[1:]):
            if r0 <= x <= r1:
                return d0 + (d1 - d0) * (x - r0) / (r1 - r0)
        raise ValueError("outside [0, rank]")

    def measure(self) -> AtomicMeasure:
        v = self.vertices
        return AtomicMeasure.from_pairs(
            ((d1 - d0) / (r1 - r0), Fraction(r1 - r0, self.rank)) for (r0, d0), (r1, d1) in zip(v, v[1:])
        )

    def normalized(self) -> Polygon:
        return polygon_of(self.measure())

    @property
    def max_slope(self) -> float:
        return self.slopes[0]

    @property
    def min_slope(self) -> float:
        return self.slopes[-1]

    @property
    def positive_degree(self) -> float:
        return max(d for _, d in self.vertices)

    def flag(self) -> list[tuple[int, float]]:
        return list(self.vertices)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "vertices": [[r, d] for r, d in self.vertices],
            "bases": [b.tolist() for b in self.bases],
            "certified": self.certified,
        }


def upper_hull(points: dict[int, float], rel_tol: float = 1e-10) -> list[int]:
    """Ranks of the vertices of the upper concave hull of {(k, points[k])}."""
    ks = sorted(points)
    hull: list[int] = []
    for k in ks:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b when it is on or below the chord a-k
            lhs = (points[b] - points[a]) * (k - a)
            rhs = (points[k] - points[a]) * (b - a)
            scale = max(1.0, abs(points[a]), abs(points[b]), abs(points[k])) * (k - a)
            if lhs <= rhs + rel_tol * scale:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def _hull_value(points: dict[int, float], k: int) -> float:
    hull = upper_hull(points, rel_tol=0.0)
    for a, b in zip(hull, hull[1:]):
        if a <= k <= b:
            return points[a] + (points[b] - points[a]) * (k - a) / (b - a)
    raise ValueError("rank outside hull")


def _projected_gram(G: np.ndarray, U: np.ndarray, j: int) -> np.ndarray:
    Gu = U.astype(float) @ G @ U.T.astype(float)
    if j == 0:
        return Gu
    A = Gu[:j, :j]
    Bm = Gu[:j, j:]
    S = Gu[j:, j:] - Bm.T @ np.linalg.solve(A, Bm)
    return (S + S.T) / 2


class _MinDetSearch:
    """Branch and bound for the rank-k saturated sublattice of least determinant.

    A saturated F of rank k has an HKZ basis b_1..b_k; b_{j+1} projects, away
    from span(b_1..b_j), onto a shortest vector of the projected F, whose
    squared norm is at most gamma_{k-j} (det F / det W_j)^{1/(k-j)} by
    Hermite's inequality. Enumerating those projected vectors for every
    reachable W_j visits every F with det F < C.
    """

    def __init__(self, G, k, C, counter, cap=None):
        self.G = G
        self.k = k
        self.C = C
        self.counter = counter
        self.cap = cap
        self.capped = False
        self.best = None
        self.seen: list[set] = [set() for _ in range(k + 1)]

    def run(self):
        r = self.G.shape[0]
        self._dfs(np.eye(r, dtype=np.int64), 0, 1.0)
        return self.best

    def _dfs(self, U, j, detW):
        k = self.k
        S = _projected_gram(self.G, U, j)
        bound = hermite_bound(k - j) * (self.C / detW) ** (1 / (k - j)) * (1 + 1e-9)
        if self.cap is not None and bound > self.cap:
            bound = self.cap
            self.capped = True
        vecs = enumerate_vectors(S, bound, budget=max(self.counter.left, 1), exact=False)
        self.counter.tick(len(vecs) + 1)
        cands = sorted(iter_primitive_halfspace(vecs), key=lambda p: p[1])
        for c, norm in cands:
            new_det = detW * norm
            v = np.array(c, dtype=np.int64) @ U[j:]
            rows = np.vstack([U[:j], v[None, :]])
            if j + 1 == k:
                if new_det >= self.C:
                    break
                self.C = new_det
                M = complete_unimodular(c)
                self.best = (new_det, rows.copy(), np.vstack([U[:j], M @ U[j:]]))
                continue
            # tighter C makes later candidates at this level useless
            if hermite_bound(k - j) * (self.C / detW) ** (1 / (k - j)) * (1 + 1e-9) < norm:
                break
            key = rref_key(rows)
            if key in self.seen[j + 1]:
                continue
            self.seen[j + 1].add(key)
            M = complete_unimodular(c)
            U2 = np.vstack([U[:j], M @ U[j:]])
            self._dfs(U2, j + 1, new_det)


def _annihilator(U: np.ndarray, m: int) -> np.ndarray:
    """Integer basis of the vectors killed by the first m rows of unimodular U."""
    Uinv = np.rint(np.linalg.inv(U.astype(float))).astype(np.int64)
    if not np.array_equal(U @ Uinv, np.eye(U.shape[0], dtype=np.int64)):
        raise ArithmeticError("unimodular inverse lost precision")
    return Uinv[:, m:].T.copy()


def hn_polygon(E: HermitianLattice, search_bound: Optional[float] = None,
               budget: int = DEFAULT_BUDGET) -> HNPolygon:
    """Harder-Narasimhan polygon of E by certified sublattice search.

    For each rank k the search looks for saturated sublattices whose degree
    beats the current upper hull; when nothing is found the hull is exact at k.
    ``search_bound`` caps every enumeration radius (squared norm); if a cap
    ever bites, the result is marked not certified.
    """
    _check_enumerable(E)
    G = E.gram
    r = E.rank
    counter = _Counter(budget, "hn_polygon")
    points: dict[int, float] = {0: 0.0, r: degree(E)}
    bases: dict[int, np.ndarray] = {0: np.zeros((0, r), dtype=np.int64), r: np.eye(r, dtype=np.int64)}

    def offer(rows):
        rows = np.asarray(rows, dtype=np.int64)
        k = rows.shape[0]
        det = np.linalg.det(rows.astype(float) @ G @ rows.T.astype(float))
        deg = -0.5 * math.log(det)
        if k not in points or deg > points[k]:
            points[k] = deg
            bases[k] = rows

    # seed the hull with prefixes of a reduced basis, in two orders
    U = lll_reduce(G)
    norms = np.einsum("ij,jk,ik->i", U.astype(float), G, U.astype(float))
    for order in (np.arange(r), np.argsort(norms, kind="stable")):
        for k in range(1, r):
            offer(U[order[:k]])

    # ranks above r/2 are searched in the dual lattice, where the orthogonal
    # complement has rank r - k and determinant det F / det E
    Gd = np.linalg.inv(G)
    Gd = (Gd + Gd.T) / 2
    detE = math.exp(-2 * points[r])
    certified = True
    try:
        for k in range(1, r):
            C = math.exp(-2 * _hull_value(points, k))
            if 2 * k <= r:
                search = _MinDetSearch(G, k, C, counter, cap=search_bound)
            else:
                search = _MinDetSearch(Gd, r - k, C / detE, counter, cap=search_bound)
            found = search.run()
            certified &= not search.capped
            if found is not None:
                offer(found[1] if 2 * k <= r else _annihilator(found[2], r - k))
    except BudgetExceeded as exc:
        hull = upper_hull(points)
        partial = HNPolygon(r, [(k, points[k]) for k in hull], [bases[k] for k in hull], False,
                            budget - counter.left)
        raise BudgetExceeded(str(exc), partial) from None
    hull = upper_hull(points)
    return HNPolygon(r, [(k, points[k]) for k in hull], [bases[k] for k in hull], certified,
                     budget - counter.left)


def diagonal_hn_polygon(E: HermitianLattice) -> HNPolygon:
    """HN polygon of an orthogonal sum of rank-one lattices: sort the slopes."""
    if not E.is_diagonal() or E.log_index:
        raise ValueError("needs a diagonal Gram matrix of the lattice itself")
    slopes = -0.5 * np.log(np.diag(E.gram))
    order = np.argsort(-slopes, kind="stable")
    r = E.rank
    vertices = [(0, 0.0)]
    bases = [np.zeros((0, r), dtype=np.int64)]
    deg = 0.0
    k = 0
    while k < r:
        s = slopes[order[k]]
        k2 = k
        while k2 < r and slopes[order[k2]] == s:
            deg += s
            k2 += 1
        k = k2
        vertices.append((k, deg))
        bases.append(np.eye(r, dtype=np.int64)[np.sort(order[:k])])
    return HNPolygon(r, vertices, bases, True, 0)


def positive_degree(E: HermitianLattice, search_bound: Optional[float] = None,
                    budget: int = DEFAULT_BUDGET) -> float:
    return hn_polygon(E, search_bound, budget).positive_degree


def positive_slope(E: HermitianLattice, **kw) -> float:
    return positive_degree(E, **kw) / E.rank


def max_slope(E: HermitianLattice, **kw) -> float:
    return hn_polygon(E, **kw).max_slope


def hn_measure(E: HermitianLattice, **kw) -> AtomicMeasure:
    """nu_E: the measure of the Harder-Narasimhan filtration."""
    return hn_polygon(E, **kw).measure()


def h0_vs_degplus(E: HermitianLattice, budget: int = DEFAULT_BUDGET) -> tuple[float, float, float]:
    h = h0(E, budget)
    dp = positive_degree(E, budget=budget)
    return h, dp, abs(h - dp)


def map_height(phi: LatticeMap) -> float:
    """Sum over all places of log ||phi||.

    Finite places: with Z-bases on both sides, sum_p log max_ij |M_ij|_p is
    -log gcd(M). Archimedean place: log of the operator norm between the two
    Gram inner products.
    """
    M = phi.matrix
    if not M.any():
        raise ValueError("the zero map has no height")
    if phi.source.log_index or phi.target.log_index:
        raise ValueError("map_height needs Z-bases of both lattices (log_index = 0)")
    g = 0
    for v in M.flat:
        g = math.gcd(g, int(v))
    Mf = M.astype(float)
    # largest generalized eigenvalue of (M^T G_F M, G_E)
    A = Mf.T @ phi.target.gram @ Mf
    Linv = np.linalg.inv(np.linalg.cholesky(phi.source.gram))
    op2 = np.linalg.eigvalsh(Linv @ A @ Linv.T).max()
    return -math.log(g) + 0.5 * math.log(op2)
