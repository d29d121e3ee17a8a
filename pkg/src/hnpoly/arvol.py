"""Families n -> E_n of diagonal Hermitian lattices standing in for pi_*(L^n).

Every family here is an orthogonal sum of rank-one lattices, described by its
slopes s_i(n) (the basis vector e_i has norm exp(-s_i(n))). That keeps the
HN filtration exact (sort the slopes) and makes the limits closed-form, so the
lab compares finite-n numbers against known answers. Arithmetic dimension is
d = 2 throughout, with rank r_n = n + 1 for the base families.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .graded import PiecewiseLinear
from .lattices import HermitianLattice
from .measures import AtomicMeasure, dilate, truncate
from .polygons import Polygon, legendre_inverse, polygon_of, sup_distance

D = 2
PREFIX_BUDGET = 20_000


@dataclass(frozen=True)
class SectionFamily:
    """Slopes s_i(n) = base(p n)_i + p n twist + n shift, i = 0..p n.

    ``base(m)`` is m a for every i (constant_twist), m phi(i/m) (diagonal_toric)
    or a user callable (custom). ``power`` p gives the family of L^p and
    ``shift`` tensors the whole family by pi^* L_shift after taking the power.
    """

    kind: str
    phi: Optional[PiecewiseLinear] = None
    a: float = 0.0
    twist: float = 0.0
    power: int = 1
    shift: float = 0.0
    custom: Optional[Callable[[int], Sequence[float]]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("diagonal_toric", "constant_twist", "custom"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "diagonal_toric" and (self.phi is None or not self.phi.is_concave()):
            raise ValueError("diagonal_toric needs a concave phi")
        if self.kind == "custom" and self.custom is None:
            raise ValueError("custom families need a slope callable")
        if self.power < 1:
            raise ValueError("power must be a positive integer")

    @classmethod
    def constant(cls, a: float) -> "SectionFamily":
        return cls("constant_twist", a=a)

    @classmethod
    def toric(cls, points, twist: float = 0.0) -> "SectionFamily":
        return cls("diagonal_toric", phi=PiecewiseLinear(tuple(points)), twist=twist)

    def rank(self, n: int) -> int:
        return len(self.slopes(n))

    def slopes(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be positive")
        m = self.power * n
        if self.kind == "constant_twist":
            base = np.full(m + 1, m * self.a)
        elif self.kind == "diagonal_toric":
            base = np.array([m * self.phi(Fraction(i, m)) for i in range(m + 1)])
        else:
            base = np.asarray(self.custom(m), dtype=float)
        return base + (m * self.twist + n * self.shift)

    def twisted(self, a: float) -> "SectionFamily":
        """L tensor pi^* L_a."""
        return replace(self, shift=self.shift + a)

    def pth_power(self, p: int) -> "SectionFamily":
        if self.shift:
            raise ValueError("take powers before shifting")
        return replace(self, power=self.power * p)

    def lattice(self, n: int) -> HermitianLattice:
        return HermitianLattice.from_slopes(self.slopes(n))

    def hn_measure(self, n: int) -> AtomicMeasure:
        """nu_{E_n}: the HN slopes of an orthogonal sum are its summands' slopes."""
        s = self.slopes(n)
        w = Fraction(1, len(s))
        return AtomicMeasure.from_pairs((float(x), w) for x in s)

    def normalized_measure(self, n: int) -> AtomicMeasure:
        """T_{1/n} nu_{E_n}."""
        return dilate(self.hn_measure(n), 1 / n)

    def to_json(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom families are not serializable")
        out = {"kind": self.kind, "twist": self.twist}
        if self.kind == "diagonal_toric":
            out["phi"] = self.phi.to_json()
        else:
            out["a"] = self.a
        if self.power != 1:
            out["power"] = self.power
        if self.shift:
            out["shift"] = self.shift
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SectionFamily":
        kind = data["kind"]
        phi = PiecewiseLinear(tuple(map(tuple, data["phi"]))) if kind == "diagonal_toric" else None
        return cls(kind, phi=phi, a=float(data.get("a", 0.0)), twist=float(data.get("twist", 0.0)),
                   power=int(data.get("power", 1)), shift=float(data.get("shift", 0.0)))


# -- counting lattice points of a diagonal lattice -----------------------------


@dataclass(frozen=True)
class H0Bracket:
    """log_lower <= h0 <= log_upper; equal when counted exactly."""

    log_lower: float
    log_upper: float
    exact: bool

    @property
    def value(self) -> float:
        return (self.log_lower + self.log_upper) / 2

    @property
    def halfwidth(self) -> float:
        return (self.log_upper - self.log_lower) / 2


def _log_ball(k: int) -> float:
    return (k / 2) * math.log(math.pi) - gammaln(k / 2 + 1)


def diagonal_h0(slopes, prefix_budget: int = PREFIX_BUDGET) -> H0Bracket:
    """Bracket for log #{x in Z^r : sum x_i^2 exp(-2 s_i) <= 1}.

    Coordinates with s_i < 0 are forced to zero. The ones with the smallest
    radii R_i = exp(s_i) are enumerated exactly (as long as the box they span
    has at most ``prefix_budget`` points); for every such prefix, with squared
    radius rho left, the remaining k coordinates are bounded by unit cubes:
    the cubes around the points are disjoint and sit inside the ellipsoid of
    radius sqrt(rho) + delta, and they cover the one of radius sqrt(rho) - delta,
    where delta = (1/2) sqrt(sum 1/R_i^2) is the half-diagonal of a unit cube.
    """
    s = np.asarray(slopes, dtype=float)
    s = s[s >= 0]
    s = np.sort(s)
    R = np.exp(s)
    box = 1
    split = 0
    while split < len(s):
        b = 2 * math.floor(R[split] * (1 + 1e-12)) + 1
        if box * b > prefix_budget:
            break
        box *= b
        split += 1
    # exact part: squared-norm contributions of every prefix inside the unit ball
    used = np.zeros(1)
    for i in range(split):
        xs = np.arange(-math.floor(R[i] * (1 + 1e-12)), math.floor(R[i] * (1 + 1e-12)) + 1)
        q = (xs / R[i]) ** 2
        used = (used[:, None] + q[None, :]).ravel()
        used = used[used <= 1 + 1e-12]
    if split == len(s):
        logn = math.log(len(used))
        return H0Bracket(logn, logn, True)
    rest = R[split:]
    k = len(rest)
    rho = np.clip(1.0 - used, 0.0, None)
    sr = np.sqrt(rho)
    delta = 0.5 * math.sqrt(float(np.sum(1 / rest**2)))
    base = _log_ball(k) + float(np.sum(s[split:]))
    with np.errstate(divide="ignore"):
        up_vol = base + k * np.log(sr + delta)
        lo_vol = np.where(sr > delta, base + k * np.log(np.maximum(sr - delta, 1e-300)), -np.inf)
        # the box bound and the zero vector keep both sides sane for small rho
        box_up = np.sum(np.log(2 * np.floor(rest[None, :] * sr[:, None]) + 1), axis=1)
    upper = np.minimum(up_vol, box_up)
    lower = np.maximum(lo_vol, 0.0)
    return H0Bracket(float(logsumexp(lower)), float(logsumexp(upper)), False)


# -- the volume table ----------------------------------------------------------


@dataclass(frozen=True)
class VolumeRow:
    n: int
    rank: int
    h0: float
    h0_err: float
    h0_exact: bool
    deg: float
    deg_plus: float
    mu_max: float

    @property
    def norm(self) -> float:
        return math.factorial(D) / self.n**D

    @property
    def h0_normalized(self) -> float:
        return self.h0 * self.norm

    @property
    def deg_plus_normalized(self) -> float:
        return self.deg_plus * self.norm

    @property
    def mu_plus_normalized(self) -> float:
        return self.deg_plus / self.rank * D / self.n

    @property
    def mu_max_normalized(self) -> float:
        return self.mu_max / self.n

    @property
    def gap(self) -> float:
        return abs(self.h0_normalized - self.deg_plus_normalized)

    def as_dict(self) -> dict:
        return {
            "n": self.n, "rank": self.rank, "h0": self.h0, "h0_err": self.h0_err, "h0_exact": self.h0_exact,
            "deg": self.deg, "deg_plus": self.deg_plus, "mu_max": self.mu_max,
            "h0_normalized": self.h0_normalized, "deg_plus_normalized": self.deg_plus_normalized,
            "mu_plus_normalized": self.mu_plus_normalized, "mu_max_normalized": self.mu_max_normalized,
        }


def volume_row(F: SectionFamily, n: int, prefix_budget: int = PREFIX_BUDGET) -> VolumeRow:
    s = F.slopes(n)
    h = diagonal_h0(s, prefix_budget)
    return VolumeRow(n, len(s), h.value, h.halfwidth, h.exact, float(np.sum(s)),
                     float(np.sum(np.maximum(s, 0.0))), float(np.max(s)))


@dataclass(frozen=True)
class Estimate:
    """Value at the largest n with error bar |v(n) - v(n/2)| (plus any counting slack)."""

    value: float
    err: float

    def to_json(self) -> dict:
        return {"value": self.value, "err": self.err}


COLUMNS = ("h0_normalized", "deg_plus_normalized", "mu_plus_normalized", "mu_max_normalized")


@dataclass
class VolumeReport:
    rows: list[VolumeRow]
    limits: dict[str, Estimate]
    vol_L: float
    gap_constant: float

    def row(self, n: int) -> VolumeRow:
        return next(r for r in self.rows if r.n == n)

    @property
    def volume(self) -> Estimate:
        return self.limits["h0_normalized"]

    def to_json(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "limits": {k: v.to_json() for k, v in self.limits.items()},
            "vol_L": self.vol_L,
            "gap_constant": self.gap_constant,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        keys = list(self.rows[0].as_dict()) if self.rows else []
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r.as_dict())
        return buf.getvalue()


def default_ns(n_max: int) -> list[int]:
    return sorted({max(1, n_max // 8), max(1, n_max // 4), max(1, n_max // 2), n_max})


def volume_experiment(F: SectionFamily, n_max: int, ns: Optional[Sequence[int]] = None,
                      prefix_budget: int = PREFIX_BUDGET) -> VolumeReport:
    ns = sorted(set(ns) | {n_max, max(1, n_max // 2)}) if ns is not None else default_ns(n_max)
    rows = [volume_row(F, n, prefix_budget) for n in ns]
    last = rows[-1]
    half = next(r for r in rows if r.n == max(1, n_max // 2))
    limits = {}
    for col in COLUMNS:
        v1, v0 = getattr(last, col), getattr(half, col)
        slack = last.h0_err * last.norm if col == "h0_normalized" else 0.0
        limits[col] = Estimate(v1, abs(v1 - v0) + slack)
    # vol(L) for the line bundle on the generic fibre: r_n (d-1)! / n^(d-1)
    vol_L = last.rank * math.factorial(D - 1) / n_max ** (D - 1)
    gaps = [abs(r.h0 - r.deg_plus) / (r.rank * math.log(r.rank)) for r in rows if r.rank > 1]
    return VolumeReport(rows, limits, vol_L, max(gaps, default=0.0))


# -- polygons ------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticPolygon:
    polygon: Polygon
    error: float
    n: int
    alpha: Optional[float]

    def to_json(self) -> dict:
        return {"polygon": self.polygon.to_json(), "error": self.error, "n": self.n, "alpha": self.alpha}


def truncated_polygon(F: SectionFamily, n: int, alpha: Optional[float] = None) -> Polygon:
    nu = F.normalized_measure(n)
    if alpha is not None:
        nu = truncate(nu, alpha)
    return polygon_of(nu)


def asymptotic_polygon(F: SectionFamily, n_max: int, alpha: Optional[float] = None) -> AsymptoticPolygon:
    """polygon_of(T_{1/n} nu_n), truncated at alpha, at n = n_max; error bar from n_max / 2."""
    P = truncated_polygon(F, n_max, alpha)
    Q = truncated_polygon(F, max(1, n_max // 2), alpha)
    return AsymptoticPolygon(P, sup_distance(P, Q), n_max, alpha)


@dataclass(frozen=True)
class ViaVolumes:
    polygon: Polygon
    samples: list[tuple[float, float]]
    vol_L: float

    def to_json(self) -> dict:
        return {"polygon": self.polygon.to_json(), "samples": [list(p) for p in self.samples], "vol_L": self.vol_L}


def twisted_volume_ratio(F: SectionFamily, a: float, n_max: int, prefix_budget: int = PREFIX_BUDGET) -> float:
    """vol(L tensor pi^* L_{-a}) / (d vol(L)), both estimated at n = n_max."""
    row = volume_row(F.twisted(-a), n_max, prefix_budget)
    vol_L = row.rank * math.factorial(D - 1) / n_max ** (D - 1)
    return row.h0_normalized / (D * vol_L)


def polygon_via_volumes(F: SectionFamily, a_grid: Sequence[float], n_max: int,
                        origin_tol: float = 0.05, prefix_budget: int = PREFIX_BUDGET) -> ViaVolumes:
    """Rebuild the asymptotic polygon from a -> vol(L(-a)) / (d vol L).

    The sampled function is the convex conjugate of the polygon, so the
    polygon comes back as the lower envelope of the lines t -> g(a) + a t.
    """
    samples = [(float(a), twisted_volume_ratio(F, a, n_max, prefix_budget)) for a in a_grid]
    P = legendre_inverse([a for a, _ in samples], [g for _, g in samples], atol=origin_tol)
    vol_L = F.rank(n_max) * math.factorial(D - 1) / n_max ** (D - 1)
    return ViaVolumes(P, samples, vol_L)


# -- bigness -------------------------------------------------------------------


@dataclass(frozen=True)
class BignessReport:
    is_big: bool
    volume: Estimate
    mu_max: Estimate
    vol_L: float
    lower_bound_check: bool
    first_effective_n: Optional[int]

    @property
    def ratio(self) -> float:
        return self.volume.value / (D * self.vol_L)

    def to_json(self) -> dict:
        return {
            "is_big": self.is_big, "volume": self.volume.to_json(), "mu_max": self.mu_max.to_json(),
            "vol_L": self.vol_L, "ratio": self.ratio, "lower_bound_check": self.lower_bound_check,
            "first_effective_n": self.first_effective_n,
        }


def bigness_criterion(F: SectionFamily, n_max: int, ns: Optional[Sequence[int]] = None) -> BignessReport:
    """Volume positivity against the asymptotic maximal slope.

    Checks vol / (d vol L) <= lim mu_max / n up to the two error bars, and
    looks for the first n whose lattice has a nonzero vector of norm < 1
    (for an orthogonal sum that is a basis vector with positive slope).
    """
    rep = volume_experiment(F, n_max, ns)
    vol = rep.volume
    mu = rep.limits["mu_max_normalized"]
    is_big = vol.value - vol.err > 0
    ratio = vol.value / (D * rep.vol_L)
    check = ratio <= mu.value + mu.err + vol.err / (D * rep.vol_L)
    first = next((r.n for r in rep.rows if r.mu_max > 0), None)
    return BignessReport(is_big, vol, mu, rep.vol_L, check, first)


# -- continuity of truncated polygons ------------------------------------------


@dataclass(frozen=True)
class ContinuityRow:
    p: int
    distance: float


def continuity_experiment(F: SectionFamily, shift: float, alpha: Optional[float], p_list: Sequence[int],
                          n_max: int) -> list[ContinuityRow]:
    """sup | (1/p) P^(p alpha)(L^p tensor L') - P^(alpha)(L) | at n = n_max.

    L' is modelled by the constant family of slope ``shift``: it adds n shift
    to every slope of the n-th lattice of L^p.
    """
    base = truncated_polygon(F, n_max, alpha)
    rows = []
    for p in p_list:
        Fp = F.pth_power(p).twisted(shift)
        nu = Fp.normalized_measure(n_max)
        if alpha is not None:
            nu = truncate(nu, p * alpha)
        rows.append(ContinuityRow(p, sup_distance(polygon_of(nu).scale(1 / p), base)))
    return rows
