"""Concave piecewise-linear functions on [0, 1] and their Legendre duals."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .measures import AtomicMeasure

Breakpoint = tuple[Fraction, float]


@dataclass(frozen=True)
class Polygon:
    """Concave polygon given by breakpoints; linear in between.

    The t-coordinates are exact rationals starting at 0 and ending at 1, the
    first value is 0 and consecutive slopes decrease (strictly, up to float
    rounding of the recomputed slopes).
    """

    breakpoints: tuple[Breakpoint, ...]

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) < 2:
            raise ValueError("a polygon needs at least two breakpoints")
        if bp[0][0] != 0 or bp[-1][0] != 1:
            raise ValueError("breakpoints must span [0, 1]")
        if bp[0][1] != 0:
            raise ValueError("a polygon takes value 0 at the origin")
        for (t0, _), (t1, _) in zip(bp, bp[1:]):
            if not t1 > t0:
                raise ValueError("t-coordinates must increase strictly")
        # slopes recomputed from float values can tie when atoms are a few ulps
        # apart, so only a genuine increase counts as a concavity violation
        slopes = self.slopes
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 - s0 > 1e-12 * max(1.0, abs(s0), abs(s1)):
                raise ValueError("slopes must decrease (concavity)")

    @property
    def slopes(self) -> list[float]:
        bp = self.breakpoints
        return [(v1 - v0) / float(t1 - t0) for (t0, v0), (t1, v1) in zip(bp, bp[1:])]

    @property
    def ts(self) -> list[Fraction]:
        return [t for t, _ in self.breakpoints]

    def __call__(self, t) -> float:
        if t < 0 or t > 1:
            raise ValueError("polygon evaluated outside [0, 1]")
        bp = self.breakpoints
        lo, hi = 0, len(bp) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if bp[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        (t0, v0), (t1, v1) = bp[lo], bp[hi]
        if t == t0:
            return v0
        if t == t1:
            return v1
        if isinstance(t, Fraction):
            w = float((t - t0) / (t1 - t0))
        else:
            w = (t - float(t0)) / float(t1 - t0)
        return v0 + w * (v1 - v0)

    def scale(self, c: float) -> "Polygon":
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return Polygon(tuple((t, c * v) for t, v in self.breakpoints))

    def to_json(self) -> dict:
        return {"breakpoints": [[t.numerator, t.denominator, v] for t, v in self.breakpoints]}

    @classmethod
    def from_json(cls, data: dict) -> "Polygon":
        return cls(tuple((Fraction(int(n), int(d)), float(v)) for n, d, v in data["breakpoints"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in self.breakpoints:
            w.writerow([repr(float(t)), repr(v)])
        return buf.getvalue()


def polygon_of(nu: AtomicMeasure) -> Polygon:
    """P(nu): segments of length m_i and slope x_i, steepest first."""
    if len(nu) == 0:
        raise ValueError("the zero measure has no polygon")
    if not nu.is_probability:
        raise ValueError("polygon_of needs a probability measure")
    pts = [(Fraction(0), 0.0)]
    t = Fraction(0)
    v = 0.0
    for x, m in reversed(nu.atoms):
        t += m
        v += float(m) * x
        pts.append((t, v))
    return Polygon(tuple(pts))


def max_value(poly: Polygon) -> tuple[Fraction, float]:
    """Maximum over [0, 1]; attained at a breakpoint, smallest t on ties."""
    best_t, best_v = poly.breakpoints[0]
    for t, v in poly.breakpoints[1:]:
        if v > best_v:
            best_t, best_v = t, v
    return best_t, best_v


def sup_distance(p1: Polygon, p2: Polygon) -> float:
    ts = sorted(set(p1.ts) | set(p2.ts))
    return max(abs(p1(t) - p2(t)) for t in ts)


@dataclass(frozen=True)
class LegendreDual:
    """The convex function a -> max_{t in [0,1]} (P(t) - a t).

    It is the upper envelope of the lines a -> v_k - a t_k over the polygon's
    breakpoints; its own kinks sit at the polygon's slopes.
    """

    polygon: Polygon

    def __call__(self, a: float) -> float:
        return max(v - a * float(t) for t, v in self.polygon.breakpoints)

    def breakpoints(self) -> list[tuple[float, float]]:
        return [(s, self(s)) for s in reversed(self.polygon.slopes)]


def legendre_dual(poly: Polygon) -> LegendreDual:
    return LegendreDual(poly)


def legendre_inverse(a_grid: Sequence[float], values: Sequence[float], atol: float = 1e-12) -> Polygon:
    """Recover a polygon from samples g(a) = max_t (P(t) - a t).

    Returns t -> min_a (g(a) + a t) over the grid, an upper approximation of P
    that is exact at every t where P has a supporting line with slope in the
    grid. The grid must reach the top of the support so that g vanishes
    somewhere (otherwise the value at t = 0 is not 0).
    """
    lines = sorted(zip(map(float, a_grid), map(float, values)), key=lambda p: -p[0])
    if not lines:
        raise ValueError("empty grid")
    # lower envelope of y = g + a t on [0, 1]; slopes arrive in decreasing order
    hull: list[tuple[float, float]] = []
    for a, g in lines:
        if hull and hull[-1][0] == a:
            if g >= hull[-1][1]:
                continue
            hull.pop()
        while hull:
            a1, g1 = hull[-1]
            if g <= g1:
                # the new line (smaller slope, lower intercept) beats the last one everywhere on [0,1]
                hull.pop()
                continue
            if len(hull) >= 2:
                a0, g0 = hull[-2]
                x01 = (g1 - g0) / (a0 - a1)
                x12 = (g - g1) / (a1 - a)
                if x12 <= x01:
                    hull.pop()
                    continue
            break
        hull.append((a, g))
    # clip to [0, 1]
    pieces = []
    for k, (a, g) in enumerate(hull):
        lo = 0.0 if k == 0 else (g - hull[k - 1][1]) / (hull[k - 1][0] - a)
        hi = 1.0 if k == len(hull) - 1 else (hull[k + 1][1] - g) / (a - hull[k + 1][0])
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if hi > lo + 1e-12:
            pieces.append((lo, hi, a, g))
    v0 = pieces[0][3]
    if abs(v0) > atol:
        raise ValueError(f"envelope is {v0} at t=0; extend the grid to the top of the support")
    pts = [(Fraction(0), 0.0)]
    for lo, hi, a, g in pieces:
        t = Fraction(1) if hi == 1.0 else Fraction(hi)
        pts.append((t, g + a * float(t)))
    return Polygon(tuple(pts))
