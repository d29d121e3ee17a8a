"""Finitely supported measures on the real line.

Positions are floats, masses are exact :class:`fractions.Fraction` values.
Every measure in this toolkit comes from ranks of filtered spaces, so the
masses are always ratios of integers and can be kept exact for free.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Atom = tuple[float, Fraction]


def _as_fraction(mass) -> Fraction:
    if isinstance(mass, Fraction):
        return mass
    if isinstance(mass, float):
        # floats are accepted only when they are exact dyadic values
        return Fraction(mass)
    return Fraction(mass)


@dataclass(frozen=True)
class AtomicMeasure:
    """A sub-probability measure given by atoms sorted by position."""

    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        prev = None
        total = Fraction(0)
        for x, m in self.atoms:
            if not isinstance(m, Fraction):
                raise TypeError("masses must be Fractions")
            if m <= 0:
                raise ValueError("zero or negative mass stored")
            if prev is not None and not x > prev:
                raise ValueError("positions must be strictly increasing")
            prev = x
            total += m
        if total > 1:
            raise ValueError(f"total mass {total} exceeds 1")
        object.__setattr__(self, "_total", total)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, object]]) -> "AtomicMeasure":
        """Build from unsorted (position, mass) pairs, merging equal positions."""
        acc: dict[float, Fraction] = {}
        for x, m in pairs:
            x = float(x)
            if x != x or x in (float("inf"), float("-inf")):
                raise ValueError("positions must be finite")
            m = _as_fraction(m)
            if m < 0:
                raise ValueError("negative mass")
            # -0.0 and 0.0 compare equal and hash equal, so they merge
            acc[x] = acc.get(x, Fraction(0)) + m
        atoms = tuple((x, m) for x, m in sorted(acc.items()) if m != 0)
        return cls(atoms)

    @property
    def total_mass(self) -> Fraction:
        return self._total

    @property
    def is_probability(self) -> bool:
        return self._total == 1

    @property
    def positions(self) -> list[float]:
        return [x for x, _ in self.atoms]

    @property
    def support_min(self) -> float:
        return self.atoms[0][0]

    @property
    def support_max(self) -> float:
        return self.atoms[-1][0]

    def __len__(self):
        return len(self.atoms)

    def tail(self, x: float) -> Fraction:
        """Mass of the open half-line ]x, +inf[."""
        return sum((m for y, m in self.atoms if y > x), Fraction(0))

    def integrate(self, h) -> float:
        return sum(float(m) * h(x) for x, m in self.atoms)

    def mean(self) -> float:
        return self.integrate(lambda x: x)

    def to_json(self) -> dict:
        return {"atoms": [[repr(x), m.numerator, m.denominator] for x, m in self.atoms]}

    @classmethod
    def from_json(cls, data: dict) -> "AtomicMeasure":
        return cls.from_pairs((float(x), Fraction(int(num), int(den))) for x, num, den in data["atoms"])


ZERO = AtomicMeasure(())


def _require_probability(nu: AtomicMeasure, what: str):
    if not nu.is_probability:
        raise ValueError(f"{what} needs a probability measure, got total mass {nu.total_mass}")


def dirac(a: float) -> AtomicMeasure:
    return AtomicMeasure(((float(a), Fraction(1)),))


def translate(nu: AtomicMeasure, a: float) -> AtomicMeasure:
    """Move every atom from x to x + a.

    This is the direction that makes P(translate(nu, a))(t) = P(nu)(t) + a*t.
    """
    return AtomicMeasure.from_pairs((x + a, m) for x, m in nu.atoms)


def dilate(nu: AtomicMeasure, eps: float) -> AtomicMeasure:
    """Move every atom from x to eps * x (eps > 0)."""
    if not eps > 0:
        raise ValueError("dilation factor must be positive")
    return AtomicMeasure.from_pairs((eps * x, m) for x, m in nu.atoms)


def truncate(nu: AtomicMeasure, alpha: float) -> AtomicMeasure:
    """Collapse the mass of ]-inf, alpha[ onto a single atom at alpha."""
    _require_probability(nu, "truncate")
    below = sum((m for x, m in nu.atoms if x < alpha), Fraction(0))
    pairs = [(x, m) for x, m in nu.atoms if x >= alpha]
    if below:
        pairs.append((alpha, below))
    return AtomicMeasure.from_pairs(pairs)


def mix(pairs: Sequence[tuple[object, AtomicMeasure]]) -> AtomicMeasure:
    """Weighted sum of measures; atoms at bit-identical positions merge."""
    out = []
    wsum = Fraction(0)
    for w, nu in pairs:
        w = _as_fraction(w)
        if w < 0:
            raise ValueError("negative mixture weight")
        wsum += w
        out.extend((x, w * m) for x, m in nu.atoms)
    if wsum > 1:
        raise ValueError("mixture weights sum above 1")
    return AtomicMeasure.from_pairs(out)


def dominates(nu1: AtomicMeasure, nu2: AtomicMeasure) -> bool:
    """First-order stochastic order: nu1(]x,inf[) >= nu2(]x,inf[) for every x.

    Both tail functions are right-continuous step functions that only jump at
    atoms, so comparing them at every atom position is exact (below all atoms
    both tails equal 1).
    """
    _require_probability(nu1, "dominates")
    _require_probability(nu2, "dominates")
    points = sorted(set(nu1.positions) | set(nu2.positions))
    t1 = Fraction(1)
    t2 = Fraction(1)
    a1 = dict(nu1.atoms)
    a2 = dict(nu2.atoms)
    for x in points:
        t1 -= a1.get(x, 0)
        t2 -= a2.get(x, 0)
        if t1 < t2:
            return False
    return True


def quantile_steps(nu: AtomicMeasure) -> list[tuple[Fraction, Fraction, float]]:
    """Upper quantile F*(s) = sup{x : nu(]x,inf[) > s} as (s_lo, s_hi, value) pieces."""
    steps = []
    acc = Fraction(0)
    for x, m in reversed(nu.atoms):
        steps.append((acc, acc + m, x))
        acc += m
    return steps


def w1_distance(nu1: AtomicMeasure, nu2: AtomicMeasure) -> float:
    """Wasserstein-1 distance, integrating |F1* - F2*| over [0, 1]."""
    _require_probability(nu1, "w1_distance")
    _require_probability(nu2, "w1_distance")
    q1 = quantile_steps(nu1)
    q2 = quantile_steps(nu2)
    i = j = 0
    s = Fraction(0)
    total = 0.0
    while i < len(q1) and j < len(q2):
        hi = min(q1[i][1], q2[j][1])
        total += float(hi - s) * abs(q1[i][2] - q2[j][2])
        s = hi
        if q1[i][1] == hi:
            i += 1
        if q2[j][1] == hi:
            j += 1
    return total


def positive_part_integral(nu: AtomicMeasure, a: float = 0.0) -> float:
    """Integral of (x - a)_+ against nu."""
    _require_probability(nu, "positive_part_integral")
    return sum(float(m) * (x - a) for x, m in nu.atoms if x > a)
