"""R-filtered finite-dimensional vector spaces, stored as jump data."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .measures import ZERO, AtomicMeasure, mix
from .polygons import max_value, polygon_of


@dataclass(frozen=True)
class FilteredSpace:
    """Flag V = V_0 > V_1 > ... > V_n = 0 with jump values a_0 < ... < a_{n-1}.

    ``steps[i] = (a_i, d_i)`` where d_i = rank V_i - rank V_{i+1}.
    ``dim == 0`` with no steps is the zero space.
    """

    dim: int
    steps: tuple[tuple[float, int], ...]

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("negative dimension")
        prev = None
        for a, d in self.steps:
            if d <= 0:
                raise ValueError("codimension drops must be positive")
            if prev is not None and not a > prev:
                raise ValueError("jump values must increase strictly")
            prev = a
        if sum(d for _, d in self.steps) != self.dim:
            raise ValueError("drops must add up to the dimension")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "FilteredSpace":
        """Filtration whose jumps are the given basis values, with multiplicity."""
        c = Counter(float(v) for v in values)
        steps = tuple(sorted(c.items()))
        return cls(sum(c.values()), steps)

    def rank_at(self, i: int) -> int:
        """rank V_i."""
        return self.dim - sum(d for _, d in self.steps[:i])

    def to_json(self) -> dict:
        return {"dim": self.dim, "steps": [[a, d] for a, d in self.steps]}

    @classmethod
    def from_json(cls, data: dict) -> "FilteredSpace":
        return cls(int(data["dim"]), tuple((float(a), int(d)) for a, d in data["steps"]))


def measure_of(V: FilteredSpace) -> AtomicMeasure:
    if V.dim == 0:
        return ZERO
    return AtomicMeasure(tuple((float(a), Fraction(d, V.dim)) for a, d in V.steps))


def lambda_invariants(V: FilteredSpace) -> tuple[float, float, float]:
    """(lambda_min, lambda_max, lambda_plus), lambda_plus = max of P_V on [0, 1]."""
    if V.dim == 0:
        raise ValueError("the zero space has no lambda invariants")
    lam_plus = max_value(polygon_of(measure_of(V)))[1]
    return V.steps[0][0], V.steps[-1][0], lam_plus


def exact_sequence_split(V: FilteredSpace, sub: FilteredSpace, quot: FilteredSpace) -> bool:
    """Check nu_V = (dim sub/dim V) nu_sub + (dim quot/dim V) nu_quot exactly."""
    if sub.dim + quot.dim != V.dim or V.dim == 0:
        raise ValueError("dimensions do not fit an exact sequence")
    mixed = mix([(Fraction(sub.dim, V.dim), measure_of(sub)), (Fraction(quot.dim, V.dim), measure_of(quot))])
    return mixed == measure_of(V)
