"""Model graded algebras with filtered pieces B_n and their normalized measures.

Two families are provided, both with an independently known limit:

* weighted polynomial algebras k[x_1..x_q] with lambda(x^a) = sum a_i w_i;
* "toric" diagonal families, B_n with basis e_{n,i} (0 <= i <= n) and
  lambda(e_{n,i}) = n phi(i/n) for a concave piecewise-linear phi.
"""
from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

from .errors import BudgetExceeded
from .measures import AtomicMeasure, dilate
from .polygons import max_value, polygon_of

GRID = 1e-6
DEFAULT_MONOMIAL_BUDGET = 10**6


@dataclass(frozen=True)
class Penalty:
    """f(n) in {0, c log(n+1), c sqrt(n)}; all of them are o(n)."""

    kind: str = "zero"
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "log", "sqrt"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.c < 0:
            raise ValueError("penalty coefficient must be nonnegative")

    def __call__(self, n: int) -> float:
        if self.kind == "log":
            return self.c * math.log(n + 1)
        if self.kind == "sqrt":
            return self.c * math.sqrt(n)
        return 0.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class PiecewiseLinear:
    """phi on [0, 1] through the points (t_k, v_k); evaluated in exact rationals."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(t), float(v)) for t, v in self.points)
        if len(pts) < 2 or pts[0][0] != 0.0 or pts[-1][0] != 1.0:
            raise ValueError("phi must be given on [0, 1] by at least two points")
        if any(not t1 > t0 for (t0, _), (t1, _) in zip(pts, pts[1:])):
            raise ValueError("phi abscissae must increase strictly")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_exact", tuple((Fraction(t), Fraction(v)) for t, v in pts))

    def exact(self, t: Fraction) -> Fraction:
        pts = self._exact
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t <= t1:
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        raise ValueError("phi evaluated outside [0, 1]")

    def __call__(self, t) -> float:
        return float(self.exact(Fraction(t)))

    @property
    def slopes(self) -> list[float]:
        p = self.points
        return [(v1 - v0) / (t1 - t0) for (t0, v0), (t1, v1) in zip(p, p[1:])]

    def is_concave(self) -> bool:
        s = self.slopes
        return all(b <= a for a, b in zip(s, s[1:]))

    @property
    def maximum(self) -> float:
        return max(v for _, v in self.points)

    def to_json(self) -> list:
        return [[t, v] for t, v in self.points]


@dataclass(frozen=True)
class MonomialAlgebraModel:
    weights: tuple[float, ...]
    f: Penalty = field(default_factory=Penalty)

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w:
            raise ValueError("need at least one generator")
        object.__setattr__(self, "weights", w)

    @property
    def q(self) -> int:
        return len(self.weights)

    def dimension(self, n: int) -> int:
        return math.comb(n + self.q - 1, self.q - 1)

    def to_json(self) -> dict:
        return {"kind": "monomial", "weights": list(self.weights), "f": self.f.to_json()}


@dataclass(frozen=True)
class ToricDiagonalFamily:
    phi: PiecewiseLinear
    f: Penalty = field(default_factory=Penalty)

    def dimension(self, n: int) -> int:
        return n + 1

    def to_json(self) -> dict:
        return {"kind": "toric", "phi": self.phi.to_json(), "f": self.f.to_json()}


Model = Union[MonomialAlgebraModel, ToricDiagonalFamily]


def model_from_json(data: dict) -> Model:
    f = Penalty(**data["f"]) if "f" in data else Penalty()
    if data["kind"] == "monomial":
        return MonomialAlgebraModel(tuple(data["weights"]), f)
    if data["kind"] == "toric":
        return ToricDiagonalFamily(PiecewiseLinear(tuple(map(tuple, data["phi"]))), f)
    raise ValueError(f"unknown model kind {data['kind']!r}")


# -- measures of B_n -----------------------------------------------------------


def _integer_keys(weights) -> tuple[list[int], float]:
    """Integer keys k_i and unit u with w_i ~ k_i u (exact when the weights are integers)."""
    if all(float(w).is_integer() for w in weights):
        return [int(w) for w in weights], 1.0
    return [round(w / GRID) for w in weights], GRID


def _monomial_value_counts(model: MonomialAlgebraModel, n: int, budget: int) -> tuple[Counter, float]:
    """Counter key -> number of degree-n monomials with lambda = key * unit.

    The budget caps the number of distinct (degree, value) states, which is
    what the convolution actually stores; with integer weights it stays far
    below the number of monomials.
    """
    keys, unit = _integer_keys(model.weights)
    # layer[d] = value distribution of degree-d monomials in the generators seen so far
    layer = [Counter({d * keys[0]: 1}) for d in range(n + 1)]
    for k in keys[1:]:
        new = []
        for d in range(n + 1):
            acc: Counter = Counter()
            for e in range(d + 1):
                shift = (d - e) * k
                for key, c in layer[e].items():
                    acc[key + shift] += c
            new.append(acc)
        layer = new
        states = sum(len(c) for c in layer)
        if states > budget:
            raise BudgetExceeded(f"{states} distinct (degree, value) states exceed the budget {budget}")
    return layer[n], unit


def graded_measure(model: Model, n: int, budget: int = DEFAULT_MONOMIAL_BUDGET) -> AtomicMeasure:
    """T_{1/n} nu_{B_n}: jump values of B_n divided by n."""
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(model, ToricDiagonalFamily):
        m = Fraction(1, n + 1)
        return AtomicMeasure.from_pairs((model.phi(Fraction(i, n)), m) for i in range(n + 1))
    counts, unit = _monomial_value_counts(model, n, budget)
    dim = model.dimension(n)
    return AtomicMeasure.from_pairs((key * unit / n, Fraction(c, dim)) for key, c in counts.items())


def filtration_measure(model: Model, n: int, budget: int = DEFAULT_MONOMIAL_BUDGET) -> AtomicMeasure:
    """nu_{B_n} itself, before the 1/n rescaling."""
    return dilate(graded_measure(model, n, budget), n)


# -- limits --------------------------------------------------------------------


def _distinct_weights(weights: Sequence[float]) -> list[float]:
    # the closed-form tail needs pairwise distinct weights; ties are split by
    # a relative 1e-9 nudge, which moves the law by at most that much in W1
    out: list[float] = []
    scale = max(1.0, max(abs(w) for w in weights))
    for w in weights:
        while any(abs(w - u) < 1e-9 * scale for u in out):
            w += 1e-9 * scale
        out.append(w)
    return out


def limit_tail(model: MonomialAlgebraModel, x: float) -> float:
    """P(sum a_i w_i > x) for a uniform on the standard simplex."""
    w = _distinct_weights(model.weights)
    q = len(w)
    if q == 1:
        return 1.0 if w[0] > x else 0.0
    with mpmath.workdps(60):
        total = mpmath.mpf(0)
        for i, wi in enumerate(w):
            d = mpmath.mpf(wi) - x
            if d <= 0:
                continue
            den = mpmath.mpf(1)
            for j, wj in enumerate(w):
                if j != i:
                    den *= mpmath.mpf(wi) - mpmath.mpf(wj)
            total += d ** (q - 1) / den
        return float(min(max(total, 0), 1))


def _quantile(model: MonomialAlgebraModel, s: float) -> float:
    """x with P(X > x) = s."""
    lo, hi = min(model.weights), max(model.weights)
    for _ in range(200):
        mid = (lo + hi) / 2
        if limit_tail(model, mid) > s:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(lo)):
            break
    return (lo + hi) / 2


def limit_measure(model: Model, m: int = 1000) -> AtomicMeasure:
    """Atomic approximation of the limit law with m atoms at quantile midpoints.

    The W1 distance to the true limit is at most (sup - inf of the support) / m.
    """
    if m < 1:
        raise ValueError("resolution must be positive")
    if isinstance(model, MonomialAlgebraModel) and (model.q == 1 or len(set(model.weights)) == 1):
        return AtomicMeasure(((model.weights[0], Fraction(1)),))
    mass = Fraction(1, m)
    if isinstance(model, ToricDiagonalFamily):
        pts = ((model.phi(Fraction(2 * k + 1, 2 * m)), mass) for k in range(m))
    else:
        # atom k sits at the upper quantile of level (k + 1/2)/m
        pts = ((_quantile(model, (k + 0.5) / m), mass) for k in range(m))
    return AtomicMeasure.from_pairs(pts)


def limit_sampling_error(model: Model, m: int) -> float:
    if isinstance(model, ToricDiagonalFamily):
        vals = [v for _, v in model.phi.points]
    else:
        vals = list(model.weights)
    return (max(vals) - min(vals)) / m


# -- lambda sequences and the bigness test -------------------------------------


@dataclass(frozen=True)
class LambdaRow:
    n: int
    lambda_max: float  # lambda_max(B_n) / n
    lambda_plus: float  # lambda_+(B_n) / n


def lambda_sequences(model: Model, n_max: int, ns: Optional[Sequence[int]] = None,
                     budget: int = DEFAULT_MONOMIAL_BUDGET) -> list[LambdaRow]:
    rows = []
    for n in ns if ns is not None else range(1, n_max + 1):
        nu = graded_measure(model, n, budget)
        rows.append(LambdaRow(n, nu.support_max, max_value(polygon_of(nu))[1]))
    return rows


def _status(value: float, err: float, threshold: float) -> str:
    if value - err > threshold:
        return "positive"
    if value + err <= threshold:
        return "nonpositive"
    return "undetermined"


@dataclass(frozen=True)
class BignessResult:
    lambda_max: float
    lambda_max_err: float
    lambda_plus: float
    lambda_plus_err: float
    max_status: str
    plus_status: str

    @property
    def limit_lambda_max_positive(self) -> Optional[bool]:
        return {"positive": True, "nonpositive": False}.get(self.max_status)

    @property
    def limit_lambda_plus_positive(self) -> Optional[bool]:
        return {"positive": True, "nonpositive": False}.get(self.plus_status)

    @property
    def consistent(self) -> bool:
        """False only when both limits are decided and disagree."""
        a, b = self.limit_lambda_max_positive, self.limit_lambda_plus_positive
        return a is None or b is None or a == b

    def to_json(self) -> dict:
        return {
            "lambda_max": self.lambda_max, "lambda_max_err": self.lambda_max_err,
            "lambda_plus": self.lambda_plus, "lambda_plus_err": self.lambda_plus_err,
            "max_status": self.max_status, "plus_status": self.plus_status,
            "consistent": self.consistent,
        }


def bigness_check(model: Model, n_max: int, threshold: float = 0.0,
                  budget: int = DEFAULT_MONOMIAL_BUDGET) -> BignessResult:
    """Tail estimates of lim lambda_max/n and lim lambda_+/n, with error bars
    |value(n_max) - value(n_max // 2)|."""
    half = max(1, n_max // 2)
    lo, hi = lambda_sequences(model, n_max, [half, n_max], budget)
    emax = abs(hi.lambda_max - lo.lambda_max)
    eplus = abs(hi.lambda_plus - lo.lambda_plus)
    return BignessResult(hi.lambda_max, emax, hi.lambda_plus, eplus,
                         _status(hi.lambda_max, emax, threshold), _status(hi.lambda_plus, eplus, threshold))


@dataclass(frozen=True)
class CountingBound:
    u: int
    v: int
    ratio: Fraction
    limit: float


def counting_bound(q: int, alpha: float, beta: float, n: int) -> CountingBound:
    """u_n = C(n - floor(beta n / (alpha + beta)) + q - 1, q - 1), v_n = C(n + q - 1, q - 1)."""
    if q < 2 or n < 1:
        raise ValueError("need q >= 2 and n >= 1")
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    a, b = Fraction(alpha), Fraction(beta)
    cut = math.floor(b * n / (a + b))
    u = math.comb(n - cut + q - 1, q - 1)
    v = math.comb(n + q - 1, q - 1)
    return CountingBound(u, v, Fraction(u, v), float((a / (a + b)) ** (q - 1)))


# -- multiplicativity audit ----------------------------------------------------


@dataclass
class AuditReport:
    checked: int
    exhaustive: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"checked": self.checked, "exhaustive": self.exhaustive,
                "violations": self.violations[:50], "n_violations": len(self.violations)}


def _toric_pairs(n_max):
    for n in range(1, n_max):
        for m in range(1, n_max - n + 1):
            yield n, m


def quasi_filtration_audit(model: Model, n_max: int, samples: int = 20000, seed: int = 0,
                           exhaustive_limit: int = 500_000, tol: float = 1e-9) -> AuditReport:
    """Check lambda(xy) >= lambda(x) + lambda(y) - f(deg x) - f(deg y) on basis elements.

    Monomials multiply to monomials and e_{n,i} e_{m,j} = e_{n+m,i+j}, so basis
    products cover the whole multiplication table.
    """
    f = model.f
    report = AuditReport(0, True)
    if isinstance(model, ToricDiagonalFamily):
        lam = {n: np.array([n * model.phi(Fraction(i, n)) for i in range(n + 1)]) for n in range(1, n_max + 1)}
        total = sum((n + 1) * (m + 1) for n, m in _toric_pairs(n_max))
        if total <= exhaustive_limit:
            for n, m in _toric_pairs(n_max):
                lhs = lam[n + m][np.add.outer(np.arange(n + 1), np.arange(m + 1))]
                rhs = lam[n][:, None] + lam[m][None, :] - f(n) - f(m)
                bad = np.argwhere(lhs < rhs - tol * (1 + np.abs(rhs)))
                report.checked += lhs.size
                report.violations.extend((n, int(i), m, int(j)) for i, j in bad)
            return report
        report.exhaustive = False
        rng = random.Random(seed)
        for _ in range(samples):
            n = rng.randint(1, n_max - 1)
            m = rng.randint(1, n_max - n)
            i, j = rng.randint(0, n), rng.randint(0, m)
            rhs = lam[n][i] + lam[m][j] - f(n) - f(m)
            report.checked += 1
            if lam[n + m][i + j] < rhs - tol * (1 + abs(rhs)):
                report.violations.append((n, i, m, j))
        return report

    # monomial model: lambda is additive on exponent vectors
    w = np.array(model.weights)
    rng = np.random.default_rng(seed)

    def value(a):
        return float(np.dot(a, w))

    def monomials_q(d, q):
        if q == 1:
            yield (d,)
            return
        for first in range(d, -1, -1):
            for rest in monomials_q(d - first, q - 1):
                yield (first,) + rest

    pairs_total = sum(model.dimension(n) * model.dimension(m) for n, m in _toric_pairs(n_max))
    if pairs_total <= exhaustive_limit:
        basis = {d: [np.array(a) for a in monomials_q(d, model.q)] for d in range(1, n_max + 1)}
        for n, m in _toric_pairs(n_max):
            for a in basis[n]:
                for b in basis[m]:
                    rhs = value(a) + value(b) - f(n) - f(m)
                    report.checked += 1
                    if value(a + b) < rhs - tol * (1 + abs(rhs)):
                        report.violations.append((a.tolist(), b.tolist()))
        return report
    report.exhaustive = False
    for _ in range(samples):
        n = int(rng.integers(1, n_max))
        m = int(rng.integers(1, n_max - n + 1))
        a = rng.multinomial(n, [1 / model.q] * model.q)
        b = rng.multinomial(m, [1 / model.q] * model.q)
        rhs = value(a) + value(b) - f(n) - f(m)
        report.checked += 1
        if value(a + b) < rhs - tol * (1 + abs(rhs)):
            report.violations.append((a.tolist(), b.tolist()))
    return report
