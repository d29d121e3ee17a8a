import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from hnpoly.graded import (
    MonomialAlgebraModel, Penalty, PiecewiseLinear, ToricDiagonalFamily, bigness_check, counting_bound,
    graded_measure, lambda_sequences, limit_measure, limit_sampling_error, limit_tail, model_from_json,
    quasi_filtration_audit,
)
from hnpoly.measures import AtomicMeasure, dirac, w1_distance

tent = ToricDiagonalFamily(PiecewiseLinear(((0, 0), (0.5, 0.5), (1, 0))))
uniform_model = MonomialAlgebraModel((1, 0))


def test_measure_examples():
    third = Fraction(1, 3)
    assert graded_measure(uniform_model, 2) == AtomicMeasure(((0.0, third), (0.5, third), (1.0, third)))
    for n in (1, 5, 17):
        assert graded_measure(MonomialAlgebraModel((2,)), n) == dirac(2)
    assert graded_measure(tent, 4) == AtomicMeasure(
        ((0.0, Fraction(2, 5)), (0.25, Fraction(2, 5)), (0.5, Fraction(1, 5))))


def test_measure_matches_monomial_enumeration():
    model = MonomialAlgebraModel((0.7, -0.3, 1.1))
    n = 9
    pts = []
    for a in itertools.product(range(n + 1), repeat=3):
        if sum(a) == n:
            pts.append((sum(ai * wi for ai, wi in zip(a, model.weights)) / n, Fraction(1, model.dimension(n))))
    want = AtomicMeasure.from_pairs(pts)
    got = graded_measure(model, n)
    assert got.is_probability
    # binning to the 1e-6 grid moves atoms by at most q * 1e-6 / 2 per unit degree
    assert w1_distance(got, want) <= 3e-6


def test_limit_examples():
    m = 1000
    lim = limit_measure(uniform_model, m)
    assert w1_distance(graded_measure(uniform_model, 200), lim) <= 2 / 200 + 1 / m
    assert limit_measure(MonomialAlgebraModel((2,))) == dirac(2)
    flat = ToricDiagonalFamily(PiecewiseLinear(((0, 0.3), (1, 0.3))))
    assert limit_measure(flat, 50) == dirac(0.3)


def test_limit_tail_against_sampling():
    # Dirichlet(1, ..., 1) samples are the uniform law on the simplex
    rng = np.random.default_rng(7)
    model = MonomialAlgebraModel((1.0, 0.5, -1.0, 0.2))
    X = rng.dirichlet(np.ones(4), size=200_000) @ np.array(model.weights)
    for x in (-0.5, 0.0, 0.3, 0.7):
        assert limit_tail(model, x) == pytest.approx(np.mean(X > x), abs=5e-3)


def test_limit_with_tied_weights():
    model = MonomialAlgebraModel((1.0, 1.0, 0.0))
    # sum of two of three Dirichlet(1,1,1) coordinates is Beta(2, 1): P(X > x) = 1 - x^2
    for x in (0.2, 0.5, 0.9):
        assert limit_tail(model, x) == pytest.approx(1 - x * x, abs=1e-6)


def test_graded_converges_to_limit():
    model = MonomialAlgebraModel((1.0, 0.5, -1.0))
    lim = limit_measure(model, 400)
    errs = [w1_distance(graded_measure(model, n), lim) for n in (25, 50, 100)]
    assert errs[2] < errs[0]
    assert errs[2] <= 4 / 100 + limit_sampling_error(model, 400)


def test_lambda_sequence_examples():
    rows = lambda_sequences(uniform_model, 200, [10, 50, 200])
    assert all(r.lambda_max == 1 for r in rows)
    assert abs(rows[-1].lambda_plus - 0.5) <= 0.01
    neg = lambda_sequences(MonomialAlgebraModel((-1, -2)), 20)
    assert all(r.lambda_plus == 0 for r in neg)
    for r in lambda_sequences(MonomialAlgebraModel((2, -3, 0.5)), 30):
        assert r.lambda_plus <= r.lambda_max


def test_bigness_examples():
    assert bigness_check(uniform_model, 100).max_status == "positive"
    assert bigness_check(uniform_model, 100).plus_status == "positive"
    neg = bigness_check(MonomialAlgebraModel((-1, -2)), 100)
    assert (neg.limit_lambda_max_positive, neg.limit_lambda_plus_positive) == (False, False)
    alpha, beta = 0.5, 2.0
    mixed = bigness_check(MonomialAlgebraModel((3 * alpha, -beta)), 100)
    assert (mixed.limit_lambda_max_positive, mixed.limit_lambda_plus_positive) == (True, True)
    assert mixed.consistent
    # a threshold sitting on the tail gives no verdict
    assert bigness_check(uniform_model, 100, threshold=0.5).plus_status == "undetermined"


def test_counting_bound_examples():
    cb = counting_bound(2, 1, 1, 10)
    assert (cb.u, cb.v, cb.ratio, cb.limit) == (6, 11, Fraction(6, 11), 0.5)
    for alpha, beta in ((1, 1), (2, 0.5), (0.3, 1.7)):
        cb = counting_bound(2, alpha, beta, 10**4)
        assert abs(float(cb.ratio) - alpha / (alpha + beta)) <= 1e-3
    assert counting_bound(3, 2, 1, 5).limit == pytest.approx(4 / 9)
    with pytest.raises(ValueError):
        counting_bound(3, 1, 0, 5)


def test_audit_examples():
    assert quasi_filtration_audit(uniform_model, 10).ok
    rep = quasi_filtration_audit(tent, 40)
    assert rep.ok and rep.exhaustive
    vee = ToricDiagonalFamily(PiecewiseLinear(((0, 0), (0.5, -0.5), (1, 0))))
    assert not quasi_filtration_audit(vee, 12).ok
    sampled = quasi_filtration_audit(MonomialAlgebraModel((1, 2, 3), Penalty("log", 0.5)), 60, samples=500)
    assert sampled.ok and not sampled.exhaustive and sampled.checked == 500


def test_penalties_are_sublinear():
    for f in (Penalty(), Penalty("log", 2.0), Penalty("sqrt", 3.0)):
        assert f(10**8) / 10**8 < 1e-3
    with pytest.raises(ValueError):
        Penalty("linear", 1.0)


def test_model_json():
    for m in (uniform_model, tent, MonomialAlgebraModel((1, 2), Penalty("sqrt", 0.5))):
        assert model_from_json(m.to_json()) == m


# -- invariants ----------------------------------------------------------------


@pytest.mark.parametrize("model", [uniform_model, MonomialAlgebraModel((2, -1, 0.5)), tent])
def test_probability_and_support(model):
    top = max(model.weights) if isinstance(model, MonomialAlgebraModel) else model.phi.maximum
    for n in (1, 7, 30):
        nu = graded_measure(model, n)
        assert nu.is_probability
        assert nu.support_max <= top + 1e-9


@pytest.mark.parametrize("model", [uniform_model, MonomialAlgebraModel((2, -1, 0.5)), tent])
def test_cauchy_rate(model):
    consts = []
    for n in (25, 50, 100):
        d = w1_distance(graded_measure(model, n), graded_measure(model, 2 * n))
        consts.append(n * d)
        lp = abs(lambda_sequences(model, 0, [n])[0].lambda_plus - lambda_sequences(model, 0, [2 * n])[0].lambda_plus)
        assert n * lp <= 2.0
    print("n * W1(nu_n, nu_2n):", consts)
    assert max(consts) <= 2.0
