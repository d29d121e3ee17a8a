from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hnpoly.measures import (
    ZERO, AtomicMeasure, dilate, dirac, dominates, mix, positive_part_integral, translate, truncate,
    w1_distance,
)
from hnpoly.polygons import max_value, polygon_of

from oracles import prob_measures, quantile_w1

half = Fraction(1, 2)


def M(*pairs):
    return AtomicMeasure.from_pairs((x, Fraction(m)) for x, m in pairs)


def test_dirac():
    assert dirac(0).atoms == ((0.0, 1),)
    assert dirac(-3.5).atoms == ((-3.5, 1),)
    assert translate(dirac(0), 2) == dirac(2)


def test_validation():
    with pytest.raises(ValueError):
        AtomicMeasure(((1.0, Fraction(1)), (0.0, Fraction(0))))
    with pytest.raises(ValueError):
        AtomicMeasure(((1.0, half), (0.0, half)))
    with pytest.raises(ValueError):
        AtomicMeasure(((0.0, Fraction(2, 3)), (1.0, Fraction(2, 3))))
    with pytest.raises(TypeError):
        AtomicMeasure(((0.0, 1.0),))
    assert ZERO.total_mass == 0 and not ZERO.is_probability


def test_translate_examples():
    nu = M((1, half), (2, half))
    assert translate(nu, 3) == M((4, half), (5, half))
    assert translate(nu, 0) == nu
    nu = M((0, half), (1, half))
    P, Q = polygon_of(nu), polygon_of(translate(nu, 2))
    for t in (0, Fraction(1, 4), half, 1):
        assert Q(t) - P(t) == pytest.approx(2 * float(t), abs=1e-15)


def test_dilate_examples():
    assert dilate(dirac(2), 0.5) == dirac(1)
    nu = M((-1, half), (1, half))
    assert dilate(nu, 1) == nu
    assert max_value(polygon_of(nu))[1] == 0.5
    assert max_value(polygon_of(dilate(nu, 3)))[1] == 1.5
    with pytest.raises(ValueError):
        dilate(nu, 0)
    with pytest.raises(ValueError):
        dilate(nu, -1)


def test_truncate_examples():
    assert truncate(M((-2, half), (1, half)), 0) == M((0, half), (1, half))
    assert truncate(dirac(1), 0) == dirac(1)
    with pytest.raises(ValueError):
        truncate(M((0, half)), 0)


def test_mix_examples():
    assert mix([(half, dirac(0)), (half, dirac(0))]) == dirac(0)
    assert mix([(Fraction(1, 3), dirac(0)), (Fraction(2, 3), dirac(1))]) == M((0, Fraction(1, 3)), (1, Fraction(2, 3)))
    with pytest.raises(ValueError):
        mix([(Fraction(-1, 2), dirac(0))])
    with pytest.raises(ValueError):
        mix([(Fraction(2, 3), dirac(0)), (Fraction(2, 3), dirac(1))])


def test_dominates_examples():
    assert dominates(dirac(1), dirac(0))
    assert not dominates(dirac(0), dirac(1))
    nu = M((0, half), (2, half))
    assert dominates(nu, nu)
    # incomparable: tails differ in sign at x = 0 and x = 1
    assert not dominates(nu, dirac(1))
    assert not dominates(dirac(1), nu)


def test_w1_examples():
    assert w1_distance(dirac(0), dirac(3)) == 3
    nu = M((0, half), (1, half))
    assert w1_distance(nu, nu) == 0
    uni = M(*[(x, Fraction(1, 4)) for x in (0, 1 / 3, 2 / 3, 1)])
    assert w1_distance(nu, uni) == pytest.approx(1 / 6, abs=1e-15)


def test_positive_part_examples():
    assert positive_part_integral(dirac(2), 0) == 2
    assert positive_part_integral(M((-1, half), (1, half)), 0) == 0.5


def test_json_roundtrip():
    nu = M((0.1, Fraction(1, 3)), (-2.7e-5, Fraction(2, 3)))
    assert AtomicMeasure.from_json(nu.to_json()) == nu


# -- properties ----------------------------------------------------------------

reals = st.floats(min_value=-5, max_value=5, allow_nan=False)
pos = st.floats(min_value=0.05, max_value=5)


@given(prob_measures(), reals, pos, reals)
def test_operators_keep_mass(nu, a, eps, alpha):
    assert translate(nu, a).total_mass == 1
    assert dilate(nu, eps).total_mass == 1
    assert truncate(nu, alpha).total_mass == 1


@given(prob_measures(), reals, reals)
def test_translate_semigroup(nu, a, b):
    assert w1_distance(translate(translate(nu, a), b), translate(nu, a + b)) <= 1e-12 * (1 + abs(a) + abs(b) + 20)


@given(prob_measures(), pos, pos)
def test_dilate_semigroup(nu, e1, e2):
    assert w1_distance(dilate(dilate(nu, e1), e2), dilate(nu, e1 * e2)) <= 1e-12 * 20 * e1 * e2 + 1e-13


@given(prob_measures(), pos, reals)
def test_dilate_commutes_with_truncation(nu, eps, alpha):
    lhs = truncate(dilate(nu, eps), eps * alpha)
    rhs = dilate(truncate(nu, alpha), eps)
    assert w1_distance(lhs, rhs) <= 1e-12 * (20 * eps + abs(eps * alpha) + 1)


@given(prob_measures(), prob_measures(), reals)
def test_truncation_is_1_lipschitz(nu1, nu2, alpha):
    assert w1_distance(truncate(nu1, alpha), truncate(nu2, alpha)) <= w1_distance(nu1, nu2) + 1e-12


@given(prob_measures(), prob_measures())
def test_w1_matches_quadrature(nu1, nu2):
    # the masses here have denominators <= 160, far coarser than the 1/20000 grid
    assert w1_distance(nu1, nu2) == pytest.approx(quantile_w1(nu1, nu2), abs=40 * 2 / 20000 + 1e-9)


@given(prob_measures(), prob_measures(), prob_measures())
def test_w1_metric(a, b, c):
    assert w1_distance(a, b) == pytest.approx(w1_distance(b, a), abs=1e-12)
    assert w1_distance(a, c) <= w1_distance(a, b) + w1_distance(b, c) + 1e-9
    assert (w1_distance(a, b) == 0) == (a == b)


@given(prob_measures(), st.floats(min_value=0, max_value=5))
def test_shift_right_dominates(nu, h):
    assert dominates(translate(nu, h), nu)


@given(prob_measures(), prob_measures())
def test_dominance_orders_polygons(nu1, nu2):
    if dominates(nu1, nu2):
        P1, P2 = polygon_of(nu1), polygon_of(nu2)
        for t in sorted(set(P1.ts) | set(P2.ts)):
            assert P1(t) >= P2(t) - 1e-9


@given(prob_measures(), reals)
def test_positive_part_is_polygon_max(nu, a):
    assert positive_part_integral(nu, a) == pytest.approx(max_value(polygon_of(translate(nu, -a)))[1], abs=1e-9)
