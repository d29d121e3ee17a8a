"""The ten acceptance criteria, one test (and one verdict line) each."""
import math
from fractions import Fraction

import numpy as np

from hnpoly.arvol import (
    SectionFamily, asymptotic_polygon, bigness_criterion, continuity_experiment, polygon_via_volumes,
    volume_experiment,
)
from hnpoly.graded import (
    MonomialAlgebraModel, counting_bound, graded_measure, lambda_sequences, limit_measure, limit_sampling_error,
)
from hnpoly.lattices import HermitianLattice, degree, first_minimum, h0, h0_vs_degplus, hn_polygon
from hnpoly.measures import (
    AtomicMeasure, dilate, dominates, positive_part_integral, translate, truncate, w1_distance,
)
from hnpoly.polygons import legendre_dual, max_value, polygon_of, sup_distance

from oracles import random_measure

N_MEASURES = 200
identity = SectionFamily.toric([(0, 0), (1, 1)])


def random_lattice(rng, r, spread=1.0):
    B = rng.normal(size=(r, r)) * np.exp(rng.uniform(-spread, spread, r))[:, None]
    return HermitianLattice(B @ B.T + 1e-3 * np.eye(r))


def push_right(rng, nu):
    """A measure dominating nu: every atom moves right by a random amount."""
    return AtomicMeasure.from_pairs((x + float(rng.exponential()), m) for x, m in nu.atoms)


def test_operator_identities(rng, verdict):
    worst = 0.0
    truncation_ok = max_ok = True
    for _ in range(N_MEASURES):
        nu = random_measure(rng)
        a, eps = float(rng.uniform(-5, 5)), float(rng.uniform(0.1, 4))
        P, Pt, Pd = polygon_of(nu), polygon_of(translate(nu, a)), polygon_of(dilate(nu, eps))
        for t in set(P.ts) | set(Pt.ts) | set(Pd.ts):
            worst = max(worst, abs(Pt(t) - (P(t) + a * float(t))), abs(Pd(t) - eps * P(t)))
        hi = push_right(rng, nu)
        alpha = float(rng.uniform(-6, 6))
        truncation_ok &= dominates(hi, nu) and dominates(truncate(hi, alpha), truncate(nu, alpha))
        low = float(rng.uniform(-6, 0))
        max_ok &= max_value(polygon_of(truncate(nu, low)))[1] == max_value(P)[1]
    ok = worst <= 1e-12 and truncation_ok and max_ok
    verdict(1, ok, f"breakpoint error {worst:.2e}, truncation keeps order {truncation_ok}, max invariant {max_ok}")


def test_max_equals_positive_part(rng, verdict):
    worst_max = worst_dual = 0.0
    for _ in range(N_MEASURES):
        nu = random_measure(rng)
        P = polygon_of(nu)
        worst_max = max(worst_max, abs(max_value(P)[1] - positive_part_integral(nu, 0.0)))
        dual = legendre_dual(P)
        for a in rng.uniform(-6, 6, 5):
            worst_dual = max(worst_dual, abs(dual(float(a)) - positive_part_integral(nu, float(a))))
    ok = worst_max <= 1e-12 and worst_dual <= 1e-12
    verdict(2, ok, f"max P vs integral {worst_max:.2e}, dual vs integral {worst_dual:.2e}")


def test_lattice_laws(rng, verdict):
    twist_err = 0.0
    for _ in range(100):
        E = random_lattice(rng, int(rng.integers(1, 7)))
        a = float(rng.uniform(-3, 3))
        twist_err = max(twist_err, abs(degree(E.twist(a)) - degree(E) - a * E.rank))
    vanish = True
    for _ in range(100):
        E = random_lattice(rng, int(rng.integers(1, 5)))
        E = E.twist(-hn_polygon(E).max_slope - float(rng.uniform(0.01, 2)))
        vanish &= hn_polygon(E).max_slope < 0 and h0(E) == 0
    sort_err = 0.0
    for _ in range(100):
        r = int(rng.integers(1, 9))
        s = rng.uniform(-2, 2, r)
        P = hn_polygon(HermitianLattice.diagonal(np.exp(-2 * s)))
        cum = np.concatenate([[0.0], np.cumsum(np.sort(s)[::-1])])
        sort_err = max(sort_err, max(abs(P(k) - cum[k]) for k in range(r + 1)))
    ok = twist_err <= 1e-10 and vanish and sort_err <= 1e-9
    verdict(3, ok, f"twist law {twist_err:.2e}, negative slopes give h0 = 0 {vanish}, sort oracle {sort_err:.2e}")


def test_gap_budget(rng, verdict):
    ratios = []
    for _ in range(100):
        r = int(rng.integers(1, 7))
        _, _, gap = h0_vs_degplus(random_lattice(rng, r))
        ratios.append(gap / (r * math.log(r + 2)))
    c = max(ratios)
    verdict(4, c <= 3, f"max gap / (r log(r+2)) = {c:.3f} (budget 3)")


def test_first_minimum_bound(rng, verdict):
    worst = -math.inf
    ok = True
    for _ in range(100):
        r = int(rng.integers(1, 5))
        E = random_lattice(rng, r)
        lhs = abs(hn_polygon(E).max_slope + 0.5 * math.log(first_minimum(E)))
        ok &= lhs <= 0.5 * math.log(r)
        worst = max(worst, lhs - 0.5 * math.log(r))
    verdict(5, ok, f"max of |mu_max + log(lambda_1)| - log(r)/2 = {worst:.3f}")


def test_graded_convergence(verdict):
    model = MonomialAlgebraModel((1, 0))
    m = 1000
    lim = limit_measure(model, m)
    err = limit_sampling_error(model, m)
    w1 = {n: w1_distance(graded_measure(model, n), lim) for n in (50, 100, 200)}
    w1_ok = all(d <= 2 / n + err for n, d in w1.items())
    lam = lambda_sequences(model, 0, [200])[0].lambda_plus
    triples = [(2, 1.0, 1.0), (3, 2.0, 1.0), (4, 0.5, 1.5)]
    cb_err = max(abs(float(counting_bound(q, a, b, 10**4).ratio) - (a / (a + b)) ** (q - 1)) for q, a, b in triples)
    ok = w1_ok and abs(lam - 0.5) <= 0.01 and cb_err <= 1e-3
    detail = ", ".join(f"W1(n={n}) {d:.4f}" for n, d in w1.items())
    verdict(6, ok, f"{detail}, lambda_plus/n {lam:.4f}, counting ratio error {cb_err:.2e}")


def test_volume_as_limit(verdict):
    rep = volume_experiment(SectionFamily.constant(1), 40, ns=[10, 20, 40])
    last = rep.row(40)
    const_ok = abs(last.h0_normalized - 2) <= 0.06 and abs(last.deg_plus_normalized - 2) <= 0.06
    gaps = [rep.row(n).gap for n in (10, 20, 40)]
    decreasing = gaps[0] > gaps[1] > gaps[2]
    tor = volume_experiment(identity, 40).row(40)
    tor_ok = abs(tor.h0_normalized - 1) <= 0.05 and abs(tor.deg_plus_normalized - 1) <= 0.05
    ok = const_ok and decreasing and tor_ok
    verdict(7, ok, f"a=1: h0 {last.h0_normalized:.4f}, deg+ {last.deg_plus_normalized:.4f}, "
                   f"column gaps {', '.join(f'{g:.4f}' for g in gaps)} (decreasing {decreasing}); "
                   f"phi=t: h0 {tor.h0_normalized:.4f}, deg+ {tor.deg_plus_normalized:.4f}")


def test_bigness_bound(verdict):
    rep = bigness_criterion(SectionFamily.toric([(0, -0.5), (1, 0.5)]), 40)
    ratio_err = rep.volume.err / 2 / rep.vol_L
    ok = (abs(rep.ratio - 1 / 8) <= 0.02 and abs(rep.mu_max.value - 0.5) <= 0.02
          and rep.ratio + ratio_err < rep.mu_max.value - rep.mu_max.err and rep.is_big)
    verdict(8, ok, f"vol/(2 vol L) {rep.ratio:.4f} +- {ratio_err:.4f}, "
                   f"mu_max/n {rep.mu_max.value:.4f} +- {rep.mu_max.err:.4f}")


def test_continuity_and_homogeneity(verdict):
    base = asymptotic_polygon(identity, 40).polygon
    sq = asymptotic_polygon(identity.pth_power(2), 40).polygon
    homog = sup_distance(sq, base.scale(2))
    rows = continuity_experiment(SectionFamily.constant(1), 3.0, None, [2, 4, 8], 40)
    ds = [r.distance for r in rows]
    closed = max(abs(r.distance - 3 / r.p) for r in rows)
    ok = homog <= 0.05 and ds[0] > ds[1] > ds[2] and closed <= 0.05
    verdict(9, ok, f"p=2 homogeneity {homog:.4f}, distances {', '.join(f'{d:.4f}' for d in ds)}, "
                   f"vs 3/p {closed:.2e}")


def test_two_route_polygon(verdict):
    grid = [-0.25, 0, 0.25, 0.5, 0.75, 1.0]
    via = polygon_via_volumes(identity, grid, 40)
    d = sup_distance(via.polygon, asymptotic_polygon(identity, 40).polygon)
    verdict(10, d <= 0.08, f"sup distance {d:.4f}")
