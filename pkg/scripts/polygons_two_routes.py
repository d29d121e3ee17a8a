#!/usr/bin/env python3
"""Asymptotic polygon from the HN measures vs the one rebuilt from twisted volumes."""
import argparse

import numpy as np

from hnpoly.arvol import SectionFamily, asymptotic_polygon, continuity_experiment, polygon_via_volumes
from hnpoly.polygons import sup_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=40)
    ap.add_argument("--a-grid", default="-0.25,0,0.25,0.5,0.75,1.0")
    args = ap.parse_args()
    grid = [float(a) for a in args.a_grid.split(",")]

    F = SectionFamily.toric([(0, 0), (1, 1)])
    A = asymptotic_polygon(F, args.nmax)
    V = polygon_via_volumes(F, grid, args.nmax)
    print("a      vol(L(-a)) / (2 vol L)   integral (x-a)_+ over Unif[0,1]")
    for a, g in V.samples:
        exact = 0.5 * (1 - min(max(a, 0), 1)) ** 2 if a >= 0 else 0.5 - a
        print(f"{a:>5.2f}  {g:>22.5f}   {exact:>10.5f}")
    print(f"\nsup distance between the two routes: {sup_distance(A.polygon, V.polygon):.5f}")
    ts = np.linspace(0, 1, 11)
    print("t     measure route  volume route  t - t^2/2")
    for t in ts:
        print(f"{t:.1f}  {A.polygon(t):>13.5f}  {V.polygon(t):>12.5f}  {t - t * t / 2:>9.5f}")

    print("\ncontinuity, perturbation by slope 3 (distance should track 3/p)")
    for name, G in (("constant a=1", SectionFamily.constant(1.0)), ("toric phi=t", F)):
        rows = continuity_experiment(G, 3.0, None, [1, 2, 4, 8, 16], args.nmax)
        print(name, "  ".join(f"p={r.p}: {r.distance:.4f}" for r in rows))


if __name__ == "__main__":
    main()
