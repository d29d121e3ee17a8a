#!/usr/bin/env python3
"""Normalized h0 and deg_+ of the model families against their closed-form limits.

Also prints the column gap |h0 - deg_+| * 2 / n^2 next to the ball-volume
prediction, which shows the gap of the constant family peaking near n = 46 (only
printed for that family).
"""
import argparse
import math
from pathlib import Path

from scipy.special import gammaln

from hnpoly.arvol import SectionFamily, volume_experiment

FAMILIES = {
    "constant a=1": (SectionFamily.constant(1.0), 2.0),
    "toric phi=t": (SectionFamily.toric([(0, 0), (1, 1)]), 1.0),
    "toric phi=t-1/2": (SectionFamily.toric([(0, -0.5), (1, 0.5)]), 0.25),
}


def ball_gap(rank: int, n: int) -> float:
    log_ball = (rank / 2) * math.log(math.pi) - gammaln(rank / 2 + 1)
    return abs(log_ball) * 2 / n**2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nmax", type=int, default=160)
    ap.add_argument("--outdir", type=Path, default=None, help="write one CSV per family here")
    args = ap.parse_args()

    ns = [n for n in (5, 10, 20, 40, 80, 160, 320) if n <= args.nmax]
    for name, (F, limit) in FAMILIES.items():
        rep = volume_experiment(F, args.nmax, ns)
        print(f"\n{name}  (limit {limit}, vol L estimate {rep.vol_L:.4f}, gap constant {rep.gap_constant:.3f})")
        print(f"{'n':>5} {'h0*2/n^2':>10} {'deg+*2/n^2':>11} {'mu+*2/n':>9} {'mu_max/n':>9} {'gap':>8} {'ball':>8}")
        for r in rep.rows:
            ball = f"{ball_gap(r.rank, r.n):.5f}" if r.mu_max > 0 else "0"
            print(f"{r.n:>5} {r.h0_normalized:>10.5f} {r.deg_plus_normalized:>11.5f} {r.mu_plus_normalized:>9.5f} "
                  f"{r.mu_max_normalized:>9.5f} {r.gap:>8.5f} {ball if name.startswith('constant') else '':>8}")
        if args.outdir:
            args.outdir.mkdir(parents=True, exist_ok=True)
            slug = name.replace(" ", "_").replace("=", "").replace("/", "")
            (args.outdir / f"{slug}.csv").write_text(rep.to_csv())


if __name__ == "__main__":
    main()
