#!/usr/bin/env python3
"""Random lattices: |h0 - deg_+| against r log(r+2), and the first-minimum bound."""
import argparse
import math
import time

import numpy as np

from hnpoly.lattices import HermitianLattice, first_minimum, h0_vs_degplus, hn_polygon


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=50, help="lattices per rank")
    ap.add_argument("--max-rank", type=int, default=6)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"{'r':>2} {'max gap/(r log(r+2))':>22} {'max |mu_max + log l1| - log(r)/2':>34} {'sec':>6}")
    for r in range(1, args.max_rank + 1):
        t0 = time.perf_counter()
        c = slack = -math.inf
        for _ in range(args.count):
            B = rng.normal(size=(r, r)) * np.exp(rng.uniform(-1, 1, r))[:, None]
            E = HermitianLattice(B @ B.T + 1e-3 * np.eye(r))
            c = max(c, h0_vs_degplus(E)[2] / (r * math.log(r + 2)))
            slack = max(slack, abs(hn_polygon(E).max_slope + 0.5 * math.log(first_minimum(E))) - 0.5 * math.log(r))
        print(f"{r:>2} {c:>22.4f} {slack:>34.4f} {time.perf_counter() - t0:>6.2f}")


if __name__ == "__main__":
    main()
