#!/usr/bin/env python3
"""Convergence of graded HN measures, lambda_+ and the counting ratio."""
import argparse

from hnpoly.graded import (
    MonomialAlgebraModel, PiecewiseLinear, ToricDiagonalFamily, counting_bound, graded_measure, lambda_sequences,
    limit_measure, limit_sampling_error,
)
from hnpoly.measures import w1_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=1000, help="atoms in the sampled limit measure")
    args = ap.parse_args()

    models = {
        "weights (1,0)": MonomialAlgebraModel((1, 0)),
        "weights (1,0.5,-1)": MonomialAlgebraModel((1, 0.5, -1)),
        "toric tent": ToricDiagonalFamily(PiecewiseLinear(((0, 0), (0.5, 0.5), (1, 0)))),
    }
    for name, model in models.items():
        lim = limit_measure(model, args.m)
        err = limit_sampling_error(model, args.m)
        print(f"\n{name}  (limit sampled with {args.m} atoms, error <= {err:.2e})")
        print(f"{'n':>5} {'W1 to limit':>12} {'n * W1':>8} {'lambda_max':>11} {'lambda_+':>9}")
        for row in lambda_sequences(model, 0, [25, 50, 100, 200]):
            d = w1_distance(graded_measure(model, row.n), lim)
            print(f"{row.n:>5} {d:>12.5f} {row.n * d:>8.3f} {row.lambda_max:>11.5f} {row.lambda_plus:>9.5f}")

    print("\ncounting ratio u/v against (alpha/(alpha+beta))^(q-1)")
    for q, a, b in ((2, 1, 1), (3, 2, 1), (4, 0.5, 1.5)):
        cells = [f"n={n}: {float(counting_bound(q, a, b, n).ratio):.5f}" for n in (10, 100, 1000, 10**4)]
        print(f"q={q} alpha={a} beta={b}  limit {(a / (a + b)) ** (q - 1):.5f}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
