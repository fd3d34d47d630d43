#!/usr/bin/env python3
"""Compare a few exact Haar moments and Z values with Monte Carlo estimates."""

import argparse

import numpy as np

from haarlimits.hciz import hc_unitary
from haarlimits.moments import MomentQuery, moment
from haarlimits.montecarlo import HaarSampler, estimate, estimate_partition_function, moment_integrand


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    queries = [
        (MomentQuery("O", (1, 1, 2, 2), (1, 1, 2, 2)), 5),
        (MomentQuery("O", (1, 1, 1, 1), (1, 1, 1, 1)), 3),
        (MomentQuery("U", (1, 1), (1, 1), (1, 1), (1, 1)), 3),
        (MomentQuery("U", (1, 2), (1, 2), (2, 1), (1, 2)), 4),
    ]
    print(f"{'query':<44} {'exact':>12} {'estimate':>12} {'z':>7}")
    for q, N in queries:
        exact = float(moment(q, N))
        r = estimate(moment_integrand(q), HaarSampler(q.group, N, args.seed), args.samples)
        name = f"{q.group}({N}) i={q.i} j={q.j}" + (f" k={q.k} l={q.l}" if q.k else "")
        print(f"{name:<44} {exact:>12.6f} {r.mean:>12.6f} {r.z_score(exact):>7.2f}")

    a, b, kappa = [0.9, 0.2, -0.5], [0.7, -0.1, -0.4], 0.3
    exact = float(hc_unitary(a, b, kappa).value)
    r = estimate_partition_function("U", np.diag(a), np.diag(b), kappa, args.samples, seed=args.seed)
    print(f"{'Z_U(3) kappa=0.3':<44} {exact:>12.6f} {r.mean:>12.6f} {r.z_score(exact):>7.2f}")


if __name__ == "__main__":
    main()
