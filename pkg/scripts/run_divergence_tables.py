#!/usr/bin/env python3
"""Divergence norms and bandwidth sweep.

Reports the projected Hilbert-Schmidt norms of the statistic for the
Example-1 and Example-4 models over a T grid (single seeded realization,
grid-sum table scale), and the (T B)^(-1/2)-rescaled norms over a beta grid.
"""

import argparse

from spherelrd.harness import ExperimentConfig, run_bandwidth_sweep, run_divergence
from spherelrd.models import example_model


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=".")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--T", type=int, nargs="+", default=[1000, 5000, 10000])
    args = ap.parse_args()

    for ex in (1, 4):
        tab = run_divergence(
            ExperimentConfig(
                model=example_model(ex), T_values=tuple(args.T), R=1,
                seed=args.seed, threads=args.threads,
            ),
            mode="single",
        )
        tab.write_csv(f"{args.out}/divergence_example{ex}.csv")
        for r in tab.rows:
            print(f"example{ex} T={r['T']} {r['key']}: {r['value']:.5g}")

    sweep = run_bandwidth_sweep(
        ExperimentConfig(
            model=example_model(1), T_values=(1000, 50000, 100000), R=1,
            seed=args.seed, threads=args.threads,
        ),
        betas=(0.2, 0.55, 0.9),
        mode="expected",
    )
    sweep.write_csv(f"{args.out}/bandwidth_sweep.csv")
    for r in sweep.rows:
        print(f"sweep beta={r['beta']} T={r['T']}: {r['value']:.5g}")


if __name__ == "__main__":
    main()
