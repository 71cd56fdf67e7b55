#!/usr/bin/env python3
"""Variance-decay study of the smoothed spectral estimator.

Fits the log-log slope of the frequency-integrated Monte Carlo variance
against B_T * T; the expected decay exponent is -1.
"""

import argparse

from spherelrd.harness import ExperimentConfig, run_consistency
from spherelrd.models import example_model, reference_spharma11


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=".")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--seed", type=int, default=555)
    ap.add_argument("--R", type=int, default=50)
    args = ap.parse_args()

    for name, model in (("example1", example_model(1)), ("h0", reference_spharma11())):
        tab = run_consistency(
            ExperimentConfig(
                model=model, T_values=(512, 2048, 8192), R=args.R,
                seed=args.seed, threads=args.threads,
            )
        )
        tab.write_csv(f"{args.out}/consistency_{name}.csv")
        for r in tab.rows:
            print(f"{name} T={r['T']} {r['key']}: {r['value']:.5g}")


if __name__ == "__main__":
    main()
