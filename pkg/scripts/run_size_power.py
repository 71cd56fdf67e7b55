#!/usr/bin/env python3
"""Empirical size and power tables.

Size: short-memory reference model, T=1000, R=500, beta=1/4, level 0.05.
Power: Example-1 long-memory model at T in {50, 100, 1000}, calibrated
against its short-memory factor.
"""

import argparse
import time

from spherelrd.harness import ExperimentConfig, run_power, run_size
from spherelrd.models import example_model, reference_spharma11


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=".")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--seed", type=int, default=20260825)
    ap.add_argument("--R", type=int, default=500)
    args = ap.parse_args()

    t0 = time.time()
    size = run_size(
        ExperimentConfig(
            model=reference_spharma11(), T_values=(1000,), R=args.R,
            seed=args.seed, threads=args.threads,
        )
    )
    size.write_csv(f"{args.out}/size.csv")
    print(f"size done in {time.time() - t0:.0f}s")
    for r in size.rows:
        print(f"  T={r['T']} {r['key']}: {r['value']:.4f} (se {r['se']:.4f})")

    t0 = time.time()
    power = run_power(
        ExperimentConfig(
            model=example_model(1), T_values=(50, 100, 1000), R=args.R,
            seed=args.seed + 1, threads=args.threads,
        )
    )
    power.write_csv(f"{args.out}/power.csv")
    print(f"power done in {time.time() - t0:.0f}s")
    for r in power.rows:
        print(f"  T={r['T']} {r['key']}: {r['value']:.4f} (se {r['se']:.4f})")


if __name__ == "__main__":
    main()
