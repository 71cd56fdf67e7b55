"""Command-line interface.

Subcommands map one-to-one onto library entry points:

    simulate        draw one coefficient panel and write it out
    spectrum        smoothed cross-spectrum of a simulated panel
    test            one-shot projected test report
    mc-size         Monte Carlo empirical size table
    mc-power        Monte Carlo empirical power table
    mc-dist         null-distribution histograms and KS statistics
    mc-divergence   projected Hilbert-Schmidt norms over a T grid
    mc-sweep        bandwidth-rescaled norms over a beta x T grid
    mc-consistency  integrated-variance decay of the spectral estimator
    validate-model  per-degree stationarity and exponent diagnostics

Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
All outputs are written under --out (default: current directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import (
    ConfigError,
    experiment_from_config,
    load_config,
    model_from_config,
    sweep_betas,
    table_mode,
)
from .harness import (
    HarnessError,
    run_bandwidth_sweep,
    run_consistency,
    run_distribution,
    run_divergence,
    run_power,
    run_size,
)
from .lrdtest import bandwidth, BandwidthRule, null_moments, projected_test, TestError
from .models import ModelError
from .simulate import SeedSpec, SimulationError, simulate_panel, write_panel_csv
from .spectral import SmoothingSpec, fdft_panel, write_spectrum_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="spherelrd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    commands = [
        "simulate", "spectrum", "test", "mc-size", "mc-power", "mc-dist",
        "mc-divergence", "mc-sweep", "mc-consistency", "validate-model",
    ]
    for name in commands:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config document")
        p.add_argument("--seed", type=int, default=None, help="override base seed")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker count (default: SPHARMA_LRD_THREADS or 1)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--T", type=int, default=None, help="override sample length")
    return parser


def _out_path(args, filename: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, filename)


def _emit_table(table, args, name: str) -> None:
    if args.format == "json":
        with open(_out_path(args, f"{name}.json"), "w") as fh:
            json.dump(table.to_dict(), fh, indent=2)
    else:
        table.write_csv(_out_path(args, f"{name}.csv"))
        table.write_manifest(_out_path(args, f"{name}_manifest.json"))


def _single_panel(doc, args):
    config = experiment_from_config(doc, seed=args.seed, T=args.T, threads=args.threads)
    T = config.T_values[0]
    panel = simulate_panel(config.model, T, SeedSpec(base_seed=config.seed, stream_id=0))
    return config, T, panel


def _cmd_simulate(doc, args) -> None:
    _, _, panel = _single_panel(doc, args)
    if args.format == "json":
        payload = {
            "T": panel.T,
            "degrees": [panel.degrees.n_min, panel.degrees.n_max],
            "columns": [[n, j] for n, j in panel.degrees.index_list()],
            "data": panel.data.tolist(),
        }
        with open(_out_path(args, "panel.json"), "w") as fh:
            json.dump(payload, fh)
    else:
        write_panel_csv(_out_path(args, "panel.csv"), panel, layout="wide")


def _cmd_spectrum(doc, args) -> None:
    config, T, panel = _single_panel(doc, args)
    B = bandwidth(T, config.rule())
    dft = fdft_panel(panel)
    pairs = [((n, j), (n, j)) for n, j in panel.degrees.index_list()]
    omegas = np.linspace(0.0, np.pi, 65)
    write_spectrum_csv(
        _out_path(args, "spectrum.csv"), dft, pairs, omegas, SmoothingSpec(bandwidth=B)
    )


def _cmd_test(doc, args) -> None:
    config, T, panel = _single_panel(doc, args)
    B = bandwidth(T, config.rule())
    calib = config.null_model()
    moments = null_moments(calib, T, B)
    report = projected_test(
        fdft_panel(panel), calib, level=config.level, moments=moments
    )
    if args.format == "json":
        report.write_json(_out_path(args, "test_report.json"))
    else:
        report.write_csv(_out_path(args, "test_report.csv"))


def _cmd_validate_model(doc, args) -> None:
    model = model_from_config(doc)
    hi = 1.0 if model.alpha.extended else 0.5
    for i, n in enumerate(model.degrees.degrees):
        moduli = model.ar_root_moduli(n)
        mods = ",".join(f"{m:.6f}" for m in moduli) if moduli.size else "-"
        a = model.alpha.values[i]
        print(
            f"degree {n}: ar_root_moduli=[{mods}] "
            f"innov={model.innov[i]:.6g} alpha={a:.4f} in [0,{hi}) ok"
        )


_MC = {
    "mc-size": ("size", run_size),
    "mc-power": ("power", run_power),
    "mc-dist": ("distribution", run_distribution),
    "mc-consistency": ("consistency", run_consistency),
}


def _dispatch(args) -> None:
    doc = load_config(args.config)
    if args.command == "simulate":
        _cmd_simulate(doc, args)
    elif args.command == "spectrum":
        _cmd_spectrum(doc, args)
    elif args.command == "test":
        _cmd_test(doc, args)
    elif args.command == "validate-model":
        _cmd_validate_model(doc, args)
    elif args.command in _MC:
        name, runner = _MC[args.command]
        config = experiment_from_config(doc, seed=args.seed, T=args.T, threads=args.threads)
        _emit_table(runner(config), args, name)
    elif args.command == "mc-divergence":
        config = experiment_from_config(doc, seed=args.seed, T=args.T, threads=args.threads)
        _emit_table(run_divergence(config, mode=table_mode(doc)), args, "divergence")
    elif args.command == "mc-sweep":
        config = experiment_from_config(doc, seed=args.seed, T=args.T, threads=args.threads)
        mode = doc.get("experiment", {}).get("mode", "expected")
        _emit_table(
            run_bandwidth_sweep(config, betas=sweep_betas(doc), mode=mode),
            args,
            "bandwidth_sweep",
        )
    else:  # pragma: no cover - argparse enforces the command set
        raise _UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        _dispatch(args)
    except (ConfigError, ModelError, TestError, SimulationError, HarnessError, _UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
