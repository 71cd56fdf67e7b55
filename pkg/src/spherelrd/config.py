"""JSON configuration documents for models and experiments.

A config document has two sections::

    {
      "model": {
        "generator": "reference",        # or "example1".."example4", or null
        "degrees": [1, 8],
        "phi": [[...]], "psi": [[...]],  # explicit per-degree ARMA coefficients
        "innov": 1.0,
        "alpha": {"kind": "interpolated", "endpoints": [0.47, 0.27], ...}
      },
      "experiment": {
        "T": [1000], "R": 500, "beta": 0.25, "level": 0.05,
        "directions": 8, "seed": 20260825,
        "mode": "single", "betas": [0.2, 0.55, 0.9]
      }
    }

``generator`` expands the canonical closed-form models; explicit fields
override nothing when a generator is named (mixing the two is an error,
except that an explicit ``alpha`` section may be attached to "reference").
"""

from __future__ import annotations

import json

import numpy as np

from .harmonics import DegreeRange
from .models import (
    AlphaProfile,
    ModelError,
    SpectralModel,
    alpha_profile,
    build_spharma,
    example_model,
    reference_spharma11,
)
from .harness import ExperimentConfig, HarnessError


class ConfigError(ValueError):
    pass


_GENERATORS = ("reference", "example1", "example2", "example3", "example4")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc


def _alpha_from_doc(doc: dict, n_degrees: int) -> AlphaProfile:
    kind = doc.get("kind", "explicit")
    peak = doc.get("peak")
    return alpha_profile(
        kind,
        n_degrees=n_degrees,
        values=doc.get("values"),
        endpoints=doc.get("endpoints"),
        peak=tuple(peak) if peak is not None else None,
        tail=doc.get("tail"),
        extended=bool(doc.get("extended", False)),
    )


def model_from_config(doc: dict) -> SpectralModel:
    spec = doc.get("model")
    if not isinstance(spec, dict):
        raise ConfigError("config is missing a 'model' object")
    n_min, n_max = spec.get("degrees", [1, 8])
    gen = spec.get("generator")
    try:
        if gen is not None:
            if gen not in _GENERATORS:
                raise ConfigError(f"unknown model generator {gen!r}")
            if any(k in spec for k in ("phi", "psi", "innov")):
                raise ConfigError("generator models do not accept explicit ARMA fields")
            if gen == "reference":
                model = reference_spharma11(n_min, n_max)
                if "alpha" in spec:
                    prof = _alpha_from_doc(spec["alpha"], model.n_degrees)
                    model = SpectralModel(
                        degrees=model.degrees, p=model.p, q=model.q,
                        phi=model.phi, psi=model.psi, innov=model.innov, alpha=prof,
                    )
                return model
            return example_model(int(gen[len("example"):]), n_min, n_max)
        degrees = DegreeRange(int(n_min), int(n_max))
        n_deg = len(degrees.degrees)
        alpha = (
            _alpha_from_doc(spec["alpha"], n_deg) if "alpha" in spec else None
        )
        return build_spharma(
            degrees,
            np.asarray(spec.get("phi", []), dtype=float),
            np.asarray(spec.get("psi", []), dtype=float),
            innov=spec.get("innov", 1.0),
            alpha=alpha,
        )
    except ModelError as exc:
        raise ConfigError(f"invalid model config: {exc}") from exc


def experiment_from_config(
    doc: dict,
    seed: int | None = None,
    T: int | None = None,
    threads: int | None = None,
) -> ExperimentConfig:
    """Build an ExperimentConfig; CLI-level overrides win over the document."""
    model = model_from_config(doc)
    exp = doc.get("experiment", {})
    if not isinstance(exp, dict):
        raise ConfigError("'experiment' must be a JSON object")
    t_values = [T] if T is not None else exp.get("T", [1000])
    if isinstance(t_values, (int, float)):
        t_values = [int(t_values)]
    try:
        return ExperimentConfig(
            model=model,
            T_values=tuple(int(t) for t in t_values),
            R=int(exp.get("R", 500)),
            beta=float(exp.get("beta", 0.25)),
            level=float(exp.get("level", 0.05)),
            n_directions=int(exp.get("directions", 8)),
            seed=int(seed if seed is not None else exp.get("seed", 20260825)),
            threads=threads,
        )
    except HarnessError as exc:
        raise ConfigError(f"invalid experiment config: {exc}") from exc


def sweep_betas(doc: dict) -> tuple:
    return tuple(float(b) for b in doc.get("experiment", {}).get("betas", (0.2, 0.55, 0.9)))


def table_mode(doc: dict) -> str:
    return str(doc.get("experiment", {}).get("mode", "single"))
