"""Sample-path generation for (multifractionally integrated) SPHARMA processes.

Each harmonic coefficient (n, j) follows a scalar ARMA(p, q) recursion driven
by Gaussian white noise with variance innov_n; the 2n+1 orders within a degree
are i.i.d. copies.  When alpha(n) > 0 the ARMA output is passed through the
truncated fractional-integration filter (1 - B)^(-alpha(n)), realized as an
MA convolution with the standard fractional-differencing weights.  Filtering
with exponent a multiplies the spectral density by |1 - e^{-iw}|^(-2a).

Randomness comes from counter-based Philox streams keyed per
(base_seed, stream_id, degree), so panels are bit-reproducible under any
parallel decomposition.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .harmonics import DegreeRange
from .models import SpectralModel


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SeedSpec:
    """Reproducible RNG identity: base seed plus replication stream index."""

    base_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.base_seed < 2**64:
            raise SimulationError("base_seed must fit in 64 bits")
        if not 0 <= self.stream_id < 2**40:
            raise SimulationError("stream_id must be a nonnegative 40-bit integer")

    def generator(self, degree: int) -> np.random.Generator:
        # injective (base_seed, stream_id, degree) -> Philox key
        key = np.array(
            [self.base_seed, (self.stream_id << 20) | (degree & 0xFFFFF)],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class FracFilterSpec:
    """Truncation and warm-up lengths for the fractional-integration filter."""

    truncation: int = 2000
    burn_in: int = 1000

    def __post_init__(self) -> None:
        if self.truncation < 1:
            raise SimulationError("truncation must be >= 1")
        if self.burn_in < 0:
            raise SimulationError("burn_in must be >= 0")


@dataclass(frozen=True)
class CoefficientPanel:
    """T x D real matrix of harmonic coefficients, columns (n asc, j asc)."""

    T: int
    degrees: DegreeRange
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=float)
        if data.shape != (self.T, self.degrees.dim):
            raise SimulationError(
                f"panel shape {data.shape} != ({self.T}, {self.degrees.dim})"
            )
        if not np.all(np.isfinite(data)):
            raise SimulationError("panel contains non-finite entries")
        object.__setattr__(self, "data", data)

    def column(self, n: int, j: int) -> np.ndarray:
        return self.data[:, self.degrees.column(n, j)]


def fractional_weights(alpha: float, truncation: int) -> np.ndarray:
    """MA(inf) weights of (1 - B)^(-alpha), psi_0..psi_K, by stable recursion."""
    if not 0.0 <= alpha < 1.0:
        raise SimulationError(f"fractional exponent must lie in [0, 1), got {alpha}")
    psi = np.empty(truncation + 1)
    psi[0] = 1.0
    for k in range(1, truncation + 1):
        psi[k] = psi[k - 1] * (k - 1 + alpha) / k
    return psi


def simulate_panel(
    model: SpectralModel,
    T: int,
    seed: SeedSpec,
    frac: FracFilterSpec = FracFilterSpec(),
) -> CoefficientPanel:
    """Draw one panel of length T from the model.

    The ARMA state starts at zero and runs ``frac.burn_in`` warm-up steps;
    degrees with alpha(n) > 0 additionally carry a pre-sample of length
    ``frac.truncation`` consumed by the fractional convolution.
    """
    if T < 2:
        raise SimulationError("sample length must be at least 2")
    degrees = model.degrees
    data = np.empty((T, degrees.dim))
    for i, n in enumerate(degrees.degrees):
        m = 2 * n + 1
        a = float(model.alpha.values[i])
        pre = frac.burn_in + (frac.truncation if a > 0 else 0)
        rng = seed.generator(n)
        eps = rng.standard_normal((pre + T, m)) * np.sqrt(model.innov[i])
        b = np.concatenate(([1.0], model.psi[i]))
        aa = np.concatenate(([1.0], -model.phi[i]))
        x = signal.lfilter(b, aa, eps, axis=0)
        if a > 0:
            psi = fractional_weights(a, frac.truncation)
            # conv[t] = sum_k psi_k x_{t-k}; rows >= pre have full filter depth
            x = signal.fftconvolve(x, psi[:, None], mode="full", axes=0)[: pre + T]
        off = degrees.column_offset(n)
        data[:, off : off + m] = x[pre:]
    return CoefficientPanel(T=T, degrees=degrees, data=data)


# --- CSV import/export -----------------------------------------------------

def write_panel_csv(path, panel: CoefficientPanel, layout: str = "long") -> None:
    """Write a panel as CSV; ``layout`` is "long" (t,n,j,value) or "wide"."""
    if layout == "long":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "n", "j", "value"])
            for t in range(panel.T):
                for n, j in panel.degrees.index_list():
                    writer.writerow([t, n, j, f"{panel.column(n, j)[t]:.17g}"])
    elif layout == "wide":
        header = ["t"] + [f"a_{n}_{j}" for n, j in panel.degrees.index_list()]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t in range(panel.T):
                writer.writerow(
                    [t] + [f"{v:.17g}" for v in panel.data[t]]
                )
    else:
        raise SimulationError(f"unknown CSV layout {layout!r}")


def read_panel_csv(path, degrees: DegreeRange) -> CoefficientPanel:
    """Read a panel from either CSV layout (detected from the header)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if header[:4] == ["t", "n", "j", "value"]:
        T = max(int(r[0]) for r in rows) + 1
        data = np.zeros((T, degrees.dim))
        for r in rows:
            t, n, j = int(r[0]), int(r[1]), int(r[2])
            data[t, degrees.column(n, j)] = float(r[3])
    elif header and header[0] == "t":
        T = len(rows)
        data = np.array([[float(v) for v in r[1:]] for r in rows])
    else:
        raise SimulationError("unrecognized panel CSV header")
    return CoefficientPanel(T=T, degrees=degrees, data=data)
