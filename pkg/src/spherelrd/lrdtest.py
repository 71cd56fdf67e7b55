"""Long-range-dependence test in the harmonic spectral domain.

The statistic aggregates the smoothed periodogram over the low-frequency
window [-sqrt(B)/2, sqrt(B)/2]:

    S[a, b] = sqrt(B T) * (1 / sqrt(B)) * (2 pi / T)
              * sum_{w_s in window} f_hat_{w_s}[a, b].

Exchanging the window sum with the smoothing sum turns this into a single
weighted quadratic form over the Fourier ordinates,

    S[a, b] = sqrt(T) * (2 pi / T) * sum_{v=1}^{T-1} g_v * d_a(w_v) conj(d_b(w_v)),

with g_v = (2 pi / T) * sum_{s in window} W^(T)(w_s - w_v).  All null means
and (co)variances are evaluated on the same Fourier grid with the same g
weights, which removes the O(1/(T sqrt(B))) centering bias a continuous
approximation would leave at small T.  A continuous midpoint-quadrature mode
is kept for cross-checking.

Under a short-range null the standardized entries are asymptotically
standard normal; rejection is two-sided at level alpha by default.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .harmonics import DegreeRange
from .models import Hypothesis, SpectralModel, spectral_eigenvalue
from .spectral import (
    DftPanel,
    SmoothingSpec,
    SpectralError,
    epanechnikov_cdf,
    reduce_frequency,
)


class TestError(ValueError):
    pass


class DegenerateBandwidth(TestError):
    pass


class EmptyWindow(TestError):
    pass


class CalibrationUnderAlternative(TestError):
    pass


class ZeroVarianceDirection(TestError):
    pass


@dataclass(frozen=True)
class BandwidthRule:
    """Bandwidth B = T^(-beta), or an explicit value of B."""

    beta: float | None = None
    explicit: float | None = None

    def __post_init__(self) -> None:
        if (self.beta is None) == (self.explicit is None):
            raise TestError("give exactly one of beta or explicit bandwidth")
        if self.beta is not None and not 0.0 < self.beta < 1.0:
            raise DegenerateBandwidth(f"beta must lie in (0, 1), got {self.beta}")


def bandwidth(T: int, rule: BandwidthRule) -> float:
    """Resolve the rule to a bandwidth value, enforcing B < 1 and B * T > 1."""
    if T < 2:
        raise TestError("T must be at least 2")
    B = float(T) ** (-rule.beta) if rule.beta is not None else float(rule.explicit)
    if not 0.0 < B < 1.0:
        raise DegenerateBandwidth(f"bandwidth {B:.6g} outside (0, 1)")
    if B * T <= 1.0:
        raise DegenerateBandwidth(f"B * T = {B * T:.6g} <= 1 (window too narrow)")
    return B


def window_indices(T: int, B: float) -> np.ndarray:
    """Fourier indices s in 1..T-1 whose frequency lies in [-sqrt(B)/2, sqrt(B)/2].

    Frequencies with s > T/2 represent w_s - 2 pi.  Membership uses
    |w_s| <= sqrt(B)/2 with ties included; the boundary comparison is done
    on the integer index so results are platform-stable.
    """
    # s <= T sqrt(B) / (4 pi) on the positive side, symmetric on the negative
    smax = int(math.floor(T * math.sqrt(B) / (4 * math.pi) + 1e-9))
    if smax < 1:
        raise EmptyWindow(
            f"no nonzero Fourier frequency inside the window for T={T}, B={B:.4g}"
        )
    pos = np.arange(1, smax + 1)
    return np.concatenate([pos, T - pos[::-1]])


def g_weights(T: int, B: float, spec: SmoothingSpec | None = None) -> np.ndarray:
    """Aggregated smoothing weights g_v, v = 0..T-1 (g_0 reported but unused).

    g_v = (2 pi / T) * sum over window indices s of W^(T)(w_s - w_v).
    """
    if spec is None:
        spec = SmoothingSpec(bandwidth=B)
    win = window_indices(T, B)
    # kernel row over index differences k = (s - v) mod T
    diffs = reduce_frequency(2 * np.pi * np.arange(T) / T)
    kern = spec.weight(diffs / spec.bandwidth) / spec.bandwidth
    ind = np.zeros(T)
    ind[win] = 1.0
    # sum_{s in win} kern[(s - v) % T] as a circular convolution (kern is
    # circularly even, so correlation and convolution coincide)
    g = np.fft.irfft(np.fft.rfft(ind) * np.fft.rfft(kern), n=T).real
    return (2 * np.pi / T) * g


@dataclass(frozen=True)
class StatisticCoeffs:
    """Matrix of statistic entries S[a, b] over all basis pairs, with metadata."""

    T: int
    B: float
    degrees: DegreeRange
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        D = self.degrees.dim
        if m.shape != (D, D):
            raise TestError(f"statistic matrix shape {m.shape} != ({D}, {D})")
        object.__setattr__(self, "matrix", m)

    def entry(self, a: tuple[int, int], b: tuple[int, int]) -> complex:
        return complex(self.matrix[self.degrees.column(*a), self.degrees.column(*b)])


def statistic_matrix(dft: DftPanel, B: float) -> StatisticCoeffs:
    """Evaluate S[a, b] for every ordered pair of basis columns."""
    T = dft.T
    g = g_weights(T, B)[1:]
    A = dft.coeffs[1:]
    mat = math.sqrt(T) * (2 * np.pi / T) * ((A * g[:, None]).T @ np.conj(A))
    return StatisticCoeffs(T=T, B=B, degrees=dft.degrees, matrix=mat)


def statistic_coefficient(
    dft: DftPanel, a: tuple[int, int], b: tuple[int, int], B: float
) -> complex:
    """Single entry S[a, b] without forming the full matrix."""
    T = dft.T
    g = g_weights(T, B)[1:]
    ca = dft.column(*a)[1:]
    cb = dft.column(*b)[1:]
    return complex(math.sqrt(T) * (2 * np.pi / T) * np.sum(g * ca * np.conj(cb)))


# --- null calibration -------------------------------------------------------

@dataclass(frozen=True)
class NullMoments:
    """Null mean of a diagonal entry and entry variances for a degree pair.

    ``second_moment`` is the shared quadratic kernel
    V2(n, h) = T (2 pi / T)^2 sum_v g_v^2 f_n(w_v) f_h(w_v); the variance of
    entry (a, b) is (1 + delta_ab) * V2(n_a, n_b), and the covariance between
    entries (a, b) and (c, d) is V2 * (delta_ac delta_bd + delta_ad delta_bc).
    """

    T: int
    B: float
    mean_diag: dict  # degree n -> E S[a, a] for any a in degree n
    second_moment: dict  # (n, h) -> V2(n, h)

    def mean(self, a: tuple[int, int], b: tuple[int, int]) -> float:
        return self.mean_diag[a[0]] if a == b else 0.0

    def variance(self, a: tuple[int, int], b: tuple[int, int]) -> float:
        v2 = self.second_moment[(a[0], b[0])]
        return (2.0 if a == b else 1.0) * v2


def _null_model(model: SpectralModel, allow_alternative: bool) -> SpectralModel:
    if model.alpha.is_null:
        return model
    if not allow_alternative:
        raise CalibrationUnderAlternative(
            "model has nonzero memory exponents; pass allow_alternative=True "
            "to calibrate against its short-range factor"
        )
    return model.srd_part()


def null_moments(
    model: SpectralModel,
    T: int,
    B: float,
    allow_alternative: bool = False,
    mode: str = "grid",
    nodes: int = 256,
) -> NullMoments:
    """Null mean and variance kernel for all degrees of the model.

    ``mode="grid"`` evaluates the exact finite-T moments of the Gaussian
    quadratic form on the Fourier grid.  ``mode="continuous"`` integrates the
    limiting window profile G by midpoint quadrature with ``nodes`` nodes
    (cross-check only; it carries an O(1/(T sqrt(B))) centering offset).
    """
    null = _null_model(model, allow_alternative)
    degs = list(null.degrees.degrees)
    if mode == "grid":
        g = g_weights(T, B)[1:]
        omegas = reduce_frequency(2 * np.pi * np.arange(1, T) / T)
        f = {n: spectral_eigenvalue(null, n, omegas, Hypothesis.NULL) for n in degs}
        mean_diag = {
            n: math.sqrt(T) * (2 * np.pi / T) * float(np.sum(g * f[n])) for n in degs
        }
        second = {
            (n, h): T * (2 * np.pi / T) ** 2 * float(np.sum(g * g * f[n] * f[h]))
            for n in degs
            for h in degs
        }
    elif mode == "continuous":
        half = math.sqrt(B) / 2.0
        lo, hi = -(half + B), half + B  # support of the window profile G
        w = lo + (hi - lo) * (np.arange(nodes) + 0.5) / nodes
        dw = (hi - lo) / nodes
        G = epanechnikov_cdf((half - w) / B) - epanechnikov_cdf((-half - w) / B)
        f = {n: spectral_eigenvalue(null, n, w, Hypothesis.NULL) for n in degs}
        mean_diag = {n: math.sqrt(T) * float(np.sum(G * f[n])) * dw for n in degs}
        second = {
            (n, h): 2 * np.pi * float(np.sum(G * G * f[n] * f[h])) * dw
            for n in degs
            for h in degs
        }
    else:
        raise TestError(f"unknown null-moment mode {mode!r}")
    for n in degs:
        if second[(n, n)] <= 0:
            raise TestError(f"nonpositive variance for degree {n}")
    return NullMoments(T=T, B=B, mean_diag=mean_diag, second_moment=second)


def critical_value(level: float, one_sided: bool = False) -> float:
    if not 0.0 < level < 1.0:
        raise TestError(f"level must lie in (0, 1), got {level}")
    q = 1.0 - level if one_sided else 1.0 - level / 2.0
    return float(stats.norm.ppf(q))


# --- reports ----------------------------------------------------------------

@dataclass
class TestReport:
    """Per-pair or per-direction standardized statistics and decisions."""

    mode: str  # "projected" or "random-projection"
    level: float
    one_sided: bool
    rows: list = field(default_factory=list)

    def add(self, label: str, statistic: float, z: float) -> None:
        crit = critical_value(self.level, self.one_sided)
        if self.one_sided:
            p = float(stats.norm.sf(z))
            reject = z > crit
        else:
            p = float(2.0 * stats.norm.sf(abs(z)))
            reject = abs(z) > crit
        self.rows.append(
            {
                "label": label,
                "statistic": float(statistic),
                "z": float(z),
                "p": p,
                "reject": bool(reject),
            }
        )

    def rejections(self) -> list[bool]:
        return [r["reject"] for r in self.rows]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "level": self.level,
            "one_sided": self.one_sided,
            "results": self.rows,
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pair_or_direction", "statistic", "z", "p", "reject"])
            for r in self.rows:
                writer.writerow(
                    [
                        r["label"],
                        f"{r['statistic']:.10g}",
                        f"{r['z']:.10g}",
                        f"{r['p']:.10g}",
                        int(r["reject"]),
                    ]
                )


def default_pairs(degrees: DegreeRange, count: int = 8) -> list:
    """First ``count`` diagonal pairs (n, j) = (h, l) in lexicographic order."""
    pairs = [((n, j), (n, j)) for n, j in degrees.index_list() if n >= 1]
    return pairs[:count]


def projected_test(
    dft: DftPanel,
    model: SpectralModel,
    pairs=None,
    level: float = 0.05,
    one_sided: bool = False,
    allow_alternative: bool = False,
    moments: NullMoments | None = None,
) -> TestReport:
    """Standardize selected entries of S against their null moments."""
    B = moments.B if moments is not None else None
    if moments is None:
        raise TestError("projected_test requires precomputed NullMoments")
    if pairs is None:
        pairs = default_pairs(dft.degrees)
    coeffs = statistic_matrix(dft, moments.B)
    report = TestReport(mode="projected", level=level, one_sided=one_sided)
    for a, b in pairs:
        s = coeffs.entry(a, b).real
        z = (s - moments.mean(a, b)) / math.sqrt(moments.variance(a, b))
        report.add(f"({a[0]},{a[1]})x({b[0]},{b[1]})", s, z)
    return report


def run_projected_test(
    dft: DftPanel,
    model: SpectralModel,
    B: float,
    pairs=None,
    level: float = 0.05,
    one_sided: bool = False,
    allow_alternative: bool = False,
) -> TestReport:
    """Convenience wrapper computing the null moments internally."""
    moments = null_moments(model, dft.T, B, allow_alternative=allow_alternative)
    return projected_test(
        dft, model, pairs=pairs, level=level, one_sided=one_sided, moments=moments
    )


# --- random directions ------------------------------------------------------

@dataclass(frozen=True)
class Direction:
    """Gaussian random direction Y over basis pairs, Y[a, b] ~ N(0, lambda_{n_a, n_b})."""

    degrees: DegreeRange
    lambdas: np.ndarray  # (n_deg, n_deg) variance table indexed by degree position
    coeffs: np.ndarray  # (D, D) draws

    def __post_init__(self) -> None:
        nd = len(list(self.degrees.degrees))
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.shape != (nd, nd):
            raise TestError(f"lambda table shape {lam.shape} != ({nd}, {nd})")
        if np.any(lam < 0):
            raise TestError("direction variances must be nonnegative")
        c = np.asarray(self.coeffs, dtype=float)
        D = self.degrees.dim
        if c.shape != (D, D):
            raise TestError(f"direction coefficient shape {c.shape} != ({D}, {D})")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "coeffs", c)


def draw_direction(
    degrees: DegreeRange,
    seed: int,
    lambdas: np.ndarray | None = None,
    stream_id: int = 0,
) -> Direction:
    """Draw a Gaussian direction; deterministic given (seed, stream_id)."""
    degs = list(degrees.degrees)
    nd = len(degs)
    if lambdas is None:
        lam = np.ones((nd, nd))
    else:
        lam = np.asarray(lambdas, dtype=float)
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, stream_id], dtype=np.uint64))
    )
    D = degrees.dim
    z = rng.standard_normal((D, D))
    sd = np.empty((D, D))
    for i, n in enumerate(degs):
        oi = degrees.column_offset(n)
        mi = 2 * n + 1
        for k, h in enumerate(degs):
            ok = degrees.column_offset(h)
            mk = 2 * h + 1
            sd[oi : oi + mi, ok : ok + mk] = math.sqrt(lam[i, k])
    return Direction(degrees=degrees, lambdas=lam, coeffs=z * sd)


def direction_from_pair(
    degrees: DegreeRange, a: tuple[int, int], b: tuple[int, int], value: float = 1.0
) -> Direction:
    """Deterministic direction supported on a single ordered pair."""
    nd = len(list(degrees.degrees))
    coeffs = np.zeros((degrees.dim, degrees.dim))
    coeffs[degrees.column(*a), degrees.column(*b)] = value
    return Direction(degrees=degrees, lambdas=np.ones((nd, nd)), coeffs=coeffs)


def _degree_of_column(degrees: DegreeRange) -> np.ndarray:
    return np.asarray([n for n, _ in degrees.index_list()])


def random_projection_test(
    dft: DftPanel,
    model: SpectralModel,
    directions,
    level: float = 0.05,
    one_sided: bool = False,
    allow_alternative: bool = False,
    moments: NullMoments | None = None,
) -> TestReport:
    """Project S - E[S] onto each direction and standardize the projection.

    The projection <S - E[S], Y> = sum_ab Y[a, b] (S[a, b] - E S[a, b]) is a
    linear functional of jointly Gaussian entries, so its null variance is the
    bilinear form sum_ab Y[a, b] (Y[a, b] + Y[b, a]) V2(n_a, n_b).
    """
    if moments is None:
        raise TestError("random_projection_test requires precomputed NullMoments")
    if isinstance(directions, Direction):
        directions = [directions]
    coeffs = statistic_matrix(dft, moments.B)
    degrees = dft.degrees
    coln = _degree_of_column(degrees)
    v2 = np.asarray(
        [[moments.second_moment[(n, h)] for h in coln] for n in coln]
    )
    mean_mat = np.diag([moments.mean_diag[n] for n in coln])
    centered = coeffs.matrix.real - mean_mat
    report = TestReport(mode="random-projection", level=level, one_sided=one_sided)
    for k, direction in enumerate(directions):
        Y = direction.coeffs
        z_num = float(np.sum(Y * centered))
        var = float(np.sum(Y * (Y + Y.T) * v2))
        if var <= 0:
            raise ZeroVarianceDirection(f"direction {k} has zero projection variance")
        report.add(f"direction_{k}", z_num, z_num / math.sqrt(var))
    return report


# --- aggregate norms --------------------------------------------------------

def projected_hs_norm(
    coeffs: StatisticCoeffs, n_max: int | None = None, scale: str = "gridsum"
) -> float:
    """Frobenius norm of the statistic matrix truncated to degrees <= n_max.

    ``scale="statistic"`` uses the entries as defined here.  ``scale="gridsum"``
    multiplies every entry by T^2 / (2 pi)^4: both Riemann weights (one from
    the smoothing sum, one from the window sum) are replaced by plain grid
    sums and frequencies are expressed in cycles rather than radians.  This is
    the convention used when comparing divergence magnitudes across T.
    """
    degrees = coeffs.degrees
    if n_max is None:
        n_max = degrees.n_max
    cols = [degrees.column(n, j) for n, j in degrees.index_list() if n <= n_max]
    sub = coeffs.matrix[np.ix_(cols, cols)]
    norm = float(np.sqrt(np.sum(np.abs(sub) ** 2)))
    if scale == "statistic":
        return norm
    if scale == "gridsum":
        return norm * coeffs.T**2 / (2 * np.pi) ** 4
    raise TestError(f"unknown norm scale {scale!r}")
