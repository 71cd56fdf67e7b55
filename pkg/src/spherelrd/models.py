"""Spectral models: per-degree ARMA transfer functions and memory-exponent profiles.

A model assigns to each spherical-harmonic degree n a scalar ARMA(p, q)
transfer function with AR polynomial Phi_n(z) = 1 - sum phi_{n,i} z^i and MA
polynomial Psi_n(z) = 1 + sum psi_{n,l} z^l, an innovation variance, and a
memory exponent alpha(n) in [0, 1).  The short-memory spectral eigenvalue is

    f_n(w) = innov_n / (2 pi) * |Psi_n(e^{-iw})|^2 / |Phi_n(e^{-iw})|^2,

and under the long-memory alternative it is multiplied by
(2 |sin(w/2)|)^(-alpha(n)), which has an integrable pole at w = 0 for
alpha(n) < 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .harmonics import DegreeRange

_ROOT_TOL = 1e-9


class ModelError(ValueError):
    pass


class NonstationaryDegree(ModelError):
    def __init__(self, n: int, modulus: float):
        self.degree = n
        super().__init__(
            f"AR polynomial for degree {n} has a root of modulus {modulus:.6g} <= 1"
        )


class CommonRoot(ModelError):
    def __init__(self, n: int):
        self.degree = n
        super().__init__(f"AR and MA polynomials share a root at degree {n}")


class NonpositiveInnovation(ModelError):
    def __init__(self, n: int):
        self.degree = n
        super().__init__(f"innovation eigenvalue at degree {n} must be positive")


class AlphaRangeError(ModelError):
    pass


class Hypothesis(enum.Enum):
    NULL = "null"
    ALTERNATIVE = "alternative"


@dataclass(frozen=True)
class AlphaProfile:
    """Memory exponents alpha(n) over a degree range, plus the tail value for n beyond it.

    Values must lie in [0, 1/2) unless ``extended`` is set, in which case the
    full stationary-integrable range [0, 1) is allowed.
    """

    values: np.ndarray
    tail_value: float = 0.0
    extended: bool = False

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        hi = 1.0 if self.extended else 0.5
        all_vals = np.append(vals, self.tail_value)
        if np.any(all_vals < 0) or np.any(all_vals >= hi):
            raise AlphaRangeError(
                f"alpha values must lie in [0, {hi}); "
                "pass extended=True to allow exponents >= 1/2"
            )

    @property
    def is_null(self) -> bool:
        return bool(np.all(self.values == 0.0) and self.tail_value == 0.0)

    @property
    def l_alpha(self) -> float:
        """Smallest nonzero exponent (0 for an all-zero profile)."""
        nz = self.values[self.values > 0]
        return float(nz.min()) if nz.size else 0.0

    @property
    def L_alpha(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0


def alpha_profile(
    kind: str,
    *,
    n_degrees: int,
    values=None,
    endpoints=None,
    peak=None,
    tail: float | None = None,
    extended: bool = False,
) -> AlphaProfile:
    """Build an exponent profile.

    kind "explicit": ``values`` gives alpha(n) for each degree in order.
    kind "interpolated": linear in n between ``endpoints`` (first, last degree);
    with ``peak=(position, height)`` a piecewise-linear peak profile instead.
    kind "constant": single value from ``values``.
    """
    if kind == "explicit":
        vals = np.asarray(values, dtype=float)
        if vals.shape != (n_degrees,):
            raise ModelError(f"expected {n_degrees} alpha values, got {vals.shape}")
    elif kind == "constant":
        vals = np.full(n_degrees, float(values))
    elif kind == "interpolated":
        if peak is not None:
            pos, height = peak
            lo = float(endpoints[0]) if endpoints is not None else 0.0
            idx = np.arange(n_degrees, dtype=float)
            pos = float(pos)
            vals = np.where(
                idx <= pos,
                lo + (height - lo) * idx / max(pos, 1.0),
                height - (height - lo) / max(pos, 1.0) * (idx - pos),
            )
            vals = np.clip(vals, 0.0, None)
        else:
            first, last = float(endpoints[0]), float(endpoints[1])
            vals = np.linspace(first, last, n_degrees)
    else:
        raise ModelError(f"unknown alpha profile kind {kind!r}")
    tail_value = float(tail) if tail is not None else (float(vals[-1]) if vals.size else 0.0)
    return AlphaProfile(values=vals, tail_value=tail_value, extended=extended)


@dataclass(frozen=True)
class SpectralModel:
    """Validated SPHARMA(p, q) model with an optional long-memory profile."""

    degrees: DegreeRange
    p: int
    q: int
    phi: np.ndarray    # shape (n_degrees, p)
    psi: np.ndarray    # shape (n_degrees, q)
    innov: np.ndarray  # shape (n_degrees,)
    alpha: AlphaProfile

    def __post_init__(self) -> None:
        n_deg = len(self.degrees.degrees)
        phi = np.asarray(self.phi, dtype=float).reshape(n_deg, self.p)
        psi = np.asarray(self.psi, dtype=float).reshape(n_deg, self.q)
        innov = np.asarray(self.innov, dtype=float).reshape(n_deg)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "innov", innov)
        if self.alpha.values.shape != (n_deg,):
            raise ModelError("alpha profile length does not match degree range")
        for i, n in enumerate(self.degrees.degrees):
            if innov[i] <= 0:
                raise NonpositiveInnovation(n)
            ar_roots = _poly_roots(np.concatenate(([1.0], -phi[i])))
            if ar_roots.size and np.min(np.abs(ar_roots)) <= 1.0 + _ROOT_TOL:
                raise NonstationaryDegree(n, float(np.min(np.abs(ar_roots))))
            ma_roots = _poly_roots(np.concatenate(([1.0], psi[i])))
            for r in ar_roots:
                if ma_roots.size and np.min(np.abs(ma_roots - r)) <= _ROOT_TOL:
                    raise CommonRoot(n)

    @property
    def n_degrees(self) -> int:
        return len(self.degrees.degrees)

    def degree_index(self, n: int) -> int:
        if not self.degrees.n_min <= n <= self.degrees.n_max:
            raise ModelError(f"degree {n} outside model range")
        return n - self.degrees.n_min

    def alpha_of(self, n: int) -> float:
        if n > self.degrees.n_max:
            return self.alpha.tail_value
        return float(self.alpha.values[self.degree_index(n)])

    def srd_part(self) -> "SpectralModel":
        """The same ARMA model with all memory exponents set to zero."""
        null_alpha = AlphaProfile(values=np.zeros(self.n_degrees), tail_value=0.0)
        return SpectralModel(
            degrees=self.degrees, p=self.p, q=self.q,
            phi=self.phi, psi=self.psi, innov=self.innov, alpha=null_alpha,
        )

    def is_null(self) -> bool:
        return self.alpha.is_null

    def ar_root_moduli(self, n: int) -> np.ndarray:
        i = self.degree_index(n)
        roots = _poly_roots(np.concatenate(([1.0], -self.phi[i])))
        return np.sort(np.abs(roots))


def _poly_roots(coeffs_ascending: np.ndarray) -> np.ndarray:
    """Roots of c0 + c1 z + ... + ck z^k, ignoring trailing zero coefficients."""
    c = np.trim_zeros(np.asarray(coeffs_ascending, dtype=float), "b")
    if c.size <= 1:
        return np.empty(0, dtype=complex)
    return np.roots(c[::-1])


def build_spharma(
    degrees: DegreeRange,
    phi,
    psi,
    innov=1.0,
    alpha: AlphaProfile | None = None,
) -> SpectralModel:
    """Assemble and validate a model from per-degree coefficient arrays.

    ``phi``/``psi`` may be (n_degrees, p)/(n_degrees, q) arrays or empty for
    white noise; ``innov`` a scalar or per-degree sequence.
    """
    n_deg = len(degrees.degrees)
    phi = np.atleast_2d(np.asarray(phi, dtype=float)) if np.size(phi) else np.empty((n_deg, 0))
    psi = np.atleast_2d(np.asarray(psi, dtype=float)) if np.size(psi) else np.empty((n_deg, 0))
    if phi.shape[0] == 1 and n_deg > 1 and phi.size:
        phi = np.repeat(phi, n_deg, axis=0)
    if psi.shape[0] == 1 and n_deg > 1 and psi.size:
        psi = np.repeat(psi, n_deg, axis=0)
    innov_arr = np.broadcast_to(np.asarray(innov, dtype=float), (n_deg,)).copy()
    if alpha is None:
        alpha = AlphaProfile(values=np.zeros(n_deg), tail_value=0.0)
    return SpectralModel(
        degrees=degrees, p=phi.shape[1], q=psi.shape[1],
        phi=phi, psi=psi, innov=innov_arr, alpha=alpha,
    )


def spectral_eigenvalue(
    model: SpectralModel,
    n: int,
    omega,
    hyp: Hypothesis = Hypothesis.NULL,
) -> np.ndarray:
    """Frequency-varying eigenvalue f_n(omega); +inf at omega = 0 under the
    alternative when alpha(n) > 0.  Vectorized over omega in [-pi, pi]."""
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) > np.pi + 1e-12):
        raise ModelError("frequency outside [-pi, pi]")
    i = model.degree_index(n)
    z = np.exp(-1j * w)
    num = np.ones_like(z)
    for l in range(model.q):
        num = num + model.psi[i, l] * z ** (l + 1)
    den = np.ones_like(z)
    for k in range(model.p):
        den = den - model.phi[i, k] * z ** (k + 1)
    f = model.innov[i] / (2 * np.pi) * np.abs(num) ** 2 / np.abs(den) ** 2
    a = model.alpha.values[i]
    if hyp is Hypothesis.ALTERNATIVE and a > 0:
        mod = 2.0 * np.abs(np.sin(w / 2.0))
        with np.errstate(divide="ignore"):
            f = np.where(mod == 0.0, np.inf, f * mod ** (-a))
    return f if f.shape else float(f)


# --- canonical model generators -------------------------------------------

def reference_ar_eigenvalues(degrees: DegreeRange) -> np.ndarray:
    """lambda_n(phi_1) = 0.7 ((n+1)/n)^(-3/2)."""
    n = np.array([float(m) for m in degrees.degrees])
    return 0.7 * ((n + 1.0) / n) ** (-1.5)


def reference_ma_eigenvalues(degrees: DegreeRange) -> np.ndarray:
    """lambda_n(psi_1) = 0.4 ((n+1)/n)^(-5/1.95)."""
    n = np.array([float(m) for m in degrees.degrees])
    return 0.4 * ((n + 1.0) / n) ** (-5.0 / 1.95)


def reference_spharma11(n_min: int = 1, n_max: int = 8) -> SpectralModel:
    """The canonical SPHARMA(1,1) short-memory model on degrees 1..8."""
    degrees = DegreeRange(n_min, n_max)
    phi = reference_ar_eigenvalues(degrees)[:, None]
    psi = reference_ma_eigenvalues(degrees)[:, None]
    return build_spharma(degrees, phi, psi, innov=1.0)


_EXAMPLE_ALPHA = {
    # (kind-args) reconstructed from published endpoints; interior values are
    # linear interpolations and explicitly overridable via configs.
    1: dict(endpoints=(0.4733, 0.2678), tail=0.2678, extended=False, peak=None),
    2: dict(endpoints=(0.2550, 0.3327), tail=0.2550, extended=False, peak=None),
    3: dict(endpoints=(0.2753, None), tail=0.2753, extended=False, peak=(4, 0.4000)),
    4: dict(endpoints=(0.3041, None), tail=0.3041, extended=True, peak=(7, 0.9982)),
}


def example_alpha_profile(example: int, n_degrees: int = 8) -> AlphaProfile:
    """Exponent profiles for the four canonical long-memory examples."""
    try:
        spec = _EXAMPLE_ALPHA[example]
    except KeyError:
        raise ModelError(f"unknown example number {example}") from None
    if spec["peak"] is not None:
        return alpha_profile(
            "interpolated", n_degrees=n_degrees,
            endpoints=(spec["endpoints"][0],), peak=spec["peak"],
            tail=spec["tail"], extended=spec["extended"],
        )
    return alpha_profile(
        "interpolated", n_degrees=n_degrees, endpoints=spec["endpoints"],
        tail=spec["tail"], extended=spec["extended"],
    )


def example_model(example: int, n_min: int = 1, n_max: int = 8) -> SpectralModel:
    """Multifractionally integrated SPHARMA(1,1) models for Examples 1-4."""
    base = reference_spharma11(n_min, n_max)
    prof = example_alpha_profile(example, n_degrees=base.n_degrees)
    return SpectralModel(
        degrees=base.degrees, p=base.p, q=base.q,
        phi=base.phi, psi=base.psi, innov=base.innov, alpha=prof,
    )
