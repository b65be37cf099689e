"""Coefficient profiles, random laws and sphere measures on spectral windows.

A random element of the window is v = sum_j gamma_j X_j phi_j with i.i.d.
centred, unit-variance X_j; the sphere measure is the law of v / ||v||.
Coefficients are always stored with respect to the window's multi-index
ordering (see :meth:`SpectralWindow.multi_indices`).
"""

from dataclasses import dataclass, field
import math
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ProfileError, ZeroVectorError
from .rng import seed_rng

LAW_KINDS = ("complex-gaussian", "real-gaussian", "rademacher", "alpha-exponential", "bounded-support")


class Squeezing(NamedTuple):
    """Tightest constants in K1/N |gamma|^2 <= |gamma_n|^2 <= K0/N |gamma|^2."""

    K0: float
    K1: float

    @property
    def lower_ok(self):
        """False when some gamma_n vanishes, i.e. the two-sided condition fails."""
        return self.K1 > 0


@dataclass(frozen=True)
class CoefficientProfile:
    window: object
    gamma: np.ndarray

    @property
    def norm_sq(self):
        return float(np.sum(np.abs(self.gamma) ** 2))

    @property
    def N(self):
        return self.gamma.size

    def squeezing(self):
        return validate_profile(self.gamma, self.window)


def isotropic_profile(window):
    n = window.N
    return CoefficientProfile(window, np.full(n, 1.0 / math.sqrt(n)))


def power_profile(window, exponent):
    """gamma_j = lambda_j^{-exponent}, normalised to unit l^2 norm."""
    lam = window.eigenvalues()
    gamma = lam ** (-float(exponent))
    return CoefficientProfile(window, gamma / np.linalg.norm(gamma))


def validate_profile(gamma, window):
    """Squeezing constants (K0, K1) of a coefficient vector on a window.

    Raises ProfileError when the length does not match N_h or gamma is
    identically zero.  K1 = 0 signals that the lower squeezing bound fails.
    """
    gamma = np.asarray(gamma)
    n = window.N if hasattr(window, "N") else int(window)
    if gamma.ndim != 1 or gamma.size != n:
        raise ProfileError(f"profile has length {gamma.size}, window has N={n}")
    mod2 = np.abs(gamma) ** 2
    total = float(mod2.sum())
    if total == 0:
        raise ProfileError("all-zero profile")
    return Squeezing(n * float(mod2.max()) / total, n * float(mod2.min()) / total)


@dataclass(frozen=True)
class RandomLaw:
    """Law of the i.i.d. multipliers X_j, always centred with unit variance.

    Kinds
    -----
    complex-gaussian
        Real and imaginary parts independent N(0, 1/2), so E|X|^2 = 1.
    real-gaussian
        N(0, 1).
    rademacher
        +-1 with probability 1/2.
    alpha-exponential
        Density proportional to exp(-|x/s|^alpha), alpha >= 2, with s fixed
        by unit variance.  Sampled exactly: |x/s|^alpha ~ Gamma(1/alpha).
    bounded-support
        Piecewise-linear density table ``params={"x": [...], "density": [...]}``
        (default: uniform on [-1, 1]), recentred and rescaled to unit
        variance, sampled by inverse CDF.
    """

    kind: str = "complex-gaussian"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ValueError(f"unknown law {self.kind!r}; expected one of {LAW_KINDS}")
        if self.kind == "alpha-exponential" and self.alpha < 2:
            raise ValueError("alpha-exponential law needs alpha >= 2")

    @property
    def alpha(self):
        return float(self.params.get("alpha", 2.0))

    @property
    def is_complex(self):
        return self.kind == "complex-gaussian"

    @property
    def is_gaussian(self):
        return self.kind in ("complex-gaussian", "real-gaussian")

    def sample(self, rng, shape):
        if self.kind == "complex-gaussian":
            z = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
            return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)
        if self.kind == "real-gaussian":
            return rng.standard_normal(shape)
        if self.kind == "rademacher":
            return 2.0 * rng.integers(0, 2, size=shape).astype(float) - 1.0
        if self.kind == "alpha-exponential":
            a = self.alpha
            mag = rng.standard_gamma(1.0 / a, size=shape) ** (1.0 / a)
            sign = 2.0 * rng.integers(0, 2, size=shape) - 1.0
            scale = math.exp(0.5 * (gammaln(1.0 / a) - gammaln(3.0 / a)))
            return sign * mag * scale
        return _table_sampler(self.params)(rng.random(shape))

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, str):
            return cls(data)
        return cls(data.get("kind", "complex-gaussian"), dict(data.get("params", {})))


def _table_sampler(params):
    x = np.asarray(params.get("x", [-1.0, 1.0]), dtype=float)
    dens = np.asarray(params.get("density", [1.0, 1.0]), dtype=float)
    if x.size < 2 or np.any(np.diff(x) <= 0) or np.any(dens < 0):
        raise ValueError("density table needs increasing x and nonnegative density")
    # CDF of the piecewise-linear density, refined so the inverse is accurate
    fine = np.linspace(x[0], x[-1], 1 << 16)
    pdf = np.interp(fine, x, dens)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(fine))])
    cdf /= cdf[-1]
    mean = np.trapezoid(fine * pdf, fine) / np.trapezoid(pdf, fine)
    var = np.trapezoid((fine - mean) ** 2 * pdf, fine) / np.trapezoid(pdf, fine)
    sd = math.sqrt(var)

    def inverse(u):
        return (np.interp(u, cdf, fine) - mean) / sd

    return inverse


def sample_coefficients(profile, law, seed):
    """One draw of (gamma_j X_j)_j, deterministic in (seed, law, profile)."""
    rng = seed_rng(seed)
    return profile.gamma * law.sample(rng, profile.N)


def sample_coefficient_block(profile, law, rng, size):
    """``size`` independent draws as a (size, N) array."""
    return profile.gamma[None, :] * law.sample(rng, (size, profile.N))


@dataclass(frozen=True)
class SphereSample:
    coefficients: np.ndarray
    window: object = None
    provenance: dict = field(default_factory=dict)

    @property
    def norm(self):
        return float(np.linalg.norm(self.coefficients))


def normalize_to_sphere(coeffs, window=None, provenance=None):
    """Project a nonzero coefficient vector onto the unit sphere."""
    coeffs = np.asarray(coeffs)
    norm = np.linalg.norm(coeffs)
    if norm == 0 or not np.isfinite(norm):
        raise ZeroVectorError("cannot normalise a zero vector")
    return SphereSample(coeffs / norm, window, dict(provenance or {}))


def normalize_rows(block):
    """Normalise each row of a (M, N) coefficient block; zero rows raise."""
    norms = np.linalg.norm(block, axis=1)
    if np.any(norms == 0):
        raise ZeroVectorError("a sampled coefficient vector vanished")
    return block / norms[:, None]


def uniform_marginal_ccdf(N, t):
    """P(|c_1| > t) for c uniform on the unit sphere of C^N: (1 - t^2)^(N-1)."""
    t = np.asarray(t, dtype=float)
    if N < 1:
        raise DomainError("N must be >= 1")
    if np.any(t < 0) or np.any(t >= 1):
        raise DomainError("t must lie in [0, 1)")
    out = (1.0 - t * t) ** (N - 1)
    return float(out) if out.ndim == 0 else out


def uniform_marginal_cdf_inverse(N, q):
    """t with P(|c_1| <= t) = q; used for exact test oracles."""
    q = np.asarray(q, dtype=float)
    return np.sqrt(1.0 - (1.0 - q) ** (1.0 / (N - 1)))


def kakutani_affinity(gamma, beta, alpha, J):
    """Finite-J Kakutani diagnostics for two alpha-exponential product laws.

    Returns ``(prod_{j<=J} pi_j, sum_{j<=J} (|gamma_j/beta_j|^{alpha/2} - 1)^2)``
    with pi_j = (q^{a/2}/2 + q^{-a/2}/2)^{-1/a}, q = gamma_j/beta_j.  Only
    partial products are reported; divergence of the infinite product is
    never decided here.
    """
    gamma = np.asarray(gamma, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    J = int(J)
    if J > min(gamma.size, beta.size) or J < 0:
        raise ValueError("J exceeds the common length")
    g, b = gamma[:J], beta[:J]
    if np.any(g <= 0) or np.any(b <= 0):
        raise DomainError("Kakutani affinity needs strictly positive entries")
    q = (g / b) ** (alpha / 2.0)
    log_pi = -np.log(0.5 * q + 0.5 / q) / alpha
    return float(np.exp(log_pi.sum())), float(np.sum((q - 1.0) ** 2))


def subgaussian_constant(samples, s_grid):
    """Smallest C with log E exp(sX) <= C s^2 over ``s_grid``, from samples."""
    x = np.asarray(samples, dtype=float)
    worst = 0.0
    for s in s_grid:
        if s == 0:
            continue
        # log-mean-exp without overflow
        z = s * x
        m = z.max()
        lme = m + math.log(np.mean(np.exp(z - m)))
        worst = max(worst, lme / (s * s))
    return worst
