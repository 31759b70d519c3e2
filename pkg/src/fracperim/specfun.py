"""Closed-form Gamma-ratio quantities on the unit sphere.

All ratios of Gamma functions are evaluated through ``gammaln`` with an
explicit sign so that degrees well beyond the double-precision overflow
of ``Gamma`` (k ~ 170) stay finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, gammasgn

DEFAULT_CUTOFF = 256


@dataclass(frozen=True)
class FracParams:
    """Dimension ``n`` and the two orders ``0 < s < t < 1``."""

    n: int
    s: float
    t: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not (0.0 < self.s < self.t < 1.0):
            raise ValueError(f"orders must satisfy 0 < s < t < 1, got s={self.s}, t={self.t}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "t", float(self.t))


def _check_order(alpha: float) -> float:
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"order alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def _check_dim(n: int, minimum: int = 2) -> int:
    if int(n) != n or n < minimum:
        raise ValueError(f"dimension must be an integer >= {minimum}, got {n!r}")
    return int(n)


def ball_volume(n: int) -> float:
    """omega_n = |B| for the unit ball of R^n."""
    n = _check_dim(n, 1)
    return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0))


def sphere_area(n: int) -> float:
    """|dB| = n omega_n, the classical perimeter P(B)."""
    return n * ball_volume(n)


def _signed_lgamma(x):
    x = np.asarray(x, dtype=float)
    return gammaln(x), gammasgn(x)


def gamma_ratio(x, y):
    """Gamma(x) / Gamma(y), evaluated in log space with sign tracking."""
    lx, sx = _signed_lgamma(x)
    ly, sy = _signed_lgamma(y)
    return sx * sy * np.exp(lx - ly)


def dim_harmonic(n: int, k: int) -> int:
    """Dimension of degree-k spherical harmonics on the sphere in R^n."""
    n = _check_dim(n, 1)
    if int(k) != k or k < 0:
        raise ValueError(f"degree must be a non-negative integer, got {k!r}")
    k = int(k)
    if k == 0:
        return 1
    if n == 1:
        return 1 if k == 1 else 0
    lower = math.comb(n + k - 3, k - 2) if k >= 2 else 0
    return math.comb(n + k - 1, k) - lower


def _eigen_prefactor(n: int, alpha: float) -> float:
    # 2^{1-a} pi^{(n-1)/2} / (1+a) * Gamma((1-a)/2) / Gamma((n+a)/2)
    return math.exp(
        (1.0 - alpha) * math.log(2.0)
        + 0.5 * (n - 1) * math.log(math.pi)
        - math.log1p(alpha)
        + math.lgamma(0.5 * (1.0 - alpha))
        - math.lgamma(0.5 * (n + alpha))
    )


def _degree_ratio(n, alpha, k):
    # Gamma(k + (n+a)/2) / Gamma(k + (n-2-a)/2); negative at k = 0 when n = 2
    a = 0.5 * (n + alpha)
    b = 0.5 * (n - 2.0 - alpha)
    k = np.asarray(k, dtype=float)
    return gamma_ratio(k + a, k + b)


def lambda_eigenvalue(n: int, alpha: float, k):
    """Eigenvalue of the H^{(1+alpha)/2} Gagliardo seminorm on degree-k harmonics.

    Accepts a scalar or an array of degrees.
    """
    n = _check_dim(n)
    alpha = _check_order(alpha)
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ValueError("degree must be non-negative")
    lam = _eigen_prefactor(n, alpha) * (_degree_ratio(n, alpha, k_arr) - _degree_ratio(n, alpha, 0))
    lam = np.where(k_arr == 0, 0.0, lam)
    return float(lam) if lam.ndim == 0 else lam


def perimeter_ball(n: int, alpha: float) -> float:
    """Closed-form alpha-perimeter of the unit ball."""
    n = _check_dim(n)
    alpha = _check_order(alpha)
    log_val = (
        (1.0 - alpha) * math.log(2.0)
        + 0.5 * (n - 1) * math.log(math.pi)
        + math.log(sphere_area(n))
        + math.lgamma(0.5 * (1.0 - alpha))
        - math.log(alpha * (n - alpha))
        - math.lgamma(0.5 * (n - alpha))
    )
    return math.exp(log_val)


def A_coefficient(n: int, alpha: float, k):
    """Normalized eigenvalue A_{alpha,k} in its pure Gamma form.

    Equals ``|dB| * lambda_k / ((n - alpha) * P_alpha(B))``, so that
    A_0 = 0, A_1 = alpha and A_2 = 2 n alpha / (n - alpha).
    """
    n = _check_dim(n)
    alpha = _check_order(alpha)
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ValueError("degree must be non-negative")
    a = 0.5 * (n + alpha)
    b = 0.5 * (n - 2.0 - alpha)
    # b * Gamma(b) = Gamma(b + 1) > 0 removes the sign change at n = 2
    scale = math.exp(math.lgamma(b + 1.0) - math.lgamma(a))
    val = alpha / (alpha + 1.0) * (scale * _degree_ratio(n, alpha, k_arr) - b)
    val = np.where(k_arr == 0, 0.0, val)
    return float(val) if val.ndim == 0 else val


def A_increment(n: int, alpha: float, k):
    """A_{alpha,k+1} - A_{alpha,k} as a product of elementary factors.

    For k >= 1 this is alpha (n+alpha)/(2k+n-2-alpha) prod_{j<k} (j+(n+alpha)/2)/(j+(n-2-alpha)/2);
    for k = 0 it is alpha.  The product is accumulated in log space.
    """
    n = _check_dim(n)
    alpha = _check_order(alpha)
    k_arr = np.atleast_1d(np.asarray(k, dtype=int))
    if np.any(k_arr < 0):
        raise ValueError("degree must be non-negative")
    a = 0.5 * (n + alpha)
    b = 0.5 * (n - 2.0 - alpha)
    kmax = int(k_arr.max()) if k_arr.size else 0
    j = np.arange(1, max(kmax, 1), dtype=float)
    log_prod = np.concatenate([[0.0, 0.0], np.cumsum(np.log(j + a) - np.log(j + b))])
    out = np.empty(k_arr.shape, dtype=float)
    for idx, kk in np.ndenumerate(k_arr):
        if kk == 0:
            out[idx] = alpha
        else:
            out[idx] = alpha * (n + alpha) / (2 * kk + n - 2 - alpha) * math.exp(log_prod[kk])
    return float(out[0]) if np.ndim(k) == 0 else out


def A_telescoped(n: int, alpha: float, k: int, start: int = 2) -> float:
    """A_{alpha,k} rebuilt from A_{alpha,start} plus the increments in between."""
    if k < start:
        raise ValueError("k must be >= start")
    base = A_coefficient(n, alpha, start)
    if k == start:
        return float(base)
    incs = A_increment(n, alpha, np.arange(start, k))
    return float(base + math.fsum(incs))


@dataclass(frozen=True)
class SpectralTable:
    """Per-degree eigenvalues, normalized coefficients and dimensions up to ``K``."""

    n: int
    alpha: float
    K: int
    lam: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    dim: np.ndarray = field(repr=False)
    perimeter_ball: float
    omega_n: float

    def __post_init__(self):
        for arr in (self.lam, self.A, self.dim):
            arr.setflags(write=False)


@lru_cache(maxsize=128)
def spectral_table(n: int, alpha: float, K: int = DEFAULT_CUTOFF) -> SpectralTable:
    """Memoized :class:`SpectralTable` for one ``(n, alpha, K)``."""
    n = _check_dim(n)
    alpha = _check_order(alpha)
    ks = np.arange(K + 1)
    return SpectralTable(
        n=n,
        alpha=alpha,
        K=int(K),
        lam=np.asarray(lambda_eigenvalue(n, alpha, ks), dtype=float),
        A=np.asarray(A_coefficient(n, alpha, ks), dtype=float),
        dim=np.array([dim_harmonic(n, int(k)) for k in ks], dtype=int),
        perimeter_ball=perimeter_ball(n, alpha),
        omega_n=ball_volume(n),
    )
