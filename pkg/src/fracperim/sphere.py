"""Quadrature grids, real spherical-harmonic bases and sphere functions.

Grid transforms are implemented for the circle (n = 2) and the 2-sphere
(n = 3).  Basis ordering, used everywhere coefficients are stored flat:

* n = 2: degree 0 is the constant ``1/sqrt(2 pi)``; degree k >= 1 holds
  ``(cos k theta, sin k theta) / sqrt(pi)`` as ``i = 1, 2``.
* n = 3: degree k holds ``i = 1`` for m = 0, then ``(cos m phi, sin m phi)``
  pairs for m = 1..k, each multiplied by the fully normalized associated
  Legendre function of the colatitude.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .specfun import dim_harmonic, lambda_eigenvalue, sphere_area

GRID_DIMENSIONS = (2, 3)
_CHUNK = 1 << 22
ALIAS_FLOOR = 1e-24


class AliasingError(ValueError):
    """Sampled function has energy the requested band limit cannot represent."""


def _check_grid_dim(n):
    if n not in GRID_DIMENSIONS:
        raise ValueError(f"grid transforms support n in {GRID_DIMENSIONS}, got {n!r}")
    return int(n)


def num_coeffs(n: int, K: int) -> int:
    if n == 2:
        return 2 * K + 1
    if n == 3:
        return (K + 1) ** 2
    return sum(dim_harmonic(n, k) for k in range(K + 1))


def degree_offset(n: int, k: int) -> int:
    """Flat index of ``Y_k^1``."""
    if k == 0:
        return 0
    if n == 2:
        return 2 * k - 1
    if n == 3:
        return k * k
    return sum(dim_harmonic(n, j) for j in range(k))


def flat_index(n: int, k: int, i: int) -> int:
    """Flat index of ``Y_k^i`` with the 1-based ``i`` used in the literature."""
    d = dim_harmonic(n, k)
    if not 1 <= i <= d:
        raise IndexError(f"Y_{k}^{i} does not exist for n={n} (d(k)={d})")
    return degree_offset(n, k) + i - 1


def degree_of_index(n: int, K: int) -> np.ndarray:
    """Degree k of every flat coefficient slot up to ``K``."""
    return np.concatenate([np.full(dim_harmonic(n, k), k) for k in range(K + 1)])


# --------------------------------------------------------------------------- grids


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes on the unit sphere with positive weights summing to ``|dB|``.

    ``shape`` records the tensor structure: ``(N,)`` on the circle and
    ``(n_theta, n_phi)`` on the 2-sphere.
    """

    n: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    shape: tuple
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.weights.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def basis(self, K: int) -> np.ndarray:
        key = ("basis", K)
        if key not in self._cache:
            self._cache[key] = basis_matrix(self.n, K, self.nodes)
        return self._cache[key]


def make_grid(n: int, resolution) -> QuadratureGrid:
    """Tensor quadrature grid on the unit sphere.

    n = 2: ``resolution`` equispaced nodes, equal weights (trapezoid rule,
    exact for trigonometric polynomials of degree < resolution).
    n = 3: ``resolution`` is ``n_theta`` or ``(n_theta, n_phi)``; Gauss-Legendre
    in cos(colatitude) times equispaced longitude (``n_phi = 2 n_theta`` by
    default).

    A band limit K is resolved (products of two degree-K functions
    integrated exactly) with at least ``2K + 1`` nodes per angle; the
    library's own choices use ``>= 4K``.
    """
    n = _check_grid_dim(n)
    if n == 2:
        N = int(resolution)
        if N < 1:
            raise ValueError("resolution must be positive")
        theta = 2.0 * np.pi * np.arange(N) / N
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(N, 2.0 * np.pi / N)
        return QuadratureGrid(2, nodes, weights, (N,))
    if np.ndim(resolution) == 0:
        n_theta, n_phi = int(resolution), 2 * int(resolution)
    else:
        n_theta, n_phi = (int(r) for r in resolution)
    if n_theta < 1 or n_phi < 1:
        raise ValueError("resolution must be positive")
    x, w = roots_legendre(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    ct = np.repeat(x, n_phi)
    st = np.sqrt(1.0 - ct * ct)
    ph = np.tile(phi, n_theta)
    nodes = np.column_stack([st * np.cos(ph), st * np.sin(ph), ct])
    weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi)
    return QuadratureGrid(3, nodes, weights, (n_theta, n_phi))


def grid_for_band(n: int, K: int, factor: int = 4, minimum: int = 16) -> QuadratureGrid:
    """Grid with ``factor * K`` nodes per angular dimension (at least ``minimum``)."""
    m = max(minimum, factor * max(K, 1))
    if n == 2:
        return make_grid(2, m)
    return make_grid(3, (max(minimum // 2, (m + 1) // 2 + 1), m))


def dense_grid(n: int, K: int) -> QuadratureGrid:
    """Evaluation grid for maxima; much finer than the band limit."""
    if n == 2:
        return make_grid(2, max(2048, 64 * K))
    return make_grid(3, (max(96, 4 * K + 8), max(192, 8 * K + 16)))


# --------------------------------------------------------------------------- bases


def _as_points(n, points):
    pts = np.asarray(points, dtype=float)
    if n == 2 and pts.ndim == 1:
        pts = np.column_stack([np.cos(pts), np.sin(pts)])
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ValueError(f"expected points of shape (N, {n})")
    return pts


def _legendre_table(K, ct, st, with_derivative=False):
    """Fully normalized P_l^m(cos theta) for 0 <= m <= l <= K.

    Returns dicts keyed by (l, m): values, d/dtheta values and P/sin(theta)
    (the last only for m >= 1; it stays finite at the poles).
    """
    P, dP, Q = {}, {}, {}
    pmm = np.full_like(ct, math.sqrt(1.0 / (4.0 * math.pi)))
    dpmm = np.zeros_like(ct)
    qmm = None
    for m in range(K + 1):
        if m > 0:
            c = math.sqrt((2 * m + 1) / (2.0 * m))
            qmm = c * pmm
            new = c * st * pmm
            dpmm = c * (ct * pmm + st * dpmm)
            pmm = new
        P[m, m] = pmm
        dP[m, m] = dpmm
        if m > 0:
            Q[m, m] = qmm
        if m + 1 <= K:
            c = math.sqrt(2 * m + 3)
            P[m + 1, m] = c * ct * pmm
            dP[m + 1, m] = c * (-st * pmm + ct * dpmm)
            if m > 0:
                Q[m + 1, m] = c * ct * qmm
        for l in range(m + 2, K + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[l, m] = a * (ct * P[l - 1, m] - b * P[l - 2, m])
            dP[l, m] = a * (-st * P[l - 1, m] + ct * dP[l - 1, m] - b * dP[l - 2, m])
            if m > 0:
                Q[l, m] = a * (ct * Q[l - 1, m] - b * Q[l - 2, m])
    return P, dP, Q


def basis_matrix(n: int, K: int, points) -> np.ndarray:
    """Real orthonormal harmonics up to degree K at unit-vector ``points``."""
    n = _check_grid_dim(n)
    pts = _as_points(n, points)
    out = np.empty((pts.shape[0], num_coeffs(n, K)))
    if n == 2:
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        out[:, 0] = 1.0 / math.sqrt(2.0 * math.pi)
        s = 1.0 / math.sqrt(math.pi)
        for k in range(1, K + 1):
            out[:, 2 * k - 1] = s * np.cos(k * theta)
            out[:, 2 * k] = s * np.sin(k * theta)
        return out
    ct = np.clip(pts[:, 2], -1.0, 1.0)
    st = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    P, _, _ = _legendre_table(K, ct, st)
    r2 = math.sqrt(2.0)
    for l in range(K + 1):
        off = l * l
        out[:, off] = P[l, 0]
        for m in range(1, l + 1):
            out[:, off + 2 * m - 1] = r2 * P[l, m] * np.cos(m * phi)
            out[:, off + 2 * m] = r2 * P[l, m] * np.sin(m * phi)
    return out


def basis_gradient(n: int, K: int, points) -> np.ndarray:
    """Tangential gradients of the basis, shape ``(N, ncoef, n)``."""
    n = _check_grid_dim(n)
    pts = _as_points(n, points)
    N = pts.shape[0]
    out = np.zeros((N, num_coeffs(n, K), n))
    if n == 2:
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        e_theta = np.column_stack([-np.sin(theta), np.cos(theta)])
        s = 1.0 / math.sqrt(math.pi)
        for k in range(1, K + 1):
            out[:, 2 * k - 1] = (-k * s * np.sin(k * theta))[:, None] * e_theta
            out[:, 2 * k] = (k * s * np.cos(k * theta))[:, None] * e_theta
        return out
    ct = np.clip(pts[:, 2], -1.0, 1.0)
    st = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    cp, sp = np.cos(phi), np.sin(phi)
    e_th = np.column_stack([ct * cp, ct * sp, -st])
    e_ph = np.column_stack([-sp, cp, np.zeros_like(sp)])
    _, dP, Q = _legendre_table(K, ct, st, with_derivative=True)
    r2 = math.sqrt(2.0)
    for l in range(K + 1):
        off = l * l
        out[:, off] = dP[l, 0][:, None] * e_th
        for m in range(1, l + 1):
            cm, sm = np.cos(m * phi), np.sin(m * phi)
            out[:, off + 2 * m - 1] = (r2 * dP[l, m] * cm)[:, None] * e_th + (
                -r2 * m * Q[l, m] * sm
            )[:, None] * e_ph
            out[:, off + 2 * m] = (r2 * dP[l, m] * sm)[:, None] * e_th + (
                r2 * m * Q[l, m] * cm
            )[:, None] * e_ph
    return out


def tangent_frame(points) -> np.ndarray:
    """Orthonormal tangent vectors at each unit vector, shape ``(N, n-1, n)``."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[1]
    if n == 2:
        return np.stack([-pts[:, 1], pts[:, 0]], axis=1)[:, None, :]
    helper = np.zeros_like(pts)
    helper[np.arange(len(pts)), np.argmin(np.abs(pts), axis=1)] = 1.0
    e1 = helper - np.sum(helper * pts, axis=1, keepdims=True) * pts
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(pts, e1)
    return np.stack([e1, e2], axis=1)


def _tensor_axes(grid: QuadratureGrid):
    nt, nphi = grid.shape
    ct = grid.nodes.reshape(nt, nphi, 3)[:, 0, 2]
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    return ct, np.sqrt(1.0 - ct * ct), phi


def _legendre_stack(grid: QuadratureGrid, K: int):
    key = ("legendre", K)
    if key not in grid._cache:
        ct, st, _ = _tensor_axes(grid)
        P, dP, Q = _legendre_table(K, ct, st)
        out = np.zeros((3, K + 1, K + 1, ct.size))
        for (l, m), v in P.items():
            out[0, l, m] = v
            out[1, l, m] = dP[l, m]
            if m > 0:
                out[2, l, m] = Q[l, m]
        grid._cache[key] = out
    return grid._cache[key]


def _mode_split(coeffs, K):
    # flat coefficients -> (cos, sin) arrays indexed [l, m], including the sqrt(2)
    ac = np.zeros((K + 1, K + 1))
    as_ = np.zeros((K + 1, K + 1))
    r2 = math.sqrt(2.0)
    for l in range(K + 1):
        off = l * l
        ac[l, 0] = coeffs[off]
        for m in range(1, l + 1):
            ac[l, m] = r2 * coeffs[off + 2 * m - 1]
            as_[l, m] = r2 * coeffs[off + 2 * m]
    return ac, as_


def _mode_merge(ac, as_, K):
    out = np.empty(num_coeffs(3, K))
    r2 = math.sqrt(2.0)
    for l in range(K + 1):
        off = l * l
        out[off] = ac[l, 0]
        for m in range(1, l + 1):
            out[off + 2 * m - 1] = r2 * ac[l, m]
            out[off + 2 * m] = r2 * as_[l, m]
    return out


def tensor_synthesis(coeffs, K: int, grid: QuadratureGrid, gradient: bool = False):
    """Values (and tangential gradients) on a colatitude x longitude grid, n = 3.

    Separable evaluation: Legendre sums per colatitude row, then
    trigonometric sums per longitude, O(n_theta K^2 + N K).
    """
    L = _legendre_stack(grid, K)
    ct, st, phi = _tensor_axes(grid)
    m = np.arange(K + 1)
    cos_m, sin_m = np.cos(np.outer(m, phi)), np.sin(np.outer(m, phi))
    ac, as_ = _mode_split(coeffs, K)
    vals = np.einsum("lm,lmi->im", ac, L[0]) @ cos_m + np.einsum("lm,lmi->im", as_, L[0]) @ sin_m
    if not gradient:
        return vals.ravel()
    d_th = np.einsum("lm,lmi->im", ac, L[1]) @ cos_m + np.einsum("lm,lmi->im", as_, L[1]) @ sin_m
    qc = np.einsum("lm,lmi->im", ac, L[2]) * m
    qs = np.einsum("lm,lmi->im", as_, L[2]) * m
    d_ph = -qc @ sin_m + qs @ cos_m
    cp, sp = np.cos(phi)[None, :], np.sin(phi)[None, :]
    c, s = ct[:, None], st[:, None]
    grad = np.stack(
        [d_th * c * cp - d_ph * sp, d_th * c * sp + d_ph * cp, -d_th * s + 0.0 * d_ph], axis=-1
    )
    return vals.ravel(), grad.reshape(-1, 3)


def tensor_analysis(samples, K: int, grid: QuadratureGrid) -> np.ndarray:
    """Quadrature projection onto degree <= K on a tensor grid, n = 3."""
    L = _legendre_stack(grid, K)
    nt, nphi = grid.shape
    _, _, phi = _tensor_axes(grid)
    m = np.arange(K + 1)
    f = np.asarray(samples, dtype=float).reshape(nt, nphi)
    w_theta = grid.weights.reshape(nt, nphi)[:, 0] * nphi / (2.0 * np.pi)
    dphi = 2.0 * np.pi / nphi
    fc = (f @ np.cos(np.outer(m, phi)).T) * dphi * w_theta[:, None]
    fs = (f @ np.sin(np.outer(m, phi)).T) * dphi * w_theta[:, None]
    ac = np.einsum("lmi,im->lm", L[0], fc)
    as_ = np.einsum("lmi,im->lm", L[0], fs)
    return _mode_merge(ac, as_, K)


def _is_tensor(grid) -> bool:
    return isinstance(grid, QuadratureGrid) and grid.n == 3 and len(grid.shape) == 2


# --------------------------------------------------------------------------- functions


class SphereFunction:
    """Band-limited real function on the unit sphere, stored by harmonic coefficients.

    ``coeffs`` is flat in ``(k, i)`` lexicographic order (see module docstring).
    Instances are immutable; arithmetic returns new objects.
    """

    __slots__ = ("n", "K", "coeffs", "_cache")

    def __init__(self, n: int, coeffs, K: int | None = None):
        coeffs = np.array(coeffs, dtype=float).ravel()
        if K is None:
            K = 0
            while num_coeffs(n, K) < coeffs.size:
                K += 1
        if coeffs.size != num_coeffs(n, K):
            raise ValueError(f"expected {num_coeffs(n, K)} coefficients for n={n}, K={K}")
        coeffs.setflags(write=False)
        self.n = int(n)
        self.K = int(K)
        self.coeffs = coeffs
        self._cache = {}

    # constructors
    @classmethod
    def zeros(cls, n: int, K: int = 0) -> "SphereFunction":
        return cls(n, np.zeros(num_coeffs(n, K)), K)

    @classmethod
    def constant(cls, n: int, c: float, K: int = 0) -> "SphereFunction":
        a = np.zeros(num_coeffs(n, K))
        a[0] = c * math.sqrt(sphere_area(n))
        return cls(n, a, K)

    @classmethod
    def harmonic(cls, n: int, k: int, i: int = 1, amplitude: float = 1.0, K: int | None = None):
        """``amplitude * Y_k^i``."""
        K = k if K is None else K
        a = np.zeros(num_coeffs(n, K))
        a[flat_index(n, k, i)] = amplitude
        return cls(n, a, K)

    @classmethod
    def from_degrees(cls, n: int, blocks) -> "SphereFunction":
        """Build from a sequence of per-degree coefficient blocks."""
        return cls(n, np.concatenate([np.atleast_1d(b) for b in blocks]), len(blocks) - 1)

    # coefficient access
    def coefficient(self, k: int, i: int = 1) -> float:
        if k > self.K:
            return 0.0
        return float(self.coeffs[flat_index(self.n, k, i)])

    def degree_block(self, k: int) -> np.ndarray:
        if k > self.K:
            return np.zeros(dim_harmonic(self.n, k))
        off = degree_offset(self.n, k)
        return self.coeffs[off : off + dim_harmonic(self.n, k)]

    def degree_energy(self) -> np.ndarray:
        """Sum of squared coefficients per degree, length ``K + 1``."""
        deg = degree_of_index(self.n, self.K)
        return np.bincount(deg, weights=self.coeffs**2, minlength=self.K + 1)

    def with_band(self, K: int) -> "SphereFunction":
        """Truncate or zero-pad to band limit ``K``."""
        m = num_coeffs(self.n, K)
        a = np.zeros(m)
        c = min(m, self.coeffs.size)
        a[:c] = self.coeffs[:c]
        return SphereFunction(self.n, a, K)

    def mean(self) -> float:
        return float(self.coeffs[0] / math.sqrt(sphere_area(self.n)))

    # arithmetic
    def _aligned(self, other):
        if not isinstance(other, SphereFunction) or other.n != self.n:
            return NotImplemented
        K = max(self.K, other.K)
        return self.with_band(K).coeffs, other.with_band(K).coeffs, K

    def __add__(self, other):
        al = self._aligned(other)
        if al is NotImplemented:
            return al
        a, b, K = al
        return SphereFunction(self.n, a + b, K)

    def __sub__(self, other):
        al = self._aligned(other)
        if al is NotImplemented:
            return al
        a, b, K = al
        return SphereFunction(self.n, a - b, K)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SphereFunction(self.n, float(scalar) * self.coeffs, self.K)

    __rmul__ = __mul__

    def __neg__(self):
        return SphereFunction(self.n, -self.coeffs, self.K)

    def __repr__(self):
        return f"SphereFunction(n={self.n}, K={self.K}, l2={self.l2_norm():.3g})"

    # evaluation
    def evaluate(self, points) -> np.ndarray:
        pts = _as_points(self.n, points)
        step = max(1, _CHUNK // self.coeffs.size)
        out = np.empty(pts.shape[0])
        for a in range(0, pts.shape[0], step):
            out[a : a + step] = basis_matrix(self.n, self.K, pts[a : a + step]) @ self.coeffs
        return out

    def gradient(self, points) -> np.ndarray:
        """Tangential gradient at ``points``, shape ``(N, n)``."""
        pts = _as_points(self.n, points)
        step = max(1, _CHUNK // (self.coeffs.size * self.n))
        out = np.empty(pts.shape)
        for a in range(0, pts.shape[0], step):
            G = basis_gradient(self.n, self.K, pts[a : a + step])
            out[a : a + step] = np.einsum("pcd,c->pd", G, self.coeffs)
        return out

    def samples(self, grid: QuadratureGrid) -> np.ndarray:
        key = ("samples", id(grid))
        hit = self._cache.get(key)
        if hit is None or hit[0] is not grid:
            if _is_tensor(grid) and self.K > 8:
                vals = tensor_synthesis(self.coeffs, self.K, grid)
            else:
                vals = grid.basis(self.K) @ self.coeffs
            vals.setflags(write=False)
            hit = (grid, vals)
            self._cache[key] = hit
        return hit[1]

    # norms
    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def linf_norm(self) -> float:
        if "linf" not in self._cache:
            g = dense_grid(self.n, self.K)
            self._cache["linf"] = float(np.max(np.abs(_values_and_gradients(self, g)[0])))
        return self._cache["linf"]

    def c1_norm(self) -> float:
        return c1_norm_estimate(self)

    def seminorm_sq(self, alpha: float) -> float:
        """Spectral ``[u]^2`` of order (1+alpha)/2."""
        lam = lambda_eigenvalue(self.n, alpha, np.arange(self.K + 1))
        return float(np.dot(lam, self.degree_energy()))

    def h_norm_sq(self, alpha: float) -> float:
        """Full ``||u||^2_{H^{(1+alpha)/2}} = ||u||^2_{L^2} + [u]^2``."""
        return self.l2_norm() ** 2 + self.seminorm_sq(alpha)

    # serialization
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "basis": "real-orthonormal",
            "order": "(k, i) lexicographic",
            "coefficients": [float(c) for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SphereFunction":
        return cls(int(data["n"]), data["coefficients"], int(data["K"]))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "SphereFunction":
        return cls.from_dict(json.loads(text))


def synthesize(u: SphereFunction, grid: QuadratureGrid) -> np.ndarray:
    """Grid samples of ``u``."""
    return np.array(u.samples(grid))


def analyze(samples, grid: QuadratureGrid, K: int, check_aliasing: bool = True) -> SphereFunction:
    """Project grid samples onto harmonics of degree <= K by quadrature.

    Raises :class:`AliasingError` (or warns, if ``check_aliasing`` is False)
    when the energy left after projection exceeds 1e-6 of the total.
    Energies below ``ALIAS_FLOOR`` (round-off level for O(1) data) are ignored.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.size,):
        raise ValueError("samples must have one value per grid node")
    if _is_tensor(grid):
        coeffs = tensor_analysis(samples, K, grid)
    else:
        coeffs = grid.basis(K).T @ (grid.weights * samples)
    total = grid.integrate(samples**2)
    residual = total - float(np.sum(coeffs**2))
    if residual > max(1e-6 * total, ALIAS_FLOOR):
        msg = f"residual energy {residual:.3e} of {total:.3e} beyond degree {K}"
        if check_aliasing:
            raise AliasingError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return SphereFunction(grid.n, coeffs, K)


def _values_and_gradients(u: SphereFunction, grid: QuadratureGrid):
    if _is_tensor(grid):
        return tensor_synthesis(u.coeffs, u.K, grid, gradient=True)
    return u.evaluate(grid.nodes), u.gradient(grid.nodes)


def c1_norm_estimate(u: SphereFunction) -> float:
    """``max|u| + max|grad u|`` over a dense evaluation grid."""
    if "c1" in u._cache:
        return u._cache["c1"]
    if not np.any(u.coeffs):
        val = 0.0
    else:
        vals, grads = _values_and_gradients(u, dense_grid(u.n, u.K))
        val = float(np.max(np.abs(vals)) + np.max(np.linalg.norm(grads, axis=1)))
    u._cache["c1"] = val
    return val


def seminorm_gagliardo(
    u: SphereFunction,
    alpha: float,
    method: str = "spectral",
    *,
    tol: float | None = None,
    full_output: bool = False,
    **quad_options,
):
    """Gagliardo seminorm ``[u]^2`` of order (1+alpha)/2 on the sphere.

    ``method="spectral"`` sums eigenvalues against coefficients.
    ``method="quadrature"`` integrates ``(u(x)-u(y))^2 / |x-y|^{n+alpha}``
    over the product sphere; ``near_diagonal`` selects the diagonal
    treatment (``"jacobi"``: product Gauss-Jacobi rule in the geodesic
    distance, ``"band"``: excised band plus Taylor correction with
    Richardson extrapolation).  With ``tol`` set, raises
    :class:`~fracperim.quadrature.QuadratureError` if the error estimate
    exceeds ``tol`` relative to the value.
    """
    if method == "spectral":
        val = u.seminorm_sq(alpha)
        return (val, 0.0) if full_output else val
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    from .quadrature import check_tolerance, seminorm_quadrature

    val, err = seminorm_quadrature(u, alpha, **quad_options)
    check_tolerance(val, err, tol, "seminorm")
    return (val, err) if full_output else val
