"""Product quadrature for singular double integrals over the sphere.

Integrals of the form ``int int g(x, y) |x - y|^{-n-alpha}`` with ``g``
vanishing quadratically on the diagonal are handled in geodesic polar
coordinates around each outer node ``x``: the geodesic distance ``h`` is
integrated with a Gauss-Jacobi rule carrying the weight ``h^{-alpha}``, and
directions come in antipodal pairs so the odd part of the integrand cancels
exactly.  The remaining integrand is smooth in ``h``, so the rule converges
spectrally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .sphere import QuadratureGrid, SphereFunction, make_grid, tangent_frame


class QuadratureError(RuntimeError):
    """Estimated quadrature error exceeds the requested tolerance."""

    def __init__(self, what, value, error, tol):
        super().__init__(f"{what}: estimated error {error:.3e} exceeds tolerance {tol:.3e} (value {value:.6g})")
        self.value = value
        self.error = error
        self.tol = tol


def check_tolerance(value, error, tol, what="integral"):
    """Raise if ``error > tol * max(|value|, 1)``; ``tol=None`` disables the check."""
    if tol is not None and error > tol * max(abs(value), 1.0):
        raise QuadratureError(what, value, error, tol)


@dataclass(frozen=True)
class Resolution:
    """Discretization parameters of the pair rule."""

    outer: int
    radial: int
    angular: int
    box: int

    def refined(self, factor=1.5):
        up = lambda m: int(math.ceil(factor * m))
        ang = up(self.angular)
        return Resolution(up(self.outer), up(self.radial), ang + ang % 2, up(self.box))


def default_resolution(n: int, K: int, grad_max: float = 0.0) -> Resolution:
    """Resolution adequate for band limit ``K`` and slope ``grad_max``."""
    K = max(K, 1)
    box = 8 + int(math.ceil(4.0 * grad_max))
    grow = 1.0 + grad_max
    if n == 2:
        outer = int(math.ceil(max(32, 6 * K + 8) * grow))
        return Resolution(outer=outer, radial=max(24, 3 * K + 12), angular=2, box=box)
    ang = int(math.ceil(max(12, 2 * K + 6) * grow))
    outer = int(math.ceil(max(8, K + 3) * grow))
    return Resolution(outer=outer, radial=max(14, K + 12), angular=ang + ang % 2, box=box)


def outer_grid(n: int, res: Resolution) -> QuadratureGrid:
    if n == 2:
        return make_grid(2, res.outer)
    return make_grid(3, (res.outer, 2 * res.outer))


class PairRule:
    """Inner rule around each outer node: ``int f(y) dsigma(y) ~ sum_j W_j f(y_j)``.

    Valid for ``f(y) = |x - y|^{-n-alpha} g(x, y)`` with ``g`` vanishing to
    second order at ``y = x``.  The radial weights absorb ``h^{-alpha}`` and
    the area element, so callers only multiply by the integrand.
    ``radial_nodes=(h, w)`` replaces the Gauss-Jacobi rule in ``h``.
    """

    def __init__(self, n: int, alpha: float, radial: int, angular: int = 2, radial_nodes=None):
        if n not in (2, 3):
            raise ValueError("pair rule supports n in (2, 3)")
        self.n = n
        self.alpha = alpha
        if radial_nodes is None:
            xi, wi = roots_jacobi(radial, 0.0, -alpha)
            h = 0.5 * np.pi * (1.0 + xi)
            # sum_j w_j f(h_j) ~ int_0^pi f dh for f ~ h^{-alpha} * smooth
            w = 0.5 * np.pi * wi * (1.0 + xi) ** alpha
        else:
            h, w = (np.asarray(a, dtype=float) for a in radial_nodes)
        if n == 2:
            self.h = np.concatenate([h, h])
            self.sign = np.concatenate([np.ones_like(h), -np.ones_like(h)])
            self.w = np.concatenate([w, w])
        else:
            if angular % 2:
                raise ValueError("angular node count must be even")
            beta = 2.0 * np.pi * (np.arange(angular) + 0.5) / angular
            hh, bb = np.meshgrid(h, beta, indexing="ij")
            self.h = hh.ravel()
            self.cb = np.cos(bb).ravel()
            self.sb = np.sin(bb).ravel()
            self.w = (np.outer(w * np.sin(h), np.full(angular, 2.0 * np.pi / angular))).ravel()
        self.dist = 2.0 * np.sin(0.5 * self.h)

    @property
    def size(self) -> int:
        return self.h.size

    def points(self, x: np.ndarray) -> np.ndarray:
        """Inner nodes for outer nodes ``x``; shape ``(len(x), size, n)``."""
        ch, sh = np.cos(self.h), np.sin(self.h)
        if self.n == 2:
            c0, s0 = x[:, 0:1], x[:, 1:2]
            s = sh * self.sign
            return np.stack([c0 * ch - s0 * s, s0 * ch + c0 * s], axis=-1)
        e = tangent_frame(x)
        dirs = self.cb[None, :, None] * e[:, None, 0, :] + self.sb[None, :, None] * e[:, None, 1, :]
        return ch[None, :, None] * x[:, None, :] + sh[None, :, None] * dirs


def pair_blocks(u_list, grid: QuadratureGrid, rule: PairRule, chunk: int = 1 << 20):
    """Yield ``(slice, x, ux_list, uy_list)`` over tiles of outer nodes.

    ``ux_list[m]`` has shape ``(tile, 1)`` and ``uy_list[m]`` ``(tile, size)``
    for each function in ``u_list`` (``None`` entries pass through).
    """
    step = max(1, chunk // rule.size)
    for a in range(0, grid.size, step):
        sl = slice(a, min(a + step, grid.size))
        x = grid.nodes[sl]
        y = rule.points(x).reshape(-1, grid.n)
        ux, uy = [], []
        for u in u_list:
            if u is None:
                ux.append(None)
                uy.append(None)
                continue
            ux.append(u.samples(grid)[sl][:, None])
            uy.append(u.evaluate(y).reshape(x.shape[0], rule.size))
        yield sl, x, ux, uy


def _seminorm_pair(u: SphereFunction, alpha: float, res: Resolution) -> float:
    n = u.n
    grid = outer_grid(n, res)
    rule = PairRule(n, alpha, res.radial, res.angular)
    kern = rule.w * rule.dist ** (-n - alpha)
    total = 0.0
    for sl, _, (ux,), (uy,) in pair_blocks([u], grid, rule):
        inner = ((ux - uy) ** 2) @ kern
        total += float(np.dot(grid.weights[sl], inner))
    return total


def _band_far_nodes(eta, panels_per_octave=1, order=12):
    # composite Gauss-Legendre on geometric panels [eta 2^j, eta 2^{j+1}] up to pi
    edges = [eta]
    while edges[-1] < np.pi:
        edges.append(min(np.pi, edges[-1] * 2.0 ** (1.0 / panels_per_octave)))
    xg, wg = roots_legendre(order)
    h, w = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        h.append(0.5 * (b - a) * xg + 0.5 * (a + b))
        w.append(0.5 * (b - a) * wg)
    return np.concatenate(h), np.concatenate(w)


def _seminorm_band_once(u, alpha, eta, res):
    n = u.n
    grid = outer_grid(n, res)
    h, w = _band_far_nodes(eta)
    rule = PairRule(n, alpha, 0, res.angular, radial_nodes=(h, w))
    kern = rule.w * rule.dist ** (-n - alpha)
    far = 0.0
    for sl, _, (ux,), (uy,) in pair_blocks([u], grid, rule):
        far += float(np.dot(grid.weights[sl], ((ux - uy) ** 2) @ kern))
    grad2 = np.sum(u.gradient(grid.nodes) ** 2, axis=1)
    # leading model (u(x)-u(y))^2 ~ (grad u . e)^2 h^2 on the excised cap
    ang = 2.0 if n == 2 else np.pi
    near = ang * eta ** (1.0 - alpha) / (1.0 - alpha) * grid.integrate(grad2)
    return far + near


def seminorm_band(u: SphereFunction, alpha: float, eta: float = 0.05, res: Resolution | None = None):
    """Excised-band seminorm with Taylor correction, Richardson-extrapolated in ``eta``.

    Returns ``(value, error)``.  The excision error is ``O(eta^{3-alpha})``.
    """
    res = res or default_resolution(u.n, u.K)
    s1 = _seminorm_band_once(u, alpha, eta, res)
    s2 = _seminorm_band_once(u, alpha, 0.5 * eta, res)
    p = 3.0 - alpha
    rich = s2 + (s2 - s1) / (2.0**p - 1.0)
    return rich, abs(rich - s2)


def seminorm_quadrature(
    u: SphereFunction,
    alpha: float,
    near_diagonal: str = "jacobi",
    resolution: Resolution | None = None,
    eta: float = 0.05,
):
    """Quadrature value of ``[u]^2`` and an error estimate."""
    if u.n not in (2, 3):
        raise ValueError("quadrature seminorm supports n in (2, 3)")
    if not np.any(u.coeffs[1:]):
        return 0.0, 0.0
    res = resolution or default_resolution(u.n, u.K)
    if near_diagonal == "band":
        return seminorm_band(u, alpha, eta, res)
    if near_diagonal != "jacobi":
        raise ValueError(f"unknown near-diagonal treatment {near_diagonal!r}")
    coarse = _seminorm_pair(u, alpha, res)
    fine = _seminorm_pair(u, alpha, res.refined())
    return fine, abs(fine - coarse)
