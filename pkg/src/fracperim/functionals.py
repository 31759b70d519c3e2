"""Fractional perimeters of nearly spherical sets, the ratio F and their variations.

In polar coordinates the alpha-perimeter of ``E_u`` splits into an area-type
term ``(P_alpha(B)/P(B)) int (1+u)^{n-alpha}`` and a double integral over
pairs of directions of the box integral of the kernel

    F_d(r, rho) = (r rho)^{n-1} / ((r - rho)^2 + r rho d^2)^{(n+alpha)/2},

``d = |x - y|``, over ``[1 + u(y), 1 + u(x)]^2``.  Pair integrals use the
Gauss-Jacobi product rule of :mod:`fracperim.quadrature`; the inner radial
integrals use fixed-order Gauss-Legendre rules on the moving interval.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from .geometry import NearlySphericalSet
from .quadrature import (
    PairRule,
    check_tolerance,
    default_resolution,
    outer_grid,
    pair_blocks,
)
from .specfun import FracParams, lambda_eigenvalue, perimeter_ball, sphere_area
from .sphere import SphereFunction, c1_norm_estimate

DEFAULT_TOL = 1e-6


# --------------------------------------------------------------------------- kernels


def _check_singular(dist, r, rho):
    if np.any((np.asarray(dist) == 0) & (np.asarray(r) == np.asarray(rho))):
        raise ValueError("kernel is singular at dist = 0 with r = rho")


def _kernel(dist, r, rho, n, alpha):
    return (r * rho) ** (n - 1) * ((r - rho) ** 2 + r * rho * dist**2) ** (-0.5 * (n + alpha))


def _kernel_d1(dist, a, b, n, alpha):
    q = (a - b) ** 2 + a * b * dist**2
    return _kernel(dist, a, b, n, alpha) * ((n - 1) / a - 0.5 * (n + alpha) * (2.0 * (a - b) + b * dist**2) / q)


def kernel_F(dist, r, rho, n: int, alpha: float):
    """``F_dist(r, rho)``; symmetric in ``(r, rho)`` and positive for r, rho > 0."""
    _check_singular(dist, r, rho)
    return _kernel(np.asarray(dist, float), np.asarray(r, float), np.asarray(rho, float), n, alpha)


def kernel_dF(dist, a, b, n: int, alpha: float):
    """Partial derivative of ``F_dist(a, b)`` in its first radial argument."""
    _check_singular(dist, a, b)
    return _kernel_d1(np.asarray(dist, float), np.asarray(a, float), np.asarray(b, float), n, alpha)


def kernel_G(dist, a, b, n: int, alpha: float):
    """``dF(a, b) + dF(b, a)``."""
    return kernel_dF(dist, a, b, n, alpha) + kernel_dF(dist, b, a, n, alpha)


@dataclass
class KernelEval:
    """Kernel values for one pair of directions and radial arguments."""

    x: np.ndarray
    y: np.ndarray
    r: float
    rho: float
    n: int
    alpha: float
    F: float = field(init=False)
    dF: float = field(init=False)
    G: float = field(init=False)

    def __post_init__(self):
        d = float(np.linalg.norm(np.asarray(self.x) - np.asarray(self.y)))
        self.F = float(kernel_F(d, self.r, self.rho, self.n, self.alpha))
        self.dF = float(kernel_dF(d, self.r, self.rho, self.n, self.alpha))
        self.G = float(kernel_G(d, self.r, self.rho, self.n, self.alpha))


# --------------------------------------------------------------------------- pair integrals


def _legendre01(m):
    x, w = roots_legendre(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _as_function(E) -> SphereFunction:
    return E.u if isinstance(E, NearlySphericalSet) else E


def _resolution_for(u, phi=None):
    K = max(u.K, phi.K if phi is not None else 0)
    slope = c1_norm_estimate(u) if np.any(u.coeffs) else 0.0
    return default_resolution(u.n, K, slope)


def _pair_sum(funcs, n, alpha, res, integrand):
    grid = outer_grid(n, res)
    rule = PairRule(n, alpha, res.radial, res.angular)
    xi, wi = _legendre01(res.box)
    chunk = max(1 << 14, (1 << 22) // (res.box * res.box))
    total = 0.0
    for sl, _, ux, uy in pair_blocks(funcs, grid, rule, chunk=chunk):
        vals = integrand(ux, uy, rule.dist[None, :], xi, wi)
        total += float(np.dot(grid.weights[sl], vals @ rule.w))
    return total


def _refined_pair(funcs, n, alpha, res, integrand):
    coarse = _pair_sum(funcs, n, alpha, res, integrand)
    fine = _pair_sum(funcs, n, alpha, res.refined(), integrand)
    return fine, abs(fine - coarse)


def _area_term(u, alpha, power, weight=None, res=None):
    n = u.n
    grid = outer_grid(n, res)
    vals = (1.0 + u.samples(grid)) ** power
    if weight is not None:
        vals = vals * weight.samples(grid)
    return perimeter_ball(n, alpha) / sphere_area(n) * grid.integrate(vals)


def _box_integrand(n, alpha):
    # int int_{[u(y), u(x)]^2} F_d(1 + r, 1 + rho)
    def f(ux, uy, d, xi, wi):
        (ux,), (uy,) = ux, uy
        delta = ux - uy
        r = (1.0 + uy)[..., None] + delta[..., None] * xi
        K = _kernel(d[..., None, None], r[..., :, None], r[..., None, :], n, alpha)
        return delta**2 * np.einsum("...ij,i,j->...", K, wi, wi)

    return f


def fractional_perimeter(E, alpha: float, *, tol: float | None = DEFAULT_TOL, resolution=None, full_output=False):
    """``P_alpha(E_u)`` with an error estimate.

    Raises :class:`~fracperim.quadrature.QuadratureError` if the estimate
    exceeds ``tol`` (relative).  ``full_output`` returns ``(value, error)``.
    """
    u = _as_function(E)
    n = u.n
    res = resolution or _resolution_for(u)
    term1 = _area_term(u, alpha, n - alpha, res=res.refined())
    if not np.any(u.coeffs[1:]):
        val, err = term1, 0.0
    else:
        pair, err = _refined_pair([u], n, alpha, res, _box_integrand(n, alpha))
        val = term1 + 0.5 * pair
    check_tolerance(val, err, tol, "fractional perimeter")
    return (val, err) if full_output else val


def first_variation_P(u: SphereFunction, phi: SphereFunction, alpha: float, *, tol=DEFAULT_TOL, resolution=None, full_output=False):
    """``dP_alpha(u)[phi]``."""
    n = u.n
    res = resolution or _resolution_for(u, phi)
    term1 = (n - alpha) * _area_term(u, alpha, n - alpha - 1.0, weight=phi, res=res.refined())
    if not np.any(u.coeffs[1:]):
        val, err = term1, 0.0
    else:

        def f(ux, uy, d, xi, wi):
            (u_x, p_x), (u_y, _) = ux, uy
            delta = u_x - u_y
            rho = (1.0 + u_y)[..., None] + delta[..., None] * xi
            K = _kernel(d[..., None], (1.0 + u_x)[..., None], rho, n, alpha)
            return p_x * delta * (K @ wi)

        pair, err = _refined_pair([u, phi], n, alpha, res, f)
        val = term1 + 2.0 * pair
    check_tolerance(val, err, tol, "first variation")
    return (val, err) if full_output else val


def second_variation_P(u: SphereFunction, phi: SphereFunction, alpha: float, *, tol=DEFAULT_TOL, resolution=None, full_output=False):
    """``d^2 P_alpha(u)[phi, phi]``.

    The two pair terms are individually non-integrable on the diagonal when
    ``u`` is not constant; they are summed node by node before integration.
    """
    n = u.n
    res = resolution or _resolution_for(u, phi)
    c = (n - alpha) * (n - alpha - 1.0)
    sq = SphereFunction(n, phi.coeffs, phi.K)
    grid = outer_grid(n, res.refined())
    term1 = c * perimeter_ball(n, alpha) / sphere_area(n) * grid.integrate(
        sq.samples(grid) ** 2 * (1.0 + u.samples(grid)) ** (n - alpha - 2.0)
    )

    def f(ux, uy, d, xi, wi):
        (u_x, p_x), (u_y, p_y) = ux, uy
        a = 1.0 + u_x
        b = 1.0 + u_y
        diag = a ** (n - 2.0 - alpha) * d ** (-n - alpha)
        t2 = p_x * (p_x * diag - p_y * _kernel(d, a, b, n, alpha))
        delta = u_x - u_y
        rho = b[..., None] + delta[..., None] * xi
        t3 = p_x * p_x * delta * (_kernel_d1(d[..., None], a[..., None], rho, n, alpha) @ wi)
        return t2 + t3

    pair, err = _refined_pair([u, phi], n, alpha, res, f)
    val = term1 + 2.0 * pair
    check_tolerance(val, err, tol, "second variation")
    return (val, err) if full_output else val


def perimeter_ball_direct(n: int, alpha: float, epsabs: float = 1e-11, epsrel: float = 1e-10) -> float:
    """``P_alpha(B)`` by adaptive quadrature of the defining double integral.

    For ``x`` at distance ``rho`` from the center, integrating ``|x-y|^{-n-alpha}``
    over the complement along each ray gives ``R(psi)^{-alpha}/alpha`` with
    ``R`` the distance to the sphere in direction ``psi``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    s_inner = sphere_area(n - 1) if n > 2 else 2.0

    def ray(psi, rho):
        R = -rho * math.cos(psi) + math.sqrt(1.0 - (rho * math.sin(psi)) ** 2)
        return R ** (-alpha) / alpha * math.sin(psi) ** (n - 2)

    def shell(rho):
        if rho == 0.0:
            return s_inner * integrate.quad(lambda p: math.sin(p) ** (n - 2), 0.0, math.pi)[0] / alpha
        val, _ = integrate.quad(ray, 0.0, math.pi, args=(rho,), epsabs=epsabs, epsrel=epsrel, limit=400)
        return s_inner * rho ** (n - 1) * val

    val, _ = integrate.quad(shell, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=400)
    return sphere_area(n) * val


# --------------------------------------------------------------------------- the ratio F


def ratio_F_ball(params: FracParams) -> float:
    n, s, t = params.n, params.s, params.t
    return perimeter_ball(n, t) ** (1.0 / (n - t)) / perimeter_ball(n, s) ** (1.0 / (n - s))


def ratio_F(E, params: FracParams, *, tol=DEFAULT_TOL, resolution=None, full_output=False):
    """``P_t(E)^{1/(n-t)} / P_s(E)^{1/(n-s)}``."""
    u = _as_function(E)
    n, s, t = params.n, params.s, params.t
    pt, et = fractional_perimeter(u, t, tol=tol, resolution=resolution, full_output=True)
    ps, es = fractional_perimeter(u, s, tol=tol, resolution=resolution, full_output=True)
    val = pt ** (1.0 / (n - t)) / ps ** (1.0 / (n - s))
    err = val * (et / ((n - t) * pt) + es / ((n - s) * ps))
    return (val, err) if full_output else val


def first_variation_F(u: SphereFunction, params: FracParams, phi: SphereFunction | None = None, *, tol=DEFAULT_TOL, resolution=None):
    """``dF(u)[phi]`` assembled from perimeters and their first variations."""
    phi = u if phi is None else phi
    n, s, t = params.n, params.s, params.t
    pt = fractional_perimeter(u, t, tol=tol, resolution=resolution)
    ps = fractional_perimeter(u, s, tol=tol, resolution=resolution)
    dt = first_variation_P(u, phi, t, tol=tol, resolution=resolution)
    ds = first_variation_P(u, phi, s, tol=tol, resolution=resolution)
    F = pt ** (1.0 / (n - t)) / ps ** (1.0 / (n - s))
    return F * (dt / ((n - t) * pt) - ds / ((n - s) * ps))


def _assemble_second(F, pt, ps, dt, ds, qt, qs, n, s, t):
    L = dt / ((n - t) * pt) - ds / ((n - s) * ps)
    curv = (qt / pt - (dt / pt) ** 2) / (n - t) - (qs / ps - (ds / ps) ** 2) / (n - s)
    return F * (L * L + curv)


@dataclass
class VariationReport:
    """Values of F (or P) and its variations with method tags and error estimates."""

    quantity: str
    value: float
    first: float
    second: float
    method: str
    errors: dict = field(default_factory=dict)
    spectral_second: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def second_variation_F(
    u: SphereFunction,
    params: FracParams,
    phi: SphereFunction | None = None,
    *,
    tol=DEFAULT_TOL,
    resolution=None,
    report: bool = False,
):
    """``d^2 F(u)[phi, phi]`` (``phi = u`` by default) by quadrature.

    With ``report=True`` returns a :class:`VariationReport` carrying the
    value of F, the first and second variations and propagated errors.
    """
    phi = u if phi is None else phi
    n, s, t = params.n, params.s, params.t
    res = resolution or _resolution_for(u, phi)
    pt, e_pt = fractional_perimeter(u, t, tol=tol, resolution=res, full_output=True)
    ps, e_ps = fractional_perimeter(u, s, tol=tol, resolution=res, full_output=True)
    dt, e_dt = first_variation_P(u, phi, t, tol=tol, resolution=res, full_output=True)
    ds, e_ds = first_variation_P(u, phi, s, tol=tol, resolution=res, full_output=True)
    qt, e_qt = second_variation_P(u, phi, t, tol=tol, resolution=res, full_output=True)
    qs, e_qs = second_variation_P(u, phi, s, tol=tol, resolution=res, full_output=True)
    F = pt ** (1.0 / (n - t)) / ps ** (1.0 / (n - s))
    second = _assemble_second(F, pt, ps, dt, ds, qt, qs, n, s, t)
    if not report:
        return second
    first = F * (dt / ((n - t) * pt) - ds / ((n - s) * ps))
    # first-order propagation of the component error estimates
    err2 = F * (abs(e_qt / ((n - t) * pt)) + abs(e_qs / ((n - s) * ps)))
    err2 += 2.0 * F * (abs(dt) * e_dt / ((n - t) * pt * pt) + abs(ds) * e_ds / ((n - s) * ps * ps))
    err2 += abs(second) * (e_pt / pt + e_ps / ps) + F * (abs(qt) * e_pt / pt**2 + abs(qs) * e_ps / ps**2)
    errors = {
        "P_t": e_pt,
        "P_s": e_ps,
        "dP_t": e_dt,
        "dP_s": e_ds,
        "d2P_t": e_qt,
        "d2P_s": e_qs,
        "second": err2,
    }
    at_zero = second_variation_F_at_zero(phi, params) if not np.any(u.coeffs) else None
    return VariationReport("F", F, first, second, "quadrature", errors, at_zero)


# --------------------------------------------------------------------------- spectral forms at u = 0


def second_variation_P_at_zero(phi: SphereFunction, alpha: float) -> float:
    """``(n-alpha)(n-alpha-1)(P_alpha(B)/P(B)) ||phi||^2 + [phi]^2``, spectrally."""
    n = phi.n
    c = (n - alpha) * (n - alpha - 1.0) * perimeter_ball(n, alpha) / sphere_area(n)
    return c * phi.l2_norm() ** 2 + phi.seminorm_sq(alpha)


def first_variation_P_at_zero(phi: SphereFunction, alpha: float) -> float:
    n = phi.n
    return (n - alpha) * perimeter_ball(n, alpha) / sphere_area(n) * phi.mean() * sphere_area(n)


def first_variation_F_at_zero(phi: SphereFunction, params: FracParams) -> float:
    n, s, t = params.n, params.s, params.t
    L = first_variation_P_at_zero(phi, t) / ((n - t) * perimeter_ball(n, t)) - first_variation_P_at_zero(
        phi, s
    ) / ((n - s) * perimeter_ball(n, s))
    return ratio_F_ball(params) * L


def second_variation_F_at_zero(phi: SphereFunction, params: FracParams) -> float:
    """``d^2 F(0)[phi, phi]`` from eigenvalues and the variance of ``phi``."""
    n, s, t = params.n, params.s, params.t
    area = sphere_area(n)
    energy = phi.degree_energy()
    ks = np.arange(phi.K + 1)
    lam_t = lambda_eigenvalue(n, t, ks)
    lam_s = lambda_eigenvalue(n, s, ks)
    semi_t = float(np.dot(lam_t, energy)) / ((n - t) * perimeter_ball(n, t))
    semi_s = float(np.dot(lam_s, energy)) / ((n - s) * perimeter_ball(n, s))
    variance = float(np.sum(energy[1:])) / area
    return ratio_F_ball(params) * (semi_t - semi_s - (t - s) * variance)


# --------------------------------------------------------------------------- finite differences


def richardson_first(f, h: float) -> float:
    """Central difference of ``f`` at 0 with one Richardson step."""
    d1 = (f(h) - f(-h)) / (2.0 * h)
    d2 = (f(0.5 * h) - f(-0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def richardson_second(f, h: float, f0: float | None = None) -> float:
    """Second central difference of ``f`` at 0 with one Richardson step."""
    f0 = f(0.0) if f0 is None else f0
    s1 = (f(h) - 2.0 * f0 + f(-h)) / (h * h)
    s2 = (f(0.5 * h) - 2.0 * f0 + f(-0.5 * h)) / (0.25 * h * h)
    return (4.0 * s2 - s1) / 3.0


def default_step(scale: float = 1.0) -> float:
    """``eps^{1/3} * scale``, the usual central-difference step."""
    return np.finfo(float).eps ** (1.0 / 3.0) * scale
