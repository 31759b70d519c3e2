"""Nearly spherical sets ``E_u = {r x : 0 <= r < 1 + u(x)}`` and their geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .specfun import ball_volume, sphere_area
from .sphere import (
    QuadratureGrid,
    SphereFunction,
    analyze,
    c1_norm_estimate,
    flat_index,
    make_grid,
    tangent_frame,
)

SUP_BOUND = 0.5
PROJECTION_SUP = 0.25


class ProjectionError(RuntimeError):
    """Newton projection onto the volume/barycenter constraints failed."""


class RegraphError(RuntimeError):
    """The direction map is not a diffeomorphism at the given perturbation."""


def exact_grid(n: int, degree: int) -> QuadratureGrid:
    """Grid integrating spherical polynomials of total degree ``degree`` exactly."""
    if n == 2:
        return make_grid(2, max(32, degree + 1))
    return make_grid(3, (max(16, degree // 2 + 2), max(32, degree + 2)))


class NearlySphericalSet:
    """The set whose boundary is the radial graph ``(1 + u(x)) x`` over the unit sphere."""

    def __init__(self, u: SphereFunction, check: bool = True):
        if check and u.linf_norm() > SUP_BOUND + 1e-12:
            raise ValueError(f"||u||_inf = {u.linf_norm():.4g} exceeds {SUP_BOUND}")
        self.u = u
        self.n = u.n

    def __repr__(self):
        return f"NearlySphericalSet(n={self.n}, K={self.u.K})"

    def grid(self, extra_degree: int = 1) -> QuadratureGrid:
        return exact_grid(self.n, (self.n + 1) * self.u.K + extra_degree)

    def volume(self) -> float:
        return volume(self)

    def barycenter(self) -> np.ndarray:
        return barycenter(self)


def _as_set(E) -> NearlySphericalSet:
    return E if isinstance(E, NearlySphericalSet) else NearlySphericalSet(E)


def volume(E) -> float:
    """``(1/n) int (1 + u)^n dsigma``."""
    E = _as_set(E)
    g = E.grid()
    return g.integrate((1.0 + E.u.samples(g)) ** E.n) / E.n


def barycenter_moment(E) -> np.ndarray:
    """Un-normalized first moment ``(1/(n+1)) int x (1 + u)^{n+1} dsigma``."""
    E = _as_set(E)
    g = E.grid()
    w = g.weights * (1.0 + E.u.samples(g)) ** (E.n + 1)
    return g.nodes.T @ w / (E.n + 1)


def barycenter(E) -> np.ndarray:
    """True barycenter: moment divided by volume."""
    E = _as_set(E)
    return barycenter_moment(E) / volume(E)


def lemma_constants(n: int, sup: float = SUP_BOUND) -> tuple[float, float]:
    """Constants ``(C0, C1)`` bounding the low modes of an admissible ``u``.

    ``|a_0| <= C0 ||u||^2_{L2}`` and ``|a_1^i| <= C1 ||u||^2_{L2}`` whenever
    ``|E_u| = |B|``, the barycenter vanishes and ``||u||_inf <= sup``.
    """
    area = sphere_area(n)
    c0 = (n - 1) * (1.0 + sup) ** (n - 2) / (2.0 * math.sqrt(area))
    c1 = math.sqrt(n / area) * 0.5 * n * (1.0 + sup) ** (n - 1)
    return c0, c1


def _low_mode_indices(n):
    return [0] + [flat_index(n, 1, i) for i in range(1, n + 1)]


def constraint_residual(u: SphereFunction, grid: QuadratureGrid | None = None) -> np.ndarray:
    """``(|E_u| - |B|, moment_1, ..., moment_n)``."""
    n = u.n
    g = grid or exact_grid(n, (n + 1) * u.K + 1)
    s = 1.0 + u.samples(g)
    vol = g.integrate(s**n) / n - ball_volume(n)
    mom = g.nodes.T @ (g.weights * s ** (n + 1)) / (n + 1)
    return np.concatenate([[vol], mom])


def project_constraints(
    u: SphereFunction,
    tol: float = 1e-12,
    max_iter: int = 50,
    check_sup: bool = True,
) -> SphereFunction:
    """Adjust the degree 0 and 1 coefficients so that ``|E_u| = |B|`` and the barycenter is 0.

    Damped Newton on the ``n + 1`` low modes; higher modes are untouched.
    """
    if check_sup and u.linf_norm() > PROJECTION_SUP + 1e-12:
        raise ValueError(f"||u||_inf = {u.linf_norm():.4g} exceeds {PROJECTION_SUP}")
    n = u.n
    if u.K < 1:
        u = u.with_band(1)
    idx = _low_mode_indices(n)
    g = exact_grid(n, (n + 1) * u.K + 1)
    Y = g.basis(u.K)[:, idx]
    coeffs = np.array(u.coeffs)
    cur = SphereFunction(n, coeffs, u.K)
    res = constraint_residual(cur, g)
    norm = np.max(np.abs(res))
    for _ in range(max_iter):
        if norm <= 0.1 * tol:
            break
        s = 1.0 + cur.samples(g)
        J = np.empty((n + 1, n + 1))
        J[0] = (g.weights * s ** (n - 1)) @ Y
        J[1:] = (g.nodes.T * (g.weights * s**n)) @ Y
        step = np.linalg.solve(J, -res)
        lam = 1.0
        while True:
            trial = coeffs.copy()
            trial[idx] += lam * step
            cand = SphereFunction(n, trial, u.K)
            if np.min(1.0 + cand.samples(g)) > 0:
                r_new = constraint_residual(cand, g)
                if np.max(np.abs(r_new)) < norm or lam < 1e-3:
                    break
            lam *= 0.5
            if lam < 1e-4:
                raise ProjectionError("line search failed; perturbation too large")
        prev = norm
        coeffs, cur, res = trial, cand, r_new
        norm = np.max(np.abs(res))
        if norm >= prev and norm <= tol:
            break
    if norm > tol:
        raise ProjectionError(f"no convergence in {max_iter} iterations (residual {norm:.3e})")
    return cur


# --------------------------------------------------------------------------- regraphing


def _map_and_jacobian(u, x, center):
    # h(x) = (1 + u(x)) x - center, z = h / |h|; tangential Jacobian of z
    ux = u.evaluate(x)
    gu = u.gradient(x)
    h = (1.0 + ux)[:, None] * x - center
    nh = np.linalg.norm(h, axis=1)
    z = h / nh[:, None]
    E = tangent_frame(x)
    dh = (np.einsum("pd,pjd->pj", gu, E))[:, :, None] * x[:, None, :] + (1.0 + ux)[:, None, None] * E
    dz = dh / nh[:, None, None] - z[:, None, :] * np.einsum("pd,pjd->pj", z, dh)[:, :, None] / nh[:, None, None]
    return z, nh, dz, E


def invert_direction_map(u, center, xi, tol=1e-14, max_iter=60):
    """Solve ``normalize((1 + u(x)) x - center) = xi`` for ``x`` at every row of ``xi``.

    Newton in the tangent plane, seeded at ``xi``.  Returns ``(x, |h(x)|)``.
    """
    x = np.array(xi, dtype=float)
    for _ in range(max_iter):
        z, nh, dz, E = _map_and_jacobian(u, x, center)
        r = xi - z
        err = np.max(np.linalg.norm(r, axis=1))
        if err < tol:
            break
        JtJ = np.einsum("pid,pjd->pij", dz, dz)
        Jtr = np.einsum("pid,pd->pi", dz, r)
        delta = np.linalg.solve(JtJ, Jtr[..., None])[..., 0]
        x = x + np.einsum("pj,pjd->pd", delta, E)
        x /= np.linalg.norm(x, axis=1, keepdims=True)
    else:
        raise RegraphError(f"direction inversion did not converge (residual {err:.3e})")
    z, nh, _, _ = _map_and_jacobian(u, x, center)
    return x, nh


def direction_map_bound(u: SphereFunction, center, grid: QuadratureGrid | None = None) -> float:
    """Smallest singular value of the tangential Jacobian of ``x -> z(x)`` over a grid."""
    g = grid or make_grid(u.n, max(64, 8 * u.K) if u.n == 2 else (max(16, 4 * u.K), max(32, 8 * u.K)))
    _, _, dz, _ = _map_and_jacobian(u, g.nodes, np.asarray(center, dtype=float))
    sv = np.linalg.svd(dz, compute_uv=False)
    return float(np.min(sv[:, -1]))


@dataclass(frozen=True)
class RegraphResult:
    """``E_u = y + r E_v`` with the reconstruction residual and derivative bound."""

    y: np.ndarray
    r: float
    v: SphereFunction
    c1_ratio: float
    residual: float
    min_jacobian: float

    def to_dict(self) -> dict:
        return {
            "y": [float(c) for c in self.y],
            "r": self.r,
            "v": self.v.to_dict(),
            "c1_norm_v": c1_norm_estimate(self.v),
            "c1_ratio": self.c1_ratio,
            "residual": self.residual,
            "min_jacobian": self.min_jacobian,
        }


def graph_over(u: SphereFunction, center, radius: float, K: int | None = None, check=True):
    """Function ``v`` with ``E_u = center + radius * E_v``, plus the Jacobian bound.

    ``v`` is recovered on a fine grid and analyzed up to degree ``K``
    (default ``min(4 u.K + 24, u.K + 48)``).
    """
    center = np.asarray(center, dtype=float)
    n = u.n
    K = min(4 * u.K + 24, u.K + 48) if K is None else K
    bound = direction_map_bound(u, center)
    if bound <= 0.0:
        raise RegraphError(f"direction map degenerate: min tangential derivative {bound:.3e} <= 0")
    g = make_grid(n, 4 * K + 8) if n == 2 else make_grid(3, (2 * K + 4, 4 * K + 8))
    _, nh = invert_direction_map(u, center, g.nodes)
    v = analyze(nh / radius - 1.0, g, K, check_aliasing=check)
    return v, bound


def regraph(u: SphereFunction, K: int | None = None, check_points: QuadratureGrid | None = None):
    """Re-express ``E_u`` as a graph over the ball with its barycenter and volume."""
    n = u.n
    E = NearlySphericalSet(u)
    y = barycenter(E)
    r = (volume(E) / ball_volume(n)) ** (1.0 / n)
    v, bound = graph_over(u, y, r, K)
    g = check_points or exact_grid(n, 4 * u.K + 16)
    x = g.nodes
    z, nh, _, _ = _map_and_jacobian(u, x, y)
    lhs = r * (1.0 + v.evaluate(z))[:, None] * z + y
    rhs = (1.0 + u.evaluate(x))[:, None] * x
    residual = float(np.max(np.linalg.norm(lhs - rhs, axis=1)))
    cu = c1_norm_estimate(u)
    ratio = c1_norm_estimate(v) / cu if cu > 0 else 0.0
    return RegraphResult(y=y, r=r, v=v, c1_ratio=ratio, residual=residual, min_jacobian=bound)


# --------------------------------------------------------------------------- asymmetry


@dataclass(frozen=True)
class AsymmetryResult:
    value: float
    center: np.ndarray
    tolerance: float
    converged: bool


def _symmetric_difference(u, center, R, grid):
    _, rho = invert_direction_map(u, center, grid.nodes)
    n = u.n
    return grid.integrate(np.abs(rho**n - R**n)) / n


def fraenkel_asymmetry(E, resolution: int | None = None, xatol: float = 1e-7, full_output: bool = False):
    """``min_c |E sym-diff B_c(R)| / |B_c(R)|`` with ``|B_c(R)| = |E|``.

    Local Nelder-Mead search over centers starting at the barycenter; the
    symmetric difference is integrated radially along grid directions from
    each trial center.
    """
    E = _as_set(E)
    u, n = E.u, E.n
    vol = volume(E)
    R = (vol / ball_volume(n)) ** (1.0 / n)
    if resolution is None:
        resolution = 4096 if n == 2 else 96
    grid = make_grid(n, resolution)
    start = barycenter(E)
    if not np.any(u.coeffs[1:]):
        res = AsymmetryResult(0.0, start, 0.0, True)
        return res if full_output else 0.0
    f = lambda c: _symmetric_difference(u, c, R, grid) / vol
    opt = minimize(f, start, method="Nelder-Mead", options={"xatol": xatol, "fatol": 1e-12, "maxiter": 2000})
    val = float(min(opt.fun, f(start)))
    center = opt.x if opt.fun <= f(start) else start
    simplex_vals = getattr(opt, "final_simplex", (None, np.array([opt.fun])))[1]
    res = AsymmetryResult(val, np.asarray(center), float(np.ptp(simplex_vals)), bool(opt.success))
    return res if full_output else val
