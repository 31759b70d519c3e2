"""Seeded experiments: random admissible perturbations, stability, continuity and variation checks.

Every random draw goes through ``np.random.default_rng([seed, index])`` so a
sample depends only on the seed and its index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coercivity import compute_constants
from .functionals import (
    first_variation_F,
    first_variation_P,
    fractional_perimeter,
    ratio_F,
    ratio_F_ball,
    richardson_first,
    richardson_second,
    second_variation_F,
    second_variation_F_at_zero,
    second_variation_P,
    second_variation_P_at_zero,
    default_step,
)
from .geometry import NearlySphericalSet, fraenkel_asymmetry, project_constraints
from .quadrature import QuadratureError
from .specfun import FracParams
from .sphere import SphereFunction, c1_norm_estimate, degree_of_index, num_coeffs


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def random_direction(n: int, K: int, t: float, rng, low: int = 2) -> SphereFunction:
    """Gaussian coefficients on degrees ``low..K`` with variance ``k^{-(2+t)}``."""
    deg = degree_of_index(n, K)
    sd = np.where(deg >= low, np.maximum(deg, 1) ** (-(2.0 + t) / 2.0), 0.0)
    return SphereFunction(n, sd * rng.standard_normal(num_coeffs(n, K)), K)


def rescale_c1(u: SphereFunction, target: float) -> SphereFunction:
    c = c1_norm_estimate(u)
    return u * (target / c) if c > 0 else u


def admissible_sample(n: int, K: int, t: float, c1_target: float, rng, max_tries: int = 8) -> SphereFunction:
    """Random direction rescaled to ``||u||_{C1} = c1_target`` and projected to admissibility.

    The projection perturbs the C1 norm at second order; the scale is
    shrunk until the projected function stays within ``c1_target``.
    """
    v = random_direction(n, K, t, rng)
    target = c1_target
    for _ in range(max_tries):
        u = project_constraints(rescale_c1(v, target))
        c = c1_norm_estimate(u)
        if c <= c1_target * (1.0 + 1e-12):
            return u
        target *= c1_target / c * (1.0 - 1e-9)
    return u


# --------------------------------------------------------------------------- stability


STABILITY_FIELDS = (
    "sample",
    "c1_norm",
    "l2_norm",
    "h_norm_sq",
    "deficit",
    "deficit_error",
    "spectral_prediction",
    "floor",
    "asymmetry",
    "remainder_ratio",
    "positive_ok",
    "floor_ok",
    "status",
)


@dataclass
class StabilityResult:
    params: FracParams
    rows: list
    summary: dict
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _quantiles(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return {}
    q = np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0])
    return dict(zip(("min", "q25", "median", "q75", "max"), (float(v) for v in q)))


def stability_sample(u: SphereFunction, params: FracParams, kappa: float, tol=1e-6, with_asymmetry=True) -> dict:
    """Deficit ``F(E_u) - F(B)`` and the quantities it is compared against."""
    F0 = ratio_F_ball(params)
    Fu, err = ratio_F(u, params, tol=tol, full_output=True)
    h2 = u.h_norm_sq(params.t)
    c1 = c1_norm_estimate(u)
    pred = 0.5 * second_variation_F_at_zero(u, params)
    deficit = Fu - F0
    return {
        "c1_norm": c1,
        "l2_norm": u.l2_norm(),
        "h_norm_sq": h2,
        "deficit": deficit,
        "deficit_error": err,
        "spectral_prediction": pred,
        "floor": kappa * h2,
        "asymmetry": fraenkel_asymmetry(NearlySphericalSet(u)) if with_asymmetry else float("nan"),
        "remainder_ratio": abs(deficit - pred) / (c1 * h2) if c1 > 0 else 0.0,
        "positive_ok": bool(deficit > 0.0),
        "floor_ok": bool(deficit >= kappa * h2),
        "status": "ok",
    }


def stability_experiment(
    params: FracParams,
    K: int = 8,
    samples: int = 50,
    seed: int = 0,
    eps: float = 0.05,
    tol: float = 1e-6,
    holdout: float = 0.5,
) -> StabilityResult:
    """Seeded local-stability experiment around the ball.

    Sample ``i`` is an admissible perturbation with ``||u||_{C1}`` drawn
    uniformly from ``[eps/4, eps]``.  Checks: the deficit is positive; it
    dominates ``(c_spectral/2) ||u||^2_{H^{(1+t)/2}}``; and the asymmetry
    bound ``deficit >= c A(E)^2`` with ``c`` fitted on a holdout (half the
    smallest holdout quotient) holds on the remaining samples.
    """
    consts = compute_constants(params)
    kappa = consts.c_spectral / 2.0
    rows = []
    for i in range(samples):
        rng = sample_rng(seed, i)
        scale = eps * rng.uniform(0.25, 1.0)
        u = admissible_sample(params.n, K, params.t, scale, rng)
        try:
            row = stability_sample(u, params, kappa, tol=tol)
        except QuadratureError as exc:
            row = {k: float("nan") for k in STABILITY_FIELDS}
            row.update(positive_ok=False, floor_ok=False, status=f"quadrature: {exc}")
        row["sample"] = i
        rows.append(row)
    good = [r for r in rows if r["status"] == "ok"]
    n_hold = max(1, int(round(holdout * len(good))))
    hold, rest = good[:n_hold], good[n_hold:]
    q_hold = [r["deficit"] / r["asymmetry"] ** 2 for r in hold if r["asymmetry"] > 0]
    c_asym = 0.5 * min(q_hold) if q_hold else 0.0
    asym_bad = [r["sample"] for r in rest if r["deficit"] < c_asym * r["asymmetry"] ** 2]
    ratios = [r["remainder_ratio"] for r in good]
    C = max(ratios) if ratios else float("nan")
    checks = {
        "quadrature_ok": len(good) == len(rows),
        "deficit_positive": all(r["positive_ok"] for r in rows),
        "coercivity_floor": all(r["floor_ok"] for r in rows),
        "remainder_bounded": bool(np.isfinite(C)),
        "asymmetry_validated": c_asym > 0 and not asym_bad,
    }
    summary = {
        "n": params.n,
        "s": params.s,
        "t": params.t,
        "K": K,
        "samples": samples,
        "seed": seed,
        "eps": eps,
        "kappa": kappa,
        "c_spectral": consts.c_spectral,
        "c_sharp": consts.c_sharp,
        "deficit_over_h_norm": _quantiles([r["deficit"] / r["h_norm_sq"] for r in good]),
        "prediction_over_h_norm": _quantiles([r["spectral_prediction"] / r["h_norm_sq"] for r in good]),
        "fitted_remainder_C": C,
        "fitted_asymmetry_c": c_asym,
        "asymmetry_holdout": n_hold,
        "asymmetry_violations": len(asym_bad),
        "floor_violations": sum(not r["floor_ok"] for r in rows),
        "positivity_violations": sum(not r["positive_ok"] for r in rows),
        "checks": checks,
    }
    return StabilityResult(params, rows, summary, checks)


def eps_sweep_order(params: FracParams, k: int = 2, eps_values=(0.04, 0.02, 0.01, 0.005), tol=None):
    """Observed order of ``F(E_{eps Y}) - F(B) - (eps^2/2) d^2F(0)[Y, Y]`` under eps-halving."""
    n = params.n
    Y = SphereFunction.harmonic(n, k, 1)
    F0 = ratio_F_ball(params)
    d2 = second_variation_F_at_zero(Y, params)
    rem = []
    for e in eps_values:
        rem.append(abs(ratio_F(Y * e, params, tol=tol) - F0 - 0.5 * e * e * d2))
    rem = np.asarray(rem)
    orders = np.log2(rem[:-1] / rem[1:]) / np.log2(np.asarray(eps_values[:-1]) / np.asarray(eps_values[1:]))
    return rem, orders


# --------------------------------------------------------------------------- continuity along rays


@dataclass
class ContinuityResult:
    rows: list
    slope: float
    max_ratio: float
    per_scale: dict

    @property
    def ok(self) -> bool:
        return abs(self.slope) <= 0.3


def continuity_experiment(
    params: FracParams,
    K: int = 6,
    shapes: int = 5,
    scales=None,
    seed: int = 0,
    tol: float | None = None,
) -> ContinuityResult:
    """Ratio ``|d2F(u)[u,u] - d2F(0)[u,u]| / (||u||_{C1} ||u||^2_{H^{(1+t)/2}})`` across scales.

    Both second variations are assembled by the same quadrature so their
    discretization errors are alike.  The slope of ``log(max ratio)``
    against ``log ||u||_{C1}`` measures growth as ``u -> 0``.
    """
    scales = np.geomspace(1e-3, 0.2, 6) if scales is None else np.asarray(scales)
    zero = SphereFunction.zeros(params.n, K)
    rows = []
    for j in range(shapes):
        v = random_direction(params.n, K, params.t, sample_rng(seed, j))
        for sc in scales:
            u = project_constraints(rescale_c1(v, float(sc)))
            c1 = c1_norm_estimate(u)
            h2 = u.h_norm_sq(params.t)
            d_u = second_variation_F(u, params, tol=tol)
            d_0 = second_variation_F(zero.with_band(u.K), params, phi=u, tol=tol)
            rows.append(
                {
                    "shape": j,
                    "scale": float(sc),
                    "c1_norm": c1,
                    "h_norm_sq": h2,
                    "d2F_u": d_u,
                    "d2F_0": d_0,
                    "ratio": abs(d_u - d_0) / (c1 * h2),
                }
            )
    per_scale = {}
    for sc in scales:
        sel = [r for r in rows if r["scale"] == float(sc)]
        per_scale[float(sc)] = (float(np.mean([r["c1_norm"] for r in sel])), max(r["ratio"] for r in sel))
    x = np.log([v[0] for v in per_scale.values()])
    y = np.log([v[1] for v in per_scale.values()])
    slope = float(np.polyfit(x, y, 1)[0])
    return ContinuityResult(rows, slope, max(r["ratio"] for r in rows), per_scale)


# --------------------------------------------------------------------------- variation oracles


VARIATION_FIELDS = ("check", "value", "reference", "abs_error", "rel_error", "tolerance", "ok")


def _row(name, value, ref, tol, absolute=False):
    ae = float(abs(value - ref))
    re = ae / abs(ref) if ref != 0 else float("inf") if ae > 0 else 0.0
    ok = ae <= tol if absolute else re <= tol
    return {
        "check": name,
        "value": float(value),
        "reference": float(ref),
        "abs_error": ae,
        "rel_error": re,
        "tolerance": tol,
        "ok": bool(ok),
    }


def variation_checks(params: FracParams, K: int = 8, seed: int = 0, c1_target: float = 0.1, tol=None):
    """Finite-difference and closed-form oracles for all variations. Returns rows."""
    n, s, t = params.n, params.s, params.t
    rows = []
    zero = SphereFunction.zeros(n, K)
    for k in range(K + 1):
        Y = SphereFunction.harmonic(n, k, 1, K=K)
        rows.append(_row(f"dF(0)[Y_{k}]", first_variation_F(zero, params, Y, tol=tol), 0.0, 1e-8, absolute=True))
    for alpha in (s, t):
        for k in range(K + 1):
            Y = SphereFunction.harmonic(n, k, 1, K=K)
            q = second_variation_P(zero, Y, alpha, tol=tol)
            rows.append(_row(f"d2P_{alpha}(0)[Y_{k}]", q, second_variation_P_at_zero(Y, alpha), 1e-6))
    rng = sample_rng(seed, 0)
    u = admissible_sample(n, K, t, c1_target, rng)
    phi = random_direction(n, K, t, rng, low=0)
    phi = phi * (1.0 / phi.l2_norm())
    for alpha in (s, t):
        P = lambda h, a=alpha: fractional_perimeter(u + phi * h, a, tol=tol)
        h1 = default_step(1.0)
        rows.append(_row(f"dP_{alpha}(u)", first_variation_P(u, phi, alpha, tol=tol), richardson_first(P, 1e3 * h1), 1e-3))
        rows.append(_row(f"d2P_{alpha}(u)", second_variation_P(u, phi, alpha, tol=tol), richardson_second(P, 0.02), 1e-2))
    Fd = lambda h: ratio_F(u + phi * h, params, tol=tol)
    rows.append(_row("dF(u)", first_variation_F(u, params, phi, tol=tol), richardson_first(Fd, 1e-3), 1e-3))
    f_ray = lambda h: ratio_F(u * (1.0 + h), params, tol=tol)
    rows.append(_row("d2F(u)[u,u]", second_variation_F(u, params, tol=tol), richardson_second(f_ray, 0.05), 1e-2))
    F0 = ratio_F_ball(params)
    f0 = lambda h: ratio_F(u * h, params, tol=tol)
    rows.append(_row("d2F(0)[u,u]", second_variation_F_at_zero(u, params), richardson_second(f0, 1.0, F0), 1e-3))
    return rows
