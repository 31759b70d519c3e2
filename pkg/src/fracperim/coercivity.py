"""Explicit coercivity constants of the second variation of F at the ball, and spectral scans.

Along degree-k harmonics the second variation of F at the ball is
``(F(B)/|dB|) * (-(t - s) + A_{t,k} - A_{s,k})``.  The constants below bound
this gap from below; :func:`scan_positivity` checks the bounds degree by
degree.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .functionals import ratio_F_ball, second_variation_F_at_zero
from .geometry import constraint_residual, lemma_constants
from .specfun import (
    DEFAULT_CUTOFF,
    FracParams,
    A_coefficient,
    A_increment,
    ball_volume,
    lambda_eigenvalue,
    perimeter_ball,
    sphere_area,
)
from .sphere import SphereFunction

# a damped gap at or below this (relative to A_{t,k}) counts as non-positive
STRICT_TOL = 1e-12
SCAN_FIELDS = ("n", "s", "t", "k", "raw_gap", "damped_gap", "increment_ratio", "c2_bound_ok")


class CoercivityViolation(AssertionError):
    """The second variation fell below the claimed coercivity floor."""


@dataclass(frozen=True)
class CoercivityConstants:
    """Constants for one ``(n, s, t)``.

    ``c_spectral = (1 - c0)/(2|dB|)`` and ``c_with_prefactor = F(B) * c_spectral``
    are the two normalizations of the coercivity constant; ``c`` is the
    smaller.  ``c_sharp`` is the best constant ``c`` for which
    ``(1/2) d^2F(0)[u, u] >= c ||u||^2_{H^{(1+t)/2}}`` holds on degrees >= 2.
    """

    params: FracParams
    c1: float
    c2: float
    c0: float
    c_spectral: float
    c_with_prefactor: float
    c: float
    c_sharp: float
    eps0: float
    F_ball: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = asdict(self.params)
        return d


def _c1(n, s, t):
    return 1.0 - (t - s) / (2.0 * n * t) * (n * n + n * (t + s) - t * s) / (n - s)


def _c2(n, s, t):
    return s * (n + s) / (t * (n + t))


def _raw_gap(params, k):
    n, s, t = params.n, params.s, params.t
    return -(t - s) + A_coefficient(n, t, k) - A_coefficient(n, s, k)


def sharp_constant(params: FracParams, K: int = DEFAULT_CUTOFF) -> float:
    """``(F(B)/(2|dB|)) * inf_{k>=2} raw_gap(k) / (1 + lambda_{k,t})``.

    The infimum is over ``2 <= k <= K`` together with the limit
    ``|dB| / ((n - t) P_t(B))`` of the quotient as ``k -> infinity``.
    """
    n, t = params.n, params.t
    ks = np.arange(2, K + 1)
    q = _raw_gap(params, ks) / (1.0 + lambda_eigenvalue(n, t, ks))
    limit = sphere_area(n) / ((n - t) * perimeter_ball(n, t))
    return ratio_F_ball(params) / (2.0 * sphere_area(n)) * min(float(np.min(q)), limit)


def compute_constants(params: FracParams) -> CoercivityConstants:
    n, s, t = params.n, params.s, params.t
    c1, c2 = _c1(n, s, t), _c2(n, s, t)
    c0 = max(c1, c2)
    F0 = ratio_F_ball(params)
    c_spec = (1.0 - c0) / (2.0 * sphere_area(n))
    c_pref = F0 * c_spec
    _, C1 = lemma_constants(n, 0.5)
    return CoercivityConstants(
        params=params,
        c1=c1,
        c2=c2,
        c0=c0,
        c_spectral=c_spec,
        c_with_prefactor=c_pref,
        c=min(c_spec, c_pref),
        c_sharp=sharp_constant(params),
        eps0=math.sqrt(1.0 / (2.0 * C1)),
        F_ball=F0,
    )


def remark_constant(params: FracParams) -> float:
    """``min{1 - c2, 1 - c1} / (2|dB|)`` with both factors written out in closed form."""
    n, s, t = params.n, params.s, params.t
    a = 1.0 - s * (n + s) / (t * (n + t))
    b = (t - s) / (n - s) * (n * n + n * (t + s) - t * s) / (2.0 * n * t)
    return min(a, b) / (2.0 * n * ball_volume(n))


def gap(params: FracParams, k, c0: float | None = None):
    """``(raw, damped)`` gaps ``-(t-s) + A_{t,k} - A_{s,k}`` and ``-(t-s) + c0 A_{t,k} - A_{s,k}``."""
    n, s, t = params.n, params.s, params.t
    c0 = max(_c1(n, s, t), _c2(n, s, t)) if c0 is None else c0
    At = A_coefficient(n, t, k)
    As = A_coefficient(n, s, k)
    return -(t - s) + At - As, -(t - s) + c0 * At - As


def _telescoped_table(n, alpha, Kmax):
    # A_{alpha,k} for k = 0..Kmax+1, built from A_2 by summed increments
    A = np.empty(Kmax + 2)
    A[:3] = A_coefficient(n, alpha, np.arange(3))
    if Kmax + 1 > 2:
        A[3:] = A[2] + np.cumsum(A_increment(n, alpha, np.arange(2, Kmax + 1)))
    return A


@dataclass
class ScanReport:
    params: FracParams
    Kmax: int
    c0: float
    rows: list = field(repr=False)
    gap_violations: list
    ratio_violations: list
    monotonicity_violations: list
    min_margin: float
    min_margin_k: int

    @property
    def violations(self) -> int:
        return len(self.gap_violations) + len(self.ratio_violations) + len(self.monotonicity_violations)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def summary(self) -> dict:
        return {
            "n": self.params.n,
            "s": self.params.s,
            "t": self.params.t,
            "Kmax": self.Kmax,
            "c0": self.c0,
            "gap_violations": len(self.gap_violations),
            "ratio_violations": len(self.ratio_violations),
            "monotonicity_violations": len(self.monotonicity_violations),
            "min_margin": self.min_margin,
            "min_margin_k": self.min_margin_k,
        }


def scan_positivity(params: FracParams, Kmax: int = 200) -> ScanReport:
    """Degree-by-degree check of the damped gap, the increment ratio and monotonicity.

    Checks: damped gap > 0 for ``2 <= k <= Kmax`` (a value within
    ``STRICT_TOL * A_{t,k}`` of zero counts as a violation); increment ratio
    ``(A_{s,k+1}-A_{s,k})/(A_{t,k+1}-A_{t,k}) < c2`` for ``1 <= k <= Kmax``;
    damped gap non-decreasing in k from k = 2.  Violations are reported,
    not raised.
    """
    if Kmax < 2:
        raise ValueError("Kmax must be >= 2")
    n, s, t = params.n, params.s, params.t
    c1, c2 = _c1(n, s, t), _c2(n, s, t)
    c0 = max(c1, c2)
    At = _telescoped_table(n, t, Kmax)
    As = _telescoped_table(n, s, Kmax)
    ks = np.arange(1, Kmax + 1)
    raw = -(t - s) + At[ks] - As[ks]
    damped = -(t - s) + c0 * At[ks] - As[ks]
    ratio = (As[ks + 1] - As[ks]) / (At[ks + 1] - At[ks])
    ratio_ok = ratio < c2
    rows = [
        (n, s, t, int(k), float(r), float(d), float(q), bool(ok))
        for k, r, d, q, ok in zip(ks, raw, damped, ratio, ratio_ok)
    ]
    sel = ks >= 2
    margin = damped[sel]
    k2 = ks[sel]
    gap_bad = [int(k) for k, m, a in zip(k2, margin, At[k2]) if not m > STRICT_TOL * a]
    ratio_bad = [int(k) for k, ok in zip(ks, ratio_ok) if not ok]
    mono_bad = [int(k2[i + 1]) for i in range(len(margin) - 1) if margin[i + 1] < margin[i]]
    i_min = int(np.argmin(margin))
    return ScanReport(
        params=params,
        Kmax=Kmax,
        c0=c0,
        rows=rows,
        gap_violations=gap_bad,
        ratio_violations=ratio_bad,
        monotonicity_violations=mono_bad,
        min_margin=float(margin[i_min]),
        min_margin_k=int(k2[i_min]),
    )


def scan_rows_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_FIELDS)
    for rep in reports:
        for row in rep.rows:
            n, s, t, k, raw, damped, ratio, ok = row
            w.writerow([n, repr(s), repr(t), k, repr(raw), repr(damped), repr(ratio), str(ok).lower()])
    return buf.getvalue()


def default_param_grid(dims=range(2, 8), orders=None):
    """All ``(n, s, t)`` with ``s < t`` taken from ``orders`` (default 0.1, ..., 0.9)."""
    orders = orders if orders is not None else [round(0.1 * i, 1) for i in range(1, 10)]
    return [FracParams(n, s, t) for n in dims for i, s in enumerate(orders) for t in orders[i + 1 :]]


def coercivity_lower_bound(
    u: SphereFunction,
    params: FracParams,
    constant="stated",
    check: bool = True,
    admissibility_tol: float = 1e-10,
):
    """``(0.5 * d^2F(0)[u, u], c * ||u||^2_{H^{(1+t)/2}})``.

    ``constant`` is ``"stated"`` (the smaller of ``c_spectral`` and
    ``c_with_prefactor``), ``"sharp"`` or a number.  With ``check`` the
    first value must dominate the second, else :class:`CoercivityViolation`.
    """
    consts = compute_constants(params)
    if u.n != params.n:
        raise ValueError("dimension mismatch")
    if u.l2_norm() > consts.eps0:
        raise ValueError(f"||u||_L2 = {u.l2_norm():.3g} exceeds eps0 = {consts.eps0:.3g}")
    if np.max(np.abs(constraint_residual(u))) > admissibility_tol:
        raise ValueError("u is not admissible: project_constraints first")
    if constant == "stated":
        c = consts.c
    elif constant == "sharp":
        c = consts.c_sharp
    else:
        c = float(constant)
    lhs = 0.5 * second_variation_F_at_zero(u, params)
    rhs = c * u.h_norm_sq(params.t)
    if check and not lhs >= rhs:
        raise CoercivityViolation(f"0.5 d2F(0)[u,u] = {lhs:.6g} < {rhs:.6g} = c ||u||^2 (c = {c:.6g})")
    return lhs, rhs
