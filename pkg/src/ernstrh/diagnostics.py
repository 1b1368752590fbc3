"""Boundary-singularity diagnostics, admissibility, and residual reports.

The solution's derivative blows up like x^(-alpha) at the edge x = 0; its
strength is fully determined by the data: with the corner coefficient
m1 = lim x^alpha E0'(x),

    lim_{x -> 0} x^alpha E_x(x, y)
        = m1 exp(i int_0^y Im E1' / Re E1) Re E1(y) / sqrt(1 - y),

and for the linear path simply m1 / sqrt(1 - y).  The predicted side uses
only the data; the extrapolated side uses only interior solves, which keeps
the comparison a genuine two-route check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Tuple

import numpy as np

from .boundary_data import LINEAR, BoundaryDatum, corner_data
from .quadrature import neville_to_zero, singular_integral

SQRT2 = float(np.sqrt(2.0))


@dataclass
class BoundaryLimitReport:
    edge: str
    coordinate: float
    predicted: complex
    extrapolated: complex
    abs_error: float
    flags: List[str] = field(default_factory=list)


@dataclass
class GwAdmissibilityReport:
    alpha_x: float
    alpha_y: float
    m1: complex
    m2: complex
    admissible: bool
    k1: float
    k2: float
    reasons: List[str] = field(default_factory=list)


@dataclass
class ResidualReport:
    h: float
    residual: np.ndarray
    max_norm: float
    l2_norm: float


@dataclass
class SmallNormReport:
    w_inf: float
    cminus_norm: float
    bound: float
    certificate: bool
    condition_number: float


# ---------------------------------------------------------------------------
# boundary limits

def predicted_boundary_limit(edge: str, coordinate: float,
                             data: Tuple[BoundaryDatum, BoundaryDatum],
                             rtol: float = 1e-11):
    """Limit of x^alpha E_x (resp. y^alpha E_y) predicted from the data alone.

    Returns (value, flags).  For alpha = 0 (bounded derivative at the
    corner) the formula is extrapolated beyond its supported data class;
    the value is still reported, flagged as unsupported.
    """
    datum_x, datum_y = data
    if edge in ("x=0", "x"):
        own, other = datum_x, datum_y
    elif edge in ("y=0", "y"):
        own, other = datum_y, datum_x
    else:
        raise ValueError(f"edge must be 'x=0' or 'y=0', got {edge!r}")
    flags = []
    m = corner_data(own).m
    if own.alpha == 0.0:
        flags.append("alpha-zero-unsupported")
    s = np.sqrt(1.0 - coordinate)
    if own.kind == LINEAR:
        return m / s, flags

    def phase_integrand(t):
        vals = np.asarray(other.regular_part(t))
        return np.imag(vals) / np.real(other.value(t))

    phase = singular_integral(phase_integrand, other.alpha, coordinate, rtol=rtol)
    re_other = float(np.real(np.asarray(other.value(np.array([coordinate])))[0]))
    return m * np.exp(1j * phase) * re_other / s, flags


def extrapolated_boundary_limit(edge: str, coordinate: float,
                                field_solver: Callable, alpha: float,
                                x_base: float = 0.02, levels: int = 7,
                                fd_rho: float = 0.02):
    """Limit of x^alpha E_x from interior solves only.

    Evaluates x^alpha E_x at x_j = x_base 2^-j (j = 0..levels-1) with a
    fourth-order difference stencil in the corner variable t = x^(1-alpha)
    (in which the field is smooth), then extrapolates to x = 0 in t.
    Returns (value, flags); a large extrapolation residual flags the result
    as unreliable.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("extrapolation requires alpha in (0, 1)")
    flags = []
    beta = 1.0 - alpha
    p = 1.0 / beta

    def value_at(x):
        if edge in ("x=0", "x"):
            return field_solver(x, coordinate)
        return field_solver(coordinate, x)

    xs = x_base * 2.0 ** (-np.arange(levels, dtype=float))
    samples = np.empty(levels, dtype=complex)
    for j, xj in enumerate(xs):
        t0 = xj ** beta
        eta = fd_rho * t0
        stencil = t0 + eta * np.array([-2.0, -1.0, 1.0, 2.0])
        vals = np.array([value_at(t ** p) for t in stencil], dtype=complex)
        de_dt = (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * eta)
        dx_dt = p * t0 ** (p - 1.0)
        samples[j] = xj ** alpha * de_dt / dx_dt

    limit, stability = neville_to_zero(xs ** beta, samples)
    if stability > 1e-4 * max(1.0, abs(limit)):
        flags.append("extrapolation-unreliable")
    return complex(limit), flags


def boundary_limit_report(edge: str, coordinate: float,
                          data: Tuple[BoundaryDatum, BoundaryDatum],
                          field_solver: Callable,
                          x_base: float = 0.02) -> BoundaryLimitReport:
    own = data[0] if edge in ("x=0", "x") else data[1]
    predicted, flags_p = predicted_boundary_limit(edge, coordinate, data)
    extrapolated, flags_e = extrapolated_boundary_limit(
        edge, coordinate, field_solver, own.alpha, x_base=x_base)
    return BoundaryLimitReport(
        edge=edge, coordinate=coordinate, predicted=complex(predicted),
        extrapolated=complex(extrapolated),
        abs_error=float(abs(predicted - extrapolated)),
        flags=flags_p + flags_e)


# ---------------------------------------------------------------------------
# gravitational-wave admissibility

def gw_admissibility(data_x: BoundaryDatum,
                     data_y: BoundaryDatum) -> GwAdmissibilityReport:
    """Check the colliding-wave data conditions: alpha = 1/2 and corner
    moduli in [1, sqrt(2)); reports the wave constants k1 = |m2|^2 / 2,
    k2 = |m1|^2 / 2.  The criterion depends on the moduli only.  The
    numerically extracted moduli carry extrapolation roundoff, so the
    interval test uses a 1e-9 guard band: the closed end accepts values
    that close to 1, the open end still rejects sqrt(2) itself."""
    from .boundary_data import CornerData, DatumConsistencyError

    reasons = []

    def corner_or_nan(d):
        try:
            return corner_data(d)
        except DatumConsistencyError as exc:
            reasons.append(f"corner extraction failed for {d.label}: {exc}")
            return CornerData(alpha=d.alpha, m=complex(np.nan))

    cx, cy = corner_or_nan(data_x), corner_or_nan(data_y)
    tol = 1e-9
    if cx.alpha != 0.5 or cy.alpha != 0.5:
        reasons.append(f"alpha = ({cx.alpha}, {cy.alpha}) != 1/2")
    for name, m in (("|m1|", abs(cx.m)), ("|m2|", abs(cy.m))):
        if not (1.0 - tol <= m < SQRT2 - tol):
            reasons.append(f"{name} = {m:.6g} outside [1, sqrt(2))")
    return GwAdmissibilityReport(
        alpha_x=cx.alpha, alpha_y=cy.alpha, m1=cx.m, m2=cy.m,
        admissible=not reasons,
        k1=abs(cy.m) ** 2 / 2.0, k2=abs(cx.m) ** 2 / 2.0,
        reasons=reasons)


# ---------------------------------------------------------------------------
# PDE residual

def pde_residual(f) -> ResidualReport:
    """Second-order finite-difference residual of the field equation.

    Expects a solved field on a uniform grid (``values[i, j]`` at
    (x[i], y[j])); evaluates Re E (E_xy - (E_x + E_y)/(2(1-x-y))) - E_x E_y
    with central differences at interior points.
    """
    x, y, vals = np.asarray(f.x), np.asarray(f.y), np.asarray(f.values)
    if len(x) < 3 or len(y) < 3:
        raise ValueError("grid too coarse for central stencils")
    hx = np.diff(x)
    hy = np.diff(y)
    if not (np.allclose(hx, hx[0], rtol=1e-12) and np.allclose(hy, hy[0], rtol=1e-12)):
        raise ValueError("pde_residual requires a uniform grid")
    hx, hy = float(hx[0]), float(hy[0])

    e = vals
    ex = (e[2:, 1:-1] - e[:-2, 1:-1]) / (2.0 * hx)
    ey = (e[1:-1, 2:] - e[1:-1, :-2]) / (2.0 * hy)
    exy = (e[2:, 2:] - e[2:, :-2] - e[:-2, 2:] + e[:-2, :-2]) / (4.0 * hx * hy)
    xc = x[1:-1][:, None]
    yc = y[1:-1][None, :]
    ec = e[1:-1, 1:-1]
    resid = np.real(ec) * (exy - (ex + ey) / (2.0 * (1.0 - xc - yc))) - ex * ey
    amax = float(np.max(np.abs(resid)))
    al2 = float(np.sqrt(np.mean(np.abs(resid) ** 2)))
    return ResidualReport(h=hx, residual=resid, max_norm=amax, l2_norm=al2)


def small_norm_report(jump, operator_info) -> SmallNormReport:
    """Solvability certificate from the discretized operator norms.

    The bound is ||C_minus||_disc * ||w||_inf with the discrete spectral
    norm standing in for the abstract one; a bound below 1 certifies the
    contraction regime."""
    return SmallNormReport(
        w_inf=operator_info.w_inf,
        cminus_norm=operator_info.cminus_norm,
        bound=operator_info.small_norm_bound,
        certificate=operator_info.small_norm_certificate,
        condition_number=operator_info.condition_number)
