"""Eigenfunctions of the two characteristic restrictions of the Lax pair.

The 2x2 matrix functions Phi0(x, P) and Phi1(y, P) solve linear Volterra
equations driven by the boundary data: Phi0 integrates the coefficient

    U0(x, P) = (2 Re E0(x))^-1 [[conj(E0'), lam conj(E0')],
                                [lam E0',   E0'       ]],

from Phi0(0) = I, with lam = lambda(x, 0, P); Phi1 mirrors this with the
y-datum and 1/lambda(0, y, P), normalized by Re E1(y).

The corner singularity E0' ~ m x^(-alpha) is removed exactly by the
substitution x = tau^(1/(1-alpha)): the transformed system

    dPhi/dtau = [x^alpha U0](x(tau)) / (1 - alpha) * Phi

has a continuous right-hand side at tau = 0 and is integrated by a
Gragg-Bulirsch-Stoer scheme (modified midpoint + Richardson ladder) with
global step doubling to the requested tolerance.  All spectral points of
one call share the sweep; the state is the stacked family of matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry
from .boundary_data import BoundaryDatum
from .geometry import SpectralPoint
from .quadrature import singular_integral

DEFAULT_RTOL = 1e-11

_GBS_SEQUENCE = (2, 4, 6, 8, 10, 12)


class IntegrationError(RuntimeError):
    pass


class ForbiddenSpectralPoint(ValueError):
    """k on the real interval where the eigenfunction is not single-valued."""


@dataclass(frozen=True)
class EigenSample:
    at: SpectralPoint
    matrix: np.ndarray  # 2x2 complex


# ---------------------------------------------------------------------------
# GBS integrator for dY/dt = F(t, Y), Y stacked (P, 2, 2)

def _midpoint_pass(f, t0, t1, y0, n):
    h = (t1 - t0) / n
    z0 = y0
    z1 = z0 + h * f(t0, z0)
    tm = t0 + h
    for _ in range(1, n):
        z0, z1 = z1, z0 + 2.0 * h * f(tm, z1)
        tm += h
    return 0.5 * (z0 + z1 + h * f(t1, z1))


def _gbs_step(f, t0, t1, y0, seq=_GBS_SEQUENCE):
    tab = []
    for i, n in enumerate(seq):
        row = [_midpoint_pass(f, t0, t1, y0, n)]
        for j in range(1, i + 1):
            r = (seq[i] / seq[i - j]) ** 2
            row.append(row[j - 1] + (row[j - 1] - tab[i - 1][j - 1]) / (r - 1.0))
        tab.append(row)
    return tab[-1][-1]


def gbs_march(f, t_end, y0, rtol=DEFAULT_RTOL, initial_steps=4, max_doublings=8):
    """Integrate to t_end, doubling the macro-step count until two sweeps agree."""
    if t_end == 0.0:
        return y0.copy()

    def sweep(steps):
        ts = np.linspace(0.0, t_end, steps + 1)
        y = y0
        for a, b in zip(ts[:-1], ts[1:]):
            y = _gbs_step(f, a, b, y)
        return y

    steps = initial_steps
    prev = sweep(steps)
    for _ in range(max_doublings):
        steps *= 2
        cur = sweep(steps)
        scale = max(1.0, float(np.max(np.abs(cur))))
        if np.max(np.abs(cur - prev)) <= rtol * scale:
            return cur
        prev = cur
    raise IntegrationError(f"integrator did not reach rtol={rtol} "
                           f"within {steps} macro-steps")


# ---------------------------------------------------------------------------
# coefficient assembly

def _check_forbidden(k, infinite, lo, hi, what):
    finite = ~infinite
    bad = finite & (np.abs(k.imag) < 1e-14) & (k.real >= lo - 1e-14) \
        & (k.real <= hi + 1e-14)
    if np.any(bad):
        raise ForbiddenSpectralPoint(
            f"{what}: k = {k[bad][0]} lies on the forbidden interval "
            f"[{lo}, {hi}]")


def _phi_march(datum, target, k, sheet, infinite, kernel, rtol):
    """Shared sweep for both restrictions; kernel gives lam or 1/lam."""
    alpha = datum.alpha
    p = 1.0 / (1.0 - alpha)
    pts = len(k)
    eye = np.tile(np.eye(2, dtype=complex), (pts, 1, 1))
    if target == 0.0:
        return eye

    def rhs(tau, phi):
        t = tau ** p
        ts = np.array([t])
        r = complex(np.asarray(datum.regular_part(ts))[0]) / (1.0 - alpha)
        c = 0.5 / float(np.real(np.asarray(datum.value(ts))[0]))
        lamv = kernel(t, k, sheet)
        lamv = np.where(infinite, sheet.astype(complex), lamv)
        a = c * np.conjugate(r)
        b = c * r
        out = np.empty_like(phi)
        # [[a, lam a], [lam b, b]] @ phi, rows of phi: (phi[.,0,:], phi[.,1,:])
        out[:, 0, :] = a * (phi[:, 0, :] + lamv[:, None] * phi[:, 1, :])
        out[:, 1, :] = b * (lamv[:, None] * phi[:, 0, :] + phi[:, 1, :])
        return out

    return gbs_march(rhs, target ** (1.0 - alpha), eye, rtol=rtol)


def phi0_matrices(datum: BoundaryDatum, x_target: float, k, sheet,
                  infinite=None, rtol=DEFAULT_RTOL):
    """Phi0(x_target, .) at a stacked family of spectral points."""
    k = np.asarray(k, dtype=complex)
    sheet = np.asarray(sheet, dtype=float)
    infinite = np.zeros(k.shape, bool) if infinite is None else np.asarray(infinite)
    _check_forbidden(k, infinite, 0.0, x_target, "Phi0")

    def kernel(x, kk, ss):
        with np.errstate(invalid="ignore", divide="ignore"):
            return geometry.lambda_values(x, 0.0, kk, ss)

    return _phi_march(datum, x_target, k, sheet, infinite, kernel, rtol)


def phi1_matrices(datum: BoundaryDatum, y_target: float, k, sheet,
                  infinite=None, rtol=DEFAULT_RTOL):
    """Phi1(y_target, .) at a stacked family of spectral points."""
    k = np.asarray(k, dtype=complex)
    sheet = np.asarray(sheet, dtype=float)
    infinite = np.zeros(k.shape, bool) if infinite is None else np.asarray(infinite)
    _check_forbidden(k, infinite, 1.0 - y_target, 1.0, "Phi1")

    def kernel(y, kk, ss):
        with np.errstate(invalid="ignore", divide="ignore"):
            return geometry.inv_lambda_values(0.0, y, kk, ss)

    return _phi_march(datum, y_target, k, sheet, infinite, kernel, rtol)


def _to_samples(points, matrices):
    return [EigenSample(at=p, matrix=matrices[i]) for i, p in enumerate(points)]


def integrate_phi0(datum: BoundaryDatum, x_target: float,
                   points: Sequence[SpectralPoint],
                   rtol=DEFAULT_RTOL):
    """Phi0 at a list of spectral points, one shared integration sweep."""
    k = np.array([p.k for p in points], dtype=complex)
    sheet = np.array([p.sheet for p in points], dtype=float)
    infinite = np.array([p.infinite for p in points], dtype=bool)
    return _to_samples(points, phi0_matrices(datum, x_target, k, sheet,
                                             infinite, rtol))


def integrate_phi1(datum: BoundaryDatum, y_target: float,
                   points: Sequence[SpectralPoint],
                   rtol=DEFAULT_RTOL):
    """Phi1 at a list of spectral points, one shared integration sweep."""
    k = np.array([p.k for p in points], dtype=complex)
    sheet = np.array([p.sheet for p in points], dtype=float)
    infinite = np.array([p.infinite for p in points], dtype=bool)
    return _to_samples(points, phi1_matrices(datum, y_target, k, sheet,
                                             infinite, rtol))


# ---------------------------------------------------------------------------
# closed forms

def phi0_at_infinity(datum: BoundaryDatum, x: float, sheet=geometry.UPPER):
    """Closed form of Phi0 at infinity: no integration required.

    On the upper sheet Phi0 = (1/2) [[conj(E0)+1, conj(E0)-1],
    [E0-1, E0+1]]; the lower-sheet value follows from the sigma3 symmetry.
    """
    e = complex(np.asarray(datum.value(np.array([x])))[0])
    eb = np.conj(e)
    m = 0.5 * np.array([[eb + 1.0, eb - 1.0],
                        [e - 1.0, e + 1.0]], dtype=complex)
    if sheet == geometry.LOWER:
        s3 = np.diag([1.0, -1.0])
        m = s3 @ m @ s3
    return m


def phi1_at_infinity(datum: BoundaryDatum, y: float, sheet=geometry.UPPER):
    """Closed form of Phi1 at infinity (same shape as the x-restriction)."""
    return phi0_at_infinity(datum, y, sheet)


def phi1_at_branch_zero(datum: BoundaryDatum, y: float, rtol=1e-12):
    """Phi1 at the fixed branch point k = 0: a diagonal exponential.

    Both sheets meet there; the value is diag(exp(q1), exp(q2)) with
    q1 = int_0^y conj(E1') / (2 Re E1) and q2 its conjugate-data twin.
    """
    def g(t):
        return np.asarray(datum.regular_part(t)) / (2.0 * np.real(datum.value(t)))

    q2 = singular_integral(g, datum.alpha, y, rtol=rtol)
    return np.array([[np.exp(np.conj(q2)), 0.0], [0.0, np.exp(q2)]],
                    dtype=complex)
