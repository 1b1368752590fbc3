"""Quadrature and extrapolation helpers for corner-singular integrands.

Boundary data may have derivatives behaving like t^(-alpha) at the corner
t = 0 with alpha in [0, 1).  All integrals of that type are computed after
the substitution t = tau^(1/(1-alpha)), which cancels the singular factor
exactly: the transformed integrand is the bounded "regular part" divided
by (1 - alpha).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """Refinement failed to reach the requested self-consistency."""


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def composite_gl(f, a: float, b: float, panels: int, order: int = 24):
    """Composite Gauss-Legendre; f must accept an ndarray of nodes."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    vals = f(nodes)
    return np.tensordot(np.asarray(vals), weights, axes=([-1], [0])) \
        if np.ndim(vals) > 1 else np.dot(np.asarray(vals), weights)


def adaptive_gl(f, a: float, b: float, rtol: float = 1e-11, order: int = 24,
                max_panels: int = 1024):
    """Panel-doubling Gauss-Legendre to a relative self-consistency target."""
    if a == b:
        probe = np.asarray(f(np.array([a])))
        return np.zeros(probe.shape[:-1], dtype=probe.dtype) if probe.ndim > 1 \
            else type(probe.ravel()[0])(0)
    panels = 1
    prev = composite_gl(f, a, b, panels, order)
    while panels < max_panels:
        panels *= 2
        cur = composite_gl(f, a, b, panels, order)
        scale = max(1.0, float(np.max(np.abs(cur))))
        if np.max(np.abs(cur - prev)) <= rtol * scale:
            return cur
        prev = cur
    raise QuadratureError(f"no convergence after {max_panels} panels")


def singular_integral(regular, alpha: float, upper: float, rtol: float = 1e-11):
    """integral_0^upper g(t) t^(-alpha) dt for bounded g = ``regular``.

    Uses t = tau^(1/(1-alpha)); the integrand becomes g(t(tau))/(1-alpha).
    """
    if upper == 0.0:
        return 0.0
    if upper < 0.0:
        raise ValueError("upper limit must be nonnegative")
    p = 1.0 / (1.0 - alpha)
    cap = upper ** (1.0 - alpha)

    def transformed(tau):
        return np.asarray(regular(tau ** p)) / (1.0 - alpha)

    return adaptive_gl(transformed, 0.0, cap, rtol=rtol)


def neville_to_zero(u, g):
    """Polynomial extrapolation of samples (u_j, g_j) to u = 0.

    Returns (limit, stability) where stability is the magnitude of the last
    Neville correction, a practical error indicator.
    """
    u = np.asarray(u, dtype=float)
    tab = [np.asarray(g, dtype=complex).copy()]
    n = len(u)
    for m in range(1, n):
        prev = tab[-1]
        cur = np.empty(n - m, dtype=complex)
        for j in range(n - m):
            cur[j] = prev[j + 1] + (prev[j + 1] - prev[j]) * u[j + m] / (u[j] - u[j + m])
        tab.append(cur)
    limit = tab[-1][0]
    stability = abs(tab[-1][0] - tab[-2][0]) if n >= 2 else np.inf
    return limit, float(stability)
