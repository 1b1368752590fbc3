"""Collinear polarization: the linear path through the Euler-Darboux equation.

For real positive fields E = exp(-V) the problem linearizes: V satisfies

    V_xy - (V_x + V_y) / (2 (1 - x - y)) = 0,

and the matrix machinery collapses to scalars.  Two independent solution
routes are implemented and cross-checked against each other:

* the scalar additive jump on the fixed loop pair, with

      V(x, y) = -(1 / 4 pi i) oint v(x, y, z) / z dz,

  where v is built from the scalar integrals Phi0/Phi1 of the data
  derivatives against lambda and 1/lambda;

* the explicit double Abel-type integral representation, evaluated with
  endpoint singularities absorbed by Gauss-Jacobi weights (inner layer)
  and trigonometric substitutions (outer layer).  The Abel route avoids
  the contour machinery entirely, which makes it the oracle of record for
  the collinear acceptance checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.special import roots_jacobi

from . import geometry
from .boundary_data import LINEAR, BoundaryDatum
from .geometry import ContourSystem
from .quadrature import QuadratureError, adaptive_gl, gauss_legendre


class ImaginaryResidualError(RuntimeError):
    """The contour formula returned a value with a non-real part."""


@dataclass
class LinearField:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray        # real
    provenance: str           # "abel" | "scalar-rh"


def _require_linear(data):
    for d in data:
        if d.kind != LINEAR:
            raise ValueError(f"datum {d.label!r} is not linear-path data")


# ---------------------------------------------------------------------------
# scalar eigenfunction integrals

def _scalar_phi(datum, target, k, sheet, kernel, rtol):
    """integral_0^target kernel(t, k) * datum'(t) dt with the corner
    substitution t = tau^(1/(1-alpha)) applied analytically."""
    alpha = datum.alpha
    if target == 0.0:
        return np.zeros_like(np.asarray(k, dtype=complex))
    p = 1.0 / (1.0 - alpha)

    def f(taus):
        t = taus ** p
        r = np.asarray(datum.regular_part(t)) / (1.0 - alpha)
        lam = kernel(t, np.asarray(k, complex)[:, None], np.asarray(sheet)[:, None])
        return lam * r[None, :]

    return adaptive_gl(f, 0.0, target ** (1.0 - alpha), rtol=rtol)


def scalar_phi0(datum: BoundaryDatum, x: float, k, sheet, rtol=1e-11):
    """Phi0(x, k) = int_0^x lambda(t, 0, k) V0'(t) dt (vectorized in k)."""
    def kernel(t, kk, ss):
        return geometry.lambda_values(t, 0.0, kk, ss)
    return _scalar_phi(datum, x, k, sheet, kernel, rtol)


def scalar_phi1(datum: BoundaryDatum, y: float, k, sheet, rtol=1e-11):
    """Phi1(y, k) = int_0^y lambda(0, t, k)^-1 V1'(t) dt (vectorized in k)."""
    def kernel(t, kk, ss):
        return geometry.inv_lambda_values(0.0, t, kk, ss)
    return _scalar_phi(datum, y, k, sheet, kernel, rtol)


def scalar_jump(x: float, y: float, z: complex,
                data: Tuple[BoundaryDatum, BoundaryDatum],
                rtol=1e-11) -> complex:
    """Additive scalar jump at one contour point z.

    Points with Re z < 0 belong to loop 0 and carry Phi0; Re z > 0 carries
    Phi1 (the loops live in opposite half-planes).
    """
    _require_linear(data)
    p = geometry.from_sphere(x, y, z)
    k = np.array([p.k], dtype=complex)
    sheet = np.array([p.sheet], dtype=float)
    if z.real < 0.0:
        return complex(scalar_phi0(data[0], x, k, sheet, rtol)[0])
    return complex(scalar_phi1(data[1], y, k, sheet, rtol)[0])


def _scalar_jump_nodes(x, y, data, contours, rtol):
    s0, s1 = contours.loop_slices()
    nodes = contours.all_nodes
    k = geometry.k_project(x, y, nodes)
    sheet = np.where(np.abs(nodes) > 1.0, 1.0, -1.0)
    v = np.empty(contours.n_total, dtype=complex)
    v[s0] = scalar_phi0(data[0], x, k[s0], sheet[s0], rtol)
    v[s1] = scalar_phi1(data[1], y, k[s1], sheet[s1], rtol)
    return v


def solve_linear_point(x: float, y: float,
                       data: Tuple[BoundaryDatum, BoundaryDatum],
                       contours: ContourSystem, rtol=1e-11,
                       imag_tol=1e-10) -> float:
    """V(x, y) from the contour formula; the imaginary residual must vanish."""
    _require_linear(data)
    if not contours.contains(x, y):
        raise ValueError(f"({x}, {y}) outside D_delta")
    v = _scalar_jump_nodes(x, y, data, contours, rtol)
    val = -np.sum(v * contours.all_weights / contours.all_nodes) / (4j * np.pi)
    if abs(val.imag) > max(imag_tol, imag_tol * abs(val.real)):
        raise ImaginaryResidualError(f"imaginary residual {val.imag:.3e}")
    return float(val.real)


# ---------------------------------------------------------------------------
# Abel-type representation

@lru_cache(maxsize=32)
def _jacobi_rule(n: int, alpha: float):
    # weight (1-u)^(-1/2) (1+u)^(-alpha) on [-1, 1]
    return roots_jacobi(n, -0.5, -alpha)


def _abel_inner(datum, s_values, n: int):
    """I(s) = int_0^s datum'(t) / sqrt(s - t) dt for an array of s.

    With t = s (1+u)/2 both endpoint factors become the Gauss-Jacobi weight
    (1-u)^(-1/2) (1+u)^(-alpha); only the bounded regular part is sampled.
    """
    alpha = datum.alpha
    u, w = _jacobi_rule(n, alpha)
    s = np.asarray(s_values, dtype=float)
    t = s[:, None] * (1.0 + u[None, :]) / 2.0
    reg = np.asarray(datum.regular_part(t.ravel())).reshape(t.shape)
    scale = 2.0 ** (alpha - 0.5) * s ** (0.5 - alpha)
    return scale * (reg @ w)


def _abel_outer(x, y, data, n_outer, n_inner):
    datum_x, datum_y = data
    phi, wphi = gauss_legendre(n_outer)
    # first layer: k = x sin^2(phi) removes the 1/sqrt(x - k) endpoint
    ang = (phi + 1.0) * np.pi / 4.0
    wang = wphi * np.pi / 4.0
    total = 0.0
    if x > 0.0:
        k = x * np.sin(ang) ** 2
        inner = np.real(_abel_inner(datum_x, k, n_inner))
        f = np.sqrt(1.0 - k) / np.sqrt(1.0 - y - k) * inner * np.sin(ang)
        total += 2.0 * np.sqrt(x) * np.dot(wang, f) / np.pi
    if y > 0.0:
        k = 1.0 - y + y * np.sin(ang) ** 2
        inner = np.real(_abel_inner(datum_y, 1.0 - k, n_inner))
        f = np.sqrt(k) / np.sqrt(k - x) * inner * np.cos(ang)
        # the substitution runs the cut [1-y, 1] with sqrt(k - (1-y)) absorbed
        total += 2.0 * np.sqrt(y) * np.dot(wang, f) / np.pi
    return total


def abel_solution(x: float, y: float,
                  data: Tuple[BoundaryDatum, BoundaryDatum],
                  tol: float = 1e-9, max_order: int = 640) -> float:
    """V(x, y) by the explicit Abel-type double integrals.

    Fixed-order Gauss rules per layer, refined until self-consistent to
    ``tol``.  Accuracy degrades near the diagonal x + y = 1, where the
    outer integrand loses analyticity; the truncated triangle is the
    supported domain.
    """
    _require_linear(data)
    if x + y >= 1.0:
        raise ValueError("(x, y) outside the open triangle")
    n = 40
    prev = _abel_outer(x, y, data, n, n)
    while n <= max_order:
        n *= 2
        cur = _abel_outer(x, y, data, n, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return float(cur)
        prev = cur
    raise QuadratureError(f"Abel refinement stalled at order {n} "
                          f"(last increment {abs(cur - prev):.2e})")


def solve_linear_grid(config, data, contours: Optional[ContourSystem] = None,
                      route: str = "abel") -> LinearField:
    """Linear field on a grid by either route (see ``LinearField.provenance``)."""
    from .rh_solver import GridConfig  # local import to avoid a cycle

    assert isinstance(config, GridConfig)
    xs, ys = config.coordinates()
    vals = np.zeros((len(xs), len(ys)))
    if route == "scalar-rh" and contours is None:
        contours = geometry.build_contour_system(config.delta,
                                                 config.nodes_per_loop)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if route == "abel":
                vals[i, j] = abel_solution(x, y, data)
            elif route == "scalar-rh":
                vals[i, j] = solve_linear_point(x, y, data, contours)
            else:
                raise ValueError(f"unknown route {route!r}")
    return LinearField(x=xs, y=ys, values=vals, provenance=route)
