"""Discretized Cauchy transform on the contour system.

Conventions, asserted once here and never re-derived at call sites: the
loops are clockwise, so the minus side of each loop is its enclosed
component, the transform of the constant density 1 evaluated inside a loop
is -1, and the one-sided boundary values satisfy C_plus - C_minus = I.

Boundary values at the nodes are computed by singularity subtraction: for
a density g that extends analytically to a neighborhood of its loop,

    C_minus g(z_j) = (1/2 pi i) oint (g(s) - g(z_j))/(s - z_j) ds - g(z_j),

where the first integrand is analytic (its diagonal value is g'(z_j),
obtained by spectral differentiation) and is integrated by the plain
trapezoid rule, while the -g(z_j) term is the exact clockwise winding
contribution from the enclosed side.  The scheme is spectrally accurate
and reproduces C_minus(1) = -1 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from weakref import WeakKeyDictionary

import numpy as np
from scipy.linalg import lapack

from .geometry import ContourSystem

_IDENTITY2 = np.eye(2, dtype=complex)

_matrix_cache: "WeakKeyDictionary[ContourSystem, np.ndarray]" = WeakKeyDictionary()
_norm_cache: "WeakKeyDictionary[ContourSystem, float]" = WeakKeyDictionary()


class EvaluationTooCloseError(ValueError):
    """Nearly-singular off-contour evaluation is refused, not mis-approximated."""


class NoSolutionError(RuntimeError):
    """I - C_w lost rank beyond tolerance: the discrete problem has no solution."""


@dataclass(frozen=True)
class Density:
    """Per-node 2x2 matrices on all nodes of a contour system."""

    values: np.ndarray  # (n_total, 2, 2) complex

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 3 or v.shape[1:] != (2, 2):
            raise ValueError(f"density must have shape (n, 2, 2), got {v.shape}")

    @classmethod
    def identity(cls, contours: ContourSystem) -> "Density":
        return cls(np.tile(_IDENTITY2, (contours.n_total, 1, 1)))

    @classmethod
    def from_scalar(cls, contours: ContourSystem, f) -> "Density":
        vals = np.asarray(f(contours.all_nodes), dtype=complex)
        return cls(vals[:, None, None] * _IDENTITY2[None, :, :])

    def check_matches(self, contours: ContourSystem):
        if len(self.values) != contours.n_total:
            raise ValueError("density node count does not match the contour system")


@lru_cache(maxsize=32)
def _fourier_diff_matrix(n: int) -> np.ndarray:
    # d/dtheta for 2pi-periodic data on a uniform n-point grid (n even)
    j = np.arange(n)
    d = j[:, None] - j[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        mat = 0.5 * (-1.0) ** d / np.tan(np.pi * d / n)
    np.fill_diagonal(mat, 0.0)
    return mat


def cminus_matrix(contours: ContourSystem) -> np.ndarray:
    """Matrix of the minus-side boundary-value operator on node values."""
    cached = _matrix_cache.get(contours)
    if cached is not None:
        return cached
    nodes = contours.all_nodes
    weights = contours.all_weights / (2j * np.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        mat = weights[None, :] / (nodes[None, :] - nodes[:, None])
    np.fill_diagonal(mat, 0.0)
    n = contours.n_per_loop
    dmat = _fourier_diff_matrix(n)
    h = contours.loops[0].h
    idx = np.arange(n)
    for sl in contours.loop_slices():
        sub = mat[sl, sl]
        own_rowsum = sub.sum(axis=1)
        sub += (h / (2j * np.pi)) * dmat
        sub[idx, idx] += -own_rowsum - 1.0  # -1: clockwise enclosed winding
        mat[sl, sl] = sub
    mat.setflags(write=False)
    _matrix_cache[contours] = mat
    return mat


def cminus_opnorm(contours: ContourSystem) -> float:
    """Spectral norm of the discretized C_minus (stand-in for the L2 norm)."""
    cached = _norm_cache.get(contours)
    if cached is None:
        cached = float(np.linalg.norm(cminus_matrix(contours), 2))
        _norm_cache[contours] = cached
    return cached


def _apply_nodewise(mat, values):
    return np.einsum("jk,kab->jab", mat, values)


def cauchy_minus(density: Density, contours: ContourSystem) -> Density:
    """Minus-side (enclosed-side) boundary values at the nodes."""
    density.check_matches(contours)
    return Density(_apply_nodewise(cminus_matrix(contours), density.values))


def cauchy_plus(density: Density, contours: ContourSystem) -> Density:
    """Plus-side boundary values; differs from the minus side by the density."""
    minus = cauchy_minus(density, contours)
    return Density(minus.values + density.values)


def cauchy_eval(density: Density, contours: ContourSystem, z: complex):
    """Off-contour value of the transform by the plain trapezoid rule.

    Spectrally accurate for analytic densities; evaluation closer to the
    contour than the local node spacing is refused.
    """
    density.check_matches(contours)
    z = complex(z)
    nodes = contours.all_nodes
    dist = np.abs(nodes - z)
    nearest = int(np.argmin(dist))
    if dist[nearest] < contours.node_spacing()[nearest]:
        raise EvaluationTooCloseError(
            f"z = {z} is within one node spacing of the contour")
    kern = contours.all_weights / (2j * np.pi) / (nodes - z)
    return np.einsum("k,kab->ab", kern, density.values)


class CwOperator:
    """Dense representation of f -> C_minus(f w) with its factorization.

    The two rows of the 2x2 unknown decouple: the operator acts on a
    row-vector field on the nodes, flattened to length 2 n_total.  The LU
    factorization of I - C_w is kept for solves; the reciprocal condition
    number comes from the factorization at O(n^2) cost.
    """

    def __init__(self, w_values: np.ndarray, contours: ContourSystem,
                 rank_tol: float = 1e-14):
        self.contours = contours
        self.w_values = np.asarray(w_values, dtype=complex)
        if self.w_values.shape != (contours.n_total, 2, 2):
            raise ValueError("w must be sampled at all contour nodes")
        mat = cminus_matrix(contours)
        n = contours.n_total
        # action on flattened (node, component): M[j,k] * w[k, b, a]
        cw = np.einsum("jk,kba->jakb", mat, self.w_values).reshape(2 * n, 2 * n)
        self.matrix = cw
        system = np.eye(2 * n, dtype=complex) - cw
        self._anorm = float(np.linalg.norm(system, 1))
        lu, piv, info = lapack.zgetrf(system)
        if info > 0:
            raise NoSolutionError("I - C_w is exactly singular")
        self._lu, self._piv = lu, piv
        rcond, _ = lapack.zgecon(lu, self._anorm, norm="1")
        self.rcond = float(rcond)
        if self.rcond < rank_tol:
            raise NoSolutionError(
                f"I - C_w lost rank (rcond = {self.rcond:.2e}); "
                "the discrete problem has no solution")
        self.condition_number = 1.0 / self.rcond if self.rcond > 0 else np.inf
        self.w_inf = float(max(np.linalg.norm(self.w_values, 2, axis=(1, 2)).max(), 0.0)) \
            if n else 0.0
        self.cminus_norm = cminus_opnorm(contours)
        self.small_norm_bound = self.cminus_norm * self.w_inf
        self.small_norm_certificate = bool(self.small_norm_bound < 1.0)

    def apply(self, density: Density) -> Density:
        """C_w acting on a full 2x2 density (both rows at once)."""
        fw = np.einsum("kab,kbc->kac", density.values, self.w_values)
        return Density(_apply_nodewise(cminus_matrix(self.contours), fw))

    def solve_mu(self) -> Density:
        """Solve (I - C_w) mu = I row-wise; mu are the minus boundary values."""
        n = self.contours.n_total
        rhs = np.zeros((2 * n, 2), dtype=complex)
        rhs[0::2, 0] = 1.0
        rhs[1::2, 1] = 1.0
        sol, info = lapack.zgetrs(self._lu, self._piv, rhs)
        if info != 0:
            raise NoSolutionError(f"triangular solve failed (info={info})")
        mu = np.empty((n, 2, 2), dtype=complex)
        mu[:, 0, :] = sol[:, 0].reshape(n, 2)
        mu[:, 1, :] = sol[:, 1].reshape(n, 2)
        return Density(mu)


def build_cw(w, contours: ContourSystem) -> CwOperator:
    """Operator for the jump deviation w = v - I sampled on all nodes.

    Accepts a raw (n, 2, 2) array or any object carrying one under ``.w``.
    """
    w_values = getattr(w, "w", w)
    return CwOperator(w_values, contours)
