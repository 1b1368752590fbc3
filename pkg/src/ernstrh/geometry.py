"""Spectral geometry: the two-sheeted surface, the sphere map, and the contours.

For each point (x, y) of the triangle D = {x >= 0, y >= 0, x + y < 1} the
spectral parameter k lives on a two-sheeted surface defined by

    lambda^2 = (k - (1 - y)) / (k - x),

with moving branch points at k = x and k = 1 - y.  The Moebius map
z = (1 + lambda)/(1 - lambda) uniformizes the surface onto the Riemann
sphere, sending the branch points to z = -1 and z = +1 and the upper
(lower) sheet to the outside (inside) of the unit circle.

The solver works on two fixed clockwise loops in the z-plane which encircle
the images of the branch-cut segments for every (x, y) in the truncated
triangle D_delta = {x + y < 1 - delta}.  The loops are chosen as images of
axis-aligned ellipses under z = exp(w) (and z = -exp(w)), which makes each
loop invariant as a point set under both z -> 1/z and z -> conj(z), matches
the symmetry requirements of the jump matrix, and keeps uniform trapezoid
nodes spectrally efficient over the loop's full dynamic range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

UPPER = +1
LOWER = -1

_SAFETY_FACTOR = 0.5          # scales the minimal admissible epsilon
_LOG_MARGIN = 0.15            # extra log-radius of the loops beyond [eps, 1/eps]
_LOG_MARGIN_FACTOR = 1.02
_LOOP_HEIGHT = 1.0            # vertical half-axis in w = log z coordinates (< pi/2)


class BranchCutError(ValueError):
    """k lies on the open branch cut, where the two sheets meet."""


class PoleAtBranchPoint(ArithmeticError):
    """lambda has a pole at k = x; the caller must work with 1/lambda."""


class SheetAmbiguityError(ValueError):
    """A sphere point on the unit circle projects onto the branch cut."""


class ConfigurationError(ValueError):
    """Invalid contour-system parameters."""


@dataclass(frozen=True)
class SpectralPoint:
    """A point of the two-sheeted spectral surface.

    ``k`` is the base-plane coordinate; ``sheet`` is +1 on the sheet where
    lambda -> +1 as k -> infinity and -1 on the other.  The two points at
    infinity are represented explicitly (``infinite=True``) because they
    carry exact normalization data lambda = +/-1.
    """

    k: complex
    sheet: int
    infinite: bool = False

    def __post_init__(self):
        if self.sheet not in (UPPER, LOWER):
            raise ValueError(f"sheet must be +1 or -1, got {self.sheet}")

    @classmethod
    def finite(cls, k, sheet=UPPER) -> "SpectralPoint":
        return cls(complex(k), sheet, False)

    @classmethod
    def at_infinity(cls, sheet=UPPER) -> "SpectralPoint":
        return cls(0j, sheet, True)

    def conjugate(self) -> "SpectralPoint":
        return SpectralPoint(np.conj(self.k), self.sheet, self.infinite)

    def other_sheet(self) -> "SpectralPoint":
        return SpectralPoint(self.k, -self.sheet, self.infinite)


# ---------------------------------------------------------------------------
# lambda and the sphere map

def lambda_values(x, y, k, sheet):
    """Vectorized lambda on finite points; no cut/pole checks.

    ``k`` and ``sheet`` are broadcastable arrays; the upper-sheet branch is
    the principal square root (positive real part off the cut).
    """
    k = np.asarray(k, dtype=complex)
    return np.asarray(sheet) * np.sqrt((k - (1.0 - y)) / (k - x))


def inv_lambda_values(x, y, k, sheet):
    """Vectorized 1/lambda; finite (zero) at the pole k = x."""
    k = np.asarray(k, dtype=complex)
    return np.asarray(sheet) * np.sqrt((k - x) / (k - (1.0 - y)))


def lam(x: float, y: float, p: SpectralPoint) -> complex:
    """lambda(x, y, P) with the positive-real-part branch on the upper sheet.

    Raises ``BranchCutError`` for k on the open cut (x, 1 - y) and
    ``PoleAtBranchPoint`` at k = x.
    """
    if p.infinite:
        return complex(p.sheet)
    k = complex(p.k)
    if k == x:
        raise PoleAtBranchPoint(f"lambda has a pole at k = x = {x}")
    if k.imag == 0.0 and x < k.real < 1.0 - y:
        raise BranchCutError(f"k = {k} lies on the open branch cut ({x}, {1 - y})")
    ratio = (k - (1.0 - y)) / (k - x)
    if ratio.real < 0.0 and ratio.imag == 0.0 and k != 1.0 - y:
        # only reachable through rounding; the exact cut was excluded above
        raise BranchCutError(f"branch ambiguity at k = {k}")
    return p.sheet * complex(np.sqrt(ratio))


def to_sphere(x: float, y: float, p: SpectralPoint) -> complex:
    """Uniformizing map z = (1 + lambda)/(1 - lambda).

    Sends k = x to z = -1, k = 1 - y to z = +1, infinity^- to 0 and
    infinity^+ to the point at infinity; the upper sheet fills |z| > 1.
    """
    if p.infinite and p.sheet == LOWER:
        return 0.0 + 0.0j
    if p.infinite and p.sheet == UPPER:
        return complex(np.inf)
    if not p.infinite and complex(p.k) == x:
        return -1.0 + 0.0j
    lv = lam(x, y, p)
    if lv == 1.0:
        return complex(np.inf)
    return (1.0 + lv) / (1.0 - lv)


def from_sphere(x: float, y: float, z: complex) -> SpectralPoint:
    """Inverse of the sphere map: z -> (k, sheet).

    The base coordinate is k = -(x (z-1)^2 + (y-1)(z+1)^2) / (4 z); the
    sheet is upper iff |z| > 1.  Points on the unit circle (other than
    z = +/-1, which are the branch points) project onto the open cut and
    are rejected.
    """
    z = complex(z)
    if z == 0.0:
        return SpectralPoint.at_infinity(LOWER)
    if np.isinf(z.real) or np.isinf(z.imag):
        return SpectralPoint.at_infinity(UPPER)
    if z == -1.0:
        return SpectralPoint.finite(x, UPPER)
    if z == 1.0:
        return SpectralPoint.finite(1.0 - y, UPPER)
    az = abs(z)
    if az == 1.0:
        raise SheetAmbiguityError(f"|z| = 1 at z = {z}: point projects onto the cut")
    k = -(x * (z - 1.0) ** 2 + (y - 1.0) * (z + 1.0) ** 2) / (4.0 * z)
    return SpectralPoint.finite(k, UPPER if az > 1.0 else LOWER)


def k_project(x, y, z):
    """Vectorized base-plane projection of sphere points."""
    z = np.asarray(z, dtype=complex)
    return -(x * (z - 1.0) ** 2 + (y - 1.0) * (z + 1.0) ** 2) / (4.0 * z)


def k_derivatives(z):
    """(dk/dx, dk/dy) of the projection at fixed z."""
    z = np.asarray(z, dtype=complex)
    return -(z - 1.0) ** 2 / (4.0 * z), -(z + 1.0) ** 2 / (4.0 * z)


def branch_cut_images(x: float, y: float) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Images on the sphere of the two branch-cut segments.

    Returns (interval0, interval1) on the negative and positive real axis;
    the endpoint magnitudes of each interval multiply to one.
    """
    if x + y >= 1.0:
        raise ValueError(f"(x, y) = ({x}, {y}) outside the open triangle")
    sx, s1y = np.sqrt(x), np.sqrt(1.0 - y)
    sy, s1x = np.sqrt(y), np.sqrt(1.0 - x)
    i0 = (-(s1y + sx) / (s1y - sx), -(s1y - sx) / (s1y + sx))
    i1 = ((s1x - sy) / (s1x + sy), (s1x + sy) / (s1x - sy))
    return i0, i1


# ---------------------------------------------------------------------------
# contour system

@dataclass(frozen=True, eq=False)
class ClosedLoop:
    """One clockwise analytic loop with its trapezoid data."""

    nodes: np.ndarray       # z_j
    dz: np.ndarray          # z'(theta_j)
    theta: np.ndarray
    h: float                # parameter spacing 2 pi / n

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def weights(self) -> np.ndarray:
        """Complex quadrature weights: sum(w_j f(z_j)) ~ contour integral."""
        return self.dz * self.h


@dataclass(frozen=True, eq=False)
class ContourSystem:
    """The fixed pair of clockwise loops for one truncation parameter delta.

    ``loops[0]`` encircles [-1/eps, -eps] and ``loops[1]`` encircles
    [eps, 1/eps]; both avoid 0 and infinity, each is invariant as a point
    set under z -> 1/z and z -> conj(z), and for every (x, y) in D_delta
    the branch-cut images lie strictly inside the matching loop.  Immutable
    after construction; safe to share across concurrent per-point solves.
    """

    delta: float
    epsilon: float
    loops: Tuple[ClosedLoop, ClosedLoop]
    log_radius: float       # A: horizontal half-axis of the w-plane ellipse
    log_height: float       # B: vertical half-axis

    @property
    def n_per_loop(self) -> int:
        return self.loops[0].n

    @property
    def n_total(self) -> int:
        return self.loops[0].n + self.loops[1].n

    @property
    def all_nodes(self) -> np.ndarray:
        return np.concatenate([self.loops[0].nodes, self.loops[1].nodes])

    @property
    def all_weights(self) -> np.ndarray:
        return np.concatenate([self.loops[0].weights, self.loops[1].weights])

    def loop_slices(self):
        n = self.n_per_loop
        return slice(0, n), slice(n, 2 * n)

    def node_spacing(self) -> np.ndarray:
        """Local arc-length spacing at every node (both loops)."""
        return np.abs(self.all_weights)

    def contains(self, x: float, y: float) -> bool:
        return x >= 0.0 and y >= 0.0 and x + y <= 1.0 - self.delta


def max_epsilon(delta: float) -> float:
    """Largest eps with all branch-cut images inside [eps, 1/eps] on D_delta.

    The minimum of the inner endpoint magnitude over the closed triangle is
    attained at the corners (1 - delta, 0) / (0, 1 - delta) of the edge
    x + y = 1 - delta.
    """
    s = np.sqrt(1.0 - delta)
    return (1.0 - s) / (1.0 + s)


def build_contour_system(delta: float, nodes_per_loop: int) -> ContourSystem:
    """Build the fixed clockwise loop pair for D_delta.

    eps is half the minimal admissible value, so the branch-cut images stay
    well inside [eps, 1/eps].  Loop 1 is theta -> exp(A cos t - i B sin t)
    (clockwise, invariant under 1/z and conjugation); loop 0 is its negative.
    """
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must be in (0, 1), got {delta}")
    if nodes_per_loop < 16 or nodes_per_loop % 2 != 0:
        raise ConfigurationError(
            f"nodes_per_loop must be even and >= 16, got {nodes_per_loop}")

    eps = _SAFETY_FACTOR * max_epsilon(delta)
    big_l = np.log(1.0 / eps)
    big_a = max(_LOG_MARGIN_FACTOR * big_l, big_l + _LOG_MARGIN)
    big_b = _LOOP_HEIGHT

    # resolve the loop: a heuristic floor tied to its log-plane extent
    n_min = 2 * int(np.ceil(1.5 * big_a))
    if nodes_per_loop < max(16, n_min):
        raise ConfigurationError(
            f"nodes_per_loop = {nodes_per_loop} cannot resolve the loop; "
            f"need at least {max(16, n_min)} for delta = {delta}")

    n = nodes_per_loop
    # offset grids keep nodes off the unit circle (theta = pi/2 for 4 | n)
    offset = 0.5 if n % 4 == 0 else 0.0
    theta = 2.0 * np.pi * (np.arange(n) + offset) / n
    w = big_a * np.cos(theta) - 1j * big_b * np.sin(theta)
    dw = -big_a * np.sin(theta) - 1j * big_b * np.cos(theta)
    z1 = np.exp(w)
    h = 2.0 * np.pi / n
    loop1 = ClosedLoop(nodes=z1, dz=z1 * dw, theta=theta, h=h)
    loop0 = ClosedLoop(nodes=-z1, dz=-z1 * dw, theta=theta, h=h)

    system = ContourSystem(delta=delta, epsilon=eps, loops=(loop0, loop1),
                           log_radius=big_a, log_height=big_b)

    # containment at the corner points of D_delta (worst case for eps)
    for cx, cy in ((0.0, 0.0), (1.0 - delta, 0.0), (0.0, 1.0 - delta)):
        if not _images_inside(system, cx, cy):
            raise ConfigurationError(
                f"containment failed at corner ({cx}, {cy}) of D_delta")
    return system


def _images_inside(system: ContourSystem, x: float, y: float) -> bool:
    i0, i1 = branch_cut_images(x, y)
    lo = np.log(system.epsilon), np.log(1.0 / system.epsilon)
    for lo_pt, hi_pt in (np.log(np.abs(i0))[::-1], np.log(np.abs(i1))):
        if not (lo[0] < lo_pt <= hi_pt < lo[1]):
            return False
    return True


def containment_margin(system: ContourSystem, x: float, y: float) -> float:
    """Min distance from the branch-cut images to their enclosing loops."""
    i0, i1 = branch_cut_images(x, y)
    margins = []
    for (a, b), loop in ((i0, system.loops[0]), (i1, system.loops[1])):
        pts = np.linspace(a, b, 200).astype(complex)
        margins.append(np.min(np.abs(pts[:, None] - loop.nodes[None, :])))
    return float(min(margins))
