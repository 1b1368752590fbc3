"""Characteristic boundary data: representation, validation, corner analysis.

A boundary datum is one function prescribed on a characteristic edge: the
Ernst values E0(x) or E1(y) (normalized to 1 at the corner, positive real
part), or the real data V0/V1 of the collinear path (zero at the corner).
The derivative may blow up like t^(-alpha) at the corner; the bounded
combination t^alpha * derivative(t) is stored as ``regular_part`` and its
limit at 0 is the corner coefficient m.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List

import numpy as np

from .quadrature import neville_to_zero, singular_integral

ERNST = "ernst"
LINEAR = "linear"

FAMILIES = ("unit", "khan-penrose", "nutku-halil", "collinear-sqrt",
            "collinear-poly", "table")


class UnknownFamilyError(ValueError):
    pass


class DatumConsistencyError(ValueError):
    """Corner extrapolation does not converge: declared alpha is wrong."""


@dataclass(frozen=True)
class BoundaryDatum:
    """One characteristic boundary function with its corner structure.

    ``value``, ``derivative`` and ``regular_part`` are vectorized callables;
    ``regular_part(t) = t**alpha * derivative(t)`` extended continuously to
    t = 0.  ``kind`` distinguishes Ernst data (value(0) = 1, Re > 0) from
    collinear/linear data (value(0) = 0, real).  Immutable and shareable.
    """

    value: Callable
    derivative: Callable
    regular_part: Callable
    alpha: float
    kind: str
    label: str = "custom"

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.kind not in (ERNST, LINEAR):
            raise ValueError(f"kind must be 'ernst' or 'linear', got {self.kind}")


@dataclass(frozen=True)
class CornerData:
    alpha: float
    m: complex


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    label: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=""):
        self.checks.append(CheckResult(name, bool(passed), detail))


# ---------------------------------------------------------------------------
# built-in families

def _unit_datum(alpha):
    return BoundaryDatum(
        value=lambda t: np.ones_like(np.asarray(t, dtype=float)) + 0j,
        derivative=lambda t: np.zeros_like(np.asarray(t, dtype=complex)),
        regular_part=lambda t: np.zeros_like(np.asarray(t, dtype=complex)),
        alpha=alpha, kind=ERNST, label="unit")


def _khan_penrose_datum():
    # same restriction on both characteristics
    def value(t):
        s = np.sqrt(np.asarray(t, dtype=float))
        return (1.0 + s) / (1.0 - s) + 0j

    def derivative(t):
        t = np.asarray(t, dtype=float)
        s = np.sqrt(t)
        return 1.0 / (s * (1.0 - s) ** 2) + 0j

    def regular_part(t):
        s = np.sqrt(np.asarray(t, dtype=float))
        return 1.0 / (1.0 - s) ** 2 + 0j

    return BoundaryDatum(value, derivative, regular_part, 0.5, ERNST,
                         "khan-penrose")


def _nutku_halil_datum(axis):
    # the x-restriction carries -i sqrt(x), the y-restriction +i sqrt(y)
    sgn = -1.0 if axis == "x" else 1.0

    def value(t):
        s = np.sqrt(np.asarray(t, dtype=float))
        return (1.0 + sgn * 1j * s) / (1.0 - sgn * 1j * s)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        s = np.sqrt(t)
        return sgn * 1j / (s * (1.0 - sgn * 1j * s) ** 2)

    def regular_part(t):
        s = np.sqrt(np.asarray(t, dtype=float))
        return sgn * 1j / (1.0 - sgn * 1j * s) ** 2

    return BoundaryDatum(value, derivative, regular_part, 0.5, ERNST,
                         f"nutku-halil-{axis}")


def _collinear_sqrt_datum(c):
    # V(t) = c sqrt(t); corner coefficient m = c/2
    def value(t):
        return c * np.sqrt(np.asarray(t, dtype=float)) + 0j

    def derivative(t):
        t = np.asarray(t, dtype=float)
        return 0.5 * c / np.sqrt(t) + 0j

    def regular_part(t):
        return np.full_like(np.asarray(t, dtype=complex), 0.5 * c)

    return BoundaryDatum(value, derivative, regular_part, 0.5, LINEAR,
                         f"collinear-sqrt[{c}]")


def _collinear_poly_datum(coeffs, alpha):
    # V(t) = sum_m coeffs[m-1] t^m; smooth data, so m = 0 for alpha > 0
    coeffs = [float(c) for c in coeffs]

    def value(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for mdeg, c in enumerate(coeffs, start=1):
            out = out + c * t ** mdeg
        return out + 0j

    def derivative(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for mdeg, c in enumerate(coeffs, start=1):
            out = out + mdeg * c * t ** (mdeg - 1)
        return out + 0j

    def regular_part(t):
        t = np.asarray(t, dtype=float)
        return t ** alpha * derivative(t)

    return BoundaryDatum(value, derivative, regular_part, alpha, LINEAR,
                         "collinear-poly")


def datum_from_table(t, reg, alpha, kind=ERNST, label="table"):
    """Datum from samples of the regular part on a corner-refined grid.

    Sampling the regular part (not the raw derivative) keeps the singular
    factor exact; interpolation happens on the bounded function, as a
    rational barycentric interpolant in the corner variable u = t^(1-alpha)
    (the natural smoothness variable of the data class; stable on arbitrary
    node layouts).  The value is recovered by integrating the interpolated
    derivative from the corner.
    """
    from scipy.interpolate import FloaterHormannInterpolator

    t = np.asarray(t, dtype=float)
    reg = np.asarray(reg, dtype=complex)
    if len(t) < 8:
        raise ValueError(f"table needs at least 8 samples, got {len(t)}")
    if t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("table abscissae must start at 0 and increase")
    beta = 1.0 - alpha
    interp = FloaterHormannInterpolator(t ** beta, reg, d=min(4, len(t) - 1))

    def regular_part(s):
        s = np.asarray(s, dtype=float)
        return np.asarray(interp(s ** beta), dtype=complex)

    def derivative(s):
        s = np.asarray(s, dtype=float)
        return regular_part(s) * s ** (-alpha)

    value0 = 1.0 if kind == ERNST else 0.0

    def value(s):
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.array([value0 + singular_integral(regular_part, alpha, si,
                                                   rtol=1e-10)
                        for si in s], dtype=complex)
        return out[0] if scalar else out

    datum = BoundaryDatum(value, derivative, regular_part, alpha, kind, label)
    if kind == ERNST:
        probe = np.linspace(0.0, t[-1], 64)
        if np.any(np.real(regular_part(probe) * 0 + _probe_values(datum, probe)) <= 0):
            raise ValueError("table values violate Re > 0")
    return datum


def _probe_values(datum, ts):
    return np.asarray(datum.value(ts), dtype=complex)


def load_table(path):
    """CSV with header and columns t, re[, im] of the regular part."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ncol = len(header)
        for row in reader:
            if not row:
                continue
            rows.append([float(v) for v in row[:ncol]])
    arr = np.asarray(rows, dtype=float)
    t = arr[:, 0]
    reg = arr[:, 1] + (1j * arr[:, 2] if arr.shape[1] > 2 else 0.0)
    return t, reg


def make_boundary_datum(spec) -> BoundaryDatum:
    """Construct a datum from a family spec.

    ``spec`` is either a family name or a dict with keys ``family`` plus
    family parameters (``axis`` for nutku-halil, ``c`` for collinear-sqrt,
    ``coeffs`` for collinear-poly, ``path``/``t``/``reg`` plus ``alpha`` and
    ``kind`` for tables, optional ``alpha`` for unit).
    """
    if isinstance(spec, str):
        spec = {"family": spec}
    family = spec.get("family")
    if family == "unit":
        return _unit_datum(float(spec.get("alpha", 0.5)))
    if family == "khan-penrose":
        return _khan_penrose_datum()
    if family == "nutku-halil":
        axis = spec.get("axis", "x")
        if axis not in ("x", "y"):
            raise ValueError(f"nutku-halil axis must be 'x' or 'y', got {axis}")
        return _nutku_halil_datum(axis)
    if family == "collinear-sqrt":
        return _collinear_sqrt_datum(float(spec.get("c", 2.0)))
    if family == "collinear-poly":
        return _collinear_poly_datum(spec.get("coeffs", [1.0]),
                                     float(spec.get("alpha", 0.5)))
    if family == "table":
        alpha = float(spec["alpha"])
        kind = spec.get("kind", ERNST)
        if "path" in spec:
            t, reg = load_table(spec["path"])
        else:
            t, reg = np.asarray(spec["t"], float), np.asarray(spec["reg"])
        return datum_from_table(t, reg, alpha, kind,
                                spec.get("label", "table"))
    raise UnknownFamilyError(f"unknown datum family {family!r}; "
                             f"known: {FAMILIES}")


# ---------------------------------------------------------------------------
# validation and corner analysis

def validate(datum: BoundaryDatum, delta: float) -> ValidationReport:
    """Check the admissibility conditions of the data class on [0, 1-delta]."""
    report = ValidationReport(label=datum.label)
    upper = 1.0 - delta

    v0 = complex(np.asarray(datum.value(np.array([0.0])))[0])
    target = 1.0 if datum.kind == ERNST else 0.0
    report.add("corner-normalization", abs(v0 - target) <= 1e-10,
               f"value(0) = {v0}")

    if datum.kind == ERNST:
        ts = np.linspace(0.0, upper, 400)
        re = np.real(np.asarray(datum.value(ts)))
        report.add("positive-real-part", bool(np.all(re > 0.0)),
                   f"min Re = {re.min():.6g}")

    # Cauchy criterion for the regular part along t = 2^-j: the increments
    # must decay geometrically, with a summable-tail bound (continuity at 0
    # of a t^((1-alpha) m)-type expansion, not smoothness)
    js = np.arange(8, 27)
    rv = np.asarray(datum.regular_part(2.0 ** (-js.astype(float))))
    diffs = np.abs(np.diff(rv))
    scale = max(1.0, float(np.max(np.abs(rv))))
    tail = diffs[-7:]
    nonzero = tail > 1e-14 * scale
    if not nonzero.any():
        cauchy_ok, detail = True, "increments at roundoff"
    else:
        ratios = tail[1:] / np.maximum(tail[:-1], 1e-300)
        rho = float(np.median(ratios))
        tail_bound = tail[-1] / (1.0 - rho) if rho < 1.0 else np.inf
        cauchy_ok = rho < 0.99 and tail_bound <= 1e-3 * scale
        detail = f"increment ratio {rho:.3f}, tail bound {tail_bound:.2e}"
    report.add("regular-part-continuous-at-0", cauchy_ok, detail)

    # L1 proxy of the derivative (and of derivative / Re value for Ernst
    # data), the quantity controlling the small-norm existence regime
    try:
        if datum.kind == ERNST:
            def g(t):
                return np.abs(datum.regular_part(t)) / np.real(datum.value(t))
        else:
            def g(t):
                return np.abs(datum.regular_part(t))
        l1 = float(singular_integral(g, datum.alpha, upper, rtol=1e-8))
        report.add("derivative-L1-finite", np.isfinite(l1), f"L1 proxy = {l1:.6g}")
    except Exception as exc:  # quadrature blow-up means a non-integrable datum
        report.add("derivative-L1-finite", False, str(exc))
    return report


def corner_data(datum: BoundaryDatum, tol: float = 1e-8) -> CornerData:
    """Corner coefficient m = lim t^alpha derivative(t), by extrapolation.

    Samples the regular part along t = 2^-j, j = 10..20, and extrapolates
    polynomially to t = 0.  The approach to the corner can carry powers of
    t^(1-alpha) (the corner ladder) or of t^alpha (smooth data under a
    declared singular class), so several extrapolation variables are tried
    and the most stable one wins.  Failure of all ladders means the datum
    is inconsistent with its declared alpha.
    """
    js = np.arange(10, 21, dtype=float)
    ts = 2.0 ** (-js)
    g = np.asarray(datum.regular_part(ts), dtype=complex)
    exponents = {1.0 - datum.alpha, 1.0}
    if datum.alpha > 0.0:
        exponents.add(datum.alpha)
        exponents.add(min(datum.alpha, 1.0 - datum.alpha) / 2.0)
    best_m, best_stab = None, np.inf
    for q in exponents:
        m, stability = neville_to_zero(ts ** q, g)
        if stability < best_stab:
            best_m, best_stab = m, stability
    if best_stab > tol * max(1.0, abs(best_m)):
        raise DatumConsistencyError(
            f"corner extrapolation unstable (residual {best_stab:.2e}); "
            f"datum inconsistent with alpha = {datum.alpha}")
    return CornerData(alpha=datum.alpha, m=complex(best_m))


def normalize(datum: BoundaryDatum) -> BoundaryDatum:
    """Rescale Ernst data to value(0) = 1 using the invariance E -> aE + ib."""
    if datum.kind != ERNST:
        raise ValueError("normalize applies to Ernst data")
    c0 = complex(np.asarray(datum.value(np.array([0.0])))[0])
    if c0.real <= 0:
        raise ValueError(f"cannot normalize: Re value(0) = {c0.real} <= 0")
    a = 1.0 / c0.real
    b = -c0.imag / c0.real

    return BoundaryDatum(
        value=lambda t: a * np.asarray(datum.value(t)) + 1j * b,
        derivative=lambda t: a * np.asarray(datum.derivative(t)),
        regular_part=lambda t: a * np.asarray(datum.regular_part(t)),
        alpha=datum.alpha, kind=datum.kind, label=datum.label + "-normalized")
