"""Closed-form colliding-wave fields used as test oracles.

Both solutions are built from rho = sqrt(x) sqrt(1-y) +/- sqrt(y) sqrt(1-x):
the collinear one is (1 + rho)/(1 - rho) (real), the noncollinear one is
(1 - i sigma)/(1 + i sigma) with unit modulus.  Derivatives are coded
analytically so they can serve as oracles for the boundary-limit
extrapolation tests without sharing code with the solver path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .boundary_data import BoundaryDatum, make_boundary_datum

IDS = ("khan-penrose", "nutku-halil")


@dataclass(frozen=True)
class ExactSolution:
    id: str
    evaluate: Callable
    derivative_x: Callable
    derivative_y: Callable


def _kp_eval(x, y):
    r = np.sqrt(x) * np.sqrt(1.0 - y) + np.sqrt(y) * np.sqrt(1.0 - x)
    return (1.0 + r) / (1.0 - r) + 0j


def _kp_dx(x, y):
    r = np.sqrt(x) * np.sqrt(1.0 - y) + np.sqrt(y) * np.sqrt(1.0 - x)
    rx = np.sqrt(1.0 - y) / (2.0 * np.sqrt(x)) \
        - np.sqrt(y) / (2.0 * np.sqrt(1.0 - x))
    return 2.0 * rx / (1.0 - r) ** 2 + 0j


def _kp_dy(x, y):
    return _kp_dx(y, x)


def _nh_eval(x, y):
    s = np.sqrt(x) * np.sqrt(1.0 - y) - np.sqrt(y) * np.sqrt(1.0 - x)
    return (1.0 - 1j * s) / (1.0 + 1j * s)


def _nh_dx(x, y):
    s = np.sqrt(x) * np.sqrt(1.0 - y) - np.sqrt(y) * np.sqrt(1.0 - x)
    sx = np.sqrt(1.0 - y) / (2.0 * np.sqrt(x)) \
        + np.sqrt(y) / (2.0 * np.sqrt(1.0 - x))
    return -2j * sx / (1.0 + 1j * s) ** 2


def _nh_dy(x, y):
    s = np.sqrt(x) * np.sqrt(1.0 - y) - np.sqrt(y) * np.sqrt(1.0 - x)
    sy = -np.sqrt(x) / (2.0 * np.sqrt(1.0 - y)) \
        - np.sqrt(1.0 - x) / (2.0 * np.sqrt(y))
    return -2j * sy / (1.0 + 1j * s) ** 2


_REGISTRY = {
    "khan-penrose": ExactSolution("khan-penrose", _kp_eval, _kp_dx, _kp_dy),
    "nutku-halil": ExactSolution("nutku-halil", _nh_eval, _nh_dx, _nh_dy),
}


def get_exact(solution_id: str) -> ExactSolution:
    if solution_id not in _REGISTRY:
        raise KeyError(f"unknown exact solution {solution_id!r}; known: {IDS}")
    return _REGISTRY[solution_id]


def evaluate_exact(solution_id: str, x: float, y: float) -> complex:
    """Closed-form field value; rejects the collinear solution's pole."""
    if x + y >= 1.0 or x < 0.0 or y < 0.0:
        raise ValueError(f"({x}, {y}) outside the triangle")
    if solution_id == "khan-penrose":
        r = np.sqrt(x) * np.sqrt(1.0 - y) + np.sqrt(y) * np.sqrt(1.0 - x)
        if r >= 1.0:
            raise ArithmeticError("pole of the collinear closed form")
    return complex(get_exact(solution_id).evaluate(x, y))


def boundary_data_of(solution_id: str) -> Tuple[BoundaryDatum, BoundaryDatum]:
    """The two characteristic restrictions packaged as boundary data."""
    if solution_id == "khan-penrose":
        d = make_boundary_datum("khan-penrose")
        return d, d
    if solution_id == "nutku-halil":
        return (make_boundary_datum({"family": "nutku-halil", "axis": "x"}),
                make_boundary_datum({"family": "nutku-halil", "axis": "y"}))
    raise KeyError(f"unknown exact solution {solution_id!r}; known: {IDS}")
