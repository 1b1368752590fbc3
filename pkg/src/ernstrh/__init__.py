"""Goursat solver for the hyperbolic Ernst equation via a Riemann-Hilbert
representation: Volterra eigenfunctions from characteristic boundary data,
a discretized singular-integral solve on a fixed loop pair, field recovery,
the collinear (Euler-Darboux) fast path, and boundary-singularity
diagnostics."""

from .boundary_data import (BoundaryDatum, CornerData, corner_data,
                            make_boundary_datum, normalize, validate)
from .exact_solutions import boundary_data_of, evaluate_exact, get_exact
from .geometry import (ContourSystem, SpectralPoint, branch_cut_images,
                       build_contour_system, from_sphere, lam, to_sphere)
from .rh_solver import (ErnstField, GridConfig, RHSolution, assemble_jump,
                        boundary_row_solution, recover_ernst, solve_grid,
                        solve_rh_point)

__all__ = [
    "BoundaryDatum", "ContourSystem", "CornerData", "ErnstField",
    "GridConfig", "RHSolution", "SpectralPoint", "assemble_jump",
    "boundary_data_of", "boundary_row_solution", "branch_cut_images",
    "build_contour_system", "corner_data", "evaluate_exact", "from_sphere",
    "get_exact", "lam", "make_boundary_datum", "normalize", "recover_ernst",
    "solve_grid", "solve_rh_point", "to_sphere", "validate",
]

__version__ = "0.1.0"
