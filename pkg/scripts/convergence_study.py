#!/usr/bin/env python3
"""Error versus node count for the two closed-form fields.

Solves one point per resolution and prints the error against the closed
form, demonstrating the spectral convergence of the loop discretization.
"""

import argparse

from ernstrh import boundary_data_of, evaluate_exact, geometry
from ernstrh.rh_solver import solve_rh_point


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--point", type=str, default="0.25,0.25")
    ap.add_argument("--nodes", type=str, default="24,32,48,64,96,128")
    args = ap.parse_args()
    x, y = (float(v) for v in args.point.split(","))
    ns = [int(v) for v in args.nodes.split(",")]

    for name in ("khan-penrose", "nutku-halil"):
        data = boundary_data_of(name)
        exact = evaluate_exact(name, x, y)
        print(f"\n{name} at ({x}, {y});  exact E = {exact:.15g}")
        print(f"{'N':>5s} {'error':>12s} {'cond':>10s} {'sym resid':>11s}")
        for n in ns:
            cs = geometry.build_contour_system(args.delta, n)
            sol = solve_rh_point(x, y, data, cs)
            print(f"{n:5d} {abs(sol.ernst - exact):12.3e} "
                  f"{sol.diagnostics.condition_number:10.2f} "
                  f"{sol.diagnostics.symmetry_residual:11.2e}")


if __name__ == "__main__":
    main()
