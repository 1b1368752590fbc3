#!/usr/bin/env python3
"""Edge-singularity study: predicted versus extrapolated derivative limits.

For each exact-solution data pair, compares the data-side prediction of
lim x^(1/2) E_x(x, y) with a Richardson extrapolation of interior solves,
across a ladder of y values.
"""

import argparse

from ernstrh import boundary_data_of, geometry
from ernstrh.diagnostics import boundary_limit_report
from ernstrh.rh_solver import solve_rh_point


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--nodes", type=int, default=96)
    ap.add_argument("--coordinates", type=str, default="0.1,0.2,0.3,0.4,0.5")
    args = ap.parse_args()
    ys = [float(v) for v in args.coordinates.split(",")]
    cs = geometry.build_contour_system(args.delta, args.nodes)

    for name in ("khan-penrose", "nutku-halil"):
        data = boundary_data_of(name)

        def solver(x, y, data=data):
            return solve_rh_point(x, y, data, cs,
                                  with_symmetry_check=False).ernst

        print(f"\n{name}: lim x^0.5 E_x at the edge x = 0")
        print(f"{'y':>5s} {'predicted':>24s} {'extrapolated':>24s} {'|diff|':>10s}")
        for y in ys:
            rep = boundary_limit_report("x=0", y, data, solver)
            flag = " " + ",".join(rep.flags) if rep.flags else ""
            print(f"{y:5.2f} {rep.predicted:24.12g} {rep.extrapolated:24.12g} "
                  f"{rep.abs_error:10.2e}{flag}")


if __name__ == "__main__":
    main()
