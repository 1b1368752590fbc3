import numpy as np
import pytest
from numpy.testing import assert_allclose

from ernstrh import boundary_data_of, get_exact
from ernstrh.boundary_data import ERNST, BoundaryDatum, make_boundary_datum
from ernstrh.diagnostics import (boundary_limit_report,
                                 extrapolated_boundary_limit, gw_admissibility,
                                 pde_residual, predicted_boundary_limit,
                                 small_norm_report)
from ernstrh.rh_solver import ErnstField


def exact_field(solution_id, x0, x1, y0, y1, n):
    ex = get_exact(solution_id)
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    vals = np.array([[complex(ex.evaluate(x, y)) for y in ys] for x in xs])
    zeros = np.zeros((n, n))
    return ErnstField(x=xs, y=ys, values=vals, det_residual=zeros,
                      sym_residual=zeros, cond=zeros,
                      boundary_mask=zeros.astype(bool),
                      jump_det_residual=zeros, jump_sym_residual=zeros,
                      struct_residual=zeros)


class TestPredictedLimit:
    def test_collinear_value(self, kp_data):
        got, flags = predicted_boundary_limit("x=0", 0.25, kp_data)
        assert not flags
        assert_allclose(got, np.sqrt(0.75) / 0.25, rtol=1e-10)

    def test_noncollinear_value(self, nh_data):
        got, _ = predicted_boundary_limit("x=0", 0.25, nh_data)
        expected = 1j * np.sqrt(0.75) / (1j + 0.5) ** 2
        assert_allclose(got, expected, rtol=1e-9)

    def test_unit_data_vanishes(self):
        d = make_boundary_datum("unit")
        got, _ = predicted_boundary_limit("x=0", 0.3, (d, d))
        assert abs(got) < 1e-12

    def test_alpha_zero_flagged(self):
        d = BoundaryDatum(
            value=lambda t: 1.0 + np.asarray(t, float) + 0j,
            derivative=lambda t: np.ones_like(np.asarray(t, float)) + 0j,
            regular_part=lambda t: np.ones_like(np.asarray(t, float)) + 0j,
            alpha=0.0, kind=ERNST, label="alpha0")
        _, flags = predicted_boundary_limit("x=0", 0.2, (d, d))
        assert "alpha-zero-unsupported" in flags

    def test_mirrored_edge(self, nh_data):
        got_x, _ = predicted_boundary_limit("x=0", 0.3, nh_data)
        got_y, _ = predicted_boundary_limit("y=0", 0.3, nh_data)
        # the mirrored datum pair carries the conjugate corner coefficient
        assert_allclose(got_y, np.conj(got_x), rtol=1e-9)


class TestExtrapolatedLimit:
    @pytest.mark.parametrize("name,y", [("khan-penrose", 0.25),
                                        ("nutku-halil", 0.5)])
    def test_against_closed_form_field(self, name, y):
        ex = get_exact(name)
        data = boundary_data_of(name)
        got, flags = extrapolated_boundary_limit(
            "x=0", y, lambda x, yy: complex(ex.evaluate(x, yy)), 0.5)
        pred, _ = predicted_boundary_limit("x=0", y, data)
        assert abs(got - pred) < 1e-3
        assert not flags

    def test_modulus_form(self, nh_data):
        ex = get_exact("nutku-halil")
        y = 0.3
        got, _ = extrapolated_boundary_limit(
            "x=0", y, lambda x, yy: complex(ex.evaluate(x, yy)), 0.5)
        re_e1 = float(np.real(nh_data[1].value(np.array([y]))[0]))
        assert_allclose(abs(got), re_e1 / np.sqrt(1.0 - y), rtol=1e-5)

    def test_report(self, kp_data):
        ex = get_exact("khan-penrose")
        rep = boundary_limit_report(
            "x=0", 0.3, kp_data, lambda x, y: complex(ex.evaluate(x, y)))
        assert rep.abs_error < 1e-3
        assert rep.edge == "x=0" and rep.coordinate == 0.3


class TestAdmissibility:
    def test_collinear_exact_solution(self, kp_data):
        rep = gw_admissibility(*kp_data)
        assert rep.admissible
        assert_allclose([rep.k1, rep.k2], 0.5, atol=1e-9)

    def test_noncollinear_exact_solution(self, nh_data):
        rep = gw_admissibility(*nh_data)
        assert rep.admissible
        assert_allclose([rep.k1, rep.k2], 0.5, atol=1e-9)
        assert_allclose(rep.m1, -1j, atol=1e-9)
        assert_allclose(rep.m2, 1j, atol=1e-9)

    def test_unit_data_inadmissible(self):
        d = make_boundary_datum("unit")
        rep = gw_admissibility(d, d)
        assert not rep.admissible

    def test_large_corner_inadmissible(self):
        d = make_boundary_datum({"family": "collinear-sqrt", "c": 3.0})
        rep = gw_admissibility(d, d)
        assert not rep.admissible
        assert abs(abs(rep.m1) - 1.5) < 1e-9

    def test_wrong_alpha_inadmissible(self):
        d = make_boundary_datum({"family": "collinear-poly",
                                 "coeffs": [1.0], "alpha": 0.3})
        assert not gw_admissibility(d, d).admissible

    def test_phase_invariance(self, nh_data, kp_data):
        # same moduli, different phases: same verdict and constants
        ra = gw_admissibility(*kp_data)
        rb = gw_admissibility(*nh_data)
        assert ra.admissible == rb.admissible
        assert_allclose([ra.k1, ra.k2], [rb.k1, rb.k2], atol=1e-9)


class TestPdeResidual:
    def test_constant_field_zero(self):
        n = 5
        fld = exact_field("khan-penrose", 0.2, 0.3, 0.2, 0.3, n)
        fld.values = np.ones_like(fld.values)
        rep = pde_residual(fld)
        assert rep.max_norm == 0.0

    @pytest.mark.parametrize("name", ["khan-penrose", "nutku-halil"])
    def test_second_order_on_closed_form(self, name):
        # residual at a fixed stencil center: clean h^2 decay (4x per halving)
        maxes = []
        for h in (1.0 / 16, 1.0 / 32, 1.0 / 64):
            fld = exact_field(name, 0.25 - h, 0.25 + h, 0.25 - h, 0.25 + h, 3)
            maxes.append(pde_residual(fld).max_norm)
        orders = np.log2(np.array(maxes[:-1]) / np.array(maxes[1:]))
        assert np.all(orders > 1.9)

    def test_rejects_nonuniform(self):
        fld = exact_field("khan-penrose", 0.1, 0.3, 0.1, 0.3, 7)
        fld.x = fld.x ** 1.5
        with pytest.raises(ValueError):
            pde_residual(fld)


class TestSmallNorm:
    def test_identity_jump(self, contours64):
        from ernstrh.cauchy import build_cw
        from ernstrh.rh_solver import assemble_jump
        d = make_boundary_datum("unit")
        jump = assemble_jump(0.3, 0.3, d, d, contours64)
        op = build_cw(jump, contours64)
        rep = small_norm_report(jump, op)
        assert rep.certificate
        assert rep.w_inf == 0.0
        assert rep.condition_number == pytest.approx(1.0)

    def test_scaled_data_norm_decreases(self, contours64):
        from ernstrh.cauchy import build_cw
        from ernstrh.rh_solver import assemble_jump

        def scaled_pair(c):
            # E = exp(-c 2 sqrt(t)): collinear family shrinking to unit data
            def value(t):
                return np.exp(-2.0 * c * np.sqrt(np.asarray(t, float))) + 0j

            def derivative(t):
                t = np.asarray(t, float)
                return -c / np.sqrt(t) * np.exp(-2.0 * c * np.sqrt(t)) + 0j

            def regular_part(t):
                t = np.asarray(t, float)
                return -c * np.exp(-2.0 * c * np.sqrt(t)) + 0j

            d = BoundaryDatum(value, derivative, regular_part, 0.5, ERNST,
                              f"exp-sqrt[{c}]")
            return d, d

        norms = []
        for c in (0.4, 0.2, 0.1, 0.05):
            pair = scaled_pair(c)
            jump = assemble_jump(0.3, 0.2, pair[0], pair[1], contours64)
            norms.append(build_cw(jump, contours64).w_inf)
        assert all(b < a for a, b in zip(norms, norms[1:]))

    def test_khan_penrose_report_fields(self, kp_data):
        from ernstrh.cauchy import build_cw
        from ernstrh.geometry import build_contour_system
        from ernstrh.rh_solver import assemble_jump
        cs = build_contour_system(0.1, 64)
        jump = assemble_jump(0.45, 0.45, kp_data[0], kp_data[1], cs)
        op = build_cw(jump, cs)
        rep = small_norm_report(jump, op)
        assert np.isfinite(rep.condition_number)
        assert rep.bound == pytest.approx(rep.cminus_norm * rep.w_inf)
