import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ernstrh import geometry
from ernstrh.geometry import (BranchCutError, ConfigurationError,
                              PoleAtBranchPoint, SheetAmbiguityError,
                              SpectralPoint, branch_cut_images,
                              build_contour_system, containment_margin,
                              from_sphere, lam, to_sphere)


class TestLambda:
    def test_normalization_at_infinity(self):
        assert lam(0.3, 0.2, SpectralPoint.at_infinity(geometry.UPPER)) == 1.0
        assert lam(0.3, 0.2, SpectralPoint.at_infinity(geometry.LOWER)) == -1.0

    def test_zero_at_second_branch_point(self):
        x, y = 0.3, 0.2
        for sheet in (geometry.UPPER, geometry.LOWER):
            assert lam(x, y, SpectralPoint.finite(1 - y, sheet)) == 0.0

    def test_direct_value(self):
        # sqrt((2-1)/2) at the origin of the triangle
        val = lam(0.0, 0.0, SpectralPoint.finite(2.0))
        assert_allclose(val, np.sqrt(0.5), rtol=1e-15)

    def test_sheet_antisymmetry_and_conjugation(self, rng):
        x, y = 0.3, 0.25
        for _ in range(20):
            k = complex(rng.uniform(-2, 3), rng.uniform(0.1, 2) * rng.choice([-1, 1]))
            up = lam(x, y, SpectralPoint.finite(k, geometry.UPPER))
            lo = lam(x, y, SpectralPoint.finite(k, geometry.LOWER))
            assert_allclose(up, -lo, rtol=1e-15)
            assert up.real > 0
            conj = lam(x, y, SpectralPoint.finite(np.conj(k), geometry.UPPER))
            assert_allclose(conj, np.conj(up), rtol=1e-14)

    def test_branch_cut_rejected(self):
        with pytest.raises(BranchCutError):
            lam(0.2, 0.3, SpectralPoint.finite(0.4))

    def test_pole_at_branch_point(self):
        with pytest.raises(PoleAtBranchPoint):
            lam(0.2, 0.3, SpectralPoint.finite(0.2))


class TestSphereMap:
    def test_special_points(self):
        x, y = 0.3, 0.2
        assert to_sphere(x, y, SpectralPoint.at_infinity(geometry.LOWER)) == 0.0
        # branch points are sent to -1 and +1
        assert to_sphere(x, y, SpectralPoint.finite(x)) == -1.0
        assert to_sphere(x, y, SpectralPoint.finite(1 - y)) == 1.0

    def test_from_sphere_special(self):
        p = from_sphere(0.3, 0.2, 0.0)
        assert p.infinite and p.sheet == geometry.LOWER

    def test_projection_value(self):
        p = from_sphere(0.25, 0.25, 3.0)
        assert_allclose(p.k, 11.0 / 12.0, rtol=1e-15)
        assert p.sheet == geometry.UPPER
        assert not (0.25 <= p.k.real <= 0.75 and p.k.imag == 0)

    def test_unit_circle_ambiguity(self):
        with pytest.raises(SheetAmbiguityError):
            from_sphere(0.3, 0.2, np.exp(0.7j))

    @settings(max_examples=100, deadline=None)
    @given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=50,
                              allow_nan=False, allow_infinity=False))
    def test_round_trip(self, z):
        x, y = 0.3, 0.25
        if abs(abs(z) - 1.0) < 1e-3:
            return
        p = from_sphere(x, y, z)
        assert_allclose(to_sphere(x, y, p), z, rtol=1e-12, atol=1e-12)

    def test_round_trip_many_points(self, rng):
        for x, y in [(0.1, 0.1), (0.4, 0.3), (0.05, 0.7)]:
            z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100)
            z = z[np.abs(np.abs(z) - 1) > 1e-2]
            z = z[np.abs(z) > 1e-2]
            for zz in z:
                assert abs(to_sphere(x, y, from_sphere(x, y, zz)) - zz) < 1e-12 * max(1, abs(zz))

    def test_k_derivatives(self):
        z = 2.0 + 1.5j
        dkx, dky = geometry.k_derivatives(z)
        assert_allclose(dkx, -(z - 1) ** 2 / (4 * z), rtol=1e-15)
        assert_allclose(dky, -(z + 1) ** 2 / (4 * z), rtol=1e-15)


class TestBranchCutImages:
    def test_degenerate_at_origin(self):
        i0, i1 = branch_cut_images(0.0, 0.0)
        assert i0 == (-1.0, -1.0)
        assert i1 == (1.0, 1.0)

    def test_quarter_point(self):
        i0, _ = branch_cut_images(0.25, 0.25)
        assert_allclose(i0, (-(2 + np.sqrt(3)), -(2 - np.sqrt(3))), rtol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.01, 0.9), st.floats(0.01, 0.9))
    def test_endpoint_product(self, x, y):
        if x + y >= 0.99:
            return
        i0, i1 = branch_cut_images(x, y)
        assert_allclose(abs(i0[0]) * abs(i0[1]), 1.0, rtol=1e-12)
        assert_allclose(abs(i1[0]) * abs(i1[1]), 1.0, rtol=1e-12)

    def test_continuity_toward_corner(self):
        prev_gap = None
        for s in [0.1, 0.03, 0.01, 0.003]:
            i0, i1 = branch_cut_images(s, s)
            gap = max(abs(i0[0] + 1), abs(i0[1] + 1), abs(i1[0] - 1), abs(i1[1] - 1))
            if prev_gap is not None:
                assert gap < prev_gap
            prev_gap = gap
        assert prev_gap < 0.15

    def test_outside_domain(self):
        with pytest.raises(ValueError):
            branch_cut_images(0.6, 0.5)


class TestContourSystem:
    def test_epsilon_value(self):
        cs = build_contour_system(0.2, 64)
        unscaled = (1 - np.sqrt(0.8)) / (1 + np.sqrt(0.8))
        assert_allclose(unscaled, 0.05573, rtol=1e-3)
        assert_allclose(cs.epsilon, 0.5 * unscaled, rtol=1e-12)

    def test_loops_clockwise_and_avoid_origin(self, contours64):
        # +-1 are the log-scale centers of the enclosed segments
        for loop, inside in zip(contours64.loops, (-1.0, 1.0)):
            winding = np.sum(loop.weights / (loop.nodes - inside)) / (2j * np.pi)
            assert_allclose(winding, -1.0, atol=1e-10)
            winding0 = np.sum(loop.weights / loop.nodes) / (2j * np.pi)
            assert_allclose(winding0, 0.0, atol=1e-10)

    def test_nodes_closed_under_symmetries(self, contours64):
        def set_gap(a, b):
            return np.max(np.min(np.abs(a[:, None] - b[None, :]), axis=1)
                          / np.maximum(1.0, np.abs(a)))

        for loop in contours64.loops:
            nodes = loop.nodes
            assert set_gap(np.conj(nodes), nodes) < 1e-13
            assert set_gap(1.0 / nodes, nodes) < 1e-13

    def test_loops_disjoint_half_planes(self, contours64):
        assert np.all(contours64.loops[0].nodes.real < 0)
        assert np.all(contours64.loops[1].nodes.real > 0)

    def test_containment_interior_point(self, contours64):
        i0, i1 = branch_cut_images(0.4, 0.4)
        lo = np.log(contours64.epsilon)
        assert lo < np.log(abs(i0[1])) and np.log(abs(i0[0])) < -lo
        assert lo < np.log(i1[0]) and np.log(i1[1]) < -lo

    def test_containment_margin_on_boundary(self, contours64):
        delta = contours64.delta
        eps = contours64.epsilon
        ts = np.linspace(0.0, 1.0, 25)
        worst = np.inf
        for t in ts:
            for x, y in [(t * (1 - delta), (1 - t) * (1 - delta)),
                         (t * (1 - delta), 0.0), (0.0, t * (1 - delta))]:
                worst = min(worst, containment_margin(contours64, x, y))
        assert worst >= eps / 2

    def test_cauchy_of_one_inside_loop(self, contours64):
        # clockwise winding: the transform of density 1 is -1 inside
        loop = contours64.loops[1]
        z0 = np.exp(0.3)  # on the enclosed real segment
        val = np.sum(loop.weights / (loop.nodes - z0)) / (2j * np.pi)
        assert_allclose(val, -1.0, atol=1e-9)

    def test_configuration_errors(self):
        with pytest.raises(ConfigurationError):
            build_contour_system(0.2, 15)
        with pytest.raises(ConfigurationError):
            build_contour_system(0.2, 17)
        with pytest.raises(ConfigurationError):
            build_contour_system(1.5, 64)
        with pytest.raises(ConfigurationError):
            build_contour_system(0.02, 16)  # too few nodes for a deep loop
