import numpy as np
import pytest
from numpy.testing import assert_allclose

from ernstrh.boundary_data import (ERNST, LINEAR, BoundaryDatum,
                                   DatumConsistencyError, UnknownFamilyError,
                                   corner_data, datum_from_table, load_table,
                                   make_boundary_datum, normalize, validate)

CLOSED_FORM_SPECS = [
    "khan-penrose",
    {"family": "nutku-halil", "axis": "x"},
    {"family": "nutku-halil", "axis": "y"},
    {"family": "collinear-sqrt", "c": 2.0},
    {"family": "collinear-poly", "coeffs": [0.3, -0.1]},
]


class TestFamilies:
    def test_unit(self):
        d = make_boundary_datum("unit")
        assert_allclose(d.value(np.array([0.0, 0.3])), 1.0)
        assert_allclose(d.derivative(np.array([0.2])), 0.0)
        assert corner_data(d).m == 0.0

    def test_khan_penrose_value(self):
        d = make_boundary_datum("khan-penrose")
        assert d.alpha == 0.5
        assert d.kind == ERNST
        assert_allclose(d.value(np.array([0.25])), 3.0, rtol=1e-14)

    def test_nutku_halil_value(self):
        d = make_boundary_datum({"family": "nutku-halil", "axis": "x"})
        s = np.sqrt(0.25)
        assert_allclose(d.value(np.array([0.25])),
                        (1 - 1j * s) / (1 + 1j * s), rtol=1e-14)

    def test_collinear_sqrt(self):
        d = make_boundary_datum({"family": "collinear-sqrt", "c": 2.0})
        assert d.kind == LINEAR
        assert_allclose(d.value(np.array([0.09])), 0.6, rtol=1e-14)

    def test_unknown_family(self):
        with pytest.raises(UnknownFamilyError):
            make_boundary_datum("no-such-family")

    @pytest.mark.parametrize("spec", CLOSED_FORM_SPECS)
    def test_derivative_matches_finite_difference(self, spec):
        d = make_boundary_datum(spec)
        ts = np.linspace(0.05, 0.75, 20)
        h = 1e-6
        fd = (np.asarray(d.value(ts + h)) - np.asarray(d.value(ts - h))) / (2 * h)
        dv = np.asarray(d.derivative(ts))
        assert np.max(np.abs(fd - dv) / np.abs(dv)) < 1e-6

    @pytest.mark.parametrize("spec", CLOSED_FORM_SPECS)
    def test_regular_part_consistency(self, spec):
        d = make_boundary_datum(spec)
        ts = np.linspace(0.01, 0.7, 15)
        assert_allclose(np.asarray(d.regular_part(ts)) * ts ** (-d.alpha),
                        np.asarray(d.derivative(ts)), rtol=1e-12)


class TestCornerData:
    def test_khan_penrose(self):
        assert_allclose(corner_data(make_boundary_datum("khan-penrose")).m,
                        1.0, atol=1e-10)

    def test_nutku_halil(self):
        mx = corner_data(make_boundary_datum({"family": "nutku-halil",
                                              "axis": "x"})).m
        my = corner_data(make_boundary_datum({"family": "nutku-halil",
                                              "axis": "y"})).m
        assert_allclose(mx, -1j, atol=1e-10)
        assert_allclose(my, 1j, atol=1e-10)

    def test_smooth_datum_with_declared_half(self):
        # bounded derivative: sqrt(t) * derivative -> 0
        d = BoundaryDatum(
            value=lambda t: np.exp(1j * np.asarray(t, float)),
            derivative=lambda t: 1j * np.exp(1j * np.asarray(t, float)),
            regular_part=lambda t: np.sqrt(np.asarray(t, float))
            * 1j * np.exp(1j * np.asarray(t, float)),
            alpha=0.5, kind=ERNST, label="smooth")
        assert abs(corner_data(d).m) < 1e-10

    def test_alpha_mismatch_detected(self):
        # derivative ~ t^(-0.8) declared as alpha = 0.3: diverges
        d = BoundaryDatum(
            value=lambda t: 1.0 + 5.0 * np.asarray(t, float) ** 0.2,
            derivative=lambda t: np.asarray(t, float) ** (-0.8),
            regular_part=lambda t: np.asarray(t, float) ** (-0.5),
            alpha=0.3, kind=ERNST, label="mismatch")
        with pytest.raises(DatumConsistencyError):
            corner_data(d)

    def test_table_resampling_invariance(self):
        kp = make_boundary_datum("khan-penrose")
        for n in (24, 48):
            grid = np.linspace(0.0, np.sqrt(0.8), n) ** 2  # corner-refined
            tab = datum_from_table(grid, kp.regular_part(grid), 0.5, ERNST)
            assert_allclose(corner_data(tab).m, 1.0, atol=1e-6)


class TestValidation:
    def test_khan_penrose_passes(self):
        rep = validate(make_boundary_datum("khan-penrose"), 0.2)
        assert rep.ok, [c for c in rep.checks if not c.passed]

    def test_normalization_failure(self):
        d = BoundaryDatum(
            value=lambda t: 2.0 + np.asarray(t, float) + 0j,
            derivative=lambda t: np.ones_like(np.asarray(t, float)) + 0j,
            regular_part=lambda t: np.asarray(t, float) ** 0.5 + 0j,
            alpha=0.5, kind=ERNST, label="shifted")
        rep = validate(d, 0.2)
        assert not rep.ok
        failed = {c.name for c in rep.checks if not c.passed}
        assert "corner-normalization" in failed

    def test_real_part_sign_failure(self):
        # cos(3t) changes sign before t = 0.8
        d = BoundaryDatum(
            value=lambda t: np.exp(3j * np.asarray(t, float)),
            derivative=lambda t: 3j * np.exp(3j * np.asarray(t, float)),
            regular_part=lambda t: np.asarray(t, float) ** 0.5 * 3j
            * np.exp(3j * np.asarray(t, float)),
            alpha=0.5, kind=ERNST, label="rotating")
        rep = validate(d, 0.2)
        failed = {c.name for c in rep.checks if not c.passed}
        assert "positive-real-part" in failed


class TestTable:
    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="at least 8"):
            datum_from_table(np.linspace(0, 0.5, 5), np.ones(5), 0.5)

    def test_load_table_roundtrip(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("t,re,im\n0.0,1.0,0.5\n0.1,1.1,0.4\n0.2,1.3,0.3\n")
        t, reg = load_table(path)
        assert_allclose(t, [0.0, 0.1, 0.2])
        assert_allclose(reg, [1.0 + 0.5j, 1.1 + 0.4j, 1.3 + 0.3j])

    def test_two_column_table(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("t,re\n0.0,1.0\n0.1,1.1\n")
        t, reg = load_table(path)
        assert_allclose(reg, [1.0, 1.1])

    def test_table_value_consistency(self):
        kp = make_boundary_datum("khan-penrose")
        grid = np.linspace(0.0, np.sqrt(0.8), 40) ** 2
        tab = datum_from_table(grid, kp.regular_part(grid), 0.5, ERNST)
        for t in (0.09, 0.3):
            assert abs(complex(tab.value(t)) - complex(kp.value(np.array([t]))[0])) < 2e-4


class TestNormalize:
    def test_rescales_to_unit_corner(self):
        d = BoundaryDatum(
            value=lambda t: (2.0 + 1j) * np.exp(np.asarray(t, float)) - 1j,
            derivative=lambda t: (2.0 + 1j) * np.exp(np.asarray(t, float)),
            regular_part=lambda t: np.asarray(t, float) ** 0.5 * (2.0 + 1j)
            * np.exp(np.asarray(t, float)),
            alpha=0.5, kind=ERNST, label="offset")
        nd = normalize(d)
        assert_allclose(complex(np.asarray(nd.value(np.array([0.0])))[0]), 1.0,
                        atol=1e-14)

    def test_rejects_linear(self):
        with pytest.raises(ValueError):
            normalize(make_boundary_datum({"family": "collinear-sqrt"}))
