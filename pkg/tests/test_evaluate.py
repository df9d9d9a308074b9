"""Coordinates, pointwise evaluation, normalization, density grids and the PDE oracle."""

import csv
import math
import warnings
from dataclasses import replace
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twocenter.errors import FocalSegmentWarning, NormalizationDivergence
from twocenter.evaluate import (
    EllipticPoint,
    cartesian_to_elliptic,
    density_grid,
    density_integral,
    density_integral_cartesian,
    elliptic_parts,
    elliptic_to_cartesian,
    evaluate_psi,
    mp_psi,
    normalize,
    pde_residual,
    residual_at,
    sample_points,
)
from twocenter.matching import find_elementary_solutions
from twocenter.separation import CenterPair


@pytest.fixture(scope="module")
def z51():
    return find_elementary_solutions(CenterPair(5, 1))


@pytest.fixture(scope="module")
def first(z51):
    return z51[0]


@pytest.fixture(scope="module")
def second(z51):
    return next(s for s in z51 if s.R == Fraction(3, 16))


def focal_point(R, xi, eta, lower=False):
    x1 = R / 2 * xi * eta
    x2 = R / 2 * math.sqrt(xi * xi - 1) * math.sqrt(1 - eta * eta)
    return x1, -x2 if lower else x2


class TestCoordinates:
    def test_center_positions(self):
        p1 = cartesian_to_elliptic(1.0 + 1e-12, 1e-9, 2.0)
        # center 1 sits at +R/2, where eta = +1
        assert (p1.xi, p1.eta) == pytest.approx((1.0, 1.0), abs=1e-8)
        p2 = cartesian_to_elliptic(-1.0, 1e-9, 2.0)
        assert p2.eta == pytest.approx(-1.0, abs=1e-8)

    def test_focal_segment_warns(self):
        with pytest.warns(FocalSegmentWarning):
            pt = cartesian_to_elliptic(0.3, 0.0, 2.0)
        assert pt.xi == 1.0
        assert pt.eta == pytest.approx(0.3)

    def test_off_segment_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            cartesian_to_elliptic(0.3, 0.5, 2.0)

    def test_known_point(self):
        # x = (0, sqrt(3)), R = 2: r1 = r2 = 2, xi = 2, eta = 0
        pt = cartesian_to_elliptic(0.0, math.sqrt(3), 2.0)
        assert (pt.xi, pt.eta, pt.nu) == pytest.approx((2.0, 0.0, math.pi / 2), abs=1e-15)

    def test_sheets(self):
        up = cartesian_to_elliptic(0.4, 0.7, 1.0)
        down = cartesian_to_elliptic(0.4, -0.7, 1.0)
        assert (up.sheet, down.sheet) == ("upper", "lower")
        assert down.nu == pytest.approx(-up.nu)

    def test_bad_R(self):
        with pytest.raises(ValueError):
            cartesian_to_elliptic(0.0, 1.0, 0.0)

    def test_round_trip_many_points(self):
        rng = np.random.default_rng(11)
        for R, x1, x2 in zip(rng.uniform(0.1, 5, 1000), rng.uniform(-8, 8, 1000), rng.uniform(-8, 8, 1000)):
            pt = cartesian_to_elliptic(x1, x2, R)
            back = elliptic_to_cartesian(pt, R)
            assert back == pytest.approx((x1, x2), abs=1e-12 * max(1.0, abs(x1), abs(x2), R))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1.0001, 50.0), st.floats(-math.pi, math.pi), st.floats(0.05, 10.0))
    def test_nu_round_trip(self, xi, nu, R):
        pt = EllipticPoint.from_nu(xi, nu)
        x1, x2 = elliptic_to_cartesian(pt, R)
        parts = elliptic_parts(x1, x2, R)
        assert float(parts.xi) == pytest.approx(xi, rel=1e-9)
        assert float(parts.nu) == pytest.approx(nu, abs=1e-7)

    def test_stable_parts_near_centers(self):
        R = 0.375
        x1, x2 = R / 2 + 1e-9, 1e-9
        parts = elliptic_parts(x1, x2, R)
        with mpmath.workdps(40):
            r1 = mpmath.hypot(mpmath.mpf(x1) - mpmath.mpf(R) / 2, x2)
            r2 = mpmath.hypot(mpmath.mpf(x1) + mpmath.mpf(R) / 2, x2)
            xi_m1 = float((r1 + r2) / R - 1)
            one_p = float(1 + (r2 - r1) / R)
            one_m = float(1 - (r2 - r1) / R)
        assert float(parts.xi_m1) == pytest.approx(xi_m1, rel=1e-10)
        assert float(parts.one_m_eta) == pytest.approx(one_m, rel=1e-10)
        assert float(parts.one_p_eta) == pytest.approx(one_p, rel=1e-12)


class TestPointwise:
    def test_first_example_closed_form(self, first):
        R = 0.375
        for xi, eta in [(1.5, 0.2), (3.0, -0.7), (1.1, 0.95)]:
            x1, x2 = focal_point(R, xi, eta)
            expected = math.sqrt(xi * xi - 1) * math.sqrt(1 - eta) * math.exp(-3 * (xi - eta) / 4)
            ratio = evaluate_psi(first, x1, x2, normalized=False) / expected
            assert ratio == pytest.approx(evaluate_psi(first, *focal_point(R, 2.0, 0.0), normalized=False)
                                          / (math.sqrt(3) * math.exp(-1.5)), rel=1e-12)

    def test_second_example_polynomials(self, second):
        R = 3 / 16
        base_xi, base_eta = 2.0, 0.5

        def closed(xi, eta):
            # sqrt(xi - 1) sqrt(1 - eta) (eta + 1/3)(xi^2 - 10 xi - 7) exp(-3 (xi - eta) / 16)
            return (math.sqrt(xi - 1) * math.sqrt(1 - eta) * (eta + 1 / 3) * (xi * xi - 10 * xi - 7)
                    * math.exp(-3 * (xi - eta) / 16))

        ref = evaluate_psi(second, *focal_point(R, base_xi, base_eta), normalized=False) / closed(base_xi, base_eta)
        for xi, eta in [(1.5, 0.2), (4.0, -0.7), (11.0, 0.9), (7.0, 0.0)]:
            got = evaluate_psi(second, *focal_point(R, xi, eta), normalized=False)
            assert got == pytest.approx(ref * closed(xi, eta), rel=1e-12)

    def test_angular_node(self, second):
        R = 3 / 16
        assert evaluate_psi(second, *focal_point(R, 3.0, -1 / 3)) == pytest.approx(0.0, abs=1e-14)

    def test_mp_evaluator_agrees(self, z51):
        rng = np.random.default_rng(5)
        for sol in z51:
            R = float(sol.R)
            x1, x2 = rng.uniform(-2 * R, 2 * R, 20), rng.uniform(0.02 * R, 2 * R, 20)
            fast = evaluate_psi(sol, x1, x2, normalized=False)
            psi = mp_psi(sol)
            with mpmath.workdps(30):
                slow = np.array([float(psi(mpmath.mpf(a), mpmath.mpf(b))) for a, b in zip(x1, x2)])
            np.testing.assert_allclose(fast, slow, rtol=1e-11, atol=1e-13 * np.abs(slow).max())


class TestNormalization:
    def test_elliptic_vs_cartesian(self, z51):
        for sol in z51:
            a = density_integral(sol)
            b = density_integral_cartesian(sol)
            assert a == pytest.approx(b, rel=1e-6)

    def test_scaling(self, first):
        n1 = normalize(first)
        doubled = replace(first, radial=replace(first.radial, poly=replace(
            first.radial.poly, coeffs=tuple(2 * c for c in first.radial.poly.coeffs))))
        assert normalize(doubled) == pytest.approx(n1 / 2, rel=1e-12)

    def test_stored_normalization(self, z51):
        for sol in z51:
            assert sol.normalization == pytest.approx(normalize(sol), rel=1e-12)

    def test_growing_factor_rejected(self, first):
        rad = first.radial
        flipped = replace(first, radial=replace(rad, epsilon=-rad.epsilon))
        with pytest.raises(NormalizationDivergence):
            density_integral(flipped)


class TestDensity:
    def test_first_example_grid(self, first):
        grid = density_grid(first, nx=121, ny=121)
        assert grid.values.min() >= 0
        total = grid.values.sum() * grid.cell_area
        assert total <= 1 + 1e-2
        assert total == pytest.approx(1.0, rel=5e-2)
        i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        # the maximum is off the axis, on the side of the larger charge, as a mirror pair
        assert grid.x1[i] > 0 and abs(grid.x2[j]) > 0.1 * float(first.R)

    def test_density_mirror_symmetric_in_x2(self, first):
        grid = density_grid(first, nx=41, ny=41)
        np.testing.assert_allclose(grid.values, grid.values[:, ::-1], rtol=1e-12, atol=1e-300)

    def test_far_field_negligible(self, first):
        grid = density_grid(first, window=(40, 41, 40, 41), nx=3, ny=3)
        assert grid.values.max() < 1e-15

    def test_csv(self, first, tmp_path):
        path = tmp_path / "rho.csv"
        density_grid(first, window=(-1, 1, -0.5, 0.5), nx=5, ny=3).write_csv(path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["x1", "x2", "rho"]
        assert len(rows) == 1 + 15
        assert [float(v) for v in rows[1][:2]] == [-1.0, -0.5]
        assert [float(v) for v in rows[2][:2]] == [-1.0, 0.0]

    @pytest.mark.parametrize("kw", [{"nx": 1}, {"window": (1, 0, 0, 1)}])
    def test_bad_grid(self, first, kw):
        with pytest.raises(ValueError):
            density_grid(first, **kw)


class TestResidualOracle:
    @pytest.mark.parametrize("Z", [1.0, 2.5])
    def test_planar_hydrogen(self, Z):
        def psi(x1, x2):
            return mpmath.exp(-2 * Z * mpmath.hypot(x1, x2))

        pts = np.random.default_rng(2).uniform(-2, 2, (2, 50))
        assert residual_at(psi, [(0, 0, Z)], -2 * Z * Z, *pts).max() < 1e-6

    def test_hydrogen_wrong_energy(self):
        def psi(x1, x2):
            return mpmath.exp(-2 * mpmath.hypot(x1, x2))

        assert residual_at(psi, [(0, 0, 1)], -1.9, [0.3], [0.4]).max() > 1e-2

    def test_elementary_solutions(self, z51):
        for sol in z51:
            assert pde_residual(sol, sample_count=60) < 1e-6

    def test_perturbed_energy_detected(self, first):
        assert pde_residual(first, sample_count=30, energy=-8.001) > 1e-5

    def test_sample_points_deterministic(self, first):
        a = sample_points(first, 50, seed=4)
        b = sample_points(first, 50, seed=4)
        np.testing.assert_array_equal(a[0], b[0])
        assert np.all(np.abs(a[1]) > 1e-2 * 0.375)
