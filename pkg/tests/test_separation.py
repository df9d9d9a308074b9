"""Separated radial and angular factors for two Coulomb centers."""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twocenter.errors import BranchOutOfRange, DomainError, SymmetricCaseError
from twocenter.heun import build_recurrence, find_q_roots
from twocenter.separation import (
    TYPES,
    CenterPair,
    angular_energy,
    assemble_factor,
    build_angular_cheq,
    build_cheq,
    build_radial_cheq,
    lambda_closed_form,
    lambda_curve,
    lambda_general,
    lambda_value,
    ode_residual,
    radial_energy,
)

Z51 = CenterPair(5, 1)


class TestEnergies:
    def test_first_example_energy(self):
        assert radial_energy("b", 0, Z51) == -8
        assert angular_energy("d", 0, Z51) == -8

    def test_second_example_energy(self):
        assert radial_energy("d", 2, Z51) == -2
        assert angular_energy("d", 1, Z51) == -2

    @pytest.mark.parametrize("tag", ["a", "b"])
    @pytest.mark.parametrize("level", range(5))
    def test_hydrogenic_odd_denominators(self, tag, level):
        E = radial_energy(tag, level, CenterPair(2, 1))
        m = 2 * level + (1 if tag == "a" else 3)
        assert E == Fraction(-2 * 9, m * m)
        assert m % 2 == 1

    @pytest.mark.parametrize("tag", ["c", "d"])
    def test_quasi_hydrogenic_even_denominators(self, tag):
        for level in range(5):
            E = radial_energy(tag, level, CenterPair(2, 1))
            assert E == Fraction(-18, (2 * level + 2) ** 2)

    def test_angular_energy_symmetric_raises(self):
        with pytest.raises(SymmetricCaseError):
            angular_energy("a", 0, CenterPair(3, 3))

    def test_energy_independent_of_R(self):
        assert radial_energy("c", 1, Z51.with_R(1)) == radial_energy("c", 1, Z51.with_R(7))


class TestCHEqConstruction:
    def test_epsilon_values(self):
        at = Z51.with_R(Fraction(3, 8))
        assert build_radial_cheq("b", 0, at).epsilon == -3
        assert build_angular_cheq("d", 0, at).epsilon == 3

    @pytest.mark.parametrize("tag", sorted(TYPES))
    def test_epsilon_linear_in_R(self, tag):
        e1 = build_cheq("radial", tag, 2, Z51.with_R(1)).epsilon
        e3 = build_cheq("radial", tag, 2, Z51.with_R(3)).epsilon
        assert e3 == 3 * e1

    def test_exponents_follow_type(self):
        p = build_radial_cheq("c", 1, Z51.with_R(1))
        assert (p.gamma, p.delta) == (Fraction(3, 2), Fraction(1, 2))

    def test_symmetric_angular_construction_refused(self):
        with pytest.raises(SymmetricCaseError):
            build_angular_cheq("a", 1, CenterPair(3, 3, 1))

    def test_symmetric_angular_scan_refused(self):
        with pytest.raises(SymmetricCaseError):
            lambda_curve("angular", "a", 1, CenterPair(3, 3), [0.5, 1.0])

    def test_R_required(self):
        with pytest.raises(ValueError):
            build_radial_cheq("a", 0, Z51)

    @pytest.mark.parametrize("Z", [(0, 1), (1, -2)])
    def test_bad_charges(self, Z):
        with pytest.raises(ValueError):
            CenterPair(*Z)


class TestSeparationConstant:
    def test_first_example_exact(self):
        at = Z51.with_R(Fraction(3, 8))
        assert lambda_value("radial", "b", 0, 1, at) == Fraction(-7, 16)
        assert lambda_value("angular", "d", 0, 1, at) == Fraction(-7, 16)

    def test_second_example_exact(self):
        at = Z51.with_R(Fraction(3, 16))
        assert lambda_value("radial", "d", 2, 2, at) == Fraction(-583, 256)
        assert lambda_value("angular", "d", 1, 2, at) == Fraction(-583, 256)

    def test_branch_out_of_range(self):
        with pytest.raises(BranchOutOfRange):
            lambda_value("radial", "a", 1, 3, Z51.with_R(1))

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from(sorted(TYPES)), st.integers(0, 4), st.sampled_from(["radial", "angular"]),
           st.floats(0.01, 20.0), st.sampled_from([(5, 1), (2, 1), (1, 3), (Fraction(3, 2), Fraction(1, 2))]))
    def test_table_matches_general_form(self, tag, level, kind, R, Z):
        at = CenterPair(*Z, R)
        params = build_cheq(kind, tag, level, at)
        for root in find_q_roots(build_recurrence(params)):
            table = float(lambda_closed_form(kind, tag, level, at, root.q))
            general = float(lambda_general(params, root.q))
            assert table == pytest.approx(general, rel=1e-12, abs=1e-12 * (1 + abs(root.q)))

    def test_curve_matches_pointwise(self):
        grid = np.array([0.1, 0.7, 2.5])
        curve = lambda_curve("radial", "c", 2, Z51, grid)
        for i, R in enumerate(grid):
            for j in range(3):
                assert curve[i, j] == pytest.approx(float(lambda_value("radial", "c", 2, j + 1, Z51.with_R(R))),
                                                    rel=1e-10)


class TestFactors:
    def test_first_example_radial_value(self):
        F = assemble_factor("radial", "b", 0, 1, Z51.with_R(Fraction(3, 8)))
        assert F(2.0) == pytest.approx(math.sqrt(3) * math.exp(-1.5), rel=1e-15)

    def test_first_example_angular_value(self):
        G = assemble_factor("angular", "d", 0, 1, Z51.with_R(Fraction(3, 8)))
        assert G(0.2) == pytest.approx(math.sqrt(0.8) * math.exp(0.15), rel=1e-15)

    def test_second_example_polynomials(self):
        at = Z51.with_R(Fraction(3, 16))
        F = assemble_factor("radial", "d", 2, 2, at)
        G = assemble_factor("angular", "d", 1, 2, at)
        assert F.poly.monic() == [-7, -10, 1]
        assert G.poly.monic() == [Fraction(1, 3), 1]
        assert F.rate == Fraction(-3, 16)
        assert G.rate == Fraction(3, 16)

    @pytest.mark.parametrize("tag", sorted(TYPES))
    def test_prefactor_powers(self, tag):
        F = assemble_factor("radial", tag, 0, 1, Z51.with_R(1))
        st_ = TYPES[tag]
        assert F.plus_power == (2 * st_.gamma - 1) / 4
        assert F.minus_power == (2 * st_.delta - 1) / 4

    def test_domain_errors(self):
        at = Z51.with_R(1)
        with pytest.raises(DomainError):
            assemble_factor("radial", "a", 1, 1, at)(0.5)
        with pytest.raises(DomainError):
            assemble_factor("angular", "a", 1, 1, at)(1.5)

    @pytest.mark.parametrize("kind", ["radial", "angular"])
    @pytest.mark.parametrize("tag", sorted(TYPES))
    @pytest.mark.parametrize("level", [0, 1, 2, 3])
    def test_ode_residual(self, kind, tag, level):
        R = 0.83
        at = Z51.with_R(R)
        charge = float(at.charge(kind))
        x = np.linspace(1.05, 10.0, 20) if kind == "radial" else np.linspace(-0.97, 0.97, 20)
        for branch in range(1, level + 2):
            sol = assemble_factor(kind, tag, level, branch, at)
            assert ode_residual(sol, x, R, charge).max() < 1e-10

    def test_ode_residual_detects_wrong_lambda(self):
        at = Z51.with_R(0.83)
        sol = assemble_factor("radial", "a", 1, 1, at)
        bad = replace(sol, lam=float(sol.lam) + 1e-3)
        assert ode_residual(bad, np.linspace(1.1, 5.0, 20), 0.83, 6.0).max() > 1e-6
