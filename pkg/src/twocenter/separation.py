"""
Radial (Razavy) and angular (Whittaker-Hill) factors as QES Heun instances.

Separating the planar two-center equation in elliptic coordinates
xi = (r1 + r2)/R, eta = (r2 - r1)/R gives

    (xi^2 - 1) F'' + xi F' + (E R^2/2 xi^2 + R (Z1 + Z2) xi + lam) F = 0
    (1 - eta^2) G'' - eta G' - (E R^2/2 eta^2 + R (Z2 - Z1) eta + lam) G = 0

Both map onto the confluent Heun equation through

    F = (xi + 1)^((2 gamma - 1)/4) (xi - 1)^((2 delta - 1)/4) exp(eps xi / 4) u(xi)

(and the same with (1 + eta), (1 - eta) for G), for the four (gamma, delta)
choices labelled a, b, c, d.  The QES condition alpha = -n eps then fixes

    eps = -4 R S / (2 n + gamma + delta),   E = -2 S^2 / (2 n + gamma + delta)^2,

with S = Z1 + Z2 (radial) or S = Z2 - Z1 (angular).
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import BranchOutOfRange, DomainError, SymmetricCaseError
from .heun import (
    CHEqParameters,
    HeunPolynomialSolution,
    QESRoot,
    Scalar,
    as_scalar,
    assemble_polynomial,
    build_recurrence,
    find_q_roots,
    q_roots_batch,
)

Kind = Literal["radial", "angular"]
HALF = Fraction(1, 2)
THREE_HALVES = Fraction(3, 2)


@dataclass(frozen=True)
class SolutionType:
    tag: str
    gamma: Fraction
    delta: Fraction

    @property
    def shift(self) -> Fraction:
        """gamma + delta: 1 (a), 3 (b), 2 (c, d)."""
        return self.gamma + self.delta

    def quantum_number(self, level: int) -> int:
        """2 level + gamma + delta, the n1 / n2 of the energy denominator."""
        return int(2 * level + self.shift)


TYPES: dict[str, SolutionType] = {
    "a": SolutionType("a", HALF, HALF),
    "b": SolutionType("b", THREE_HALVES, THREE_HALVES),
    "c": SolutionType("c", THREE_HALVES, HALF),
    "d": SolutionType("d", HALF, THREE_HALVES),
}


def solution_type(tag: str | SolutionType) -> SolutionType:
    if isinstance(tag, SolutionType):
        return tag
    try:
        return TYPES[tag]
    except KeyError:
        raise ValueError(f"unknown solution type {tag!r}; expected one of a, b, c, d") from None


@dataclass(frozen=True)
class CenterPair:
    """Charges Z1 (at x1 = +R/2) and Z2 (at x1 = -R/2), and optionally R."""

    Z1: Scalar
    Z2: Scalar
    R: Scalar | None = None

    def __post_init__(self):
        object.__setattr__(self, "Z1", as_scalar(self.Z1))
        object.__setattr__(self, "Z2", as_scalar(self.Z2))
        if not (self.Z1 > 0 and self.Z2 > 0):
            raise ValueError(f"charges must be positive, got Z1={self.Z1}, Z2={self.Z2}")
        if self.R is not None:
            object.__setattr__(self, "R", as_scalar(self.R))
            if not self.R > 0:
                raise ValueError(f"R must be positive, got {self.R}")

    @property
    def symmetric(self) -> bool:
        return self.Z1 == self.Z2

    def with_R(self, R) -> CenterPair:
        return CenterPair(self.Z1, self.Z2, R)

    def charge(self, kind: Kind) -> Scalar:
        """Z1 + Z2 for the radial equation, Z2 - Z1 for the angular one."""
        if kind == "radial":
            return self.Z1 + self.Z2
        if kind == "angular":
            return self.Z2 - self.Z1
        raise ValueError(f"kind must be 'radial' or 'angular', got {kind!r}")

    def require_R(self) -> Scalar:
        if self.R is None:
            raise ValueError("intercenter distance R is required here")
        return self.R


def _energy(stype: SolutionType, level: int, charge: Scalar) -> Scalar:
    return -2 * charge**2 / (2 * level + stype.shift) ** 2


def radial_energy(stype, level: int, centers: CenterPair) -> Scalar:
    """E = -2 (Z1 + Z2)^2 / (2 n + gamma + delta)^2."""
    return _energy(solution_type(stype), level, centers.charge("radial"))


def angular_energy(stype, level: int, centers: CenterPair) -> Scalar:
    """E = -2 (Z2 - Z1)^2 / (2 n + gamma + delta)^2; undefined for Z1 = Z2."""
    if centers.symmetric:
        raise SymmetricCaseError("equal charges: the angular equation is of Mathieu type")
    return _energy(solution_type(stype), level, centers.charge("angular"))


def _epsilon(stype: SolutionType, level: int, charge: Scalar, R: Scalar) -> Scalar:
    return -4 * R * charge / (2 * level + stype.shift)


def build_radial_cheq(stype, level: int, centers: CenterPair) -> CHEqParameters:
    st = solution_type(stype)
    eps = _epsilon(st, level, centers.charge("radial"), centers.require_R())
    return CHEqParameters(st.gamma, st.delta, eps, level)


def build_angular_cheq(stype, level: int, centers: CenterPair) -> CHEqParameters:
    if centers.symmetric:
        raise SymmetricCaseError(
            "equal charges: no QES angular factor exists (angular epsilon vanishes "
            "while the E R^2/2 term does not); use the Mathieu route"
        )
    st = solution_type(stype)
    eps = _epsilon(st, level, centers.charge("angular"), centers.require_R())
    return CHEqParameters(st.gamma, st.delta, eps, level)


def build_cheq(kind: Kind, stype, level: int, centers: CenterPair) -> CHEqParameters:
    if kind == "radial":
        return build_radial_cheq(stype, level, centers)
    return build_angular_cheq(stype, level, centers)


# Separation constant, per-type closed forms.  Arguments: (E, R, S, n, q) where
# S is the equation's charge combination and n its QES level.
LambdaForm = Callable[[Scalar, Scalar, Scalar, int, Scalar], Scalar]

_RADIAL_LAMBDA: dict[str, LambdaForm] = {
    "a": lambda E, R, S, n, q: -R**2 * E / 2 + 2 * n * R * S / (2 * n + 1) - q,
    "b": lambda E, R, S, n, q: -R**2 * E / 2 + 2 * n * R * S / (2 * n + 3) - q - 1,
    "c": lambda E, R, S, n, q: -R**2 * E / 2 + (2 * n - 1) * R * S / (2 * n + 2) - q - Fraction(1, 4),
    "d": lambda E, R, S, n, q: -R**2 * E / 2 + (2 * n + 1) * R * S / (2 * n + 2) - q - Fraction(1, 4),
}

# angular table; the radial index printed in two entries of the source table
# is read as the angular one
_ANGULAR_LAMBDA: dict[str, LambdaForm] = {
    "a": lambda E, R, Za, na, q: -(R**2) * E / 2 + 2 * na * R * Za / (2 * na + 1) - q,
    "b": lambda E, R, Za, na, q: -(R**2) * E / 2 + 2 * na * R * Za / (2 * na + 3) - q - 1,
    "c": lambda E, R, Za, na, q: -(R**2) * E / 2 + (2 * na - 1) * R * Za / (2 * na + 2) - q - Fraction(1, 4),
    "d": lambda E, R, Za, na, q: -(R**2) * E / 2 + (2 * na + 1) * R * Za / (2 * na + 2) - q - Fraction(1, 4),
}


def lambda_general(params: CHEqParameters, q: Scalar) -> Scalar:
    """lam = eps^2/16 + eps (gamma - delta)/4 - (gamma+delta)(gamma+delta-2)/4 + (2 alpha - 1)/4 - q."""
    g, d, e, a = params.gamma, params.delta, params.epsilon, params.alpha
    if not (params.exact and isinstance(q, Fraction)):
        g, d, e, a, q = float(g), float(d), float(e), float(a), float(q)
    return e * e / 16 + e * (g - d) / 4 - (g + d) * (g + d - 2) / 4 + (2 * a - 1) / 4 - q


def lambda_closed_form(kind: Kind, stype, level: int, centers: CenterPair, q: Scalar) -> Scalar:
    """Separation constant from the per-type table for a given root q."""
    st = solution_type(stype)
    R = centers.require_R()
    S = centers.charge(kind)
    E = _energy(st, level, S)
    table = _RADIAL_LAMBDA if kind == "radial" else _ANGULAR_LAMBDA
    if not (isinstance(q, Fraction) and isinstance(R, Fraction) and isinstance(S, Fraction)):
        E, R, S, q = float(E), float(R), float(S), float(q)
    return table[st.tag](E, R, S, level, q)


def _roots(kind: Kind, stype, level: int, centers: CenterPair) -> tuple[CHEqParameters, list[QESRoot]]:
    params = build_cheq(kind, stype, level, centers)
    return params, find_q_roots(build_recurrence(params))


def _select(roots: list[QESRoot], branch: int) -> QESRoot:
    if not 1 <= branch <= len(roots):
        raise BranchOutOfRange(f"branch {branch} outside 1..{len(roots)}")
    return roots[branch - 1]


def lambda_value(kind: Kind, stype, level: int, branch: int, centers: CenterPair) -> Scalar:
    """Separation constant lam_{level, branch} at the centers' R.

    Exact (Fraction) when every input and the selected root are rational.
    """
    _, roots = _roots(kind, stype, level, centers)
    return lambda_closed_form(kind, stype, level, centers, _select(roots, branch).value)


@lru_cache(maxsize=256)
def _lambda_curve_cached(kind: str, tag: str, level: int, charge: float, grid: tuple[float, ...]) -> np.ndarray:
    st = TYPES[tag]
    g, d = float(st.gamma), float(st.delta)
    R = np.asarray(grid)
    eps = -4.0 * R * charge / (2 * level + g + d)
    q = q_roots_batch(g, d, eps, level)
    E = -2.0 * charge**2 / (2 * level + g + d) ** 2
    table = _RADIAL_LAMBDA if kind == "radial" else _ANGULAR_LAMBDA
    out = np.asarray(table[tag](E, R[:, None], charge, level, q), dtype=float)
    out.setflags(write=False)
    return out


def lambda_curve(kind: Kind, stype, level: int, centers: CenterPair, R_grid) -> np.ndarray:
    """lam for every branch along an R grid; shape ``(len(R_grid), level + 1)``.

    Column j-1 is branch j.  Float scan path, used to bracket matches.
    """
    st = solution_type(stype)
    if kind == "angular" and centers.symmetric:
        raise SymmetricCaseError("equal charges: no QES angular factor")
    grid = tuple(float(r) for r in np.asarray(R_grid, dtype=float).ravel())
    return _lambda_curve_cached(kind, st.tag, int(level), float(centers.charge(kind)), grid)


def root_curve(kind: Kind, stype, level: int, centers: CenterPair, R_grid) -> np.ndarray:
    """Sorted q-roots along an R grid; shape ``(len(R_grid), level + 1)``."""
    st = solution_type(stype)
    R = np.asarray(R_grid, dtype=float)
    eps = -4.0 * R * float(centers.charge(kind)) / (2 * level + float(st.shift))
    return q_roots_batch(float(st.gamma), float(st.delta), eps, level)


@dataclass(frozen=True)
class SeparatedSolution:
    """One radial F(xi) or angular G(eta) factor of an elementary eigenfunction."""

    kind: Kind
    stype: SolutionType
    level: int
    branch: QESRoot
    energy: Scalar
    lam: Scalar
    epsilon: Scalar
    poly: HeunPolynomialSolution

    @property
    def plus_power(self) -> Scalar:
        """Exponent of (xi + 1) or (1 + eta)."""
        return (2 * self.stype.gamma - 1) / 4

    @property
    def minus_power(self) -> Scalar:
        """Exponent of (xi - 1) or (1 - eta)."""
        return (2 * self.stype.delta - 1) / 4

    @property
    def rate(self) -> Scalar:
        """Exponential rate eps/4."""
        return self.epsilon / 4

    def __call__(self, x):
        return evaluate_factor(self, x)

    def evaluate_parts(self, x, plus, minus):
        """Factor value given the coordinate and precomputed endpoint distances.

        ``plus`` is xi + 1 (or 1 + eta) and ``minus`` is xi - 1 (or 1 - eta);
        passing them in avoids cancellation near the endpoints.
        """
        a, b, r = float(self.plus_power), float(self.minus_power), float(self.rate)
        x = np.asarray(x, dtype=float)
        plus = np.asarray(plus, dtype=float)
        u = self.poly.evaluate_shifted(plus) if self.kind == "angular" else self.poly.evaluate_shifted(x + 1.0)
        with np.errstate(over="ignore"):
            return np.power(plus, a) * np.power(minus, b) * np.exp(r * x) * u


def assemble_factor(kind: Kind, stype, level: int, branch: int, centers: CenterPair) -> SeparatedSolution:
    st = solution_type(stype)
    params, roots = _roots(kind, st, level, centers)
    root = _select(roots, branch)
    recset = build_recurrence(params)
    poly = assemble_polynomial(recset, root)
    energy = _energy(st, level, centers.charge(kind))
    lam = lambda_closed_form(kind, st, level, centers, root.value)
    return SeparatedSolution(kind, st, level, root, energy, lam, params.epsilon, poly)


def _check_domain(sol: SeparatedSolution, x: np.ndarray) -> None:
    if sol.kind == "radial":
        if np.any(x < 1.0):
            raise DomainError("radial coordinate xi must be >= 1")
    elif np.any(np.abs(x) > 1.0):
        raise DomainError("angular coordinate eta must lie in [-1, 1]")


def _prefactor_parts(sol: SeparatedSolution, x: np.ndarray):
    a, b, r = float(sol.plus_power), float(sol.minus_power), float(sol.rate)
    if sol.kind == "radial":
        plus, minus, sign = x + 1.0, x - 1.0, 1.0
    else:
        plus, minus, sign = 1.0 + x, 1.0 - x, -1.0
    return a, b, r, plus, minus, sign


def evaluate_factor(sol: SeparatedSolution, x):
    """Value of F(xi) (radial) or G(eta) (angular).

    Raises
    ------
    DomainError
        For xi < 1, or |eta| > 1.
    """
    arr = np.asarray(x, dtype=float)
    _check_domain(sol, arr)
    a, b, r, plus, minus, _ = _prefactor_parts(sol, arr)
    with np.errstate(over="ignore"):
        val = np.power(plus, a) * np.power(minus, b) * np.exp(r * arr) * sol.poly(arr)
    return val if val.ndim else float(val)


def factor_derivatives(sol: SeparatedSolution, x):
    """(f, f', f'') of the factor, from closed-form prefactor derivatives.

    Valid in the open interval (endpoints excluded).
    """
    x = np.asarray(x, dtype=float)
    a, b, r, plus, minus, sign = _prefactor_parts(sol, x)
    phi = np.power(plus, a) * np.power(minus, b) * np.exp(r * x)
    # log-derivative of the prefactor; d/dx (minus) = sign
    L = a / plus + sign * b / minus + r
    dL = -a / plus**2 - b / minus**2
    u, du, ddu = sol.poly(x), sol.poly.derivative(x, 1), sol.poly.derivative(x, 2)
    f = phi * u
    df = phi * (L * u + du)
    ddf = phi * ((L * L + dL) * u + 2 * L * du + ddu)
    return f, df, ddf


def ode_residual(sol: SeparatedSolution, x, R: float, charge: float) -> np.ndarray:
    """Relative residual of the separated equation at the points x.

    The residual is normalised by the sum of magnitudes of the individual
    terms, so it is scale-free.
    """
    f, df, ddf = factor_derivatives(sol, x)
    x = np.asarray(x, dtype=float)
    E, lam = float(sol.energy), float(sol.lam)
    pot = E * R**2 / 2 * x**2 + R * charge * x + lam
    if sol.kind == "radial":
        terms = [(x**2 - 1) * ddf, x * df, pot * f]
    else:
        terms = [(1 - x**2) * ddf, -x * df, -pot * f]
    total = sum(terms)
    scale = sum(np.abs(t) for t in terms)
    return np.abs(total) / np.where(scale > 0, scale, 1.0)
