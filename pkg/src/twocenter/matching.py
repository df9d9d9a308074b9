"""
Matching radial and angular elementary factors.

A product F(xi) G(eta) solves the two-center equation only if both factors
share E and lam.  Equal energies require

    (Z1 + Z2)^2 / n1^2 = (Z2 - Z1)^2 / n2^2,

with n1 = 2 n^r + gamma + delta and n2 the angular analogue; equal separation
constants then fix R.  Matches are found by scanning R, bracketing sign
changes of lam_radial(R) - lam_angular(R), and refining with Brent's method.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.optimize import brentq

from .eigenfunction import ElementaryEigenfunction
from .errors import BranchCrossingError, NormalizationDivergence, SymmetricCaseError
from .heun import Scalar
from .separation import (
    TYPES,
    CenterPair,
    Kind,
    SolutionType,
    assemble_factor,
    lambda_curve,
    lambda_value,
    root_curve,
)

DEFAULT_GRID_POINTS = 2000
DEFAULT_TOL = 1e-12
MAX_REFINEMENTS = 8
DEDUP_TOL = 1e-9
#: largest denominator tried when recognising an exact rational R
EXACT_R_DENOMINATOR = 10**4


@dataclass(frozen=True, order=True)
class DiophantinePair:
    n1: int
    n2: int


@dataclass(frozen=True)
class FactorChoice:
    """(type, level, branch) of one separated factor."""

    tag: str
    level: int
    branch: int

    @property
    def stype(self) -> SolutionType:
        return TYPES[self.tag]

    def label(self) -> str:
        return f"{self.tag}({self.level}) j={self.branch}"


@dataclass(frozen=True)
class MatchCandidate:
    radial: FactorChoice
    angular: FactorChoice
    pair: DiophantinePair


@dataclass(frozen=True)
class MatchResult:
    """One root of lam_radial(R) = lam_angular(R)."""

    R: float
    lam: float
    mismatch: float
    R_exact: Fraction | None = None
    lam_exact: Fraction | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def R_value(self) -> Scalar:
        return self.R_exact if self.R_exact is not None else self.R


def solve_diophantine(centers: CenterPair, n_max: int) -> list[DiophantinePair]:
    """All (n1, n2) with n1 <= n_max and n1 |Z2 - Z1| = n2 (Z1 + Z2).

    Raises
    ------
    SymmetricCaseError
        When Z1 = Z2; the angular equation is then of Mathieu type.
    """
    if centers.symmetric:
        raise SymmetricCaseError("equal charges have no Diophantine solutions; use the Mathieu route")
    Z1, Z2 = centers.Z1, centers.Z2
    if not (isinstance(Z1, Fraction) and isinstance(Z2, Fraction)):
        raise ValueError("charges must be rational to solve the Diophantine condition")
    ratio = abs(Z2 - Z1) / (Z1 + Z2)  # u/v in lowest terms
    u, v = ratio.numerator, ratio.denominator
    return [DiophantinePair(v * m, u * m) for m in range(1, n_max // v + 1)]


def decode(n: int) -> list[tuple[str, int]]:
    """(type, level) choices with 2 level + gamma + delta = n."""
    out = []
    if n % 2:
        out.append(("a", (n - 1) // 2))
        if n >= 3:
            out.append(("b", (n - 3) // 2))
    elif n >= 2:
        out.extend([("c", (n - 2) // 2), ("d", (n - 2) // 2)])
    return out


def enumerate_candidates(pair: DiophantinePair) -> list[MatchCandidate]:
    """Every radial x angular (type, level, branch) decoding of ``pair``."""
    out = []
    for (rt, nr), (at, na) in product(decode(pair.n1), decode(pair.n2)):
        for j, k in product(range(1, nr + 2), range(1, na + 2)):
            out.append(MatchCandidate(FactorChoice(rt, nr, j), FactorChoice(at, na, k), pair))
    return out


def default_r_max(centers: CenterPair) -> float:
    return 20.0 * max(1.0, 1.0 / float(centers.Z1 + centers.Z2))


def scan_grid(r_max: float, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Geometric grid on (0, r_max/20], uniform grid above it."""
    n_geo = points // 4
    knee = r_max / 20
    geo = np.geomspace(r_max * 1e-6, knee, n_geo, endpoint=False)
    uni = np.linspace(knee, r_max, points - n_geo)
    return np.concatenate([geo, uni])


def _continuation_ok(q_a: np.ndarray, q_b: np.ndarray) -> np.ndarray:
    """Per cell: nearest-neighbour assignment between sorted root sets is the identity.

    ``q_a`` and ``q_b`` have shape (cells, roots); returns a boolean per cell.
    """
    if q_a.shape[-1] < 2:
        return np.ones(q_a.shape[:-1], dtype=bool)
    nearest = np.argmin(np.abs(q_b[..., :, None] - q_a[..., None, :]), axis=-1)
    return np.all(nearest == np.arange(q_a.shape[-1]), axis=-1)


def check_branch_continuity(kind: Kind, tag: str, level: int, centers: CenterPair, grid: np.ndarray) -> None:
    """Verify ascending-order branch labels are continuous along the grid.

    Cells failing the nearest-continuation test are halved up to
    ``MAX_REFINEMENTS`` times.

    Raises
    ------
    BranchCrossingError
        If a cell stays ambiguous after refinement.
    """
    if level == 0:
        return
    _check_continuity_cached(kind, tag, level, CenterPair(centers.Z1, centers.Z2), tuple(np.asarray(grid, dtype=float)))


@lru_cache(maxsize=256)
def _check_continuity_cached(kind: Kind, tag: str, level: int, centers: CenterPair, grid: tuple[float, ...]) -> None:
    grid_arr = np.asarray(grid)
    q = root_curve(kind, tag, level, centers, grid_arr)
    for i in np.nonzero(~_continuation_ok(q[:-1], q[1:]))[0]:
        for depth in range(1, MAX_REFINEMENTS + 1):
            sub = np.linspace(grid_arr[i], grid_arr[i + 1], 2**depth + 1)
            qs = root_curve(kind, tag, level, centers, sub)
            if np.all(_continuation_ok(qs[:-1], qs[1:])):
                break
        else:
            raise BranchCrossingError(
                f"{kind} {tag}({level}): branch continuation ambiguous near R={grid_arr[i]:.6g}"
            )


def sign_change_roots(g: Callable[[float], float], grid: np.ndarray, values: np.ndarray,
                      tol: float, noise: np.ndarray | float = 0.0) -> list[float]:
    """Roots of g bracketed by sign changes of ``values`` on ``grid``.

    Grid values with ``|value| <= noise`` carry no sign information (for
    instance where two curves share a limit as R -> 0 and differ only by
    round-off).  They are skipped, and brackets span the significant
    neighbours on either side.  A bracket is refined only if the scalar g
    confirms the sign change at its ends.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    significant = np.nonzero(np.abs(values) > noise)[0]
    roots = []
    for i, k in zip(significant[:-1], significant[1:]):
        if values[i] * values[k] >= 0:
            continue
        a, b = float(grid[i]), float(grid[k])
        ga, gb = g(a), g(b)
        if ga == 0.0:
            roots.append(a)
        elif gb == 0.0:
            roots.append(b)
        elif ga * gb < 0:
            roots.append(brentq(g, a, b, xtol=tol * b, rtol=4 * np.finfo(float).eps))
    return roots


#: grid values within this many ulps of the curves' magnitude count as zero
NOISE_ULPS = 64


def _lam_float(kind: Kind, choice: FactorChoice, centers: CenterPair, R: float) -> float:
    return float(lambda_value(kind, choice.tag, choice.level, choice.branch, centers.with_R(float(R))))


def _exact_match(candidate: MatchCandidate, centers: CenterPair, R: float) -> tuple[Fraction, Fraction] | None:
    """Confirm a float match as an exact rational one, if it is."""
    if not (isinstance(centers.Z1, Fraction) and isinstance(centers.Z2, Fraction)):
        return None
    R_ex = Fraction(R).limit_denominator(EXACT_R_DENOMINATOR)
    if abs(float(R_ex) - R) > 1e-9 * R:
        return None
    at = centers.with_R(R_ex)
    lams = []
    for kind, choice in (("radial", candidate.radial), ("angular", candidate.angular)):
        lam = lambda_value(kind, choice.tag, choice.level, choice.branch, at)
        if not isinstance(lam, Fraction):
            return None
        lams.append(lam)
    if lams[0] != lams[1]:
        return None
    return R_ex, lams[0]


def match_R(candidate: MatchCandidate, centers: CenterPair, r_max: float | None = None,
            tol: float = DEFAULT_TOL, grid_points: int = DEFAULT_GRID_POINTS) -> list[MatchResult]:
    """All R in (0, r_max] where the candidate's radial and angular lam agree.

    Branch labels are tracked by ascending-root order; see
    :func:`check_branch_continuity`.  Results are sorted by R.
    """
    r_max = default_r_max(centers) if r_max is None else float(r_max)
    grid = scan_grid(r_max, grid_points)
    rad, ang = candidate.radial, candidate.angular
    check_branch_continuity("radial", rad.tag, rad.level, centers, grid)
    check_branch_continuity("angular", ang.tag, ang.level, centers, grid)
    lr = lambda_curve("radial", rad.tag, rad.level, centers, grid)[:, rad.branch - 1]
    la = lambda_curve("angular", ang.tag, ang.level, centers, grid)[:, ang.branch - 1]

    def g(R: float) -> float:
        return _lam_float("radial", rad, centers, R) - _lam_float("angular", ang, centers, R)

    results: list[MatchResult] = []
    noise = NOISE_ULPS * np.finfo(float).eps * (1.0 + np.abs(lr) + np.abs(la))
    for R in sign_change_roots(g, grid, lr - la, tol, noise):
        lam_r = _lam_float("radial", rad, centers, R)
        lam_a = _lam_float("angular", ang, centers, R)
        exact = _exact_match(candidate, centers, R)
        if exact is not None:
            R_ex, lam_ex = exact
            results.append(MatchResult(float(R_ex), float(lam_ex), 0.0, R_ex, lam_ex))
        else:
            results.append(MatchResult(R, (lam_r + lam_a) / 2, abs(lam_r - lam_a)))
    return _dedupe(results)


def _dedupe(results: Iterable[MatchResult]) -> list[MatchResult]:
    out: list[MatchResult] = []
    for r in sorted(results, key=lambda m: m.R):
        if out and abs(r.R - out[-1].R) <= DEDUP_TOL * max(1.0, r.R) and abs(r.lam - out[-1].lam) <= DEDUP_TOL * max(1.0, abs(r.lam)):
            continue
        out.append(r)
    return out


def build_eigenfunction(candidate: MatchCandidate, centers: CenterPair, R) -> ElementaryEigenfunction:
    """Assemble both factors at the matched R (exact when R is rational)."""
    at = centers.with_R(R)
    rad = assemble_factor("radial", candidate.radial.tag, candidate.radial.level, candidate.radial.branch, at)
    ang = assemble_factor("angular", candidate.angular.tag, candidate.angular.level, candidate.angular.branch, at)
    lam = rad.lam if rad.lam == ang.lam else (float(rad.lam) + float(ang.lam)) / 2
    provenance = {
        "route": "elementary",
        "pair": [candidate.pair.n1, candidate.pair.n2],
        "radial": candidate.radial.label(),
        "angular": candidate.angular.label(),
        "lambda_mismatch": abs(float(rad.lam) - float(ang.lam)),
        "exact": isinstance(lam, Fraction) and isinstance(at.R, Fraction),
    }
    return ElementaryEigenfunction(at, rad.energy, lam, rad, ang, None, provenance)


def admissible(sol: ElementaryEigenfunction) -> ElementaryEigenfunction | None:
    """Attach the normalization, or return None for a non-normalizable product."""
    from .evaluate import normalize

    try:
        return sol.with_normalization(normalize(sol))
    except NormalizationDivergence:
        return None


def sort_key(sol: ElementaryEigenfunction):
    """|E| descending, then R ascending."""
    return (-abs(float(sol.energy)), float(sol.R))


def find_elementary_solutions(centers: CenterPair, n_max: int = 6, r_max: float | None = None,
                              tol: float = DEFAULT_TOL,
                              grid_points: int = DEFAULT_GRID_POINTS) -> list[ElementaryEigenfunction]:
    """Every normalizable elementary eigenfunction with n1 <= n_max and R <= r_max."""
    found = []
    for pair in solve_diophantine(centers, n_max):
        for cand in enumerate_candidates(pair):
            for m in match_R(cand, centers, r_max, tol, grid_points):
                sol = admissible(build_eigenfunction(cand, centers, m.R_value))
                if sol is not None:
                    found.append(sol)
    return sorted(found, key=sort_key)
