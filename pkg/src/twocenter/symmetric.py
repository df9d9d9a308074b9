"""
Equal charges: Razavy radial factors matched to periodic Mathieu functions.

With Z1 = Z2 = Z the angular equation has no polynomial solutions.  Writing
eta = cos(nu) turns it into the standard Mathieu equation

    G'' + (a - 2 p cos 2 nu) G = 0,   a = -lam - E R^2 / 4,   p = E R^2 / 8,

whose 2 pi-periodic solutions exist only when a is a characteristic value.
For a radial factor (type, level, branch) with energy E and separation
constant lam(R), a match is a root of

    g(R) = -lam(R) - E R^2 / 4 - a_n(E R^2 / 8)      (cosine, ce_n)
    g(R) = -lam(R) - E R^2 / 4 - b_n(E R^2 / 8)      (sine, se_n).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .eigenfunction import ElementaryEigenfunction
from .heun import Scalar
from .matching import (
    DEFAULT_GRID_POINTS,
    DEFAULT_TOL,
    NOISE_ULPS,
    FactorChoice,
    admissible,
    check_branch_continuity,
    default_r_max,
    scan_grid,
    sign_change_roots,
    sort_key,
)
from .mathieu import MathieuCharacteristic, MathieuFactor, char_value, characteristic_values, normalize_parity
from .separation import TYPES, CenterPair, assemble_factor, lambda_curve, lambda_value, radial_energy

DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class SymmetricMatch:
    """One root of the Mathieu matching condition."""

    R: float
    lam: float
    characteristic: MathieuCharacteristic
    mismatch: float


def _symmetric_centers(Z) -> CenterPair:
    return CenterPair(Z, Z)


@lru_cache(maxsize=64)
def _char_grid(parity: str, order: int, energy: float, grid: tuple[float, ...]) -> np.ndarray:
    p = energy * np.asarray(grid) ** 2 / 8
    out = characteristic_values(parity, [order], p)[:, 0]
    out.setflags(write=False)
    return out


def _char_at(parity: str, order: int, energy: float, R: float) -> MathieuCharacteristic:
    return char_value(parity, order, energy * R * R / 8)


def match_R_symmetric(radial: FactorChoice, Z, parity: str, order: int, r_max: float | None = None,
                      tol: float = DEFAULT_TOL,
                      grid_points: int = DEFAULT_GRID_POINTS) -> list[SymmetricMatch]:
    """All R in (0, r_max] where the radial factor meets a Mathieu characteristic value.

    Parameters
    ----------
    radial : FactorChoice
        Radial (type, level, branch), branches in ascending-q order.
    Z : real
        The common charge.
    parity : {"cosine", "sine"}
        Selects a_n (ce_n) or b_n (se_n).
    order : int
        Mathieu order n.

    Returns
    -------
    list of SymmetricMatch
        Sorted by R.
    """
    parity = normalize_parity(parity)
    centers = _symmetric_centers(Z)
    r_max = default_r_max(centers) if r_max is None else float(r_max)
    grid = scan_grid(r_max, grid_points)
    check_branch_continuity("radial", radial.tag, radial.level, centers, grid)
    E = float(radial_energy(radial.tag, radial.level, centers))
    lam = lambda_curve("radial", radial.tag, radial.level, centers, grid)[:, radial.branch - 1]
    chars = _char_grid(parity, int(order), E, tuple(grid.tolist()))
    values = -lam - E * grid**2 / 4 - chars

    def lam_at(R: float) -> float:
        return float(lambda_value("radial", radial.tag, radial.level, radial.branch, centers.with_R(float(R))))

    def g(R: float) -> float:
        return -lam_at(R) - E * R * R / 4 - _char_at(parity, order, E, R).value

    out: list[SymmetricMatch] = []
    noise = NOISE_ULPS * np.finfo(float).eps * (1.0 + np.abs(lam) + np.abs(E) * grid**2 / 4 + np.abs(chars))
    for R in sign_change_roots(g, grid, values, tol, noise):
        char = _char_at(parity, order, E, R)
        lam_R = lam_at(R)
        out.append(SymmetricMatch(float(R), lam_R, char, abs(-lam_R - E * R * R / 4 - char.value)))
    deduped: list[SymmetricMatch] = []
    for m in sorted(out, key=lambda m: m.R):
        if deduped and abs(m.R - deduped[-1].R) <= DEDUP_TOL * max(1.0, m.R):
            continue
        deduped.append(m)
    return deduped


def build_mixed_eigenfunction(radial: FactorChoice, Z, match: SymmetricMatch) -> ElementaryEigenfunction:
    """Razavy factor F(xi) times the Mathieu factor G(nu) at the matched R.

    Points are addressed through the one-to-one coordinates
    x1 = (R/2) xi cos(nu), x2 = (R/2) sqrt(xi^2 - 1) sin(nu).
    """
    at = _symmetric_centers(Z).with_R(match.R)
    rad = assemble_factor("radial", radial.tag, radial.level, radial.branch, at)
    provenance = {
        "route": "mathieu",
        "radial": radial.label(),
        "angular": match.characteristic.label,
        "lambda_mismatch": match.mismatch,
        "exact": False,
    }
    return ElementaryEigenfunction(at, rad.energy, rad.lam, rad, MathieuFactor(match.characteristic), None,
                                   provenance)


def radial_choices(nr_max: int) -> list[FactorChoice]:
    """Every radial (type, level, branch) with level <= nr_max."""
    return [FactorChoice(tag, level, j) for tag in TYPES for level in range(nr_max + 1)
            for j in range(1, level + 2)]


def mathieu_choices(n_max: int) -> list[tuple[str, int]]:
    """(parity, order) pairs with order <= n_max: ce_0..ce_n and se_1..se_n."""
    return [("cosine", n) for n in range(n_max + 1)] + [("sine", n) for n in range(1, n_max + 1)]


def find_symmetric_solutions(Z: Scalar, nr_max: int = 2, mathieu_n_max: int = 2, r_max: float | None = None,
                             tol: float = DEFAULT_TOL,
                             grid_points: int = DEFAULT_GRID_POINTS) -> list[ElementaryEigenfunction]:
    """All normalizable mixed eigenfunctions for equal charges Z, sorted by (-|E|, R)."""
    found = []
    for radial in radial_choices(nr_max):
        for parity, order in mathieu_choices(mathieu_n_max):
            for m in match_R_symmetric(radial, Z, parity, order, r_max, tol, grid_points):
                sol = admissible(build_mixed_eigenfunction(radial, Z, m))
                if sol is not None:
                    found.append(sol)
    return sorted(found, key=sort_key)
