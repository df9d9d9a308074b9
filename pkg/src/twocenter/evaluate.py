"""
Coordinates, pointwise evaluation, normalization and verification of Psi.

Conventions: center 1 (charge Z1) sits at x1 = +R/2, center 2 at x1 = -R/2,

    r1 = |x - (R/2, 0)|,  r2 = |x + (R/2, 0)|,
    xi = (r1 + r2)/R,  eta = (r2 - r1)/R,
    x1 = (R/2) xi cos(nu),  x2 = (R/2) sqrt(xi^2 - 1) sin(nu),  eta = cos(nu).

The upper sheet (x2 >= 0) is nu in [0, pi], the lower sheet nu in (-pi, 0).
Area element in (mu, nu) with xi = cosh(mu): (R^2/4)(xi^2 - eta^2) dmu dnu.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal

import mpmath
import numpy as np

from .eigenfunction import ElementaryEigenfunction
from .errors import ConvergenceError, FocalSegmentWarning, NormalizationDivergence
from .separation import SeparatedSolution

Sheet = Literal["upper", "lower"]

#: tail cut-off: radial integrand below this fraction of its peak is dropped
TAIL_FRACTION = 1e-18
NORM_RTOL = 1e-10
ANGULAR_NODES = 64
MAX_NODES = 2**14
#: largest xi - 1 probed before declaring the density non-normalizable
XI_PROBE_MAX = 1e8


@dataclass(frozen=True)
class EllipticPoint:
    xi: float
    eta: float
    nu: float
    sheet: Sheet

    @classmethod
    def from_eta(cls, xi: float, eta: float, sheet: Sheet = "upper") -> EllipticPoint:
        nu = math.acos(max(-1.0, min(1.0, eta)))
        return cls(float(xi), float(eta), nu if sheet == "upper" else -nu, sheet)

    @classmethod
    def from_nu(cls, xi: float, nu: float) -> EllipticPoint:
        nu = math.remainder(float(nu), 2 * math.pi)
        return cls(float(xi), math.cos(nu), nu, "upper" if nu >= 0 else "lower")


@dataclass(frozen=True)
class EllipticParts:
    """Elliptic coordinates with the endpoint distances kept to full precision.

    ``xi_m1`` = xi - 1, ``one_m_eta`` = 1 - eta and ``one_p_eta`` = 1 + eta are
    obtained without cancellation: xi^2 - 1 and 1 - eta^2 are the roots of
    t^2 - (4 r1 r2 / R^2) t + 4 x2^2 / R^2, the larger taken from the
    quadratic formula and the smaller as product / larger.
    """

    xi: np.ndarray
    eta: np.ndarray
    nu: np.ndarray
    xi_m1: np.ndarray
    one_m_eta: np.ndarray
    one_p_eta: np.ndarray


def elliptic_parts(x1, x2, R: float) -> EllipticParts:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    half = R / 2
    r1 = np.hypot(x1 - half, x2)
    r2 = np.hypot(x1 + half, x2)
    xi = np.maximum((r1 + r2) / R, 1.0)
    eta = np.clip((r2 - r1) / R, -1.0, 1.0)
    P = 4.0 * r1 * r2 / R**2
    Q = (2.0 * x2 / R) ** 2
    big = 0.5 * (P + np.sqrt(np.maximum(P * P - 4.0 * Q, 0.0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big > 0, Q / big, 0.0)
    radial_big = xi * xi + eta * eta >= 2.0
    xi2m1 = np.where(radial_big, big, small)
    eta2m1 = np.where(radial_big, small, big)
    xi_m1 = xi2m1 / (xi + 1.0)
    one_p_naive = 1.0 + eta
    one_m_naive = 1.0 - eta
    with np.errstate(divide="ignore", invalid="ignore"):
        one_m_eta = np.where(eta > 0, np.where(one_p_naive > 0, eta2m1 / one_p_naive, 0.0), one_m_naive)
        one_p_eta = np.where(eta <= 0, np.where(one_m_naive > 0, eta2m1 / one_m_naive, 0.0), one_p_naive)
    s = np.sqrt(xi2m1)
    with np.errstate(divide="ignore", invalid="ignore"):
        nu_generic = np.arctan2(2.0 * x2 / (R * np.where(s > 0, s, 1.0)), 2.0 * x1 / (R * xi))
    nu_focal = np.where(x2 >= 0, 1.0, -1.0) * np.arccos(eta)
    nu = np.where(s > 0, nu_generic, nu_focal)
    return EllipticParts(xi, eta, nu, xi_m1, one_m_eta, one_p_eta)


def elliptic_arrays(x1, x2, R: float):
    """Vectorized (xi, eta, nu) for Cartesian points."""
    parts = elliptic_parts(x1, x2, R)
    return parts.xi, parts.eta, parts.nu


def cartesian_to_elliptic(x1: float, x2: float, R: float) -> EllipticPoint:
    """Elliptic coordinates of a Cartesian point.

    Warns with :class:`FocalSegmentWarning` when xi = 1 (the segment joining
    the centers, where the coordinate Jacobian vanishes).
    """
    if not R > 0:
        raise ValueError("R must be positive")
    xi, eta, nu = (float(v) for v in elliptic_arrays(x1, x2, R))
    if xi <= 1.0:
        warnings.warn(f"point ({x1}, {x2}) lies on the focal segment", FocalSegmentWarning, stacklevel=2)
    return EllipticPoint(xi, eta, nu, "upper" if x2 >= 0 else "lower")


def elliptic_to_cartesian(pt: EllipticPoint, R: float) -> tuple[float, float]:
    half = R / 2
    x1 = half * pt.xi * pt.eta
    x2 = half * math.sqrt(max(pt.xi**2 - 1.0, 0.0)) * math.sqrt(max(1.0 - pt.eta**2, 0.0))
    return x1, (x2 if pt.sheet == "upper" else -x2)


def evaluate_psi(sol: ElementaryEigenfunction, x1, x2, normalized: bool = True):
    """Psi at Cartesian points; scaled by the normalization when it is known."""
    parts = elliptic_parts(x1, x2, float(sol.R))
    rad = sol.radial.evaluate_parts(parts.xi, parts.xi + 1.0, parts.xi_m1)
    if sol.mixed:
        ang = sol.angular(parts.nu)
    else:
        ang = sol.angular.evaluate_parts(parts.eta, parts.one_p_eta, parts.one_m_eta)
    val = rad * ang
    if normalized and sol.normalization is not None:
        val = val * sol.normalization
    return val if np.ndim(val) else float(val)


def _radial_extent(sol: ElementaryEigenfunction) -> float:
    """xi beyond which F^2 xi^2 stays below TAIL_FRACTION of its peak."""
    t = np.geomspace(1e-10, XI_PROBE_MAX, 4001)
    xi = 1.0 + t
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        dens = np.asarray(sol.radial(xi), dtype=float) ** 2 * xi**2
    if not np.all(np.isfinite(dens)):
        raise NormalizationDivergence("radial factor overflows: growing exponential")
    peak = dens.max()
    if peak <= 0:
        raise NormalizationDivergence("radial factor vanishes identically")
    above = np.nonzero(dens >= TAIL_FRACTION * peak)[0]
    last = int(above[-1])
    if last >= len(t) - 1:
        raise NormalizationDivergence("radial density never drops below the tail cut-off")
    return float(xi[last + 1])


def _gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, nodes: int) -> float:
    x, w = np.polynomial.legendre.leggauss(nodes)
    xm, xr = (a + b) / 2, (b - a) / 2
    return float(xr * np.sum(w * f(xm + xr * x)))


def _adaptive_gl(fs: Sequence[Callable], a: float, b: float, start: int) -> list[float]:
    """Gauss-Legendre with node doubling until every integral settles."""
    nodes = start
    prev = [_gauss_legendre(f, a, b, nodes) for f in fs]
    while True:
        nodes *= 2
        if nodes > MAX_NODES:
            raise ConvergenceError("normalization quadrature did not settle")
        cur = [_gauss_legendre(f, a, b, nodes) for f in fs]
        if all(abs(c - p) <= NORM_RTOL * max(abs(c), 1e-300) for c, p in zip(cur, prev)):
            return cur
        prev = cur


def density_integral(sol: ElementaryEigenfunction) -> float:
    """Integral of |Psi|^2 (unnormalized) over the plane, in (mu, nu).

    With xi = cosh(mu) and eta = cos(nu) the integral separates:
    (R^2/4) [int F^2 xi^2 dmu int G^2 dnu - int F^2 dmu int G^2 eta^2 dnu].

    Raises
    ------
    NormalizationDivergence
        If the radial factor does not decay.
    """
    R = float(sol.R)
    mu_max = math.acosh(_radial_extent(sol))

    def f_rad(mu):
        return sol.radial(np.cosh(mu)) ** 2

    A, B = _adaptive_gl([lambda m: f_rad(m) * np.cosh(m) ** 2, f_rad], 0.0, mu_max, ANGULAR_NODES)

    def g_ang(nu):
        return sol.angular_of_nu(nu) ** 2

    C, D = _adaptive_gl([g_ang, lambda n: g_ang(n) * np.cos(n) ** 2], -math.pi, math.pi, ANGULAR_NODES)
    total = R * R / 4 * (A * C - B * D)
    if not (np.isfinite(total) and total > 0):
        raise NormalizationDivergence(f"density integral is {total}")
    return total


def normalize(sol: ElementaryEigenfunction) -> float:
    """Constant N with integral |N Psi|^2 dx1 dx2 = 1."""
    return 1.0 / math.sqrt(density_integral(sol))


def _graded_breaks(lo: float, hi: float, singular: Sequence[float], scale: float, levels: int = 14,
                   uniform: int = 16) -> np.ndarray:
    pts = set(np.linspace(lo, hi, uniform + 1).tolist())
    for s in singular:
        if lo <= s <= hi:
            pts.add(s)
            for k in range(1, levels + 1):
                for x in (s - scale * 2.0**-k, s + scale * 2.0**-k):
                    if lo < x < hi:
                        pts.add(x)
    return np.array(sorted(pts))


def density_integral_cartesian(sol: ElementaryEigenfunction, rtol: float = 1e-9) -> float:
    """Independent check of :func:`density_integral` on a Cartesian panel grid.

    Tensor Gauss-Legendre panels, with breakpoints graded toward the two
    centers and the x1 axis so the density's cusps sit on panel corners and
    edges.  The node count per panel doubles until the total settles.
    """
    R = float(sol.R)
    xi_cut = _radial_extent(sol)
    L1 = R / 2 * xi_cut
    L2 = R / 2 * math.sqrt(xi_cut**2 - 1.0)
    b1 = _graded_breaks(-L1, L1, [-R / 2, R / 2], R / 2)
    b2 = _graded_breaks(-L2, L2, [0.0], min(L2, R / 2))

    def total(m: int) -> float:
        x, w = np.polynomial.legendre.leggauss(m)
        c1, h1 = (b1[1:] + b1[:-1]) / 2, (b1[1:] - b1[:-1]) / 2
        c2, h2 = (b2[1:] + b2[:-1]) / 2, (b2[1:] - b2[:-1]) / 2
        X1 = (c1[:, None] + h1[:, None] * x).ravel()
        W1 = (h1[:, None] * w).ravel()
        X2 = (c2[:, None] + h2[:, None] * x).ravel()
        W2 = (h2[:, None] * w).ravel()
        acc = 0.0
        for i in range(0, X1.size, 256):
            blk = evaluate_psi(sol, X1[i:i + 256, None], X2[None, :], normalized=False)
            acc += float(W1[i:i + 256] @ (blk**2) @ W2)
        return acc

    m = 4
    prev = total(m)
    while True:
        m *= 2
        if m > 128:
            raise ConvergenceError("Cartesian density quadrature did not settle")
        cur = total(m)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur


#: working precision (decimal digits) of the residual oracle
ORACLE_DPS = 50
#: finite-difference step, relative to max(1, |x|)
ORACLE_STEP = 1e-6


def coulomb_potential(centers: Sequence[tuple[float, float, float]], x1, x2):
    """-sum Z / |x - c| for centers given as (c1, c2, Z)."""
    v = 0.0
    for c1, c2, Z in centers:
        v = v - Z / np.hypot(x1 - c1, x2 - c2)
    return v


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _mp_factor(fac: SeparatedSolution, plus, minus, x):
    u = mpmath.mpf(0)
    for c in reversed(fac.poly.coeffs):
        u = u * plus + _mp(c)
    return plus ** _mp(fac.plus_power) * minus ** _mp(fac.minus_power) * mpmath.exp(_mp(fac.rate) * x) * u


def mp_psi(sol: ElementaryEigenfunction) -> Callable:
    """Unnormalized Psi(x1, x2) evaluated in mpmath arithmetic.

    A second, scalar implementation built straight from the stored
    parameters (R, exponents, polynomial or Fourier coefficients); it shares
    no code with :func:`evaluate_psi`.
    """
    R = _mp(sol.R)
    if sol.mixed:
        char = sol.angular.characteristic
        terms = [(int(h), mpmath.mpf(c)) for h, c in zip(char.harmonics, char.fourier)]
        trig = mpmath.cos if char.parity == "cosine" else mpmath.sin

    def psi(x1, x2):
        r1 = mpmath.hypot(x1 - R / 2, x2)
        r2 = mpmath.hypot(x1 + R / 2, x2)
        xi = (r1 + r2) / R
        eta = (r2 - r1) / R
        F = _mp_factor(sol.radial, xi + 1, xi - 1, xi)
        if sol.mixed:
            nu = mpmath.atan2(x2 / mpmath.sqrt(xi * xi - 1), x1 / xi)
            G = mpmath.fsum(c * trig(h * nu) for h, c in terms)
        else:
            G = _mp_factor(sol.angular, 1 + eta, 1 - eta, eta)
        return F * G

    return psi


def residual_at(psi: Callable, centers: Sequence[tuple[float, float, float]], energy: float,
                x1, x2, floor: float = 1e-30) -> np.ndarray:
    """Relative residual |(-1/2 Lap + V - E) psi| / (|E| |psi| + floor).

    ``psi`` takes mpmath scalars.  The Laplacian uses fourth-order central
    differences with step h = ORACLE_STEP * max(1, |x|), carried out at
    ORACLE_DPS digits so that cancellation in the stencil is harmless and
    the step can be taken small enough for truncation to be negligible.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    out = np.empty(x1.shape)
    with mpmath.workdps(ORACLE_DPS):
        E = _mp(energy)
        for i, (a, b) in enumerate(zip(x1.tolist(), x2.tolist())):
            a, b = mpmath.mpf(a), mpmath.mpf(b)
            h = mpmath.mpf(ORACLE_STEP) * max(1, mpmath.hypot(a, b))
            f0 = psi(a, b)
            lap = -60 * f0
            for da, db in ((h, 0), (0, h)):
                lap += 16 * (psi(a + da, b + db) + psi(a - da, b - db))
                lap -= psi(a + 2 * da, b + 2 * db) + psi(a - 2 * da, b - 2 * db)
            lap /= 12 * h * h
            V = -mpmath.fsum(_mp(Z) / mpmath.hypot(a - _mp(c1), b - _mp(c2)) for c1, c2, Z in centers)
            res = -lap / 2 + (V - E) * f0
            out[i] = float(abs(res) / (abs(E) * abs(f0) + floor))
    return out


def center_list(sol: ElementaryEigenfunction) -> list[tuple[float, float, float]]:
    R = sol.R
    Z1, Z2 = sol.centers.Z1, sol.centers.Z2
    return [(R / 2, 0, Z1), (-R / 2, 0, Z2)]


def sample_points(sol: ElementaryEigenfunction, sample_count: int = 200, seed: int = 0):
    """Deterministic sample points for the residual oracle.

    Points are drawn uniformly in (xi, nu) over xi in (1, xi_cut], then kept
    only if they stay 1e-2 R away from both centers and from the x1 axis
    (the focal segment and the two outer rays, where factors such as
    sqrt(xi - 1) or sqrt(1 - eta) have kinks).
    """
    R = float(sol.R)
    margin = 1e-2 * R
    xi_cut = min(_radial_extent(sol), 1.0 + 60.0 / max(abs(float(sol.radial.epsilon)), 1e-12))
    rng = np.random.default_rng(seed)
    out1: list[float] = []
    out2: list[float] = []
    while len(out1) < sample_count:
        xi = 1.0 + (xi_cut - 1.0) * rng.random(4 * sample_count)
        nu = rng.uniform(-math.pi, math.pi, 4 * sample_count)
        x1 = R / 2 * xi * np.cos(nu)
        x2 = R / 2 * np.sqrt(xi * xi - 1.0) * np.sin(nu)
        ok = (np.abs(x2) > margin) & (np.hypot(x1 - R / 2, x2) > margin) & (np.hypot(x1 + R / 2, x2) > margin)
        out1.extend(x1[ok].tolist())
        out2.extend(x2[ok].tolist())
    return np.array(out1[:sample_count]), np.array(out2[:sample_count])


def pde_residual(sol: ElementaryEigenfunction, sample_count: int = 200, seed: int = 0,
                 energy: float | None = None) -> float:
    """Max relative residual of the full two-center equation over sample points.

    Independent of the separation machinery: only pointwise values of Psi in
    Cartesian coordinates enter.  ``energy`` overrides ``sol.energy``.
    """
    x1, x2 = sample_points(sol, sample_count, seed)
    E = sol.energy if energy is None else energy

    return float(np.max(residual_at(mp_psi(sol), center_list(sol), E, x1, x2)))


@dataclass(frozen=True)
class DensityGrid:
    """|N Psi|^2 sampled on a uniform grid; ``values[i, j]`` is at (x1[i], x2[j])."""

    window: tuple[float, float, float, float]
    shape: tuple[int, int]
    values: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def x1(self) -> np.ndarray:
        return np.linspace(self.window[0], self.window[1], self.shape[0])

    @property
    def x2(self) -> np.ndarray:
        return np.linspace(self.window[2], self.window[3], self.shape[1])

    @property
    def cell_area(self) -> float:
        w = self.window
        return (w[1] - w[0]) / (self.shape[0] - 1) * (w[3] - w[2]) / (self.shape[1] - 1)

    def write_csv(self, path: str | Path) -> None:
        """Header ``x1,x2,rho``; rows ordered by x1 then x2; 17 significant digits."""
        x1, x2 = self.x1, self.x2
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("x1,x2,rho\n")
            for i, a in enumerate(x1):
                for j, b in enumerate(x2):
                    fh.write(f"{a:.17g},{b:.17g},{self.values[i, j]:.17g}\n")


def default_window(sol: ElementaryEigenfunction, fraction: float = 1e-6) -> tuple[float, float, float, float]:
    """Symmetric box enclosing the region where the density exceeds ``fraction`` of its peak."""
    R = float(sol.R)
    xi = 1.0 + np.geomspace(1e-8, XI_PROBE_MAX, 4001)
    dens = np.asarray(sol.radial(xi), dtype=float) ** 2
    keep = np.nonzero(dens >= fraction * dens.max())[0]
    xi_cut = float(xi[min(int(keep[-1]) + 1, xi.size - 1)])
    L1 = R / 2 * xi_cut
    L2 = R / 2 * math.sqrt(xi_cut**2 - 1.0)
    return (-L1, L1, -L2, L2)


def density_grid(sol: ElementaryEigenfunction, window: Sequence[float] | None = None,
                 nx: int = 201, ny: int = 201) -> DensityGrid:
    """Sample the normalized density on a uniform nx x ny grid."""
    if nx < 2 or ny < 2:
        raise ValueError("nx and ny must be at least 2")
    if sol.normalization is None:
        sol = sol.with_normalization(normalize(sol))
    win = tuple(float(v) for v in (window if window is not None else default_window(sol)))
    if not (win[1] > win[0] and win[3] > win[2]):
        raise ValueError(f"degenerate window {win}")
    x1 = np.linspace(win[0], win[1], nx)
    x2 = np.linspace(win[2], win[3], ny)
    vals = np.asarray(evaluate_psi(sol, x1[:, None], x2[None, :]), dtype=float) ** 2
    meta = {
        "normalization": sol.normalization,
        "R": float(sol.R),
        "energy": float(sol.energy),
        "lambda": float(sol.lam),
    }
    meta.update({k: v for k, v in sol.provenance.items() if k == "id"})
    return DensityGrid(win, (nx, ny), vals, meta)  # type: ignore[arg-type]
