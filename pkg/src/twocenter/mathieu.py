"""
Periodic Mathieu functions ce_n, se_n and characteristic values a_n(p), b_n(p).

Standard form: G'' + (a - 2 p cos 2 nu) G = 0.  Each of the four
parity/period classes reduces to a symmetric tridiagonal eigenproblem on the
Fourier coefficients:

=========  ======================  ===================================
class      expansion               diagonal (k = 0, 1, ...)
=========  ======================  ===================================
ce, even   sum A_2k cos 2k nu      (2k)^2, first off-diagonal scaled by sqrt 2
ce, odd    sum A_2k+1 cos(2k+1)nu  (2k+1)^2, first entry + p
se, odd    sum B_2k+1 sin(2k+1)nu  (2k+1)^2, first entry - p
se, even   sum B_2k+2 sin(2k+2)nu  (2k+2)^2
=========  ======================  ===================================

with every off-diagonal equal to p.  Negative p is handled by the same
matrices; no parity-swap identities are used.

Fourier vectors are unit-norm in the symmetric variables, which means
2 A_0^2 + sum A_k^2 = 1 for ce_{2r} and sum of squares = 1 otherwise, i.e.
the integral of ce_n^2 (or se_n^2) over a period equals pi.  The sign is fixed
by making the coefficient of the n-th harmonic positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError

Parity = Literal["cosine", "sine"]

MAX_TRUNCATION = 2**14
CHAR_RTOL = 1e-13
#: cache key resolution for p
P_QUANTUM = 1e-15

_PARITY_ALIASES = {
    "cosine": "cosine", "cos": "cosine", "ce": "cosine", "a": "cosine",
    "sine": "sine", "sin": "sine", "se": "sine", "b": "sine",
}


def normalize_parity(parity: str) -> Parity:
    try:
        return _PARITY_ALIASES[parity.lower()]  # type: ignore[return-value]
    except (KeyError, AttributeError):
        raise ValueError(f"parity must be cosine/sine (or a/b), got {parity!r}") from None


def _class_of(parity: Parity, order: int) -> tuple[str, int]:
    """(class name, index of the order within the class)."""
    if parity == "cosine":
        if order < 0:
            raise ValueError("cosine order must be >= 0")
        return ("ce0", order // 2) if order % 2 == 0 else ("ce1", order // 2)
    if order < 1:
        raise ValueError("sine order must be >= 1")
    return ("se1", (order - 1) // 2) if order % 2 else ("se0", order // 2 - 1)


def _harmonics(cls: str, size: int) -> np.ndarray:
    k = np.arange(size)
    return {"ce0": 2 * k, "ce1": 2 * k + 1, "se1": 2 * k + 1, "se0": 2 * k + 2}[cls]


def _tridiagonal(cls: str, p: float, size: int) -> tuple[np.ndarray, np.ndarray]:
    diag = _harmonics(cls, size).astype(float) ** 2
    off = np.full(size - 1, float(p))
    if cls == "ce0":
        off[0] *= math.sqrt(2.0)
    elif cls == "ce1":
        diag[0] += p
    elif cls == "se1":
        diag[0] -= p
    return diag, off


def initial_truncation(order: int, p: float) -> int:
    return max(20, 2 * order + math.ceil(2 * math.sqrt(abs(p))) + 10)


def _solve(cls: str, p: float, size: int, hi: int):
    """Lowest hi+1 eigenpairs; eigenvalues refined by Rayleigh quotients.

    LAPACK's eigenvalues carry absolute errors ~ eps * ||T||, and ||T|| grows
    like size^2.  The quotient's error is set by the leading (small) entries
    since the eigenvector tail decays super-exponentially.
    """
    diag, off = _tridiagonal(cls, p, size)
    _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, hi))
    tv = diag[:, None] * vecs
    tv[:-1] += off[:, None] * vecs[1:]
    tv[1:] += off[:, None] * vecs[:-1]
    vals = np.einsum("ij,ij->j", vecs, tv) / np.einsum("ij,ij->j", vecs, vecs)
    return vals, vecs


def _converged_size(cls: str, p: float, hi: int, order: int) -> int:
    size = initial_truncation(order, p)
    if 2 * size > MAX_TRUNCATION:
        raise ConvergenceError(f"Mathieu truncation would exceed {MAX_TRUNCATION} (p={p})")
    prev, _ = _solve(cls, p, size, hi)
    while True:
        size *= 2
        if size > MAX_TRUNCATION:
            raise ConvergenceError(f"Mathieu truncation exceeded {MAX_TRUNCATION} (p={p})")
        cur, _ = _solve(cls, p, size, hi)
        if np.all(np.abs(cur - prev) <= CHAR_RTOL * np.maximum(1.0, np.abs(cur))):
            return size
        prev = cur


@dataclass(frozen=True)
class MathieuCharacteristic:
    parity: Parity
    order: int
    p: float
    value: float
    harmonics: tuple[int, ...]
    fourier: tuple[float, ...]
    truncation: int

    @property
    def label(self) -> str:
        return f"{'a' if self.parity == 'cosine' else 'b'}_{self.order}"

    def __call__(self, nu):
        return mathieu_eval(self, nu)


@lru_cache(maxsize=65536)
def _char_cached(parity: Parity, order: int, p_key: int) -> MathieuCharacteristic:
    p = p_key * P_QUANTUM
    cls, idx = _class_of(parity, order)
    size = _converged_size(cls, p, idx, order)
    vals, vecs = _solve(cls, p, size, idx)
    vec = vecs[:, idx].copy()
    harm = _harmonics(cls, size)
    coeffs = vec.copy()
    if cls == "ce0":
        coeffs[0] /= math.sqrt(2.0)
    pos = int(np.nonzero(harm == order)[0][0])
    if coeffs[pos] < 0:
        coeffs = -coeffs
    # drop the numerically zero tail
    keep = np.nonzero(np.abs(coeffs) > 1e-300)[0]
    last = int(keep[-1]) + 1 if keep.size else 1
    return MathieuCharacteristic(
        parity, order, p, float(vals[idx]),
        tuple(int(h) for h in harm[:last]), tuple(float(c) for c in coeffs[:last]), size,
    )


def _p_key(p: float) -> int:
    return int(round(float(p) / P_QUANTUM))


def char_value(parity: str, order: int, p: float) -> MathieuCharacteristic:
    """Characteristic value a_n(p) (cosine) or b_n(p) (sine) with its Fourier vector.

    The truncation starts at max(20, 2n + ceil(2 sqrt|p|) + 10) and is doubled
    until the eigenvalue changes by less than 1e-13 relative.  Results are
    memoized on (parity, order, p) with p resolved to 1e-15; the cache is
    thread-safe.

    Raises
    ------
    ConvergenceError
        If the truncation would exceed 2**14.
    """
    char = _char_cached(normalize_parity(parity), int(order), _p_key(p))
    # the cache key is quantized; report the caller's p
    return char if char.p == float(p) else replace(char, p=float(p))


def characteristic_values(parity: str, orders, p_values) -> np.ndarray:
    """Characteristic values for several orders along a grid of p.

    Returns shape ``(len(p_values), len(orders))``.  The truncation is made
    adaptive once, at the largest |p| of the grid (convergence in N is
    monotone in |p|), then reused for every grid point.
    """
    parity = normalize_parity(parity)
    orders = [int(n) for n in orders]
    p_values = np.asarray(p_values, dtype=float)
    out = np.empty((p_values.size, len(orders)))
    by_class: dict[str, list[tuple[int, int]]] = {}
    for col, n in enumerate(orders):
        cls, idx = _class_of(parity, n)
        by_class.setdefault(cls, []).append((col, idx))
    pmax = float(np.abs(p_values).max()) if p_values.size else 0.0
    for cls, cols in by_class.items():
        hi = max(i for _, i in cols)
        size = _converged_size(cls, pmax, hi, 2 * hi + 2)
        for row, p in enumerate(p_values):
            vals, _ = _solve(cls, p, size, hi)
            for col, idx in cols:
                out[row, col] = vals[idx]
    return out


def mathieu_eval(char: MathieuCharacteristic, nu, derivative: int = 0):
    """ce_n(p, nu) or se_n(p, nu) (or a nu-derivative) from the Fourier series."""
    nu = np.asarray(nu, dtype=float)
    h = np.asarray(char.harmonics, dtype=float)
    c = np.asarray(char.fourier)
    arg = np.multiply.outer(nu, h)
    # d^m/dnu^m of cos(h nu) = h^m cos(h nu + m pi/2); same shift for sin
    shift = derivative * math.pi / 2
    basis = np.cos(arg + shift) if char.parity == "cosine" else np.sin(arg + shift)
    val = basis @ (c * h**derivative)
    return val if val.ndim else float(val)


def mathieu_residual(char: MathieuCharacteristic, nu) -> np.ndarray:
    """|G'' + (a - 2p cos 2nu) G| relative to sum_k |coefficient| k^2."""
    g = mathieu_eval(char, nu)
    g2 = mathieu_eval(char, nu, derivative=2)
    nu = np.asarray(nu, dtype=float)
    res = np.abs(g2 + (char.value - 2 * char.p * np.cos(2 * nu)) * g)
    h = np.asarray(char.harmonics, dtype=float)
    scale = float(np.sum(np.abs(char.fourier) * (h**2 + abs(char.value) + 2 * abs(char.p))))
    return res / scale


@dataclass(frozen=True)
class MathieuFactor:
    """Angular factor G(nu) of a mixed Razavy-Mathieu eigenfunction."""

    characteristic: MathieuCharacteristic

    @property
    def parity(self) -> Parity:
        return self.characteristic.parity

    @property
    def order(self) -> int:
        return self.characteristic.order

    def __call__(self, nu):
        return mathieu_eval(self.characteristic, nu)
