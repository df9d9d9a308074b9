"""
Polynomial solutions of the quasi-exactly solvable confluent Heun equation.

The equation, in the variable z, is

    (z^2 - 1) u'' + (eps/2 (z^2 - 1) + gamma (z - 1) + delta (z + 1)) u'
        + (alpha/2 (z + 1) - q) u = 0.

When ``alpha = -n * eps`` for a non-negative integer n, the Frobenius series
around z = -1,

    u(z) = sum_k (-1)^k P_k(q) / (2^k k! (gamma)_k) (z + 1)^k,

truncates to a polynomial of degree n whenever q is a root of P_{n+1}.  The
P_k are generated by the three-term recurrence

    P_{k+1} = (q - k (delta + gamma - eps + k - 1)) P_k
              - k eps (n - k + 1) (gamma + k - 1) P_{k-1},

with P_0 = 1, P_1 = q.

Scalars are carried as :class:`fractions.Fraction` whenever every parameter is
rational (ints and Fractions), and as floats otherwise.  Roots are always found
in floating point; a root that turns out to be a small-denominator rational
is confirmed exactly and carried along as a Fraction as well.

Branch labels follow the ascending order of the real roots: j = 1 is the
smallest q.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Union

import numpy as np

from .errors import RootRealityError

Scalar = Union[Fraction, float]

#: relative imaginary-part threshold above which a companion eigenvalue is
#: declared complex
IMAG_TOL = 1e-10
#: minimal separation between consecutive roots
MIN_GAP = 1e-10
NEWTON_MAX_STEPS = 50
NEWTON_RTOL = 1e-14
#: largest denominator tried when promoting a float root to an exact rational
EXACT_DENOMINATOR_LIMIT = 10**6


def as_scalar(x) -> Scalar:
    """Return ``x`` as a Fraction if it is rational, else as a float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("boolean is not a valid scalar")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    return float(x)


def is_exact(*values) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def pochhammer(a: Scalar, k: int) -> Scalar:
    out = Fraction(1) if isinstance(a, Fraction) else 1.0
    for i in range(k):
        out *= a + i
    return out


@dataclass(frozen=True)
class CHEqParameters:
    """Parameters (gamma, delta, epsilon, n) of one QES confluent Heun problem.

    ``alpha`` is not stored; it is fixed by the QES condition alpha = -n*eps.
    """

    gamma: Scalar
    delta: Scalar
    epsilon: Scalar
    n: int

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_scalar(self.gamma))
        object.__setattr__(self, "delta", as_scalar(self.delta))
        object.__setattr__(self, "epsilon", as_scalar(self.epsilon))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise ValueError(f"QES level n must be a non-negative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def alpha(self) -> Scalar:
        return -self.n * self.epsilon

    @property
    def exact(self) -> bool:
        return is_exact(self.gamma, self.delta, self.epsilon)

    def diagonal(self, k: int) -> Scalar:
        """Coefficient b_k in P_{k+1} = (q - b_k) P_k - c_k P_{k-1}."""
        return k * (self.delta + self.gamma - self.epsilon + k - 1)

    def coupling(self, k: int) -> Scalar:
        """Coefficient c_k in P_{k+1} = (q - b_k) P_k - c_k P_{k-1}."""
        return k * self.epsilon * (self.n - k + 1) * (self.gamma + k - 1)


@dataclass(frozen=True)
class RecurrencePolynomialSet:
    """P_0 .. P_{n+1}, each stored as ascending coefficients in q."""

    params: CHEqParameters
    polys: tuple[tuple[Scalar, ...], ...]

    @property
    def top(self) -> tuple[Scalar, ...]:
        """Coefficients of P_{n+1}, whose roots quantize q."""
        return self.polys[-1]

    def evaluate(self, k: int, q: Scalar) -> Scalar:
        """Horner evaluation of P_k at q."""
        acc = 0
        for c in reversed(self.polys[k]):
            acc = acc * q + c
        return acc

    def values(self, q: Scalar) -> list[Scalar]:
        """All of P_0(q) .. P_{n+1}(q), computed by running the recurrence."""
        return _recurrence_values(self.params, q)[0]


def build_recurrence(params: CHEqParameters) -> RecurrencePolynomialSet:
    """Generate the polynomial family P_0 .. P_{n+1} for ``params``."""
    one = Fraction(1) if params.exact else 1.0
    zero = one - one
    polys: list[list[Scalar]] = [[one], [zero, one]]
    for k in range(1, params.n + 1):
        b = params.diagonal(k)
        c = params.coupling(k)
        pk, pkm1 = polys[k], polys[k - 1]
        nxt = [zero] * (k + 2)
        for i, coef in enumerate(pk):
            nxt[i + 1] += coef
            nxt[i] -= b * coef
        for i, coef in enumerate(pkm1):
            nxt[i] -= c * coef
        polys.append(nxt)
    return RecurrencePolynomialSet(params, tuple(tuple(p) for p in polys))


def _recurrence_values(params: CHEqParameters, q):
    """Values and q-derivatives of P_0 .. P_{n+1} at q via the recurrence."""
    p_prev, p_cur = q * 0 + 1, q
    d_prev, d_cur = q * 0, q * 0 + 1
    vals, ders = [p_prev, p_cur], [d_prev, d_cur]
    for k in range(1, params.n + 1):
        b = params.diagonal(k)
        c = params.coupling(k)
        p_next = (q - b) * p_cur - c * p_prev
        d_next = p_cur + (q - b) * d_cur - c * d_prev
        p_prev, p_cur = p_cur, p_next
        d_prev, d_cur = d_cur, d_next
        vals.append(p_cur)
        ders.append(d_cur)
    return vals, ders


@dataclass(frozen=True)
class QESRoot:
    """One quantized accessory parameter q_j (1-based j, ascending order)."""

    j: int
    q: float
    residual: float
    exact: Fraction | None = None

    @property
    def value(self) -> Scalar:
        """The exact root when known, the float otherwise."""
        return self.exact if self.exact is not None else self.q


def companion_matrix(monic: Sequence[float]) -> np.ndarray:
    """Companion matrix of a monic polynomial given in ascending coefficients."""
    deg = len(monic) - 1
    m = np.zeros((deg, deg))
    if deg > 1:
        m[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    m[:, -1] = -np.asarray(monic[:-1], dtype=float)
    return m


def _newton_polish(params: CHEqParameters, q: float) -> tuple[float, float]:
    fparams = _float_params(params)
    for _ in range(NEWTON_MAX_STEPS):
        vals, ders = _recurrence_values(fparams, q)
        f, df = vals[-1], ders[-1]
        if df == 0:
            break
        step = f / df
        q -= step
        if abs(step) <= NEWTON_RTOL * max(1.0, abs(q)):
            break
    return q, abs(_recurrence_values(fparams, q)[0][-1])


def _float_params(params: CHEqParameters) -> CHEqParameters:
    if not params.exact:
        return params
    return CHEqParameters(float(params.gamma), float(params.delta), float(params.epsilon), params.n)


def _try_exact(recset: RecurrencePolynomialSet, q: float) -> Fraction | None:
    if not recset.params.exact:
        return None
    cand = Fraction(q).limit_denominator(EXACT_DENOMINATOR_LIMIT)
    if recset.evaluate(len(recset.polys) - 1, cand) == 0:
        return cand
    return None


def _check_roots(eig: np.ndarray) -> np.ndarray:
    bad = np.abs(eig.imag) > IMAG_TOL * (1.0 + np.abs(eig.real))
    if np.any(bad):
        raise RootRealityError(f"complex roots of P_(n+1): {eig[bad]}")
    return np.sort(eig.real)


def find_q_roots(recset: RecurrencePolynomialSet) -> list[QESRoot]:
    """All n+1 roots of P_{n+1}, sorted ascending and labelled j = 1..n+1.

    Companion-matrix eigenvalues (LAPACK ``geev`` balances the matrix first)
    are polished by Newton iteration on the recurrence.

    Raises
    ------
    RootRealityError
        If a root is complex, or two roots are closer than ``MIN_GAP``.
    """
    params = recset.params
    if params.n == 0:
        return [QESRoot(1, 0.0, 0.0, Fraction(0) if params.exact else None)]
    top = [float(c) for c in recset.top]
    approx = _check_roots(np.linalg.eigvals(companion_matrix(top)))
    polished = []
    for q0 in approx:
        q, res = _newton_polish(params, float(q0))
        polished.append((q, res))
    polished.sort()
    qs = np.array([q for q, _ in polished])
    gaps = np.diff(qs)
    if gaps.size and gaps.min() <= MIN_GAP * (1.0 + np.abs(qs).max()):
        raise RootRealityError(f"nearly degenerate roots of P_(n+1): {qs}")
    roots = []
    for j, (q, res) in enumerate(polished, start=1):
        exact = _try_exact(recset, q)
        if exact is not None:
            q, res = float(exact), 0.0
        roots.append(QESRoot(j, q, res, exact))
    return roots


def q_roots_batch(gamma: float, delta: float, epsilons: np.ndarray, n: int) -> np.ndarray:
    """Sorted roots of P_{n+1} for many epsilon values at once.

    Returns an array of shape ``(len(epsilons), n + 1)``.  No Newton polish:
    this is the scan path used to bracket matches, which are then refined
    through :func:`find_q_roots`.
    """
    eps = np.asarray(epsilons, dtype=float)
    m = eps.size
    if n == 0:
        return np.zeros((m, 1))
    # float recurrence on coefficient arrays, vectorized over epsilon
    polys = [np.zeros((m, 1)) + 1.0, np.tile([0.0, 1.0], (m, 1))]
    for k in range(1, n + 1):
        b = k * (delta + gamma - eps + k - 1)
        c = k * eps * (n - k + 1) * (gamma + k - 1)
        nxt = np.zeros((m, k + 2))
        nxt[:, 1:] += polys[k]
        nxt[:, :-1] -= b[:, None] * polys[k]
        nxt[:, :-2] -= c[:, None] * polys[k - 1]
        polys.append(nxt)
    top = polys[-1]
    comp = np.zeros((m, n + 1, n + 1))
    if n > 0:
        comp[:, np.arange(1, n + 1), np.arange(n)] = 1.0
    comp[:, :, -1] = -top[:, :-1]
    eig = np.linalg.eigvals(comp)
    bad = np.abs(eig.imag) > IMAG_TOL * (1.0 + np.abs(eig.real))
    if np.any(bad):
        raise RootRealityError("complex roots of P_(n+1) along an epsilon scan")
    return np.sort(eig.real, axis=1)


@dataclass(frozen=True)
class HeunPolynomialSolution:
    """u(z) = sum_k coeffs[k] (z + 1)^k for one quantized root."""

    params: CHEqParameters
    root: QESRoot
    coeffs: tuple[Scalar, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return self.derivative(z, 0)

    def derivative(self, z, order: int = 1):
        """Value of the ``order``-th derivative of u at z (float arithmetic)."""
        w = np.asarray(z, dtype=float) + 1.0
        c = [float(x) for x in self.coeffs]
        for _ in range(order):
            c = [k * c[k] for k in range(1, len(c))] or [0.0]
        acc = np.zeros_like(w)
        for coef in reversed(c):
            acc = acc * w + coef
        return acc

    @cached_property
    def shifted_roots(self) -> tuple[tuple[float, ...], tuple[complex, ...]]:
        """Zeros of u in the variable w = z + 1, Newton-polished.

        Returned as (real roots, complex roots with positive imaginary part).
        """
        c = [float(x) for x in self.coeffs]
        if len(c) < 2:
            return (), ()
        raw = np.roots(c[::-1])
        polished = []
        for r in raw:
            r = complex(r)
            for _ in range(NEWTON_MAX_STEPS):
                f = df = 0j
                for coef in reversed(c):
                    df = df * r + f
                    f = f * r + coef
                if df == 0:
                    break
                step = f / df
                r -= step
                if abs(step) <= NEWTON_RTOL * max(1.0, abs(r)):
                    break
            polished.append(r)
        real = tuple(sorted(r.real for r in polished if abs(r.imag) <= IMAG_TOL * (1 + abs(r.real))))
        cplx = tuple(r for r in polished if r.imag > IMAG_TOL * (1 + abs(r.real)))
        return real, cplx

    def evaluate_shifted(self, w):
        """u at z = w - 1, evaluated in factored form around its zeros.

        The product form keeps full relative precision close to a zero of u,
        where summing the expansion in powers of w would cancel.
        """
        w = np.asarray(w, dtype=float)
        real, cplx = self.shifted_roots
        acc = np.full_like(w, float(self.coeffs[-1]))
        for r in real:
            acc = acc * (w - r)
        for r in cplx:
            acc = acc * ((w - r.real) ** 2 + r.imag**2)
        return acc

    def z_coefficients(self) -> list[Scalar]:
        """Ascending coefficients of u in powers of z."""
        out = [self.coeffs[0] * 0] * len(self.coeffs)
        for k, ck in enumerate(self.coeffs):
            for i in range(k + 1):
                out[i] += ck * math.comb(k, i)
        return out

    def monic(self) -> list[Scalar]:
        """Ascending z-coefficients rescaled so the leading one is 1."""
        zc = self.z_coefficients()
        lead = zc[-1]
        return [c / lead for c in zc]


def assemble_polynomial(recset: RecurrencePolynomialSet, root: QESRoot) -> HeunPolynomialSolution:
    """Truncated Frobenius polynomial for root q_j; coefficients in (z + 1)."""
    params = recset.params
    exact = params.exact and root.exact is not None
    if exact:
        q: Scalar = root.exact
        fparams = params
    else:
        q = root.q
        fparams = _float_params(params)
    vals = _recurrence_values(fparams, q)[0]
    coeffs = []
    for k in range(params.n + 1):
        denom = (2**k) * math.factorial(k) * pochhammer(fparams.gamma, k)
        coeffs.append((-1) ** k * vals[k] / denom)
    return HeunPolynomialSolution(params, root, tuple(coeffs))


def frobenius_series(params: CHEqParameters, q: Scalar, terms: int) -> list[Scalar]:
    """First ``terms`` Frobenius coefficients about z = -1, straight from the ODE.

    This solves the two-step coefficient recurrence obtained by substituting
    sum c_k w^k (w = z + 1) into the equation, without reference to P_k.
    """
    g, d, e, a = params.gamma, params.delta, params.epsilon, params.alpha
    if not (params.exact and isinstance(q, Fraction)):
        g, d, e, a, q = float(g), float(d), float(e), float(a), float(q)
    c = [q * 0 + 1]
    prev = q * 0
    for k in range(terms - 1):
        num = c[k] * (k * (k - 1 + g + d - e) - q) + prev * (e * (k - 1) + a) / 2
        prev = c[k]
        c.append(num / (2 * (k + 1) * (k + g)))
    return c[:terms]


def _pmul(a: Sequence[Scalar], b: Sequence[Scalar]) -> list[Scalar]:
    out = [a[0] * 0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _padd(*polys: Sequence[Scalar]) -> list[Scalar]:
    size = max(len(p) for p in polys)
    zero = polys[0][0] * 0
    out = [zero] * size
    for p in polys:
        for i, x in enumerate(p):
            out[i] += x
    return out


def cheq_terms(sol: HeunPolynomialSolution) -> list[list[Scalar]]:
    """The three polynomial terms of the equation (in w = z + 1) applied to u."""
    p = sol.params
    c = list(sol.coeffs)
    if p.exact and sol.root.exact is not None:
        g, d, e, a, q = p.gamma, p.delta, p.epsilon, p.alpha, sol.root.exact
    else:
        c = [float(x) for x in c]
        g, d, e, a, q = float(p.gamma), float(p.delta), float(p.epsilon), float(p.alpha), sol.root.q
    zero = c[0] * 0
    du = [k * c[k] for k in range(1, len(c))] or [zero]
    ddu = [k * du[k] for k in range(1, len(du))] or [zero]
    # z^2 - 1 = w^2 - 2w ; z - 1 = w - 2 ; z + 1 = w
    w2m2w = [zero, zero - 2, zero + 1]
    t2 = _pmul(w2m2w, ddu)
    first = _padd([x * e / 2 for x in w2m2w], [-2 * g + zero, g + d + zero])
    t1 = _pmul(first, du)
    t0 = _pmul([zero - q, zero + a / 2], c)
    return [t2, t1, t0]


def cheq_residual(sol: HeunPolynomialSolution, relative: bool = False) -> Scalar:
    """Max |coefficient| of the equation's left side evaluated on ``sol``.

    Exactly zero in rational arithmetic when the parameters and root are
    rational.  With ``relative=True`` the result is divided by the largest
    coefficient magnitude among the individual terms.
    """
    terms = cheq_terms(sol)
    total = _padd(*terms)
    res = max(abs(x) for x in total)
    if not relative:
        return res
    scale = max(abs(x) for t in terms for x in t)
    return res / scale if scale else res
