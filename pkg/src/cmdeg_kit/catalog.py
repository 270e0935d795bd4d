"""Closed-form test functions with exact derivatives of every order used.

Each function is stored as ``f(x) = x^{-p} g(x)`` where ``g`` is regular at
the origin. Derivatives of ``x^alpha f(x) = x^{alpha-p} g(x)`` then follow
from the Leibniz rule without the catastrophic cancellation that a pole at 0
would cause.

For Psi = psi'^2 + psi'' the regular factor ``g = x^4 Psi`` is evaluated in
three regimes:

* ``x < SMALL_X``: with ``A(x) = psi'(x+1)`` the recurrence gives
  ``g = 1 - 2x + 2x^2 A + x^4 (A^2 + A')``, free of the pole;
* ``SMALL_X <= x < ASYM_X``: the product rule on ``psi'^2 + psi''``;
* ``x >= ASYM_X``: the asymptotic series of ``g`` in ``1/x``, whose exact
  rational coefficients are built from those of ``psi'``. This avoids the
  ``x^2`` cancellation between ``psi'^2`` and ``psi''``.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from ._bernoulli import bernoulli
from .context import DEFAULT_CONTEXT, CatalogError, DomainError, EvalContext
from .polygamma import polygamma

SMALL_X = 2.0
ASYM_X = 12.0
ASYM_POWERS = 44
# psi^(K+2) is the highest order needed at derivative order K
MAX_ORDER = 18


def falling(beta: float, i: int) -> float:
    out = 1.0
    for j in range(i):
        out *= beta - j
    return out


def leibniz_power(beta: float, x: float, g: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives ``d^k [x^beta g(x)]`` for k <= K and the largest summand of each.

    ``g`` holds ``g^(0..K)(x)``. The second array is the rounding scale used
    by sign tests.
    """
    powers = [falling(beta, i) * x ** (beta - i) for i in range(K + 1)]
    vals = np.empty(K + 1)
    scales = np.empty(K + 1)
    for k in range(K + 1):
        terms = [math.comb(k, i) * powers[i] * g[k - i] for i in range(k + 1)]
        vals[k] = math.fsum(terms)
        scales[k] = max(abs(t) for t in terms)
    return vals, scales


def psi_capital_derivs(x: float, K: int, ctx: EvalContext = DEFAULT_CONTEXT) -> np.ndarray:
    """``Psi^(m)(x)`` for m <= K by the product rule on ``psi'^2 + psi''``."""
    _check_order(K)
    p = [0.0] + [polygamma(n, x, ctx) for n in range(1, K + 3)]
    out = np.empty(K + 1)
    for m in range(K + 1):
        terms = [math.comb(m, j) * p[1 + j] * p[1 + m - j] for j in range(m + 1)]
        terms.append(p[m + 2])
        out[m] = math.fsum(terms)
    return out


@lru_cache(maxsize=None)
def _trigamma_series() -> tuple[Fraction, ...]:
    # a[i] is the coefficient of x^-i in psi'(x)
    a = [Fraction(0)] * (ASYM_POWERS + 6)
    a[1], a[2] = Fraction(1), Fraction(1, 2)
    k = 1
    while 2 * k + 1 < len(a):
        a[2 * k + 1] = bernoulli(2 * k)
        k += 1
    return tuple(a)


@lru_cache(maxsize=None)
def g_asymptotic_coefficients() -> tuple[Fraction, ...]:
    """Exact ``c_j`` with ``x^4 Psi(x) ~ sum_j c_j x^{-j}`` (c_0 = 1/12, c_1 = 1/6)."""
    a = _trigamma_series()
    out = []
    for j in range(ASYM_POWERS):
        p = j + 4
        c = sum((a[i] * a[p - i] for i in range(1, p)), Fraction(0))
        c -= (p - 1) * a[p - 1]
        out.append(c)
    return tuple(out)


def _series_derivs(coeffs, offset: int, x: float, K: int) -> np.ndarray:
    # d^k of sum_j coeffs[j] x^-(j + offset)
    inv = 1.0 / x
    out = np.empty(K + 1)
    for k in range(K + 1):
        terms = []
        for j, c in enumerate(coeffs):
            if c == 0.0:
                continue
            n = j + offset
            rising = math.prod(range(n, n + k)) if k else 1
            terms.append(c * (-1) ** k * rising * inv ** (n + k))
        out[k] = math.fsum(terms)
    return out


def _g_asymptotic(x: float, K: int) -> np.ndarray:
    return _series_derivs([float(c) for c in g_asymptotic_coefficients()], 0, x, K)


def _shift_parts(x: float, K: int, ctx: EvalContext) -> tuple[list, list]:
    # A^(j) = psi^(1+j)(x+1) for j <= K+1, and P^(j) for P = A^2 + A'
    A = [polygamma(1 + j, x + 1.0, ctx) for j in range(K + 2)]
    P = []
    for j in range(K + 1):
        terms = [math.comb(j, l) * A[l] * A[j - l] for l in range(j + 1)]
        terms.append(A[j + 1])
        P.append(math.fsum(terms))
    return A, P


def _poly_times(deg: int, x: float, F, k: int) -> list:
    # summands of d^k [x^deg F(x)]
    return [math.comb(k, i) * falling(deg, i) * x ** (deg - i) * F[k - i]
            for i in range(min(deg, k) + 1)]


def _g_shifted(x: float, K: int, ctx: EvalContext) -> np.ndarray:
    A, P = _shift_parts(x, K, ctx)
    out = np.empty(K + 1)
    for k in range(K + 1):
        terms = []
        if k == 0:
            terms.append(1.0 - 2.0 * x)
        elif k == 1:
            terms.append(-2.0)
        terms += [2.0 * t for t in _poly_times(2, x, A, k)]
        terms += _poly_times(4, x, P, k)
        out[k] = math.fsum(terms)
    return out


def _g_direct(x: float, K: int, ctx: EvalContext) -> np.ndarray:
    d = psi_capital_derivs(x, K, ctx)
    out = np.empty(K + 1)
    for k in range(K + 1):
        out[k] = math.fsum(math.comb(k, i) * falling(4, i) * x ** (4 - i) * d[k - i]
                           for i in range(min(4, k) + 1))
    return out


def psi_regular_derivs(x: float, K: int, ctx: EvalContext = DEFAULT_CONTEXT) -> np.ndarray:
    """Derivatives of ``g(x) = x^4 Psi(x)`` of orders 0..K."""
    _check_order(K)
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    if x < SMALL_X:
        return _g_shifted(x, K, ctx)
    if x < ASYM_X:
        return _g_direct(x, K, ctx)
    return _g_asymptotic(x, K)


def _check_order(K: int):
    if not 0 <= K <= MAX_ORDER:
        raise DomainError(f"derivative order must be in 0..{MAX_ORDER}, got {K}")


def _rational_h_derivs(x: float, lam: float, K: int) -> np.ndarray:
    # (x^2 + lam x + 12) / (12 (x+1)^2) = (1 + (lam-2)/y + (13-lam)/y^2) / 12, y = x+1
    y = x + 1.0
    out = np.empty(K + 1)
    for k in range(K + 1):
        sgn = (-1) ** k
        t1 = (lam - 2.0) * sgn * math.factorial(k) / y ** (1 + k)
        t2 = (13.0 - lam) * sgn * math.factorial(k + 1) / y ** (2 + k)
        out[k] = ((1.0 if k == 0 else 0.0) + t1 + t2) / 12.0
    return out


RegularDerivs = Callable[[float, int, EvalContext], np.ndarray]


@dataclasses.dataclass(frozen=True)
class CatalogFunction:
    """``f(x) = x^{-pole_order} g(x)`` with exact derivatives of ``g``."""

    id: str
    pole_order: float
    regular: RegularDerivs = dataclasses.field(repr=False, compare=False)
    domain_note: str = ""
    params: tuple = ()

    def derivatives(self, x: float, K: int, ctx: EvalContext = DEFAULT_CONTEXT) -> np.ndarray:
        """``f^(k)(x)`` for k = 0..K."""
        return self.scaled_derivatives(x, K, 0.0, ctx)[0]

    def scaled_derivatives(self, x: float, K: int, alpha: float,
                           ctx: EvalContext = DEFAULT_CONTEXT) -> tuple[np.ndarray, np.ndarray]:
        """Derivatives of ``x^alpha f(x)`` and their rounding scales."""
        g = self.regular(x, K, ctx)
        return leibniz_power(alpha - self.pole_order, x, g, K)

    def __call__(self, x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
        return float(self.derivatives(x, 0, ctx)[0])


def _power(a: float) -> CatalogFunction:
    def regular(x, K, ctx):
        g = np.zeros(K + 1)
        g[0] = 1.0
        return g
    return CatalogFunction(f"power:{a:g}", a, regular, f"x^-{a:g}", (a,))


def _exp() -> CatalogFunction:
    def regular(x, K, ctx):
        e = math.exp(-x)
        return np.array([(-1) ** k * e for k in range(K + 1)])
    return CatalogFunction("exp", 0.0, regular, "e^-x")


def _inv_x_x1() -> CatalogFunction:
    def regular(x, K, ctx):
        return np.array([(-1) ** k * math.factorial(k) / (x + 1.0) ** (k + 1)
                         for k in range(K + 1)])
    return CatalogFunction("inv_x_x1", 1.0, regular, "1/(x(x+1))")


def _psi() -> CatalogFunction:
    return CatalogFunction("Psi", 4.0, psi_regular_derivs, "psi'(x)^2 + psi''(x)")


@lru_cache(maxsize=None)
def _h_asymptotic_coefficients(lam: float) -> tuple[float, ...]:
    # x^4 h_lam ~ sum_j d_j x^-j; the rational part expanded in 1/x exactly
    L = Fraction(lam)
    out = []
    for j, c in enumerate(g_asymptotic_coefficients()):
        r = Fraction(1) if j == 0 else Fraction(0)
        if j >= 1:
            r += (L - 2) * (-1) ** (j - 1)
        if j >= 2:
            r += (13 - L) * (-1) ** j * (j - 1)
        out.append(float(c - r / 12))
    return tuple(out)


def _h_small(x: float, lam: float, q: int, K: int, ctx: EvalContext) -> np.ndarray:
    # x^4 h_lam = -x (lam + 37x + 24x^2) / (12 (x+1)^2) + 2x^2 A + x^4 P exactly,
    # so the factor x^q divides out by hand
    A, P = _shift_parts(x, K, ctx)
    y = x + 1.0
    if q == 1:
        rat = ((1, -11.0), (2, lam - 13.0))
        const = -2.0
    else:
        rat = ((1, 24.0), (2, 13.0))
        const = 0.0
    out = np.empty(K + 1)
    for k in range(K + 1):
        terms = [const] if k == 0 else []
        for n, c in rat:
            terms.append(-c / 12.0 * (-1) ** k * math.prod(range(n, n + k)) / y ** (n + k))
        terms += [2.0 * t for t in _poly_times(2 - q, x, A, k)]
        terms += _poly_times(4 - q, x, P, k)
        out[k] = math.fsum(terms)
    return out


def h_regular_derivs(x: float, lam: float, K: int,
                     ctx: EvalContext = DEFAULT_CONTEXT) -> np.ndarray:
    """Derivatives of ``x^p h_lam(x)``, with ``p = 2`` if ``lam == 0`` and 3 otherwise.

    ``x^4 h_lam`` vanishes to order ``4 - p`` at the origin, so this factor is
    the one free of cancellation near 0.
    """
    _check_order(K)
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    q = 2 if lam == 0 else 1
    if x < SMALL_X:
        return _h_small(x, lam, q, K, ctx)
    if x < ASYM_X:
        G = _g_direct(x, K, ctx) - _rational_h_derivs(x, lam, K)
        return leibniz_power(-q, x, G, K)[0]
    return _series_derivs(_h_asymptotic_coefficients(float(lam)), q, x, K)


def _h(lam: float, sign: float) -> CatalogFunction:
    def regular(x, K, ctx):
        return sign * h_regular_derivs(x, lam, K, ctx)
    p = 2.0 if lam == 0 else 3.0
    if sign > 0:
        return CatalogFunction(f"h_lambda:{lam:g}", p, regular,
                               f"Psi - (x^2+{lam:g}x+12)/(12x^4(x+1)^2)", (lam,))
    return CatalogFunction(f"neg_h_mu:{lam:g}", p, regular,
                           f"(x^2+{lam:g}x+12)/(12x^4(x+1)^2) - Psi", (lam,))


CATALOG_IDS = ("Psi", "h_lambda", "neg_h_mu", "inv_x", "power", "exp", "inv_x_x1")


def get(fn_id: str, param: float | None = None) -> CatalogFunction:
    """Look up a catalog function; ``power``, ``h_lambda`` and ``neg_h_mu`` need ``param``.

    ``"power:1.5"``-style ids carry the parameter inline.
    """
    if ":" in fn_id:
        fn_id, raw = fn_id.split(":", 1)
        param = float(raw)
    if fn_id == "Psi":
        return _psi()
    if fn_id == "inv_x":
        return _power(1.0)
    if fn_id == "exp":
        return _exp()
    if fn_id == "inv_x_x1":
        return _inv_x_x1()
    if fn_id in ("power", "h_lambda", "neg_h_mu"):
        if param is None:
            raise CatalogError(f"catalog function {fn_id!r} needs a parameter")
        if fn_id == "power":
            return _power(float(param))
        return _h(float(param), 1.0 if fn_id == "h_lambda" else -1.0)
    raise CatalogError(f"unknown catalog function {fn_id!r}; known: {', '.join(CATALOG_IDS)}")


def strongcm_catalog() -> tuple[CatalogFunction, ...]:
    """The fixed family used by the strong-CM equivalence suite."""
    return (get("inv_x"), get("power", 1.5), get("power", 3.0), get("power", 0.5),
            get("exp"), get("inv_x_x1"), get("Psi"))
