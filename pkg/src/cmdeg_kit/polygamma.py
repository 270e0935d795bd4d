"""Polygamma functions psi^(n)(x), n >= 1, for real x > 0.

The main evaluator shifts the argument upward with the recurrence
``psi^(n)(x) = psi^(n)(x+1) + (-1)^(n+1) n! / x^(n+1)`` and then sums the
Bernoulli-number asymptotic series. An independent oracle integrates the
Laplace representation directly.
"""

from __future__ import annotations

import math
from functools import lru_cache

from ._bernoulli import bernoulli
from ._quad import adaptive_quad
from .context import DEFAULT_CONTEXT, DomainError, EvalContext

MAX_ASYM_TERMS = 32
# the shift target grows with n so high orders keep ~1e-16 relative accuracy
ORDER_SHIFT_MARGIN = 10

_LOG_MAX = math.log(1.7976931348623157e308)


@lru_cache(maxsize=None)
def asymptotic_coefficients(n: int, terms: int) -> tuple[tuple[int, float], ...]:
    """``(power, coefficient)`` pairs of the series for ``psi^(n)``, sign included."""
    sign = 1 if n % 2 else -1
    out = [(n, sign * math.factorial(n - 1)), (n + 1, sign * math.factorial(n) / 2)]
    k = 1
    while len(out) < terms:
        c = bernoulli(2 * k) * math.factorial(2 * k + n - 1) / math.factorial(2 * k)
        out.append((2 * k + n, sign * float(c)))
        k += 1
    return tuple(out[:terms])


def _check_args(n, x):
    if not isinstance(n, (int,)) or isinstance(n, bool) or n < 1:
        raise DomainError(f"order n must be an integer >= 1, got {n!r}")
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"x must be positive and finite, got {x!r}")


def polygamma_asymptotic(n: int, z: float, terms: int) -> float:
    """Partial sum of the large-``z`` expansion of ``psi^(n)(z)`` with ``terms`` terms.

    Terms are counted one by one: ``1/z``, ``1/(2 z^2)``, ``1/(6 z^3)``, ...
    for the trigamma function. Accurate only for large ``z``; the series
    diverges for every fixed ``z``.
    """
    _check_args(n, z)
    if not 1 <= terms <= MAX_ASYM_TERMS:
        raise DomainError(f"terms must be in 1..{MAX_ASYM_TERMS}")
    inv = 1.0 / z
    parts = [c * inv ** p for p, c in asymptotic_coefficients(n, terms)]
    return math.fsum(reversed(parts))


def polygamma(n: int, x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """psi^(n)(x) for integer ``n >= 1`` and ``x > 0``."""
    _check_args(n, x)
    # n!/x^(n+1) must be representable
    if math.lgamma(n + 1) - (n + 1) * math.log(x) > _LOG_MAX - 1:
        raise OverflowError(f"psi^({n})({x}) exceeds the floating point range")
    z_min = max(ctx.shift_threshold, n + ORDER_SHIFT_MARGIN)
    m = max(0, math.ceil(z_min - x))
    z = x + m
    tail = polygamma_asymptotic(n, z, min(ctx.asym_terms, MAX_ASYM_TERMS))
    if m == 0:
        return tail
    sign = 1.0 if n % 2 else -1.0
    fact = float(math.factorial(n))
    # all recurrence terms share the sign of the tail, so there is no cancellation
    terms = [fact / (x + j) ** (n + 1) for j in range(m - 1, -1, -1)]
    return math.fsum([abs(tail)] + terms) * sign


def polygamma_integral(n: int, x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """Quadrature of ``(-1)^(n+1) int_0^inf t^n e^(-x t) / (1 - e^(-t)) dt``.

    Independent of :func:`polygamma`; used as an oracle.
    """
    _check_args(n, x)

    def integrand(t):
        if t == 0.0:
            return 1.0 if n == 1 else 0.0
        # t^n / (1 - e^-t) = t^(n-1) * t / (-expm1(-t))
        return t ** (n - 1) * (t / -math.expm1(-t)) * math.exp(-x * t)

    horizon = ctx.effective_horizon(x)
    # the integrand peaks near t = n / x; give QUADPACK the scale explicitly
    scale = n / x
    breaks = sorted({b for b in (0.25 * scale, scale, 4 * scale, 16 * scale)
                     if 0 < b < horizon})
    pieces = []
    edges = [0.0, *breaks, horizon]
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = adaptive_quad(integrand, a, b, rel_tol=ctx.quad_rel_tol * 0.1)
        pieces.append(val)
    value = math.fsum(pieces)
    return value if n % 2 else -value
