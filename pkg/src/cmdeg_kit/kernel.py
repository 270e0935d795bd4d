"""The Laplace kernel of Psi(x) = psi'(x)^2 + psi''(x) and the facts about it.

``sigma(s) = s / (1 - e^{-s})`` (with ``sigma(0) = 1``) is the density of
``psi'``. The kernel ``q(t) = (sigma * sigma)(t) - t sigma(t)`` satisfies
``Psi(x) = int_0^inf q(t) e^{-xt} dt``; its derivatives through order four
are convolutions plus boundary terms.

Closed forms for ``sigma^(k)`` are 0/0 at the origin, so every evaluator
switches to the Maclaurin series ``sum B_n^+ s^n / n!`` for
``|s| < ctx.series_radius``. For ``s > 0`` the closed forms are rewritten in
``u = e^{-s}`` so they never overflow.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._bernoulli import bernoulli_plus
from ._quad import adaptive_quad
from .context import DEFAULT_CONTEXT, DomainError, EvalContext

SERIES_TERMS = 20
_COEFFS = [float(bernoulli_plus(n)) / math.factorial(n) for n in range(SERIES_TERMS + 5)]

_LOG_MAX = math.log(1.7976931348623157e308)
# h_1 contains e^{4s}
H_CHAIN_S_MAX = _LOG_MAX / 4


def _series(k: int, s: float) -> float:
    # d^k/ds^k sum_n c_n s^n = sum_n c_n n!/(n-k)! s^(n-k), SERIES_TERMS terms kept
    acc = 0.0
    for j in range(SERIES_TERMS - 1, -1, -1):
        n = j + k
        acc = acc * s + _COEFFS[n] * math.perm(n, k)
    return acc


def sigma(s: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """``s / (1 - e^{-s})``, continuous at 0 with value 1."""
    if abs(s) < ctx.series_radius:
        return _series(0, s)
    return s / -math.expm1(-s)


def sigma_deriv(k: int, s: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """k-th derivative of sigma, k in 0..4."""
    if k == 0:
        return sigma(s, ctx)
    if k not in (1, 2, 3, 4):
        raise DomainError(f"derivative order must be 0..4, got {k}")
    if abs(s) < ctx.series_radius:
        return _series(k, s)
    if s > 0:
        u = math.exp(-s)
        d = -math.expm1(-s)  # 1 - u
        if k == 1:
            return (1.0 - (s + 1.0) * u) / d ** 2
        if k == 2:
            return ((s - 2.0) + (s + 2.0) * u) * u / d ** 3
        if k == 3:
            return -((s - 3.0) + 4.0 * s * u + (s + 3.0) * u * u) * u / d ** 4
        return (((s - 4.0) + (11.0 * s - 12.0) * u + (11.0 * s + 12.0) * u * u
                 + (s + 4.0) * u ** 3) * u / d ** 5)
    e = math.exp(s)
    em1 = math.expm1(s)
    if k == 1:
        return (e - s - 1.0) * e / em1 ** 2
    if k == 2:
        return ((s - 2.0) * e + s + 2.0) * e / em1 ** 3
    if k == 3:
        return -((s - 3.0) * e * e + 4.0 * s * e + s + 3.0) * e / em1 ** 4
    return (((s - 4.0) * e ** 3 + (11.0 * s - 12.0) * e * e + (11.0 * s + 12.0) * e
             + s + 4.0) * e / em1 ** 5)


# q^(k)(t) = int_0^t a(s) b(t-s) ds + boundary(t); (a, b) derivative orders
_CONV_ORDERS = {0: (0, 0), 1: (0, 1), 2: (1, 1), 3: (1, 2), 4: (2, 2)}


def _boundary(k: int, t: float, ctx: EvalContext) -> float:
    sd = lambda j: sigma_deriv(j, t, ctx)  # noqa: E731
    if k == 0:
        return -t * sd(0)
    if k == 1:
        return -t * sd(1)
    if k == 2:
        return -t * sd(2)
    if k == 3:
        # sigma'(0) = 1/2
        return 0.5 * sd(1) - sd(2) - t * sd(3)
    return sd(2) - 2.0 * sd(3) - t * sd(4)


def convolution(i: int, j: int, t: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """``int_0^t sigma^(i)(s) sigma^(j)(t - s) ds`` split at ``t/2``."""
    if t <= 0:
        return 0.0
    f = lambda s: sigma_deriv(i, s, ctx) * sigma_deriv(j, t - s, ctx)  # noqa: E731
    half = 0.5 * t
    if i == j:
        left, _ = adaptive_quad(f, 0.0, half, rel_tol=ctx.quad_rel_tol)
        return 2.0 * left
    left, _ = adaptive_quad(f, 0.0, half, rel_tol=ctx.quad_rel_tol)
    right, _ = adaptive_quad(f, half, t, rel_tol=ctx.quad_rel_tol)
    return left + right


def q_deriv(k: int, t: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """k-th derivative of the kernel q at ``t > 0``, k in 0..4.

    q''' and q'''' use the boundary values sigma(0) = 1, sigma'(0) = 1/2 and
    sigma''(0) = 1/6:

        q'''(t)  = (sigma' * sigma'')(t) + sigma'(t)/2 - sigma''(t) - t sigma'''(t)
        q''''(t) = (sigma'' * sigma'')(t) + sigma''(t) - 2 sigma'''(t) - t sigma''''(t)
    """
    if k not in _CONV_ORDERS:
        raise DomainError(f"derivative order must be 0..4, got {k}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    i, j = _CONV_ORDERS[k]
    return convolution(i, j, t, ctx) + _boundary(k, t, ctx)


def q4_lower_bound(t: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """q''''(t) with the convolution replaced by its lower bound ``t sigma''(t) / 6``."""
    s2, s3, s4 = (sigma_deriv(j, t, ctx) for j in (2, 3, 4))
    return t * s2 / 6.0 + s2 - 2.0 * s3 - t * s4


class HChain(NamedTuple):
    h1: float
    dh1: float
    h2: float
    dh2: float
    d2h2: float
    d3h2: float
    h3: float
    dh3: float
    d2h3: float


def h_chain(s: float) -> HChain:
    """The nine exponential polynomials whose positivity makes sigma'' log-concave.

    Valid for ``0 <= s <= H_CHAIN_S_MAX`` (about 177.4, where ``e^{4s}``
    overflows a double).
    """
    if s < 0:
        raise DomainError(f"s must be nonnegative, got {s!r}")
    if s > H_CHAIN_S_MAX:
        raise OverflowError(f"h-chain overflows for s > {H_CHAIN_S_MAX:.1f}")
    e = math.exp(s)
    e2 = e * e
    e3 = e2 * e
    s2 = s * s
    h1 = (e2 * e2 - 4 * (s2 - 3 * s + 4) * e3 - (4 * s2 - 30) * e2
          - 4 * (s2 + 3 * s + 4) * e + 1)
    h2 = e3 - (3 * s2 - 7 * s + 9) * e2 - (2 * s2 + 2 * s - 15) * e - s2 - 5 * s - 7
    dh2 = 3 * e3 - (6 * s2 - 8 * s + 11) * e2 - (2 * s2 + 6 * s - 13) * e - 2 * s - 5
    d2h2 = 9 * e3 - 2 * (6 * s2 - 2 * s + 7) * e2 - (2 * s2 + 10 * s - 7) * e - 2
    h3 = 27 * e2 - 8 * e * (3 * s2 + 2 * s + 3) - 2 * s2 - 14 * s - 3
    dh3 = 54 * e2 - 8 * (3 * s2 + 8 * s + 5) * e - 2 * (2 * s + 7)
    d2h3 = 4 * (27 * e2 - 2 * (3 * s2 + 14 * s + 13) * e - 1)
    return HChain(h1, 4 * h2 * e, h2, dh2, d2h2, h3 * e, h3, dh3, d2h3)


def h3_third(s: float) -> float:
    """Third derivative of h_3: ``8 (27 e^s - 3 s^2 - 20 s - 27) e^s``."""
    e = math.exp(s)
    return 8.0 * (27.0 * e - 3.0 * s * s - 20.0 * s - 27.0) * e


def log_concavity(s: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """Second derivative of ``ln sigma''(s)`` for ``s >= 0``.

    Away from the origin this is ``-h_1(s) / ((e^s - 1)^2 [(s-2) e^s + s + 2]^2)``,
    evaluated with every factor scaled by ``e^{-4s}``.
    """
    if s < 0:
        raise DomainError(f"s must be nonnegative, got {s!r}")
    if s < ctx.series_radius:
        g2, g3, g4 = _series(2, s), _series(3, s), _series(4, s)
        return g4 / g2 - (g3 / g2) ** 2
    u = math.exp(-s)
    s2 = s * s
    num = (1.0 - 4 * (s2 - 3 * s + 4) * u - (4 * s2 - 30) * u * u
           - 4 * (s2 + 3 * s + 4) * u ** 3 + u ** 4)
    den = (math.expm1(-s) ** 2) * ((s - 2.0) + (s + 2.0) * u) ** 2
    return -num / den


class ConvolutionBound(NamedTuple):
    """``A = (sigma'' * sigma'')(t)``, ``B`` its geometric-mean lower bound,
    ``C = t sigma''(t) / 6`` the endpoint lower bound of ``B``."""

    A: float
    B: float
    C: float


def convolution_bound_check(t: float, ctx: EvalContext = DEFAULT_CONTEXT) -> ConvolutionBound:
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    A = convolution(2, 2, t, ctx)
    log_int, _ = adaptive_quad(lambda u: math.log(sigma_deriv(2, u, ctx)), 0.0, t,
                               rel_tol=ctx.quad_rel_tol)
    B = t * math.exp(2.0 * log_int / t)
    C = t * sigma_deriv(2, t, ctx) / 6.0
    return ConvolutionBound(A, B, C)


@dataclasses.dataclass(frozen=True)
class HHReport:
    """Both two-sided Hermite-Hadamard-type estimates on ``[a, b]``.

    ``gap`` is ``mean(f) - (f(a) + f(b))/2``; the first pair bounds ``gap``,
    the second pair bounds ``-gap``.
    """

    a: float
    b: float
    m: float
    M: float
    S2: float
    gap: float
    lhs_gap_lower: float
    lhs_gap_upper: float
    rhs_gap_lower: float
    rhs_gap_upper: float
    tolerance: float

    @property
    def margins(self) -> tuple[float, float, float, float]:
        return (self.gap - self.lhs_gap_lower, self.lhs_gap_upper - self.gap,
                -self.gap - self.rhs_gap_lower, self.rhs_gap_upper + self.gap)

    @property
    def min_margin(self) -> float:
        return min(self.margins)

    @property
    def holds(self) -> bool:
        return self.min_margin >= -self.tolerance


HH_SCAN_POINTS = 1000
HH_SAFETY = 0.10


def hh_bounds_check(f: Callable[[float], float], a: float, b: float,
                    m: float | None = None, M: float | None = None, *,
                    df: Callable[[float], float],
                    d2f: Callable[[float], float] | None = None,
                    ctx: EvalContext = DEFAULT_CONTEXT) -> HHReport:
    """Evaluate the bounds on ``mean(f) - (f(a)+f(b))/2`` given ``m <= f'' <= M``.

    When ``m`` or ``M`` is omitted it is taken from a 1000-point scan of
    ``d2f`` widened by 10% of the observed range.
    """
    if not a < b:
        raise DomainError("need a < b")
    if m is None or M is None:
        if d2f is None:
            raise DomainError("d2f is required when m or M is not given")
        vals = [d2f(x) for x in np.linspace(a, b, HH_SCAN_POINTS)]
        lo, hi = min(vals), max(vals)
        pad = HH_SAFETY * (hi - lo)
        m = lo - pad if m is None else m
        M = hi + pad if M is None else M
    if m > M:
        raise DomainError("need m <= M")
    width = b - a
    integral, err = adaptive_quad(f, a, b, rel_tol=ctx.quad_rel_tol)
    fa, fb = f(a), f(b)
    gap = integral / width - 0.5 * (fa + fb)
    S2 = (df(b) - df(a)) / width
    w2 = width * width
    tol = 1e-12 * max(1.0, abs(gap), abs(fa), abs(fb)) + err / width
    return HHReport(a, b, m, M, S2, gap,
                    (2 * m - 3 * S2) / 12 * w2, (2 * M - 3 * S2) / 12 * w2,
                    (3 * S2 - M) / 24 * w2, (3 * S2 - m) / 24 * w2, tol)


@dataclasses.dataclass(frozen=True)
class ProductVerdict:
    lam: float
    grid: tuple[float, ...]
    values: tuple[float, ...]
    violations: tuple[tuple[float, float], ...]
    tolerance: float

    @property
    def verdict(self) -> bool:
        return not self.violations


def product_monotonicity_check(lam: float, grid: Sequence[float],
                               ctx: EvalContext = DEFAULT_CONTEXT) -> ProductVerdict:
    """Is ``x -> sigma''(x) sigma''(lam - x)`` rising before ``lam/2`` and falling after?

    Adjacent grid pairs on the same side of ``lam/2`` are compared; pairs that
    straddle it are skipped. Violations are reported as ``(x_left, x_right)``.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    xs = [float(x) for x in grid]
    if any(not 0 < x < lam for x in xs) or any(b < a for a, b in zip(xs, xs[1:])):
        raise DomainError("grid must be sorted and inside (0, lambda)")
    vals = [sigma_deriv(2, x, ctx) * sigma_deriv(2, lam - x, ctx) for x in xs]
    tol = 1e-12 * max([1.0] + [abs(v) for v in vals])
    half = 0.5 * lam
    bad = []
    for (x0, v0), (x1, v1) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        if x1 <= half and v1 < v0 - tol:
            bad.append((x0, x1))
        elif x0 >= half and v1 > v0 + tol:
            bad.append((x0, x1))
    return ProductVerdict(lam, tuple(xs), tuple(vals), tuple(bad), tol)


@dataclasses.dataclass(frozen=True)
class KernelSample:
    t: float
    sigma: float
    dsigma: tuple[float, float, float, float]
    q4: float
    logconc: float


def kernel_sample(t: float, ctx: EvalContext = DEFAULT_CONTEXT) -> KernelSample:
    return KernelSample(
        t=t,
        sigma=sigma(t, ctx),
        dsigma=tuple(sigma_deriv(k, t, ctx) for k in range(1, 5)),
        q4=q_deriv(4, t, ctx),
        logconc=log_concavity(t, ctx),
    )


# leading exponential rate of each h-chain member; 64 bounds the coefficient mass near 0
_CHAIN_RATES = (4, 4, 3, 3, 3, 3, 2, 2, 2)
CHAIN_TOL = 1e-12
CONV_BOUND_TS = (0.1, 1.0, 5.0, 10.0)


def chain_grid() -> np.ndarray:
    return np.geomspace(1e-3, 30.0, 200)


@dataclasses.dataclass(frozen=True)
class ChainReport:
    """Sign facts behind ``q'''' > 0``: the h-chain, log-concavity of
    ``sigma''``, ``q''''`` itself, and the ordering ``A >= B >= C``."""

    grid: tuple[float, ...]
    failures: tuple[tuple[str, float, float], ...]
    bounds: tuple[tuple[float, ConvolutionBound], ...]
    tolerance: float

    @property
    def verdict(self) -> str:
        return "fail" if self.failures else "pass"

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "grid": {"min": min(self.grid), "max": max(self.grid),
                     "points": len(self.grid), "scale": "log"},
            "verdict": self.verdict,
            "failures": [{"quantity": q, "x": x, "value": v} for q, x, v in self.failures],
            "convolution_bounds": [{"t": t, "A": b.A, "B": b.B, "C": b.C}
                                   for t, b in self.bounds],
            "tolerance": self.tolerance,
        }


def positivity_chain_check(grid: Sequence[float] | None = None,
                           ctx: EvalContext = DEFAULT_CONTEXT,
                           ts: Sequence[float] = CONV_BOUND_TS) -> ChainReport:
    xs = tuple(float(s) for s in (chain_grid() if grid is None else grid))
    bad = []
    for s in xs:
        for name, v, rate in zip(HChain._fields, h_chain(s), _CHAIN_RATES):
            scale = 64.0 * (1.0 + s * s) * math.exp(rate * s)
            if v < -CHAIN_TOL * scale:
                bad.append((name, s, v))
        lc = log_concavity(s, ctx)
        if not lc < 0:
            bad.append(("log_concavity", s, lc))
        q4 = q_deriv(4, s, ctx)
        if not q4 > 0:
            bad.append(("q4", s, q4))
    bounds = []
    for t in ts:
        b = convolution_bound_check(t, ctx)
        bounds.append((float(t), b))
        if not b.A >= b.B:
            bad.append(("A>=B", float(t), b.A - b.B))
        if not b.B >= b.C:
            bad.append(("B>=C", float(t), b.B - b.C))
    return ChainReport(xs, tuple(bad), tuple(bounds), CHAIN_TOL)
