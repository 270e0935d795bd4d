"""Psi(x) = psi'(x)^2 + psi''(x), its powers x^alpha Psi(x), and numeric
complete-monotonicity and degree checks.

A check here verifies finitely many necessary conditions: the signs of
``(-1)^k d^k/dx^k [x^alpha f(x)]`` for ``k <= K`` on a finite grid. A passing
report means "consistent with complete monotonicity up to order K on the
grid", never a proof.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import warnings
from typing import Sequence

import numpy as np

from . import catalog
from ._parallel import ordered_map
from ._quad import adaptive_quad
from .catalog import ASYM_X, CatalogFunction
from .context import DEFAULT_CONTEXT, BracketError, DomainError, EvalContext
from .kernel import q_deriv
from .polygamma import polygamma

SIGN_TOL = 1e-12
DEFAULT_ORDER = 12
BISECT_MAX_ITER = 60


def log_grid(lo: float, hi: float, points: int) -> np.ndarray:
    return np.geomspace(lo, hi, points)


def default_grid() -> np.ndarray:
    return log_grid(0.01, 100.0, 400)


def psi_capital(x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """``psi'(x)^2 + psi''(x)``.

    Large arguments go through the exact-coefficient series of ``x^4 Psi``
    because the two terms cancel to relative order ``1/x^2``.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    if x >= ASYM_X:
        return float(catalog.psi_regular_derivs(x, 0, ctx)[0]) / x ** 4
    return polygamma(1, x, ctx) ** 2 + polygamma(2, x, ctx)


def f_alpha(x: float, alpha: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """``x^alpha Psi(x)``."""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    g = float(catalog.psi_regular_derivs(x, 0, ctx)[0])
    return x ** (alpha - 4.0) * g


def phi(x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """``-x (2 psi' psi'' + psi''') / Psi``: ``x^alpha Psi`` is decreasing only where ``alpha <= phi``.

    Evaluated as ``4 - x g'(x) / g(x)`` with ``g = x^4 Psi``.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    g = catalog.psi_regular_derivs(x, 1, ctx)
    return float(4.0 - x * g[1] / g[0])


def phi_direct(x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """The defining formula of :func:`phi`, term by term. Loses ``~x^2`` relative precision."""
    p1, p2, p3 = (polygamma(n, x, ctx) for n in (1, 2, 3))
    return -x * (2 * p1 * p2 + p3) / (p1 * p1 + p2)


@dataclasses.dataclass(frozen=True)
class Witness:
    x: float
    k: int
    value: float


_NOUN = {"cm": "complete monotonicity", "strongcm": "strong complete monotonicity",
         "xf-cm": "complete monotonicity of x f(x)"}


@dataclasses.dataclass(frozen=True)
class CMReport:
    function: str
    alpha: float
    order_checked: int
    grid: tuple[float, ...]
    witnesses: tuple[Witness, ...]
    tolerance: float
    grid_scale: str = "log"
    kind: str = "cm"

    @property
    def verdict(self) -> str:
        return "fail" if self.witnesses else "pass"

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def first_failing_order(self) -> int | None:
        return min((w.k for w in self.witnesses), default=None)

    def passes_up_to(self, K: int) -> bool:
        return not any(w.k <= K for w in self.witnesses)

    def to_dict(self) -> dict:
        return {
            "check": self.kind,
            "function": self.function,
            "alpha": self.alpha,
            "order": self.order_checked,
            "grid": _grid_dict(self.grid, self.grid_scale),
            "verdict": self.verdict,
            "witnesses": [dataclasses.asdict(w) for w in self.witnesses],
            "tolerance": self.tolerance,
            "note": f"consistent with {_NOUN[self.kind]} up to order "
                    f"{self.order_checked} on grid" if self.passed else
                    f"{_NOUN[self.kind]} violated at the listed witnesses",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "function", "alpha", "order", "verdict", "x", "k", "value", "condition"])
        head = [self.kind, self.function, repr(self.alpha), self.order_checked, self.verdict]
        if not self.witnesses:
            w.writerow(head + ["", "", "", ""])
        for wit in self.witnesses:
            w.writerow(head + [repr(wit.x), wit.k, repr(wit.value),
                               getattr(wit, "condition", "sign")])
        return buf.getvalue()


def _grid_dict(grid: Sequence[float], scale: str) -> dict:
    return {"min": float(min(grid)), "max": float(max(grid)), "points": len(grid),
            "scale": scale}


def _resolve(fn: str | CatalogFunction) -> CatalogFunction:
    return fn if isinstance(fn, CatalogFunction) else catalog.get(fn)


def _check_grid(grid) -> tuple[float, ...]:
    xs = tuple(float(x) for x in grid)
    if not xs or any(not (x > 0 and math.isfinite(x)) for x in xs):
        raise DomainError("grid must be nonempty with positive finite points")
    return xs


def signed_derivatives(fn: CatalogFunction, x: float, alpha: float, K: int,
                       ctx: EvalContext = DEFAULT_CONTEXT) -> tuple[np.ndarray, np.ndarray]:
    """``(-1)^k d^k [x^alpha f](x)`` for k <= K and their rounding scales."""
    vals, scales = fn.scaled_derivatives(x, K, alpha, ctx)
    signs = np.array([(-1.0) ** k for k in range(K + 1)])
    return signs * vals, scales


def cm_check(fn: str | CatalogFunction, alpha: float, K: int = DEFAULT_ORDER,
             grid: Sequence[float] | None = None, ctx: EvalContext = DEFAULT_CONTEXT,
             tol: float = SIGN_TOL) -> CMReport:
    """Sign test of ``(-1)^k d^k [x^alpha f(x)] >= 0`` for k = 0..K on ``grid``.

    A value counts as nonnegative when it exceeds ``-tol`` times the largest
    Leibniz summand that produced it.
    """
    fn = _resolve(fn)
    if K < 1:
        raise DomainError("K must be >= 1")
    if K > catalog.MAX_ORDER:
        raise DomainError(f"K must be <= {catalog.MAX_ORDER}")
    xs = _check_grid(default_grid() if grid is None else grid)

    def cell(x):
        v, s = signed_derivatives(fn, x, alpha, K, ctx)
        return [Witness(x, k, float(v[k])) for k in range(K + 1)
                if not (math.isfinite(v[k]) and v[k] >= -tol * s[k])]

    witnesses = [w for ws in ordered_map(cell, xs) for w in ws]
    return CMReport(fn.id, float(alpha), K, xs, tuple(witnesses), tol)


@dataclasses.dataclass(frozen=True)
class DegreeEstimate:
    function: str
    lo: float
    hi: float
    order: int
    grid: tuple[float, ...]
    iterations: int
    tol: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, r: float) -> bool:
        return self.lo <= r <= self.hi

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "lo": self.lo,
            "hi": self.hi,
            "order": self.order,
            "grid": _grid_dict(self.grid, "log"),
            "iterations": self.iterations,
            "tolerance": self.tol,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["function", "lo", "hi", "order", "iterations"])
        w.writerow([self.function, repr(self.lo), repr(self.hi), self.order, self.iterations])
        return buf.getvalue()


def degree_grid() -> np.ndarray:
    # violations of alpha > degree can sit far out in x
    return log_grid(0.01, 1e6, 400)


def degree_estimate(fn: str | CatalogFunction, lo: float, hi: float, tol: float = 0.1,
                    K: int = 6, grid: Sequence[float] | None = None,
                    ctx: EvalContext = DEFAULT_CONTEXT,
                    max_iter: int = BISECT_MAX_ITER) -> DegreeEstimate:
    """Bisect on alpha between a passing ``lo`` and a failing ``hi``."""
    fn = _resolve(fn)
    if not lo < hi:
        raise BracketError("need lo < hi")
    xs = _check_grid(degree_grid() if grid is None else grid)
    if not cm_check(fn, lo, K, xs, ctx).passed:
        raise BracketError(f"x^{lo} f is not CM to order {K} on the grid; lower end must pass")
    if cm_check(fn, hi, K, xs, ctx).passed:
        raise BracketError(f"x^{hi} f passes to order {K} on the grid; upper end must fail")
    it = 0
    while hi - lo > tol:
        if it >= max_iter:
            raise RuntimeError(f"bisection did not reach width {tol} in {max_iter} steps")
        mid = 0.5 * (lo + hi)
        if cm_check(fn, mid, K, xs, ctx).passed:
            lo = mid
        else:
            hi = mid
        it += 1
    return DegreeEstimate(fn.id, lo, hi, K, xs, it, tol)


@dataclasses.dataclass(frozen=True)
class LaplaceCheck:
    x: float
    lhs: float
    rhs: float
    horizon: float
    tail_estimate: float

    @property
    def rel_err(self) -> float:
        return abs(self.lhs - self.rhs) / abs(self.lhs)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["rel_err"] = self.rel_err
        return d


Q3_AT_ZERO = 1.0 / 12.0


def laplace_identity_check(x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> LaplaceCheck:
    """Compare ``x^4 Psi(x)`` with ``1/12 + int_0^T q''''(t) e^{-xt} dt``.

    The two sides share no code: the left uses polygamma values, the right
    nested quadrature of the kernel.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    lhs = x ** 4 * psi_capital(x, ctx)
    T = ctx.effective_horizon(x)

    def integrand(t):
        if t <= 0.0:
            return 1.0 / 6.0  # q''''(0+) = sigma''(0)
        return q_deriv(4, t, ctx) * math.exp(-x * t)

    edges = [0.0] + [b for b in (0.5, 2.0, 5.0, 10.0, 20.0, 40.0) if b < T] + [T]
    pieces = [adaptive_quad(integrand, a, b, rel_tol=ctx.quad_rel_tol)[0]
              for a, b in zip(edges[:-1], edges[1:])]
    rhs = Q3_AT_ZERO + math.fsum(pieces)
    # q'''' decays like t^3 e^{-t}; bound the tail by the integrand at T over the decay rate
    tail = abs(integrand(T)) / (x + 1.0)
    if tail > ctx.quad_rel_tol * abs(rhs):
        warnings.warn(f"horizon {T} may be too small at x={x}: tail ~ {tail:.3g}",
                      RuntimeWarning, stacklevel=2)
    return LaplaceCheck(x, lhs, rhs, T, tail)
