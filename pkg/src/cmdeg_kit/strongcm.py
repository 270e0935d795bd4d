"""Strong complete monotonicity and its equivalence with complete monotonicity of x f(x).

``f`` is strongly CM when every ``w_n(x) = (-1)^n x^{n+1} f^(n)(x)`` is
nonnegative and decreasing. Since

    w_n'(x) = -x^n (-1)^{n+1} [x f]^{(n+1)}(x),

"``w_n`` decreasing for n <= K" is the same as the CM sign condition on
``[x f]^{(1..K+1)}``. So the finite-order comparison pairs a strong check at
order K with an ``x f`` check at order ``K + 1``.

"Decreasing" is taken weakly: adjacent grid values may not increase by more
than the rounding tolerance.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

from . import catalog
from .catalog import CatalogFunction, leibniz_power
from .cmdeg import SIGN_TOL, CMReport, Witness, default_grid
from .context import DEFAULT_CONTEXT, DomainError, EvalContext


@dataclasses.dataclass(frozen=True)
class StrongWitness(Witness):
    condition: str = "nonnegative"


def _resolve(fn) -> CatalogFunction:
    return fn if isinstance(fn, CatalogFunction) else catalog.get(fn)


def _sorted_grid(grid) -> tuple[float, ...]:
    xs = tuple(float(x) for x in grid)
    if not xs or any(not (x > 0 and math.isfinite(x)) for x in xs):
        raise DomainError("grid must be nonempty with positive finite points")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise DomainError("grid must be strictly ascending")
    return xs


def _f_derivs(fn: CatalogFunction, x: float, K: int, ctx) -> tuple[np.ndarray, np.ndarray]:
    g = fn.regular(x, K, ctx)
    return leibniz_power(-fn.pole_order, x, g, K)


def w_values(fn: CatalogFunction | str, x: float, K: int,
             ctx: EvalContext = DEFAULT_CONTEXT) -> tuple[np.ndarray, np.ndarray]:
    """``(-1)^n x^{n+1} f^(n)(x)`` for n <= K, with rounding scales."""
    fn = _resolve(fn)
    d, s = _f_derivs(fn, x, K, ctx)
    pw = np.array([x ** (n + 1) for n in range(K + 1)])
    sg = np.array([(-1.0) ** n for n in range(K + 1)])
    return sg * pw * d, pw * s


def strongly_cm_check(fn: CatalogFunction | str, K: int, grid: Sequence[float] | None = None,
                      ctx: EvalContext = DEFAULT_CONTEXT, tol: float = SIGN_TOL) -> CMReport:
    """Check ``w_n >= 0`` at every grid point and ``w_n`` non-increasing on adjacent pairs, n <= K.

    Decrease witnesses are reported at the right point of the offending pair,
    with ``value`` the increase ``w_n(x_{i+1}) - w_n(x_i)``.
    """
    fn = _resolve(fn)
    if K < 0:
        raise DomainError("K must be >= 0")
    xs = _sorted_grid(default_grid() if grid is None else grid)
    rows = [w_values(fn, x, K, ctx) for x in xs]
    bad = []
    for i, x in enumerate(xs):
        w, s = rows[i]
        for n in range(K + 1):
            if not (math.isfinite(w[n]) and w[n] >= -tol * s[n]):
                bad.append(StrongWitness(x, n, float(w[n]), "nonnegative"))
        if i:
            wp, sp = rows[i - 1]
            for n in range(K + 1):
                rise = w[n] - wp[n]
                if rise > tol * max(s[n], sp[n]):
                    bad.append(StrongWitness(x, n, float(rise), "non-increasing"))
    return CMReport(fn.id, 0.0, K, xs, tuple(bad), tol, kind="strongcm")


def xf_cm_check(fn: CatalogFunction | str, K: int, grid: Sequence[float] | None = None,
                ctx: EvalContext = DEFAULT_CONTEXT, tol: float = SIGN_TOL) -> CMReport:
    """CM sign test of ``x f(x)`` through ``[x f]^(k) = x f^(k) + k f^(k-1)``, k <= K."""
    fn = _resolve(fn)
    xs = _sorted_grid(default_grid() if grid is None else grid)
    bad = []
    for x in xs:
        d, s = _f_derivs(fn, x, K, ctx)
        for k in range(K + 1):
            a = x * d[k]
            b = k * d[k - 1] if k else 0.0
            v = (-1.0) ** k * (a + b)
            scale = max(x * s[k], k * s[k - 1] if k else 0.0)
            if not (math.isfinite(v) and v >= -tol * scale):
                bad.append(Witness(x, k, float(v)))
    return CMReport(fn.id, 1.0, K, xs, tuple(bad), tol, kind="xf-cm")


@dataclasses.dataclass(frozen=True)
class Equivalence:
    function: str
    order: int
    strong: CMReport
    xcm: CMReport

    @property
    def strong_verdict(self) -> str:
        return self.strong.verdict

    @property
    def xcm_verdict(self) -> str:
        return self.xcm.verdict

    @property
    def agree(self) -> bool:
        return self.strong_verdict == self.xcm_verdict

    def to_dict(self) -> dict:
        return {"function": self.function, "order": self.order,
                "strong_verdict": self.strong_verdict, "xcm_verdict": self.xcm_verdict,
                "agree": self.agree}


def equivalence_test(fn: CatalogFunction | str, K: int = 8, grid: Sequence[float] | None = None,
                     ctx: EvalContext = DEFAULT_CONTEXT) -> Equivalence:
    fn = _resolve(fn)
    return Equivalence(fn.id, K, strongly_cm_check(fn, K, grid, ctx),
                       xf_cm_check(fn, K + 1, grid, ctx))


def equivalence_suite(K: int = 8, grid: Sequence[float] | None = None,
                      ctx: EvalContext = DEFAULT_CONTEXT) -> tuple[Equivalence, ...]:
    return tuple(equivalence_test(fn, K, grid, ctx) for fn in catalog.strongcm_catalog())


@dataclasses.dataclass(frozen=True)
class InductionCheck:
    """``w_k >= k w_{k-1}`` for k = 1..K on the grid."""

    function: str
    order: int
    violations: tuple[tuple[float, int, float], ...]

    @property
    def holds(self) -> bool:
        return not self.violations


def induction_chain(fn: CatalogFunction | str, K: int = 8, grid: Sequence[float] | None = None,
                    ctx: EvalContext = DEFAULT_CONTEXT, tol: float = SIGN_TOL) -> InductionCheck:
    fn = _resolve(fn)
    xs = _sorted_grid(default_grid() if grid is None else grid)
    bad = []
    for x in xs:
        w, s = w_values(fn, x, K, ctx)
        for k in range(1, K + 1):
            gap = w[k] - k * w[k - 1]
            if gap < -tol * max(s[k], k * s[k - 1]):
                bad.append((x, k, float(gap)))
    return InductionCheck(fn.id, K, tuple(bad))
