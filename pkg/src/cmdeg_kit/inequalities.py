"""Rational lower and upper bounds for Psi(x) and the h_lambda family.

All comparisons are made after multiplying through by ``x^4``: the bounds
become ``(x^2 + c x + 12) / (12 (x+1)^2)``-type rationals and Psi becomes
``g(x) = x^4 Psi(x)``, which is O(1) on the whole half line. Margins and
witness values in a :class:`BoundReport` are in that scaled form.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Sequence

import numpy as np
from scipy import optimize

from . import catalog
from .cmdeg import SIGN_TOL, DegreeEstimate, default_grid, degree_estimate, log_grid
from .context import DEFAULT_CONTEXT, BracketError, DomainError, EvalContext

P_COEFFS = (75, 900, 4840, 15370, 31865, 45050, 44101, 29700, 13290, 3600, 450)

SCAN_LO, SCAN_HI, SCAN_POINTS = 1e-3, 1e6, 2000


def p_poly(x: float) -> float:
    """``75x^10 + 900x^9 + ... + 3600x + 450`` by Horner's rule."""
    acc = 0.0
    for c in P_COEFFS:
        acc = acc * x + c
    return acc


def _g(x: float, ctx: EvalContext) -> float:
    return float(catalog.psi_regular_derivs(x, 0, ctx)[0])


def _quadratic_bound(x: float, c: float) -> float:
    # x^4 * (x^2 + c x + 12) / (12 x^4 (x+1)^2)
    return (x * x + c * x + 12.0) / (12.0 * (x + 1.0) ** 2)


def _p_bound(x: float) -> float:
    # x^4 * p(x) / (900 x^4 (x+1)^10)
    return p_poly(x) / (900.0 * (x + 1.0) ** 10)


def _upper_bound(x: float) -> float:
    # x^4 * (x+12) / (12 x^4 (x+1))
    return (x + 12.0) / (12.0 * (x + 1.0))


def sandwich_values(x: float, ctx: EvalContext = DEFAULT_CONTEXT) -> dict:
    """The four unscaled quantities of the sandwich at ``x``."""
    x4 = x ** 4
    return {
        "lower_quadratic": _quadratic_bound(x, 0.0) / x4,
        "lower_p": _p_bound(x) / x4,
        "Psi": _g(x, ctx) / x4,
        "upper": _upper_bound(x) / x4,
    }


def h_lambda(x: float, lam: float, ctx: EvalContext = DEFAULT_CONTEXT) -> float:
    """``Psi(x) - (x^2 + lam x + 12) / (12 x^4 (x+1)^2)``."""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    return (_g(x, ctx) - _quadratic_bound(x, lam)) / x ** 4


@dataclasses.dataclass(frozen=True)
class BoundWitness:
    x: float
    lhs: float
    rhs: float
    part: str


@dataclasses.dataclass(frozen=True)
class BoundReport:
    """``lhs < rhs`` checks over a grid; ``min_margin`` is ``min(rhs - lhs)``."""

    bound_id: str
    grid: tuple[float, ...]
    min_margin: float
    witnesses: tuple[BoundWitness, ...]
    tolerance: float

    @property
    def verdict(self) -> str:
        return "fail" if self.witnesses else "pass"

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        return {
            "bound": self.bound_id,
            "scaling": "x^4",
            "grid": {"min": min(self.grid), "max": max(self.grid),
                     "points": len(self.grid), "scale": "log"},
            "verdict": self.verdict,
            "min_margin": self.min_margin,
            "witnesses": [dataclasses.asdict(w) for w in self.witnesses],
            "tolerance": self.tolerance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bound", "verdict", "x", "lhs", "rhs", "part"])
        if not self.witnesses:
            w.writerow([self.bound_id, self.verdict, "", "", "", ""])
        for wit in self.witnesses:
            w.writerow([self.bound_id, self.verdict, repr(wit.x), repr(wit.lhs),
                        repr(wit.rhs), wit.part])
        return buf.getvalue()


def _run(bound_id: str, grid, pairs_at, tol: float) -> BoundReport:
    xs = tuple(float(x) for x in grid)
    if not xs or any(not x > 0 for x in xs):
        raise DomainError("grid must be nonempty and positive")
    worst = math.inf
    bad = []
    for x in xs:
        for part, lhs, rhs in pairs_at(x):
            margin = rhs - lhs
            worst = min(worst, margin)
            if not margin > -tol * max(abs(lhs), abs(rhs)):
                bad.append(BoundWitness(x, lhs, rhs, part))
    return BoundReport(bound_id, xs, worst, tuple(bad), tol)


def sandwich_check(grid: Sequence[float] | None = None, ctx: EvalContext = DEFAULT_CONTEXT,
                   tol: float = SIGN_TOL) -> BoundReport:
    """``max{(x^2+12)/(12x^4(x+1)^2), p(x)/(900x^4(x+1)^10)} < Psi < (x+12)/(12x^4(x+1))``."""
    def pairs(x):
        g = _g(x, ctx)
        return (("lower_quadratic", _quadratic_bound(x, 0.0), g),
                ("lower_p", _p_bound(x), g),
                ("upper", g, _upper_bound(x)))
    return _run("sandwich", default_grid() if grid is None else grid, pairs, tol)


def double_inequality_check(mu: float, nu: float, grid: Sequence[float] | None = None,
                            ctx: EvalContext = DEFAULT_CONTEXT,
                            tol: float = SIGN_TOL) -> BoundReport:
    """``(x^2+mu x+12)/(12x^4(x+1)^2) < Psi < (x^2+nu x+12)/(12x^4(x+1)^2)`` on ``grid``."""
    def pairs(x):
        g = _g(x, ctx)
        return (("lower", _quadratic_bound(x, mu), g), ("upper", g, _quadratic_bound(x, nu)))
    return _run(f"double:{mu:g},{nu:g}", default_grid() if grid is None else grid, pairs, tol)


def _refine(margin, xs: np.ndarray, i: int) -> float:
    # golden-section minimisation of the margin in log x around grid index i
    lo = math.log(xs[max(i - 1, 0)])
    hi = math.log(xs[min(i + 1, len(xs) - 1)])
    mid = math.log(xs[i])
    if not lo < mid < hi:
        return float(xs[i])
    f = lambda u: margin(math.exp(u))  # noqa: E731
    try:
        res = optimize.minimize_scalar(f, bracket=(lo, mid, hi), method="golden",
                                       options={"xtol": 1e-10})
    except ValueError:
        return float(xs[i])
    u = float(np.clip(res.x, lo, hi))
    return math.exp(u) if f(u) <= f(mid) else float(xs[i])


def locate_double_violation(mu: float, nu: float, ctx: EvalContext = DEFAULT_CONTEXT,
                            tol: float = SIGN_TOL) -> BoundReport:
    """Scan ``[1e-3, 1e6]`` (2000 log points) and refine the worst point of each violated side."""
    xs = log_grid(SCAN_LO, SCAN_HI, SCAN_POINTS)
    gs = np.array([_g(x, ctx) for x in xs])
    sides = {
        "lower": lambda x, g=None: (g if g is not None else _g(x, ctx)) - _quadratic_bound(x, mu),
        "upper": lambda x, g=None: _quadratic_bound(x, nu) - (g if g is not None else _g(x, ctx)),
    }
    found = []
    worst = math.inf
    for part, margin in sides.items():
        vals = np.array([margin(x, g) for x, g in zip(xs, gs)])
        i = int(np.argmin(vals))
        worst = min(worst, float(vals[i]))
        if vals[i] < 0:
            x = _refine(margin, xs, i)
            g = _g(x, ctx)
            lhs, rhs = (_quadratic_bound(x, mu), g) if part == "lower" else (g, _quadratic_bound(x, nu))
            found.append(BoundWitness(x, lhs, rhs, part))
            worst = min(worst, rhs - lhs)
    return BoundReport(f"double-scan:{mu:g},{nu:g}", tuple(float(x) for x in xs),
                       worst, tuple(found), tol)


@dataclasses.dataclass(frozen=True)
class ConjectureProbe:
    lam: float
    mu: float
    h_lambda: DegreeEstimate | None
    neg_h_mu: DegreeEstimate | None
    errors: tuple[str, ...]
    regime: str

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "mu": self.mu,
            "regime": self.regime,
            "h_lambda": None if self.h_lambda is None else self.h_lambda.to_dict(),
            "neg_h_mu": None if self.neg_h_mu is None else self.neg_h_mu.to_dict(),
            "errors": list(self.errors),
        }


def probe_grid() -> np.ndarray:
    return log_grid(1e-4, 1e6, 400)


def conjecture_probe(lam: float, mu: float, ctx: EvalContext = DEFAULT_CONTEXT, *,
                     lo: float = 0.0, hi: float = 8.0, tol: float = 0.1, K: int = 6,
                     grid: Sequence[float] | None = None) -> ConjectureProbe:
    """Numerically bracket the degrees of ``h_lam`` and ``-h_mu``. Exploration only."""
    xs = probe_grid() if grid is None else grid
    regime = "conjectured" if lam <= 0 and mu >= 4 else "uncharacterized regime"
    out, errors = [], []
    for fn in (catalog.get("h_lambda", lam), catalog.get("neg_h_mu", mu)):
        try:
            out.append(degree_estimate(fn, lo, hi, tol, K, xs, ctx))
        except BracketError as exc:
            out.append(None)
            errors.append(f"{fn.id}: {exc}")
    return ConjectureProbe(lam, mu, out[0], out[1], tuple(errors), regime)
