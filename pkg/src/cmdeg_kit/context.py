"""Numeric tuning knobs and the exception types shared across the package."""

from __future__ import annotations

import dataclasses
import math


class DomainError(ValueError):
    """Argument outside the domain an evaluator supports."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class BracketError(ValueError):
    """A bisection bracket does not satisfy pass-at-lo / fail-at-hi."""


class CatalogError(LookupError):
    """Unknown catalog function id."""


@dataclasses.dataclass(frozen=True)
class EvalContext:
    """Immutable evaluation settings.

    ``series_radius`` is where kernel functions switch from Maclaurin series
    to closed forms, ``shift_threshold`` the minimum argument at which the
    polygamma asymptotic series is applied, ``asym_terms`` the number of
    asymptotic terms kept (two leading terms plus Bernoulli corrections),
    ``quad_rel_tol`` the relative tolerance for every quadrature and
    ``horizon`` the base truncation point for integrals over ``[0, inf)``.
    """

    series_radius: float = 0.5
    shift_threshold: float = 16.0
    asym_terms: int = 12
    quad_rel_tol: float = 1e-10
    horizon: float = 60.0

    def __post_init__(self):
        if not self.shift_threshold >= 1:
            raise ValueError("shift_threshold must be >= 1")
        if not (isinstance(self.asym_terms, int) and self.asym_terms >= 3):
            raise ValueError("asym_terms must be an integer >= 3")
        if not 0 < self.quad_rel_tol < 1:
            raise ValueError("quad_rel_tol must lie in (0, 1)")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError("horizon must be positive and finite")
        if not 0 < self.series_radius <= 1:
            raise ValueError("series_radius must lie in (0, 1]")

    def replace(self, **changes) -> "EvalContext":
        return dataclasses.replace(self, **changes)

    def effective_horizon(self, x: float) -> float:
        # e^{-x T} <= e^{-80} once T >= 80/x
        return max(self.horizon, 80.0 / x)


DEFAULT_CONTEXT = EvalContext()
