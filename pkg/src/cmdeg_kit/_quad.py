"""Thin wrapper over QUADPACK that turns non-convergence into an exception."""

from __future__ import annotations

import warnings

from scipy import integrate

from .context import QuadratureError

SUBDIVISION_LIMIT = 400


def adaptive_quad(f, a: float, b: float, rel_tol: float, abs_tol: float = 0.0,
                  points=None) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``; returns ``(value, error_estimate)``."""
    if b <= a:
        return 0.0, 0.0
    if points is not None:
        points = [p for p in points if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(f, a, b, epsrel=rel_tol, epsabs=abs_tol,
                             limit=SUBDIVISION_LIMIT, points=points,
                             full_output=1)
    value, err, info = out[0], out[1], out[2]
    ier = out[3] if len(out) > 3 else 0
    # ier 1 and 2 mean the budget ran out or roundoff stalled; accept only when
    # the estimate still meets the target
    if ier not in (0,):
        target = max(abs_tol, rel_tol * abs(value))
        if not err <= 10 * target:
            raise QuadratureError(
                f"quadrature on [{a}, {b}] did not converge: value={value!r}, "
                f"error estimate={err!r}, ier={ier}")
    return value, err
