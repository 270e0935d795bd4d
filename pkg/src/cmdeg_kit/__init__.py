"""Numerical toolkit for Psi(x) = psi'(x)^2 + psi''(x): polygamma evaluation, its Laplace
kernel, exact coefficient tables, complete-monotonicity and degree checks, rational
bounds, and strong complete monotonicity."""

from .context import (DEFAULT_CONTEXT, BracketError, CatalogError, DomainError, EvalContext,
                      QuadratureError)
from .cmdeg import cm_check, degree_estimate, f_alpha, laplace_identity_check, phi, psi_capital

__all__ = [
    "DEFAULT_CONTEXT", "EvalContext", "DomainError", "QuadratureError", "BracketError",
    "CatalogError", "psi_capital", "f_alpha", "phi",
    "cm_check", "degree_estimate", "laplace_identity_check",
]
