"""The exponential polynomial theta(t), the integer coefficients Q(k), and
the quadratics whose larger roots bound where Q(k) can be negative.

``theta`` is the closed form with
``t sigma''/6 + sigma'' - 2 sigma''' - t sigma'''' = -e^t theta(t) / (6 (e^t - 1)^5)``.
Its exact Maclaurin data is exposed by :func:`theta_taylor_coefficient` so
it can be compared with ``Q(k)``. Note that the two do not agree: theta is
negative on roughly ``(0, 7)`` and its coefficients ``k! [t^k] theta`` are
-120, -1632, -12012, ... for k = 5, 6, 7, whereas ``Q(5..7) = 840, 4968, 16296``.
``Q(k) / 6`` is the coefficient sequence of
``(6t^2 - 29t + 22) e^{3t} + (66t^2 - 115t + 6) e^{2t} + (66t^2 + 101t - 78) e^t``
instead (see :func:`q_generating_function`).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from fractions import Fraction

from .context import DomainError

_LOG_MAX = math.log(1.7976931348623157e308)


def _theta_limit() -> float:
    # largest t with 5 t^2 e^{3t} finite: fixed point of t = (LOG_MAX - ln(5 t^2)) / 3
    t = _LOG_MAX / 3
    for _ in range(50):
        t = (_LOG_MAX - math.log(5 * t * t)) / 3
    return math.floor(t * 100) / 100


THETA_T_MAX = _theta_limit()

# (polynomial coefficients low->high, exponential rate)
_THETA_PARTS = (
    ((48, -40, 5), 3),
    ((-72, -108, 67), 2),
    ((0, 120, 67), 1),
    ((24, 28, 5), 0),
)
_QGEN_PARTS = (
    ((22, -29, 6), 3),
    ((6, -115, 66), 2),
    ((-78, 101, 66), 1),
)


def _exp_poly(parts, t: float) -> float:
    out = []
    for (c0, c1, c2), rate in parts:
        out.append((c0 + t * (c1 + t * c2)) * math.exp(rate * t))
    return math.fsum(out)


def _exp_poly_taylor(parts, k: int) -> int:
    # k! [t^k] (c0 + c1 t + c2 t^2) e^{a t} = c0 a^k + c1 k a^(k-1) + c2 k(k-1) a^(k-2)
    total = 0
    for (c0, c1, c2), a in parts:
        total += c0 * a ** k
        if k >= 1:
            total += c1 * k * a ** (k - 1)
        if k >= 2:
            total += c2 * k * (k - 1) * a ** (k - 2)
    return total


def theta(t: float) -> float:
    """``(5t^2-40t+48)e^{3t} + (67t^2-108t-72)e^{2t} + t(67t+120)e^t + 5t^2+28t+24``."""
    if t > THETA_T_MAX:
        raise OverflowError(f"theta overflows for t > {THETA_T_MAX:.1f}")
    if t == 0:
        return 0.0
    return _exp_poly(_THETA_PARTS, t)


def theta_taylor_coefficient(k: int) -> int:
    """Exact ``k! [t^k] theta(t)``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return _exp_poly_taylor(_THETA_PARTS, k)


def q_generating_function(t: float) -> float:
    """``sum_{k>=0} Q(k) t^k / (6 k!)`` in closed form (includes the k < 5 terms)."""
    return _exp_poly(_QGEN_PARTS, t)


def q_coefficient(k: int) -> int:
    """``Q(k) = 6(66k^2+35k-78) + 3(33k^2-148k+12) 2^k + 2(2k^2-31k+66) 3^k``, exact."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise DomainError(f"k must be a nonnegative integer, got {k!r}")
    return (6 * (66 * k * k + 35 * k - 78)
            + 3 * (33 * k * k - 148 * k + 12) * 2 ** k
            + 2 * (2 * k * k - 31 * k + 66) * 3 ** k)


def q_series(t: float, k_max: int = 60, k_min: int = 5) -> float:
    """``(1/6) sum_{k=k_min}^{k_max} Q(k) t^k / k!`` with exact coefficients."""
    terms = [float(Fraction(q_coefficient(k), 6 * math.factorial(k))) * t ** k
             for k in range(k_min, k_max + 1)]
    return math.fsum(terms)


@dataclasses.dataclass(frozen=True)
class SeriesTable:
    k_min: int
    k_max: int
    q_values: tuple[int, ...]

    @property
    def positive(self) -> tuple[bool, ...]:
        return tuple(q > 0 for q in self.q_values)

    @property
    def all_positive(self) -> bool:
        return all(self.positive)

    def rows(self):
        for k, q in zip(range(self.k_min, self.k_max + 1), self.q_values):
            yield k, q, q > 0

    def to_dict(self) -> dict:
        return {
            "k_min": self.k_min,
            "k_max": self.k_max,
            "all_positive": self.all_positive,
            "rows": [{"k": k, "Q": str(q), "positive": p} for k, q, p in self.rows()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "Q", "positive"])
        for k, q, p in self.rows():
            w.writerow([k, str(q), str(p).lower()])
        return buf.getvalue()


def q_positivity(k_max: int, k_min: int = 5) -> SeriesTable:
    if k_max < k_min:
        raise DomainError(f"k_max must be >= {k_min}")
    return SeriesTable(k_min, k_max, tuple(q_coefficient(k) for k in range(k_min, k_max + 1)))


QUADRATICS = ((66, 35, -78), (33, -148, 12), (2, -31, 66))


def quadratic_larger_roots() -> tuple[float, float, float]:
    """Larger roots of ``66x^2+35x-78``, ``33x^2-148x+12`` and ``2x^2-31x+66``."""
    return (
        (math.sqrt(21817) - 35) / 132,
        2 * (37 + math.sqrt(1270)) / 33,
        (31 + math.sqrt(433)) / 4,
    )
