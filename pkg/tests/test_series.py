import json
import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, strategies as st

from cmdeg_kit import series as S
from cmdeg_kit.context import DomainError

T = sp.symbols("t")
THETA_SYM = ((5 * T ** 2 - 40 * T + 48) * sp.exp(3 * T) + (67 * T ** 2 - 108 * T - 72) * sp.exp(2 * T)
             + T * (67 * T + 120) * sp.exp(T) + 5 * T ** 2 + 28 * T + 24)

GOLDEN = {5: 840, 6: 4968, 7: 16296, 8: 39888, 9: 104040, 10: 472824, 11: 2962344,
           12: 17643744}


def test_golden_table():
    assert {k: S.q_coefficient(k) for k in range(5, 13)} == GOLDEN


def test_q_is_exact_integer_beyond_64_bits():
    q = S.q_coefficient(120)
    assert isinstance(q, int) and q > 2 ** 64
    assert q == 6 * (66 * 120 ** 2 + 35 * 120 - 78) + 3 * (33 * 120 ** 2 - 148 * 120 + 12) * 2 ** 120 \
        + 2 * (2 * 120 ** 2 - 31 * 120 + 66) * 3 ** 120


@pytest.mark.parametrize("bad", [-1, 2.0, True, "5"])
def test_q_coefficient_rejects(bad):
    with pytest.raises(DomainError):
        S.q_coefficient(bad)


def test_positivity_tables():
    assert S.q_positivity(12).q_values == tuple(GOLDEN.values())
    big = S.q_positivity(200)
    assert big.all_positive and len(big.q_values) == 196
    one = S.q_positivity(5)
    assert one.q_values == (840,) and one.all_positive
    with pytest.raises(DomainError):
        S.q_positivity(4)


def test_table_serialisation():
    tab = S.q_positivity(7)
    d = json.loads(tab.to_json())
    assert d["rows"][0] == {"k": 5, "Q": "840", "positive": True}
    assert tab.to_csv().splitlines() == ["k,Q,positive", "5,840,true", "6,4968,true",
                                         "7,16296,true"]


def test_roots_closed_form_and_prefixes():
    r = S.quadratic_larger_roots()
    for (a, b, c), x in zip(S.QUADRATICS, r):
        assert abs(a * x * x + b * x + c) <= 1e-12 * abs(a * x * x)
        disc = b * b - 4 * a * c
        assert x == pytest.approx((-b + math.sqrt(disc)) / (2 * a), rel=1e-15)
    assert f"{r[0]:.4f}" == "0.8538"
    assert str(r[1]).startswith("4.4")
    assert str(r[2]).startswith("12.9")


def test_quadratics_positive_from_13():
    for k in range(13, 60):
        assert all(a * k * k + b * k + c > 0 for a, b, c in S.QUADRATICS)


@given(st.integers(13, 400))
def test_q_positive_for_large_k(k):
    assert S.q_coefficient(k) > 0


# --- theta and the coefficient sequence -----------------------------------------

def test_theta_zero():
    assert S.theta(0.0) == 0.0


def test_theta_low_order_taylor_coefficients_vanish():
    series = sp.series(THETA_SYM, T, 0, 10).removeO()
    for k in range(10):
        exact = series.coeff(T, k) * sp.factorial(k)
        assert S.theta_taylor_coefficient(k) == int(exact)
    assert [S.theta_taylor_coefficient(k) for k in range(5)] == [0, 0, 0, 0, 0]


@pytest.mark.parametrize("t", [0.25, 1.0, 3.0, 10.0])
def test_theta_against_symbolic(t):
    assert S.theta(t) == pytest.approx(float(THETA_SYM.subs(T, t).evalf(30)), rel=1e-12)


def test_theta_overflow():
    assert math.isfinite(S.theta(S.THETA_T_MAX))
    with pytest.raises(OverflowError):
        S.theta(S.THETA_T_MAX + 1)


def test_q_generating_function_coefficients():
    # Q(k)/6 are the Maclaurin data (k! [t^k]) of the documented exponential polynomial
    E = sp.exp
    gen = ((6 * T ** 2 - 29 * T + 22) * E(3 * T) + (66 * T ** 2 - 115 * T + 6) * E(2 * T)
           + (66 * T ** 2 + 101 * T - 78) * E(T))
    ser = sp.series(gen, T, 0, 16).removeO()
    for k in range(16):
        assert ser.coeff(T, k) * sp.factorial(k) == sp.Rational(S.q_coefficient(k), 6)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0, 2.0])
def test_q_series_sums_generating_function(t):
    low = math.fsum(S.q_coefficient(k) / (6 * math.factorial(k)) * t ** k for k in range(5))
    assert S.q_series(t, 60) + low == pytest.approx(S.q_generating_function(t), rel=1e-12)


def test_q_series_uses_exact_coefficients():
    k = 30
    c = Fraction(S.q_coefficient(k), 6 * math.factorial(k))
    assert S.q_series(1.0, k, k) == float(c)


def test_theta_and_q_series_differ():
    # documented: theta's Maclaurin data are not Q(k) (in any fixed multiple)
    ratios = {Fraction(S.theta_taylor_coefficient(k), S.q_coefficient(k)) for k in range(5, 9)}
    assert len(ratios) > 1
    assert S.theta(1.0) < 0 < S.q_series(1.0)
