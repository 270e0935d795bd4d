import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmdeg_kit.context import DEFAULT_CONTEXT, DomainError, EvalContext
from cmdeg_kit.polygamma import (MAX_ASYM_TERMS, asymptotic_coefficients, polygamma,
                                 polygamma_asymptotic, polygamma_integral)

mpmath.mp.dps = 40


def zeta_partial(s, N=10_000):
    # sum_{k<=N} k^-s plus the Euler-Maclaurin tail N^{1-s}/(s-1) - N^-s/2 + s N^{-s-1}/12
    head = math.fsum(k ** -s for k in range(1, N + 1))
    tail = N ** (1 - s) / (s - 1) - 0.5 * N ** -s + s * N ** (-s - 1) / 12
    return head + tail


def test_trigamma_at_one_matches_zeta2():
    assert polygamma(1, 1.0) == pytest.approx(zeta_partial(2), rel=1e-12)
    assert polygamma(1, 1.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-15)


def test_tetragamma_at_one_matches_zeta3():
    assert polygamma(2, 1.0) == pytest.approx(-2 * zeta_partial(3), rel=1e-12)


def test_recurrence_unit_step():
    assert polygamma(1, 1.0) - polygamma(1, 2.0) == pytest.approx(1.0, abs=1e-15)


def test_large_argument():
    assert polygamma(1, 1e6) == pytest.approx(1e-6 + 0.5e-12, rel=1e-12)
    assert polygamma_integral(1, 1e6) == pytest.approx(polygamma(1, 1e6), rel=1e-8)


def test_integral_examples():
    assert polygamma_integral(1, 1.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-9)
    assert polygamma_integral(2, 2.0) == pytest.approx(-2 * zeta_partial(3) + 2, rel=1e-9)
    expected = math.pi ** 2 / 6 - math.fsum(1 / k ** 2 for k in range(1, 10))
    assert polygamma_integral(1, 10.0) == pytest.approx(expected, rel=1e-9)
    assert expected == pytest.approx(0.105166, abs=1e-6)


@pytest.mark.parametrize("n", range(1, 21))
@pytest.mark.parametrize("x", [1e-3, 0.05, 0.5, 1.0, 3.7, 15.9, 16.0, 40.0, 1e3])
def test_against_mpmath(n, x):
    ref = float(mpmath.polygamma(n, x))
    tol = 1e-12 if n <= 6 else 1e-13 * n
    assert polygamma(n, x) == pytest.approx(ref, rel=max(tol, 4e-15))


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("x", list(np.geomspace(0.5, 50, 9)))
def test_integral_oracle_agreement(n, x):
    assert polygamma(n, x) == pytest.approx(polygamma_integral(n, x), rel=1e-8)


def test_asymptotic_leading_terms():
    z = 37.0
    assert polygamma_asymptotic(1, z, 1) == 1 / z
    assert polygamma_asymptotic(2, z, 2) == pytest.approx(-1 / z ** 2 - 1 / z ** 3, rel=1e-15)


def test_asymptotic_matches_known_expansions():
    # psi'(z) ~ 1/z + 1/(2z^2) + 1/(6z^3) - 1/(30z^5) + 1/(42z^7) - 1/(30z^9) + 5/(66z^11)
    coeffs = dict(asymptotic_coefficients(1, 7))
    assert coeffs == pytest.approx({1: 1, 2: 0.5, 3: 1 / 6, 5: -1 / 30, 7: 1 / 42,
                                    9: -1 / 30, 11: 5 / 66})
    # psi'''(z) ~ 2/z^3 + 3/z^4 + 2/z^5 - 1/z^7 + 4/(3z^9) - 3/z^11 + 10/z^13
    coeffs = dict(asymptotic_coefficients(3, 7))
    assert coeffs == pytest.approx({3: 2, 4: 3, 5: 2, 7: -1, 9: 4 / 3, 11: -3, 13: 10})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_asymptotic_seven_terms_at_50(n):
    assert polygamma_asymptotic(n, 50.0, 7) == pytest.approx(polygamma(n, 50.0), rel=1e-13)


@given(st.integers(1, 6), st.floats(0.05, 100))
def test_sign_pattern(n, x):
    assert math.copysign(1, polygamma(n, x)) == (-1) ** (n + 1)


@given(st.integers(1, 6), st.floats(0.05, 100))
def test_recurrence_residual(n, x):
    lhs = polygamma(n, x)
    rhs = polygamma(n, x + 1) + (-1) ** (n + 1) * math.factorial(n) / x ** (n + 1)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


@pytest.mark.parametrize("n", range(1, 7))
def test_monotone_decay(n):
    vals = [abs(polygamma(n, x)) for x in np.geomspace(0.05, 100, 60)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_shift_threshold_is_a_tuning_knob_only():
    ctx = EvalContext(shift_threshold=25.0, asym_terms=16)
    for n in (1, 3, 8):
        assert polygamma(n, 0.7, ctx) == pytest.approx(polygamma(n, 0.7), rel=1e-14)


@pytest.mark.parametrize("n,x", [(0, 1.0), (-1, 1.0), (1, 0.0), (1, -2.0), (1.5, 1.0),
                                 (1, float("nan")), (1, float("inf"))])
def test_domain_errors(n, x):
    with pytest.raises(DomainError):
        polygamma(n, x)


def test_overflow_is_signalled():
    with pytest.raises(OverflowError):
        polygamma(20, 1e-20)


def test_asymptotic_term_cap():
    with pytest.raises(DomainError):
        polygamma_asymptotic(1, 20.0, MAX_ASYM_TERMS + 1)


def test_context_validation():
    for bad in (dict(shift_threshold=0.5), dict(asym_terms=2), dict(quad_rel_tol=0.0),
                dict(quad_rel_tol=1.0), dict(horizon=-1.0), dict(series_radius=0.0),
                dict(series_radius=1.5)):
        with pytest.raises(ValueError):
            EvalContext(**bad)
    assert DEFAULT_CONTEXT.effective_horizon(1.0) == 80.0
    assert DEFAULT_CONTEXT.effective_horizon(10.0) == 60.0
