import math

import pytest
from hypothesis import given, settings, strategies as st

from cmdeg_kit import catalog, strongcm as S
from cmdeg_kit.cmdeg import degree_estimate, log_grid
from cmdeg_kit.context import DomainError

EXPECTED = {"power:1": "pass", "power:1.5": "pass", "power:3": "pass", "power:0.5": "fail",
            "exp": "fail", "inv_x_x1": "pass", "Psi": "pass"}


def test_w_values_for_inverse():
    # x^{n+1} (-1)^n d^n(1/x) = n!
    w, _ = S.w_values("inv_x", 3.7, 6)
    assert list(w) == pytest.approx([math.factorial(n) for n in range(7)], rel=1e-13)


@pytest.mark.parametrize("fid", sorted(EXPECTED))
def test_strong_verdicts(fid):
    assert S.strongly_cm_check(fid, 8).verdict == EXPECTED[fid]


def test_power_half_fails_on_monotonicity():
    r = S.strongly_cm_check("power:0.5", 4)
    assert {w.condition for w in r.witnesses} == {"non-increasing"}
    assert all(w.value > 0 for w in r.witnesses)


def test_exp_witnesses_are_increases():
    r = S.strongly_cm_check("exp", 3, log_grid(0.1, 10, 40))
    assert r.witnesses and r.witnesses[0].k == 0
    assert r.to_dict()["check"] == "strongcm"


def test_equivalence_suite_agrees():
    eqs = S.equivalence_suite(8)
    assert [e.function for e in eqs] == list(EXPECTED)
    for e in eqs:
        assert e.agree, e.to_dict()
        assert e.xcm.order_checked == e.strong.order_checked + 1
        assert e.strong_verdict == EXPECTED[e.function]


@settings(max_examples=15)
@given(st.one_of(st.floats(0.1, 0.9), st.floats(1.0, 4.0)))
def test_power_family(a):
    fn = catalog.get("power", a)
    grid = log_grid(0.01, 1e3, 60)
    eq = S.equivalence_test(fn, 6, grid)
    assert eq.agree
    assert eq.strong.passed == (a >= 1)


@pytest.mark.parametrize("fid", [f for f, v in EXPECTED.items() if v == "pass"])
def test_induction_chain(fid):
    assert S.induction_chain(fid, 8).holds


def test_induction_chain_equality_for_inverse():
    # w_k = k! exactly, so w_k - k w_{k-1} = 0
    assert S.induction_chain("inv_x", 8).holds


@pytest.mark.parametrize("fid", [f for f, v in EXPECTED.items() if v == "pass"])
def test_strong_implies_degree_at_least_one(fid):
    tol = 0.1
    d = degree_estimate(fid, 0.0, 6.0, tol, 6)
    assert d.lo >= 1 - tol


def test_xf_route_matches_direct_derivative():
    # [x * x^{-3/2}]^(k) = falling(-1/2, k) x^{-1/2-k}
    fn = catalog.get("power:1.5")
    r = S.xf_cm_check(fn, 5, [2.0])
    assert r.passed and r.alpha == 1.0 and r.kind == "xf-cm"


def test_grid_validation():
    with pytest.raises(DomainError):
        S.strongly_cm_check("Psi", 2, [2.0, 1.0])
    with pytest.raises(DomainError):
        S.strongly_cm_check("Psi", -1)
    with pytest.raises(DomainError):
        S.xf_cm_check("Psi", 2, [0.0, 1.0])
