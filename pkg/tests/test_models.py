import math
import warnings

import pytest
from hypothesis import given, strategies as st

from learnsim.models import (
    OneCompParams,
    TwoCompT1Params,
    TwoCompT2Params,
    gate_open,
    one_comp_rate,
    strength_coefficient,
    two_comp_t1_rate,
    two_comp_t2_rate,
)

T4 = TwoCompT2Params(0.01, 0.002, 0.005, 0.0001)
nonneg = st.floats(0, 1e3, allow_nan=False)
coef = st.floats(0, 1, allow_nan=False)


# -- examples


def test_one_comp_learning_branch():
    p = OneCompParams(alpha=0.05, gamma=0.0, b=0.0, cutoff_c=10)
    assert one_comp_rate(0.0, 5.0, 1, p) == pytest.approx(0.25, rel=1e-15)


def test_one_comp_gate_tripped():
    p = OneCompParams(alpha=0.05, gamma=0.01, b=0.0, cutoff_c=10)
    assert one_comp_rate(0.0, 20.0, 1, p) == 0.0


def test_one_comp_at_requirement_only_forgets():
    p = OneCompParams(alpha=0.05, gamma=0.01, b=0.0, cutoff_c=10)
    assert one_comp_rate(10.0, 10.0, 1, p) == pytest.approx(-0.1, rel=1e-15)


def test_t1_example():
    p = TwoCompT1Params(0.01, 0.01, 0.002, 0.01)
    r1, r2 = two_comp_t1_rate(10.0, 0.0, 50.0, 4.0, 1, 1, p)
    assert r1 == pytest.approx(0.01 * 40 - 0.002 * 10, rel=1e-14)
    assert r2 == pytest.approx(0.04, rel=1e-14)


def test_t1_no_teaching_from_zero():
    p = TwoCompT1Params(0.01, 0.01, 0.002, 0.01)
    assert two_comp_t1_rate(0.0, 0.0, 50.0, 4.0, 0, 0, p) == (0.0, 0.0)


def test_t1_at_requirement():
    p = TwoCompT1Params(0.01, 0.01, 0.002, 0.01)
    r1, r2 = two_comp_t1_rate(50.0, 4.0, 50.0, 4.0, 1, 1, p)
    assert r1 == pytest.approx(-0.1, rel=1e-14)
    assert r2 == pytest.approx(-0.04, rel=1e-14)


def test_t2_examples():
    assert two_comp_t2_rate(0.0, 0.0, 30.0, 1, T4) == pytest.approx((0.3, 0.0), rel=1e-14)
    r1, r2 = two_comp_t2_rate(40.0, 0.0, 70.0, 1, T4)
    assert r1 == pytest.approx(0.01 * 30 - 0.002 * 40 - 0.005 * 40, rel=1e-12)
    assert r1 == pytest.approx(0.02, rel=1e-12)
    assert r2 == pytest.approx(0.08, rel=1e-12)
    assert two_comp_t2_rate(10.0, 50.0, 0.0, 0, T4) == pytest.approx((-0.05, -0.005), rel=1e-14)


@pytest.mark.parametrize("z1,z2,expected", [(30, 70, 0.7), (0, 0, 0.0), (42, 42, 0.5)])
def test_strength_coefficient(z1, z2, expected):
    assert strength_coefficient(z1, z2) == pytest.approx(expected)


# -- parameter validation


@pytest.mark.parametrize("field", ["alpha1", "alpha2", "gamma1", "gamma2"])
def test_t2_negative_coefficient_names_field(field):
    kw = dict(alpha1=0.01, alpha2=0.002, gamma1=0.005, gamma2=0.0001)
    kw[field] = -1.0
    with pytest.raises(ValueError, match=field):
        TwoCompT2Params(**kw)


def test_one_comp_cutoff_must_be_positive():
    with pytest.raises(ValueError, match="cutoff_c"):
        OneCompParams(0.05, 0.001, 0.0, 0.0)


def test_nan_rejected():
    with pytest.raises(ValueError, match="gamma"):
        OneCompParams(0.05, math.nan)


def test_strong_forgotten_faster_warns_only():
    with pytest.warns(UserWarning, match="gamma2"):
        p = TwoCompT2Params(0.01, 0.002, 0.001, 0.01)
    assert p.gamma2 == 0.01
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        TwoCompT2Params(0.01, 0.002, 0.005, 0.0001)


# -- properties


@given(u=nonneg, alpha=coef, gamma=coef, c=st.floats(0.1, 100))
def test_no_forgetting_from_zero(u, alpha, gamma, c):
    p = OneCompParams(alpha, gamma, 0.0, c)
    r = one_comp_rate(0.0, u, 0, p)
    assert r == 0.0
    assert two_comp_t2_rate(0.0, 0.0, u, 0, TwoCompT2Params(alpha, alpha, gamma, gamma)) == (0.0, 0.0)


@given(u=nonneg, alpha=coef, gamma=coef, b=st.floats(0.1, 3))
def test_positive_b_cannot_start_from_zero(u, alpha, gamma, b):
    p = OneCompParams(alpha, gamma, b, 1e6)
    assert one_comp_rate(0.0, u, 1, p) == 0.0
    r1, r2 = two_comp_t1_rate(0.0, 0.0, u, u, 1, 1, TwoCompT1Params(alpha, alpha, gamma, gamma, b))
    assert (r1, r2) == (0.0, 0.0)


@given(z=nonneg, c=st.floats(0.1, 100), alpha=coef, gamma=coef)
def test_gate_boundary_is_inclusive(z, c, alpha, gamma):
    p = OneCompParams(alpha, gamma, 0.0, c)
    u = z + c
    assert gate_open(z, u, c)
    assert one_comp_rate(z, u, 1, p) == pytest.approx(alpha * (u - z) - gamma * z, rel=1e-12, abs=1e-12)
    above = math.nextafter(u, math.inf)
    assert not gate_open(z, above, c)
    assert one_comp_rate(z, above, 1, p) == -gamma * z


@given(z1=nonneg, z2=nonneg, u=nonneg, a1=coef, a2=coef)
def test_t2_consolidation_cancels_in_sum(z1, z2, u, a1, a2):
    p = TwoCompT2Params(a1, a2, 0.0, 0.0)
    r1, r2 = two_comp_t2_rate(z1, z2, u, 1, p)
    scale = max(1.0, abs(a1 * (u - z1 - z2)), a2 * z1)
    assert abs((r1 + r2) - a1 * (u - (z1 + z2))) <= 1e-12 * scale


@given(z1=nonneg, z2=nonneg, u=nonneg, k=st.sampled_from([0, 1]))
def test_rates_are_deterministic(z1, z2, u, k):
    a = two_comp_t2_rate(z1, z2, u, k, T4)
    b = two_comp_t2_rate(z1, z2, u, k, T4)
    assert a == b


@given(z1=nonneg, z2=nonneg)
def test_strength_in_unit_interval(z1, z2):
    assert 0.0 <= strength_coefficient(z1, z2) <= 1.0
