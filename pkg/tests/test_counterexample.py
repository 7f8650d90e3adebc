import numpy as np
import pytest
from scipy.special import ellipk

from pstat.counterexample import (
    DERIVATIVE_CUBIC_COEFFICIENT,
    FE2_QUARTIC_COEFFICIENT,
    CounterexampleCase,
    counterexample_table,
    derivative_identity_deviation,
    fe1_derivative_sides,
    fundsol_mean,
    fundsol_median,
    residual_fe1_derivative,
    residual_fe1_nonasymptotic,
    residual_fe2_nonasymptotic,
)

# reference values computed once with 30-digit arithmetic
D_REFERENCE = {
    1e-2: -0.01000262532347063816422225,
    1e-3: -0.00100000262500323437831348,
}
RATIO_REFERENCE = {
    1e-2: -2.62532347063816,
    1e-3: -2.62500323437831,
    5e-2: -2.63310669996049,
    1e-1: -2.65767853054242,
}


@pytest.mark.parametrize("eps", sorted(D_REFERENCE))
def test_deviation_matches_reference(eps):
    assert derivative_identity_deviation(eps) == pytest.approx(D_REFERENCE[eps], rel=1e-13)


@pytest.mark.parametrize("eps", sorted(RATIO_REFERENCE))
def test_cubic_ratio_matches_reference(eps):
    # D + ε cancels to ~ε³, so rounding in D is amplified by 1/ε²
    d = derivative_identity_deviation(eps)
    assert (d + eps) / eps ** 3 == pytest.approx(RATIO_REFERENCE[eps], rel=1e-6)


def test_fe2_residual_series():
    # (7/12) ε^4 + (1/8) ε^6 + O(ε^8)
    for eps in (1e-3, 1e-2, 5e-2):
        series = 7 / 12 * eps ** 4 + eps ** 6 / 8
        assert residual_fe2_nonasymptotic(eps) == pytest.approx(series, rel=10 * eps ** 4 + 1e-12)
    assert FE2_QUARTIC_COEFFICIENT == 7 / 12
    assert DERIVATIVE_CUBIC_COEFFICIENT == -21 / 8


def test_fe1_residual_series():
    # -(7/32) ε^4 + (5/128) ε^6 at p = 3/2, x1 = 1
    for eps in (1e-2, 3e-2):
        r = residual_fe1_nonasymptotic(CounterexampleCase(1.5, 1.0, eps))
        assert r == pytest.approx(-7 / 32 * eps ** 4 + 5 / 128 * eps ** 6, rel=50 * eps ** 4)


def test_closed_forms_at_p_three_halves():
    case = CounterexampleCase(1.5, 1.0, 0.3)
    assert fundsol_median(case) == pytest.approx(1.09 ** -0.5, rel=1e-15)
    # circle mean of 1/|x| is a complete elliptic integral
    k2 = 4 * 0.3 / 1.3 ** 2
    assert fundsol_mean(case) == pytest.approx(2 / np.pi * ellipk(k2) / 1.3, rel=1e-13)


def test_derivative_agrees_with_finite_differences():
    case = CounterexampleCase(1.5, 1.0, 0.1)
    h = 1e-5
    up = residual_fe1_nonasymptotic(CounterexampleCase(1.5, 1.0, 0.1 + h))
    down = residual_fe1_nonasymptotic(CounterexampleCase(1.5, 1.0, 0.1 - h))
    assert residual_fe1_derivative(case) == pytest.approx((up - down) / (2 * h), rel=1e-6)
    lhs, rhs = fe1_derivative_sides(case)
    assert lhs != pytest.approx(rhs, rel=1e-3)


@pytest.mark.parametrize("kwargs", [dict(p=2.5), dict(x1=-1.0), dict(eps=1.0), dict(eps=0.0)])
def test_case_validation(kwargs):
    with pytest.raises(ValueError):
        CounterexampleCase(**kwargs)


def test_eps_validation():
    with pytest.raises(ValueError):
        derivative_identity_deviation(1.5)
    with pytest.raises(ValueError):
        residual_fe2_nonasymptotic(0.0)


def test_table_columns_and_verdict():
    rows, verdict = counterexample_table(np.geomspace(1e-3, 1e-1, 5))
    assert list(rows[0]) == ["eps", "D", "D_plus_eps_over_eps3", "fe2_residual",
                             "fe2_residual_over_eps4"]
    assert verdict["derivative_identity_fails"]
    assert verdict["fe2_residual_positive"]
    assert verdict["cubic_coefficient_estimate"] == pytest.approx(-21 / 8, rel=5e-3)
    assert verdict["quartic_coefficient_estimate"] == pytest.approx(7 / 12, rel=1e-2)
