import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from pstat import AntipodalFailure, DegenerateGradientError, InadmissiblePointError
from pstat.circle_stats import (
    CircleSpec,
    CircleStatistics,
    ball_extrema,
    ball_mean,
    boundary_mean,
    circle_statistics,
    median_antipodal,
    median_sampled,
)
from pstat.fields import ScalarField2D, affine, field_from_id, fundamental_solution, quadratic
from pstat.quadrature import adaptive_periodic_mean, half_period_mean, periodic_mean
from pstat import QuadratureError


def test_quadrature_rules():
    assert periodic_mean(np.cos, 16) == pytest.approx(0.0, abs=1e-15)
    assert periodic_mean(lambda t: np.cos(t) ** 2, 16) == pytest.approx(0.5, abs=1e-15)
    assert half_period_mean(lambda t: np.cos(t) ** 2, 16) == pytest.approx(0.5, abs=1e-15)
    # mean of 1/(2 - cos) over the circle is 1/sqrt(3)
    val = adaptive_periodic_mean(lambda t: 1 / (2 - np.cos(t)))
    assert val == pytest.approx(1 / np.sqrt(3), abs=1e-14)
    with pytest.raises(QuadratureError):
        adaptive_periodic_mean(lambda t: np.abs(np.sin(t)), tol=1e-300, max_nodes=256)


def test_spec_validation():
    with pytest.raises(ValueError):
        CircleSpec((0, 0), -1.0)
    with pytest.raises(ValueError):
        CircleSpec((0, 0), 0.1, samples=7)


def test_means_of_quadratic():
    # x^2 + y^2 around the origin: circle mean eps^2, disk mean eps^2 / 2
    f = quadratic(1, 1)
    spec = CircleSpec((0.0, 0.0), 0.7)
    assert boundary_mean(f, spec) == pytest.approx(0.49, abs=1e-14)
    assert ball_mean(f, spec) == pytest.approx(0.245, abs=1e-14)


def test_means_reproduce_harmonic_centre_value():
    f = field_from_id("sinexp")
    spec = CircleSpec((0.3, 0.2), 0.25)
    centre = float(f.value(np.array(0.3), np.array(0.2)))
    assert boundary_mean(f, spec) == pytest.approx(centre, abs=1e-14)
    assert ball_mean(f, spec) == pytest.approx(centre, abs=1e-13)


def test_affine_statistics_are_exact():
    f = affine(3, -4, 2)
    spec = CircleSpec((0.5, 0.5), 0.2)
    centre = 3 * 0.5 - 4 * 0.5 + 2
    stats = circle_statistics(f, spec, median="antipodal")
    assert stats.median == pytest.approx(centre, abs=1e-14)
    assert stats.max_ball == pytest.approx(centre + 5 * 0.2, abs=1e-12)
    assert stats.min_ball == pytest.approx(centre - 5 * 0.2, abs=1e-12)
    assert stats.midrange == pytest.approx(centre, abs=1e-12)
    assert median_sampled(f, spec) == pytest.approx(centre, abs=1e-14)


def test_fundamental_solution_extrema_and_median():
    f = fundamental_solution(1.5)  # 1/|x|
    spec = CircleSpec((1.0, 0.0), 0.4)
    hi, lo = ball_extrema(f, spec)
    assert hi == pytest.approx(1 / 0.6, rel=1e-12)
    assert lo == pytest.approx(1 / 1.4, rel=1e-12)
    angle, value = median_antipodal(f, CircleSpec((1.0, 0.0), 0.3))
    assert angle == pytest.approx(np.pi / 2, abs=1e-12)
    assert value == pytest.approx(1.09 ** -0.5, rel=1e-13)


def test_sampled_median_frozen_value():
    f = fundamental_solution(1.5)
    assert median_sampled(f, CircleSpec((1.0, 0.0), 0.5, 1024)) == pytest.approx(
        0.894427190999916, abs=1e-14)


def test_antipodal_errors():
    with pytest.raises(DegenerateGradientError):
        median_antipodal(quadratic(1, 2), CircleSpec((0.0, 0.0), 0.1))
    # Re z^3 near its critical point: the odd gap function has three roots
    f = ScalarField2D(
        "re-z3",
        lambda x, y: x ** 3 - 3 * x * y * y,
        lambda x, y: (3 * x * x - 3 * y * y, -6 * x * y),
        lambda x, y: (6 * x, -6 * y, -6 * x),
    )
    with pytest.raises(AntipodalFailure):
        median_antipodal(f, CircleSpec((0.01, 0.0), 1.0))


def test_disk_must_avoid_singularity():
    with pytest.raises(InadmissiblePointError):
        ball_mean(fundamental_solution(1.5), CircleSpec((0.5, 0.0), 0.6))


def test_median_mode_validated():
    with pytest.raises(ValueError):
        circle_statistics(quadratic(), CircleSpec((1, 1), 0.1), median="mode")


@settings(max_examples=30, deadline=None)
@given(cx=st.floats(-1, 1), cy=st.floats(-1, 1), eps=st.floats(0.01, 0.5),
       shift=st.floats(-10, 10))
def test_statistics_commute_with_constant_shift(cx, cy, eps, shift):
    f = field_from_id("cubic")
    g = field_from_id("cubic")
    spec = CircleSpec((cx, cy), eps, 64)
    a = circle_statistics(f, spec, rings=4)
    shifted = type(g)(g.name, lambda x, y: f.value(x, y) + shift, f.gradient, f.hessian)
    b = circle_statistics(shifted, spec, rings=4)
    for k, v in a.as_dict().items():
        assert b.as_dict()[k] == pytest.approx(v + shift, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(cx=st.floats(-1, 1), cy=st.floats(-1, 1), eps=st.floats(0.01, 0.5))
def test_statistic_ordering(cx, cy, eps):
    f = field_from_id("sincos")
    stats = circle_statistics(f, CircleSpec((cx, cy), eps, 64), rings=4)
    for v in (stats.boundary_mean, stats.ball_mean, stats.median):
        assert stats.min_ball - 1e-12 <= v <= stats.max_ball + 1e-12


def test_transformer_api():
    est = CircleStatistics(field="paraboloid", radius=0.1, samples=64, rings=4)
    assert clone(est).get_params() == est.get_params()
    X = np.array([[0.3, 0.2], [1.0, -1.0]])
    out = est.fit(X).transform(X)
    assert out.shape == (2, 6)
    direct = circle_statistics(field_from_id("paraboloid"), CircleSpec((1.0, -1.0), 0.1, 64), 4)
    assert np.allclose(out[1], list(direct.as_dict().values()))
    assert list(est.get_feature_names_out())[-1] == "midrange"
    with pytest.raises(ValueError):
        est.transform(np.ones((2, 3)))
    with pytest.raises(ValueError):
        CircleStatistics(median="mode").fit()
