import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pstat import InadmissiblePointError
from pstat.fields import (
    BATTERY_IDS,
    Point2,
    affine,
    battery,
    check_field_consistency,
    constant,
    field_from_id,
    fundamental_solution,
    quadratic,
)
from pstat.operators import nondegenerate_points


def test_battery_has_twenty_distinct_fields():
    fields = battery()
    assert len(fields) == 20
    assert list(fields) == list(BATTERY_IDS)


@pytest.mark.parametrize("fid", BATTERY_IDS)
def test_analytic_derivatives_match_finite_differences(fid):
    f = field_from_id(fid)
    pts = nondegenerate_points(f, 8, np.random.default_rng(3), min_gradient=0.0,
                               margin=0.5)
    report = check_field_consistency(f, pts)
    assert report.max_gradient_deviation < 1e-7
    assert report.max_hessian_deviation < 1e-6


def test_identifiers_with_arguments():
    f = field_from_id("affine:3,-4,2")
    assert f.value(np.array(1.0), np.array(1.0)) == pytest.approx(1.0)
    assert field_from_id("fundsol:1.5").name == "fundsol:1.5"
    assert field_from_id("paraboloid").value(np.array(1.0), np.array(1.0)) == 3.0


@pytest.mark.parametrize("bad", ["nope", "affine:1,x", "affine:1,2,3,4"])
def test_bad_identifiers_raise(bad):
    with pytest.raises(ValueError):
        field_from_id(bad)


def test_fundamental_solution_values():
    f = fundamental_solution(1.5)
    # exponent (p-2)/(p-1) = -1
    assert f.value(np.array(2.0), np.array(0.0)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fundamental_solution(2.5)


def test_singularity_is_inadmissible():
    f = fundamental_solution(1.5)
    assert not f.admissible(0.0, 0.0)
    assert f.admissible(1.0, 0.0, margin=0.5)
    assert not f.admissible(1.0, 0.0, margin=1.5)
    with pytest.raises(InadmissiblePointError):
        f.require_admissible(0.0, 0.0)


def test_constant_and_affine_have_zero_hessian():
    for f in (constant(2.0), affine(1, 2, 3)):
        h = f.hessian_matrix(Point2(0.3, -0.4))
        assert np.all(h == 0)


def test_point2_coercion():
    assert Point2.of([1, 2]) == Point2(1.0, 2.0)
    assert Point2.of(Point2(1, 2)) is not None


@settings(max_examples=40, deadline=None)
@given(angle=st.floats(-np.pi, np.pi), x=st.floats(-1, 1), y=st.floats(-1, 1))
def test_rotation_conjugates_hessian(angle, x, y):
    f = quadratic(1.0, 2.0)
    g = f.rotated(angle)
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s], [s, c]])
    expected = R @ f.hessian_matrix(Point2(0, 0)) @ R.T
    assert np.allclose(g.hessian_matrix(Point2(x, y)), expected, atol=1e-12)
    # value is preserved at rotated points
    q = R @ np.array([x, y])
    assert g.value(np.array(q[0]), np.array(q[1])) == pytest.approx(
        float(f.value(np.array(x), np.array(y))), abs=1e-12)


def test_translation_moves_values():
    f = quadratic(1.0, 2.0)
    g = f.translated((0.5, -0.25))
    assert g.value(np.array(0.5), np.array(-0.25)) == pytest.approx(0.0, abs=1e-15)
