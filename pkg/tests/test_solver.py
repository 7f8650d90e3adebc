import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from pstat.fields import affine, field_from_id, fundamental_solution, quadratic
from pstat.solver import (
    Grid,
    GridDomain,
    PHarmonicSolver,
    SolverProblem,
    _SchemeOperator,
    convergence_study,
    interpolate,
    prolongate,
    scheme_update,
    solve,
)

SQUARE = GridDomain.rectangle(h=1 / 16)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(-3, 3), d=st.floats(-3, 3),
       q1=st.floats(0, 1), q2=st.floats(0, 1))
def test_interpolation_is_exact_for_bilinear_functions(a, b, c, d, q1, q2):
    grid = Grid(0.0, 0.0, 0.125, 9, 9)
    X, Y = grid.coordinates()
    vals = a + b * X + c * Y + d * X * Y
    got = interpolate(vals, grid, q1, q2)
    assert got == pytest.approx(a + b * q1 + c * q2 + d * q1 * q2, abs=1e-12)


def test_interpolation_rejects_points_outside():
    grid = Grid(0.0, 0.0, 0.5, 3, 3)
    with pytest.raises(ValueError):
        interpolate(np.zeros((3, 3)), grid, 1.5, 0.2)
    # the far edge itself is inside
    assert interpolate(np.ones((3, 3)), grid, 1.0, 1.0) == 1.0


def test_domain_validation():
    with pytest.raises(ValueError):
        GridDomain.rectangle(x1=-1.0)
    with pytest.raises(ValueError):
        GridDomain.annulus(r_in=2.0, r_out=1.0)
    with pytest.raises(ValueError):
        GridDomain.rectangle(h=0.3).grid
    with pytest.raises(ValueError):
        SolverProblem(SQUARE, "saddle", eps=SQUARE.h)


def test_annulus_grid_and_interior():
    dom = GridDomain.annulus(0.5, 1.5, h=0.25)
    grid = dom.grid
    assert grid.shape == (13, 13)
    assert grid.x0 == -1.5
    inner = dom.interior_mask(0.25)
    X, Y = grid.coordinates()
    r = np.hypot(X, Y)
    assert np.all((r[inner] >= 0.75 - 1e-12) & (r[inner] <= 1.25 + 1e-12))


@pytest.mark.parametrize("scheme", ["fe1", "fe2", "manfredi"])
def test_kernels_match_reference(scheme):
    p = 3.0 if scheme == "manfredi" else 1.5
    op = _SchemeOperator(GridDomain.annulus(h=1 / 16), 0.25, p, scheme, 32, 3)
    u = np.random.default_rng(0).standard_normal(op.grid.nx * op.grid.ny)
    assert np.allclose(op.rhs(u), op.rhs_reference(u), rtol=0, atol=1e-14)


@pytest.mark.parametrize("scheme", ["fe1", "fe2", "manfredi"])
@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_affine_data_is_a_fixed_point(scheme, p):
    f = affine(3, -4, 2)
    problem = SolverProblem(SQUARE, f, p=p, scheme=scheme, init="extend")
    result = solve(problem)
    assert result.iterations <= 3
    assert result.sup_error(f) <= 1e-9


def test_damping_blends_old_and_new():
    f = quadratic(1, -1)
    full = SolverProblem(SQUARE, f, scheme="fe2", damping=1.0)
    half = SolverProblem(SQUARE, f, scheme="fe2", damping=0.5)
    est = PHarmonicSolver(max_iter=1).fit(SQUARE, f)
    start = est.values_.copy()
    # reproduce the mean initialisation to get the pre-sweep grid
    op = _SchemeOperator(SQUARE, full.eps, 2.0, "fe2", 64, 4)
    u0 = start.copy()
    u0[op.interior] = np.nanmean(np.where(op.interior, np.nan, start))
    a, _ = scheme_update(full, u0)
    b, change = scheme_update(half, u0)
    assert np.allclose(b[op.interior], 0.5 * u0[op.interior] + 0.5 * a[op.interior])
    assert change == pytest.approx(np.max(np.abs(b - u0)[op.interior]))
    assert np.array_equal(a[~op.interior], u0[~op.interior], equal_nan=True)


@pytest.mark.parametrize("p", [1.1, 2.0, 10.0])
def test_fe2_update_is_monotone(p):
    rng = np.random.default_rng(int(p * 10))
    problem = SolverProblem(SQUARE, "saddle", p=p, scheme="fe2")
    shape = SQUARE.grid.shape
    for _ in range(10):
        low = rng.standard_normal(shape)
        high = low + rng.exponential(size=shape) * (rng.random(shape) < 0.5)
        a, _ = scheme_update(problem, high)
        b, _ = scheme_update(problem, low)
        assert np.all(a >= b - 1e-15)


def test_solution_stays_within_boundary_range():
    f = field_from_id("sincos")
    result = solve(SolverProblem(SQUARE, f, p=1.5, scheme="fe2", tol=1e-8))
    assert result.converged and result.range_bound_held
    X, Y = result.grid.coordinates()
    data = f.value(X[~result.interior], Y[~result.interior])
    inner = result.values[result.interior]
    assert inner.min() >= data.min() - 1e-12 and inner.max() <= data.max() + 1e-12


def test_p2_square_is_accurate():
    f = quadratic(1, -1)
    result = solve(SolverProblem(GridDomain.rectangle(h=1 / 32), f, scheme="fe1"))
    assert result.converged
    assert result.sup_error(f) < 1e-6


def test_runs_are_bit_identical():
    problem = SolverProblem(SQUARE, "sincos", p=3.0, scheme="fe2", tol=1e-6)
    a, b = solve(problem), solve(problem)
    assert np.array_equal(a.values, b.values, equal_nan=True)
    assert a.residual_profile == b.residual_profile


def test_estimator_api():
    est = PHarmonicSolver(p=1.5, scheme="fe2", tol=1e-8)
    params = est.get_params()
    assert params["p"] == 1.5 and params["n_samples"] == 64
    assert clone(est).get_params() == params
    est.fit(SQUARE, "sincos")
    assert est.converged_ and est.n_iter_ == len(est.residual_profile_)
    assert est.eps_ == pytest.approx(4 / 16)
    pts = np.array([[0.5, 0.5], [0.0, 0.3]])
    pred = est.predict(pts)
    assert pred.shape == (2,)
    f = field_from_id("sincos")
    assert pred[1] == pytest.approx(float(f.value(np.array(0.0), np.array(0.3))))
    with pytest.raises(ValueError):
        est.predict(np.ones((2, 3)))


def test_nonmonotone_scheme_warns():
    with pytest.warns(RuntimeWarning):
        PHarmonicSolver(p=4.0, scheme="fe1", max_iter=2).fit(SQUARE, "saddle")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        PHarmonicSolver(p=4.0, scheme="manfredi", max_iter=2).fit(SQUARE, "saddle")


def test_boundary_data_must_cover_stencils():
    # the hole of this annulus contains the singularity, but the collar does not
    dom = GridDomain.annulus(0.5, 1.5, h=1 / 8)
    est = PHarmonicSolver(p=1.5, max_iter=1).fit(dom, fundamental_solution(1.5))
    assert np.isnan(est.values_[dom.grid.nx // 2, dom.grid.ny // 2])


def test_init_array_shape_checked():
    with pytest.raises(ValueError):
        PHarmonicSolver(init=np.zeros((3, 3))).fit(SQUARE, "saddle")


def test_convergence_study_and_prolongation():
    f = quadratic(1, -1)
    problem = SolverProblem(GridDomain.rectangle(h=1 / 16), f, p=2.0, scheme="fe2", tol=1e-8)
    rows = convergence_study(problem, [1 / 4, 1 / 8])
    assert [r["h"] for r in rows] == [1 / 16, 1 / 32]
    assert rows[1]["sup_error"] < rows[0]["sup_error"]
    coarse = solve(problem)
    fine = GridDomain.rectangle(h=1 / 32)
    guess = prolongate(coarse, fine, f)
    assert guess.shape == fine.grid.shape
    assert np.allclose(guess[::2, ::2], coarse.values)


def test_problem_dict_round_trip():
    problem = SolverProblem(GridDomain.annulus(h=1 / 8), "fundsol:1.5", p=1.5)
    d = problem.to_dict()
    assert d["domain"]["shape"] == "annulus"
    assert d["eps"] == 0.5 and d["max_iters"] == int(np.ceil(10 * (3 / 0.5) ** 2))
    assert d["boundary_field"] == "fundsol:1.5"
