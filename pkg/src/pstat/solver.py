"""Dirichlet solver iterating the mean-value formulas on a uniform grid.

Each Jacobi sweep replaces every interior node by a weighted combination of
local statistics of the previous iterate, computed on the circle (and disk)
of radius ``eps`` around the node from the bilinear interpolant of the
grid.  Nodes closer than ``eps`` to the boundary form a collar pinned to the
boundary data, so every statistic only touches known values.

Because the grid is uniform and every circle is centred on a node, the
interpolation weights of a circle sample do not depend on the node; each
statistic is therefore a fixed stencil of flat index offsets, applied by the
compiled kernels in ``_kernels``.
"""

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import _kernels
from ._validation import PStatError, check_even_samples, check_exponent, check_positive
from .asymptotics import fe1_weights, fe2_weights, manfredi_weights
from .fields import ScalarField2D, field_from_id

__all__ = [
    "Grid",
    "GridDomain",
    "SolverProblem",
    "SolverResult",
    "SolverDivergence",
    "SCHEMES",
    "interpolate",
    "scheme_update",
    "solve",
    "convergence_study",
    "prolongate",
    "PHarmonicSolver",
]

SCHEMES = ("fe1", "fe2", "manfredi")
_SNAP = 1e-9


class SolverDivergence(PStatError, ArithmeticError):
    """The iteration produced non-finite values."""


@dataclass(frozen=True)
class Grid:
    """Uniform nodes ``(x0 + i h, y0 + j h)``; arrays are indexed ``[i, j]``."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    @property
    def shape(self):
        return self.nx, self.ny

    def coordinates(self):
        xs = self.x0 + self.h * np.arange(self.nx)
        ys = self.y0 + self.h * np.arange(self.ny)
        return np.meshgrid(xs, ys, indexing="ij")

    def interpolate(self, values, q1, q2):
        return interpolate(values, self, q1, q2)


def interpolate(values, grid, q1, q2):
    """Bilinear interpolation of nodal ``values`` at points ``(q1, q2)``.

    Raises ``ValueError`` for points outside the grid's hull.
    """
    values = np.asarray(values, float)
    q1, q2 = np.broadcast_arrays(np.asarray(q1, float), np.asarray(q2, float))
    a = (q1 - grid.x0) / grid.h
    b = (q2 - grid.y0) / grid.h
    # snapping only selects the cell; the weights use the exact coordinates
    sa = np.where(np.abs(a - np.round(a)) < _SNAP, np.round(a), a)
    sb = np.where(np.abs(b - np.round(b)) < _SNAP, np.round(b), b)
    if (np.any(~np.isfinite(a)) or np.any(~np.isfinite(b)) or np.any(sa < 0)
            or np.any(sb < 0) or np.any(sa > grid.nx - 1) or np.any(sb > grid.ny - 1)):
        raise ValueError("interpolation point outside the grid hull")
    i = np.minimum(np.floor(sa).astype(int), grid.nx - 2)
    j = np.minimum(np.floor(sb).astype(int), grid.ny - 2)
    s = a - i
    t = b - j
    return ((1 - s) * (1 - t) * values[i, j] + s * (1 - t) * values[i + 1, j]
            + (1 - s) * t * values[i, j + 1] + s * t * values[i + 1, j + 1])


@dataclass(frozen=True)
class GridDomain:
    """A rectangle ``(x0, x1, y0, y1)`` or an annulus ``(r_in, r_out, c1, c2)``
    discretised with spacing ``h``."""

    shape: str
    bounds: tuple
    h: float

    def __post_init__(self):
        check_positive("h", self.h)
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if self.shape == "rectangle":
            x0, x1, y0, y1 = self.bounds
            if not (x1 > x0 and y1 > y0):
                raise ValueError("rectangle needs x0 < x1 and y0 < y1")
        elif self.shape == "annulus":
            r_in, r_out, _, _ = self.bounds
            if not 0 < r_in < r_out:
                raise ValueError("annulus needs 0 < r_in < r_out")
        else:
            raise ValueError(f"unknown domain shape {self.shape!r}")

    @classmethod
    def rectangle(cls, x0=0.0, x1=1.0, y0=0.0, y1=1.0, h=1 / 64):
        return cls("rectangle", (x0, x1, y0, y1), h)

    @classmethod
    def annulus(cls, r_in=0.5, r_out=1.5, center=(0.0, 0.0), h=1 / 64):
        return cls("annulus", (r_in, r_out, *center), h)

    def with_h(self, h):
        return GridDomain(self.shape, self.bounds, h)

    @property
    def diameter(self):
        if self.shape == "rectangle":
            x0, x1, y0, y1 = self.bounds
            return math.hypot(x1 - x0, y1 - y0)
        return 2 * self.bounds[1]

    @property
    def grid(self):
        h = self.h
        if self.shape == "rectangle":
            x0, x1, y0, y1 = self.bounds
            nx = int(round((x1 - x0) / h))
            ny = int(round((y1 - y0) / h))
            if abs(nx * h - (x1 - x0)) > 1e-9 * h or abs(ny * h - (y1 - y0)) > 1e-9 * h:
                raise ValueError("rectangle sides must be multiples of h")
            return Grid(x0, y0, h, nx + 1, ny + 1)
        _, r_out, c1, c2 = self.bounds
        k = int(math.ceil(r_out / h - 1e-9))
        return Grid(c1 - k * h, c2 - k * h, h, 2 * k + 1, 2 * k + 1)

    def boundary_distance(self, x1, x2):
        """Distance to the boundary; negative outside the domain."""
        if self.shape == "rectangle":
            x0, x1b, y0, y1b = self.bounds
            return np.minimum(np.minimum(x1 - x0, x1b - x1),
                              np.minimum(x2 - y0, y1b - x2))
        r_in, r_out, c1, c2 = self.bounds
        r = np.hypot(x1 - c1, x2 - c2)
        return np.minimum(r - r_in, r_out - r)

    def interior_mask(self, eps):
        """Nodes whose closed ``eps``-disk lies inside the domain."""
        X, Y = self.grid.coordinates()
        return self.boundary_distance(X, Y) >= eps * (1 - 1e-12)


def _sample_stencil(eps, h, samples):
    """Per-sample bilinear stencils: integer offsets ``(M, 4, 2)`` and weights ``(M, 4)``."""
    theta = 2 * np.pi * np.arange(samples) / samples
    a = eps * np.cos(theta) / h
    b = eps * np.sin(theta) / h
    a = np.where(np.abs(a - np.round(a)) < _SNAP, np.round(a), a)
    b = np.where(np.abs(b - np.round(b)) < _SNAP, np.round(b), b)
    # samples on a grid line use the inward cell so no corner leaves the disk
    i0 = np.floor(a).astype(int) - ((a > 0) & (a == np.floor(a)))
    j0 = np.floor(b).astype(int) - ((b > 0) & (b == np.floor(b)))
    s = a - i0
    t = b - j0
    offsets = np.stack([
        np.stack([i0, j0], -1), np.stack([i0 + 1, j0], -1),
        np.stack([i0, j0 + 1], -1), np.stack([i0 + 1, j0 + 1], -1),
    ], axis=1)
    weights = np.stack([(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t], axis=1)
    return offsets, weights


def _disk_offsets(eps, h):
    k = int(math.floor(eps / h + _SNAP))
    di, dj = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
    inside = di * di + dj * dj <= (eps / h) ** 2 * (1 + 1e-12)
    return np.stack([di[inside], dj[inside]], -1)


class _SchemeOperator:
    """The sweep for one grid, radius and scheme, with stencils pre-assembled.

    ``rhs`` runs the compiled kernels; ``rhs_reference`` evaluates the same
    statistics with sparse matrices and numpy reductions and serves as an
    independent check of the kernels.
    """

    def __init__(self, domain, eps, p, scheme, samples, rings):
        self.domain = domain
        self.grid = domain.grid
        self.eps = float(eps)
        self.p = check_exponent(p)
        if scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
        self.scheme = scheme
        self.samples = check_even_samples(samples)
        self.rings = int(rings)

        nx, ny = self.grid.shape
        self.interior = domain.interior_mask(self.eps)
        ii, jj = np.nonzero(self.interior)
        self.interior_flat = ii * ny + jj
        if ii.size == 0:
            raise ValueError("no interior nodes; eps too large for the domain")

        offs, self.corner_w = _sample_stencil(self.eps, self.grid.h, self.samples)
        disk = _disk_offsets(self.eps, self.grid.h)
        ball, self.ball_w = self._ball_stencil()
        reach = np.abs(np.concatenate([offs.reshape(-1, 2), disk, ball])).max(axis=0)
        if (ii.min() < reach[0] or jj.min() < reach[1]
                or ii.max() + reach[0] >= nx or jj.max() + reach[1] >= ny):
            raise ValueError("stencil leaves the grid; eps too large for the domain")
        self.corner_off = offs[..., 0] * ny + offs[..., 1]
        self.disk_off = disk[:, 0] * ny + disk[:, 1]
        self.ball_off = ball[:, 0] * ny + ball[:, 1]

        used = np.unique(np.concatenate([self.corner_off.reshape(-1), self.disk_off,
                                         self.ball_off if scheme == "manfredi" else []]))
        self.referenced = np.unique((self.interior_flat[:, None] + used[None, :].astype(int)))

        if scheme == "fe1":
            self.weights = fe1_weights(self.p)
        elif scheme == "fe2":
            self.weights = fe2_weights(self.p)
        else:
            self.weights = manfredi_weights(self.p)
        self._reference = None

    def _ball_stencil(self):
        """Aggregated disk-mean stencil: Gauss-Legendre rings of bilinear samples."""
        xi, w = np.polynomial.legendre.leggauss(self.rings)
        r = 0.5 * (xi + 1)
        ring_w = w * r / np.sum(w * r)
        acc = {}
        for rk, wk in zip(r, ring_w):
            o, ws = _sample_stencil(self.eps * rk, self.grid.h, self.samples)
            for (di, dj), wt in zip(o.reshape(-1, 2), (ws * wk / self.samples).reshape(-1)):
                acc[(int(di), int(dj))] = acc.get((int(di), int(dj)), 0.0) + wt
        keys = sorted(acc)
        return np.array(keys, dtype=int).reshape(-1, 2), np.array([acc[k] for k in keys])

    @property
    def monotone(self):
        return all(w >= 0 for w in self.weights)

    def rhs(self, u):
        """The scheme's right-hand side at every interior node, from flat ``u``."""
        u = np.ascontiguousarray(u, dtype=float)
        if self.scheme == "fe1":
            return _kernels.fe1_rhs(u, self.interior_flat, self.corner_off,
                                    self.corner_w, *self.weights)
        if self.scheme == "fe2":
            return _kernels.fe2_rhs(u, self.interior_flat, self.corner_off,
                                    self.corner_w, self.disk_off, *self.weights)
        return _kernels.manfredi_rhs(u, self.interior_flat, self.corner_off,
                                     self.corner_w, self.disk_off, self.ball_off,
                                     self.ball_w, *self.weights)

    def _reference_matrices(self):
        if self._reference is None:
            n, m = self.interior_flat.size, self.samples
            size = self.grid.nx * self.grid.ny
            cols = self.interior_flat[:, None, None] + self.corner_off[None]
            rows = np.repeat(np.arange(n * m), 4)
            samples = sparse.csr_matrix(
                (np.tile(self.corner_w.reshape(-1), n), (rows, cols.reshape(-1))),
                shape=(n * m, size))
            bcols = self.interior_flat[:, None] + self.ball_off[None]
            ball = sparse.csr_matrix(
                (np.tile(self.ball_w, n),
                 (np.repeat(np.arange(n), self.ball_off.size), bcols.reshape(-1))),
                shape=(n, size))
            self._reference = samples, ball
        return self._reference

    def rhs_reference(self, u):
        """Same as :meth:`rhs`, computed with sparse matrices and numpy reductions."""
        sample_matrix, ball_matrix = self._reference_matrices()
        samples = (sample_matrix @ u).reshape(-1, self.samples)
        if self.scheme == "fe1":
            w_med, w_mean = self.weights
            return w_med * _row_median(samples) + w_mean * samples.mean(axis=1)
        disk = u[self.interior_flat[:, None] + self.disk_off[None]]
        hi = np.maximum(samples.max(axis=1), disk.max(axis=1))
        lo = np.minimum(samples.min(axis=1), disk.min(axis=1))
        if self.scheme == "fe2":
            w_med, w_hi, w_lo = self.weights
            return w_med * _row_median(samples) + w_hi * hi + w_lo * lo
        w_hi, w_lo, w_ball = self.weights
        return w_hi * hi + w_lo * lo + w_ball * (ball_matrix @ u)

    def update(self, values, damping=1.0, reference=False):
        u = np.asarray(values, float).reshape(-1)
        new = u.copy()
        old = u[self.interior_flat]
        rhs = self.rhs_reference(u) if reference else self.rhs(u)
        new[self.interior_flat] = (1 - damping) * old + damping * rhs
        change = float(np.max(np.abs(new[self.interior_flat] - old), initial=0.0))
        return new.reshape(self.grid.shape), change


def _row_median(samples):
    m = samples.shape[1] // 2
    part = np.partition(samples, (m - 1, m), axis=1)
    return 0.5 * (part[:, m - 1] + part[:, m])



@dataclass(frozen=True)
class SolverProblem:
    domain: GridDomain
    boundary_data: ScalarField2D
    p: float = 2.0
    scheme: str = "fe2"
    eps: float = None
    M: int = 64
    rings: int = 4
    damping: float = 1.0
    tol: float = 1e-10
    max_iters: int = None
    init: object = "mean"

    def __post_init__(self):
        if isinstance(self.boundary_data, str):
            object.__setattr__(self, "boundary_data", field_from_id(self.boundary_data))
        if self.eps is None:
            object.__setattr__(self, "eps", 4 * self.domain.h)
        check_exponent(self.p)
        check_positive("tol", self.tol)
        if self.eps < 2 * self.domain.h * (1 - 1e-12):
            raise ValueError(f"eps = {self.eps:g} must be at least 2h = {2 * self.domain.h:g}")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")

    @property
    def resolved_max_iters(self):
        if self.max_iters is not None:
            return int(self.max_iters)
        return int(math.ceil(10 * (self.domain.diameter / self.eps) ** 2))

    def estimator(self):
        return PHarmonicSolver(p=self.p, scheme=self.scheme, eps=self.eps,
                               n_samples=self.M, rings=self.rings,
                               damping=self.damping, tol=self.tol,
                               max_iter=self.max_iters, init=self.init)

    def to_dict(self):
        return {
            "domain": {"shape": self.domain.shape, "bounds": list(self.domain.bounds),
                       "h": self.domain.h},
            "boundary_field": self.boundary_data.name,
            "p": self.p,
            "scheme": self.scheme,
            "eps": self.eps,
            "M": self.M,
            "rings": self.rings,
            "damping": self.damping,
            "tol": self.tol,
            "max_iters": self.resolved_max_iters,
            "init": self.init if isinstance(self.init, str) else "array",
        }


@dataclass
class SolverResult:
    values: np.ndarray
    iterations: int
    final_change: float
    converged: bool
    residual_profile: list
    grid: Grid = dc_field(repr=False)
    interior: np.ndarray = dc_field(repr=False, default=None)
    range_bound_held: bool = True

    def sup_error(self, exact):
        """Max nodal deviation from a field over the interior nodes."""
        X, Y = self.grid.coordinates()
        diff = self.values[self.interior] - exact.value(X[self.interior], Y[self.interior])
        return float(np.max(np.abs(diff), initial=0.0))


def _pinned_values(domain, boundary_data, interior):
    """Boundary data on every non-interior node where it is defined; NaN elsewhere."""
    X, Y = domain.grid.coordinates()
    values = np.full(X.shape, np.nan)
    ok = boundary_data.admissible(X, Y) & ~interior
    values[ok] = boundary_data.value(X[ok], Y[ok])
    return values


class PHarmonicSolver(RegressorMixin, BaseEstimator):
    """Value iteration for the p-Laplace Dirichlet problem.

    Parameters
    ----------
    p : float
        Exponent in (1, inf).
    scheme : {"fe2", "fe1", "manfredi"}
        ``fe2`` combines the circle median with the disk max and min and is
        monotone for every p; ``fe1`` (median and circle mean) is monotone
        only for p <= 2 and ``manfredi`` (max, min, disk mean) only for p >= 2.
    eps : float, optional
        Statistic radius; defaults to ``4 h``.
    n_samples : int
        Even number of circle samples.
    rings : int
        Gauss-Legendre rings for the disk mean (``manfredi`` only).
    damping : float
        Blend factor in (0, 1]; ``new = (1 - d) old + d rhs``.
    tol : float
        Stop once the sup-norm change of a sweep is at most ``tol``.
    max_iter : int, optional
        Sweep cap; defaults to ``10 (diameter / eps)^2``.
    init : {"mean", "extend"} or array
        Initial interior values: the mean of the pinned data, the boundary
        field evaluated at the interior nodes, or an explicit grid.
    """

    def __init__(self, p=2.0, scheme="fe2", eps=None, n_samples=64, rings=4,
                 damping=1.0, tol=1e-10, max_iter=None, init="mean"):
        self.p = p
        self.scheme = scheme
        self.eps = eps
        self.n_samples = n_samples
        self.rings = rings
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter
        self.init = init

    def _problem(self, domain, boundary_data):
        return SolverProblem(domain, boundary_data, self.p, self.scheme, self.eps,
                             self.n_samples, self.rings, self.damping, self.tol,
                             self.max_iter, self.init)

    def _initial(self, domain, boundary_data, op, pinned):
        interior = op.interior
        values = pinned.copy()
        if isinstance(self.init, str) and self.init == "mean":
            values[interior] = np.nanmean(pinned[~interior])
        elif isinstance(self.init, str) and self.init == "extend":
            X, Y = domain.grid.coordinates()
            values[interior] = boundary_data.value(X[interior], Y[interior])
        elif isinstance(self.init, str):
            raise ValueError(f"unknown init {self.init!r}")
        else:
            guess = np.asarray(self.init, float)
            if guess.shape != values.shape:
                raise ValueError(f"init grid has shape {guess.shape}, expected {values.shape}")
            values[interior] = guess[interior]
        return values

    def fit(self, domain, boundary_data):
        """Iterate the scheme on ``domain`` with Dirichlet data ``boundary_data``."""
        problem = self._problem(domain, boundary_data)
        boundary_data = problem.boundary_data
        op = _SchemeOperator(domain, problem.eps, problem.p, problem.scheme,
                             problem.M, problem.rings)
        if not op.monotone:
            warnings.warn(f"scheme {problem.scheme!r} is not monotone at p = {problem.p:g}",
                          RuntimeWarning, stacklevel=2)
        pinned = _pinned_values(domain, boundary_data, op.interior)
        if not np.all(np.isfinite(pinned.reshape(-1)[np.setdiff1d(
                op.referenced, op.interior_flat)])):
            raise ValueError("boundary data undefined on nodes the stencils reach")

        values = self._initial(domain, boundary_data, op, pinned)
        active = np.isfinite(values)
        max_iter = problem.resolved_max_iters
        profile = []
        range_ok = True
        converged = False
        change = math.inf
        it = 0
        for it in range(1, max_iter + 1):
            lo, hi = np.min(values[active]), np.max(values[active])
            values, change = op.update(values, problem.damping)
            inner = values[op.interior]
            if not np.all(np.isfinite(inner)):
                raise SolverDivergence(f"non-finite values after sweep {it}")
            spread = 1e-12 * max(1.0, abs(lo), abs(hi))
            range_ok &= bool(inner.min() >= lo - spread and inner.max() <= hi + spread)
            profile.append(change)
            if change <= problem.tol:
                converged = True
                break

        self.problem_ = problem
        self.grid_ = domain.grid
        self.eps_ = problem.eps
        self.interior_mask_ = op.interior
        self.values_ = values
        self.n_iter_ = it
        self.final_change_ = change
        self.converged_ = converged
        self.residual_profile_ = profile
        self.range_bound_held_ = range_ok
        self.monotone_ = op.monotone
        return self

    def predict(self, X):
        """Bilinear interpolation of the converged grid at points ``X`` of shape (n, 2)."""
        check_is_fitted(self, "values_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError(f"expected points with 2 coordinates, got {X.shape[1]}")
        return interpolate(self.values_, self.grid_, X[:, 0], X[:, 1])

    def result(self):
        check_is_fitted(self, "values_")
        return SolverResult(self.values_, self.n_iter_, self.final_change_,
                            self.converged_, list(self.residual_profile_),
                            self.grid_, self.interior_mask_, self.range_bound_held_)


def scheme_update(problem, values):
    """One Jacobi sweep of ``problem``'s scheme; returns ``(new_values, sup_change)``."""
    op = _SchemeOperator(problem.domain, problem.eps, problem.p, problem.scheme,
                         problem.M, problem.rings)
    return op.update(values, problem.damping)


def solve(problem):
    est = problem.estimator()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est.fit(problem.domain, problem.boundary_data)
    return est.result()


def prolongate(result, domain, fallback):
    """Previous level's grid interpolated onto ``domain``'s nodes, for a warm start."""
    X, Y = domain.grid.coordinates()
    old = result.grid
    a = (X - old.x0) / old.h
    b = (Y - old.y0) / old.h
    inside = (a >= 0) & (b >= 0) & (a <= old.nx - 1) & (b <= old.ny - 1)
    guess = np.full(X.shape, np.nan)
    guess[inside] = interpolate(result.values, old, X[inside], Y[inside])
    missing = ~np.isfinite(guess) & fallback.admissible(X, Y)
    guess[missing] = fallback.value(X[missing], Y[missing])
    return guess


def convergence_study(problem, eps_ladder, exact=None, warm_start=True, refined_tol=None):
    """Sup errors of :func:`solve` against ``exact`` along a ladder of radii.

    The ratio ``eps / h`` of ``problem`` is kept, so ``h`` shrinks with ``eps``.
    ``exact`` defaults to the boundary data field.  With ``warm_start`` each
    level after the first starts from the interpolated previous solution,
    which changes the iteration count but not the fixed point.
    ``refined_tol`` overrides the stopping tolerance on those later levels.
    """
    exact = problem.boundary_data if exact is None else exact
    ratio = problem.eps / problem.domain.h
    rows = []
    previous = None
    for eps in eps_ladder:
        eps = float(eps)
        domain = problem.domain.with_h(eps / ratio)
        init, tol = problem.init, problem.tol
        if previous is not None and refined_tol is not None:
            tol = refined_tol
        if warm_start and previous is not None:
            init = prolongate(previous, domain, problem.boundary_data)
        sub = SolverProblem(domain, problem.boundary_data, problem.p, problem.scheme,
                            eps, problem.M, problem.rings, problem.damping,
                            tol, problem.max_iters, init)
        res = solve(sub)
        previous = res
        rows.append({
            "eps": eps,
            "h": sub.domain.h,
            "sup_error": res.sup_error(exact),
            "iterations": res.iterations,
            "converged": res.converged,
            "range_bound_held": res.range_bound_held,
            "tol": tol,
        })
    return rows
