"""Local statistics of a field on a circle and in the closed disk it bounds.

The four statistics are the boundary mean, the disk (ball) mean, the median
over the circle and the midrange ``(max + min) / 2`` over the closed disk.
The median is available in two independent forms: a sampled surrogate (the
average of the two central order statistics of ``M`` equispaced samples)
and the antipodal construction, which locates the level line crossing the
circle at two antipodal points by root finding.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import (
    AntipodalFailure,
    DegenerateGradientError,
    check_even_samples,
    check_positive,
)
from .fields import Point2, ScalarField2D, field_from_id
from .operators import GRADIENT_FLOOR

__all__ = [
    "CircleSpec",
    "CircleStats",
    "sample_circle",
    "boundary_mean",
    "ball_mean",
    "median_sampled",
    "median_antipodal",
    "ball_extrema",
    "circle_statistics",
    "CircleStatistics",
]

_GOLDEN = (np.sqrt(5.0) - 1) / 2


@dataclass(frozen=True)
class CircleSpec:
    center: Point2
    radius: float
    samples: int = 256

    def __post_init__(self):
        object.__setattr__(self, "center", Point2.of(self.center))
        object.__setattr__(self, "radius", check_positive("radius", self.radius))
        object.__setattr__(self, "samples", check_even_samples(self.samples))

    def angles(self):
        return 2 * np.pi * np.arange(self.samples) / self.samples

    def points(self, theta=None, radius=None):
        theta = self.angles() if theta is None else np.asarray(theta, float)
        r = self.radius if radius is None else radius
        return (self.center.x1 + r * np.cos(theta),
                self.center.x2 + r * np.sin(theta))


@dataclass(frozen=True)
class CircleStats:
    boundary_mean: float
    ball_mean: float
    median: float
    max_ball: float
    min_ball: float
    spec: CircleSpec = dc_field(repr=False)

    @property
    def midrange(self):
        return 0.5 * (self.max_ball + self.min_ball)

    def as_dict(self):
        return {
            "boundary_mean": self.boundary_mean,
            "ball_mean": self.ball_mean,
            "median": self.median,
            "max_ball": self.max_ball,
            "min_ball": self.min_ball,
            "midrange": self.midrange,
        }


def _require_disk(f, spec):
    c = spec.center
    f.require_admissible(c.x1, c.x2, margin=spec.radius, what="closed disk")


def sample_circle(f, spec):
    """Angles ``2πj/M`` and the field values at ``center + ε(cos, sin)``."""
    theta = spec.angles()
    x1, x2 = spec.points(theta)
    f.require_admissible(x1, x2, what="circle sample")
    return theta, f.value(x1, x2)


def boundary_mean(f, spec):
    """Periodic-trapezoid average of ``f`` over the circle."""
    return float(np.mean(sample_circle(f, spec)[1]))


def _ring_quadrature(rings):
    """Gauss-Legendre radii in (0, 1) with area weights summing to one."""
    xi, w = np.polynomial.legendre.leggauss(rings)
    r = 0.5 * (xi + 1)
    weights = w * r
    return r, weights / weights.sum()


def ball_mean(f, spec, rings=16):
    """Area average over the disk.

    Each ring is averaged with the periodic trapezoid; rings sit at
    Gauss-Legendre radii and carry weights proportional to their radius.
    """
    _require_disk(f, spec)
    r, weights = _ring_quadrature(int(rings))
    theta = spec.angles()
    x1, x2 = spec.points(theta[None, :], (spec.radius * r)[:, None])
    ring_means = f.value(x1, x2).mean(axis=1)
    return float(weights @ ring_means)


def median_sampled(f, spec):
    """Average of the two central order statistics of the circle samples."""
    vals = np.sort(sample_circle(f, spec)[1])
    m = spec.samples // 2
    return float(0.5 * (vals[m - 1] + vals[m]))


def median_antipodal(f, spec, gradient_floor=GRADIENT_FLOOR, panels=64,
                     xtol=1e-13):
    """Median from the level line through an antipodal pair of the circle.

    Scans ``g(θ) = f(x + εv) - f(x - εv)`` on ``panels`` panels of [0, π],
    requires exactly one sign change and bisects it to ``xtol`` in angle.

    Returns
    -------
    angle : float
        ``θ`` in [0, π) with ``f(x + εv(θ)) = f(x - εv(θ))``.
    value : float
        The common value (average of the two endpoint evaluations).
    """
    c = spec.center
    f.require_admissible(c.x1, c.x2, margin=spec.radius, what="closed disk")
    g1, g2 = (float(g) for g in f.gradient(c.x1, c.x2))
    if np.hypot(g1, g2) < gradient_floor:
        raise DegenerateGradientError("median_antipodal needs a nonvanishing gradient")
    eps = spec.radius

    def pair(theta):
        dx, dy = eps * np.cos(theta), eps * np.sin(theta)
        return f.value(c.x1 + dx, c.x2 + dy), f.value(c.x1 - dx, c.x2 - dy)

    def gap(theta):
        a, b = pair(theta)
        return a - b

    grid = np.pi * np.arange(panels + 1) / panels
    g = gap(grid)
    sign = np.sign(g)
    roots = []
    for j in range(panels):
        if sign[j] == 0:
            roots.append((grid[j], grid[j]))
        elif sign[j] * sign[j + 1] < 0:
            roots.append((grid[j], grid[j + 1]))
    # theta = 0 and theta = pi describe the same antipodal pair
    if sign[panels] == 0 and sign[0] != 0:
        roots.append((grid[panels], grid[panels]))
    if len(roots) != 1:
        raise AntipodalFailure(
            f"found {len(roots)} antipodal crossings on the scan; radius "
            f"{eps:g} too large for a single level-line foliation")
    lo, hi = roots[0]
    glo = gap(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        gm = gap(mid)
        if gm == 0:
            lo = hi = mid
            break
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    a, b = pair(theta)
    return float(theta % np.pi), float(0.5 * (a + b))


def _golden_max(func, lo, hi, xtol=1e-12):
    """Golden-section search for a maximum of ``func`` on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    while b - a > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def ball_extrema(f, spec, rings=16):
    """Max and min of ``f`` over the closed disk.

    The disk is sampled on ``rings`` equispaced rings of ``M`` points plus the
    centre; the boundary extrema are then refined by golden-section search in
    angle around the best boundary sample.
    """
    _require_disk(f, spec)
    rings = int(rings)
    theta = spec.angles()
    radii = spec.radius * np.arange(1, rings + 1) / rings
    x1, x2 = spec.points(theta[None, :], radii[:, None])
    vals = f.value(x1, x2)
    center_val = float(f.value(*spec.center))
    hi = max(float(vals.max()), center_val)
    lo = min(float(vals.min()), center_val)

    boundary = vals[-1]
    step = 2 * np.pi / spec.samples

    def on_circle(t):
        return float(f.value(*spec.points(t)))

    jmax = int(np.argmax(boundary))
    _, refined = _golden_max(on_circle, theta[jmax] - step, theta[jmax] + step)
    hi = max(hi, refined)
    jmin = int(np.argmin(boundary))
    _, refined = _golden_max(lambda t: -on_circle(t), theta[jmin] - step,
                             theta[jmin] + step)
    lo = min(lo, -refined)
    return hi, lo


def circle_statistics(f, spec, rings=16, median="sampled"):
    """All statistics of ``f`` for one circle.

    ``median`` selects ``"sampled"`` or ``"antipodal"``.
    """
    if median == "sampled":
        med = median_sampled(f, spec)
    elif median == "antipodal":
        med = median_antipodal(f, spec)[1]
    else:
        raise ValueError(f"median must be 'sampled' or 'antipodal', got {median!r}")
    hi, lo = ball_extrema(f, spec, rings)
    return CircleStats(boundary_mean(f, spec), ball_mean(f, spec, rings), med,
                       hi, lo, spec)


class CircleStatistics(TransformerMixin, BaseEstimator):
    """Map centre points to the local statistics of a fixed field.

    Parameters
    ----------
    field : str or ScalarField2D
        The field, or a battery identifier.
    radius : float
        Circle radius.
    samples : int
        Even number of angular samples.
    rings : int
        Rings used for the disk mean and the disk extrema.
    median : {"sampled", "antipodal"}
    """

    feature_names = ("boundary_mean", "ball_mean", "median", "max_ball",
                     "min_ball", "midrange")

    def __init__(self, field="paraboloid", radius=0.1, samples=256, rings=16,
                 median="sampled"):
        self.field = field
        self.radius = radius
        self.samples = samples
        self.rings = rings
        self.median = median

    def fit(self, X=None, y=None):
        if isinstance(self.field, ScalarField2D):
            self.field_ = self.field
        else:
            self.field_ = field_from_id(self.field)
        CircleSpec((0.0, 0.0), self.radius, self.samples)
        if self.median not in ("sampled", "antipodal"):
            raise ValueError(f"unknown median mode {self.median!r}")
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "field_")
        X = check_array(X, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"expected points with 2 coordinates, got {X.shape[1]}")
        out = np.empty((X.shape[0], len(self.feature_names)))
        for i, (a, b) in enumerate(X):
            spec = CircleSpec((a, b), self.radius, self.samples)
            stats = circle_statistics(self.field_, spec, self.rings, self.median)
            out[i] = list(stats.as_dict().values())
        return out

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names, dtype=object)
