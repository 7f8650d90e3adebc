"""Smooth scalar fields of two variables with analytic derivatives.

Every field exposes vectorised ``value``, ``gradient`` and ``hessian``
evaluation plus an admissibility predicate describing where it is smooth.
A fixed battery of named fields is provided so experiments and tests can
refer to fields by string identifiers such as ``"affine:3,-4,2"`` or
``"fundsol:1.5"``.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from ._validation import InadmissiblePointError, check_finite, check_positive

__all__ = [
    "Point2",
    "ScalarField2D",
    "ConsistencyReport",
    "affine",
    "constant",
    "quadratic",
    "fundamental_solution",
    "battery",
    "field_from_id",
    "check_field_consistency",
    "DEFAULT_SAFETY_MARGIN",
]

DEFAULT_SAFETY_MARGIN = 1e-8


class Point2(NamedTuple):
    x1: float
    x2: float

    @classmethod
    def of(cls, pt):
        """Coerce a pair into a ``Point2`` with finite coordinates."""
        a, b = pt
        return cls(check_finite("x1", a), check_finite("x2", b))


def _no_singularity(x1, x2):
    return np.full(np.broadcast(x1, x2).shape, np.inf)


def _origin_distance(x1, x2):
    return np.hypot(x1, x2)


class ScalarField2D:
    """A smooth function of two variables.

    Parameters
    ----------
    name : str
        Identifier, also used to rebuild the field via :func:`field_from_id`.
    value, gradient, hessian : callable
        ``value(x1, x2)`` returns an array, ``gradient`` a pair ``(g1, g2)``
        and ``hessian`` a triple ``(h11, h12, h22)``; all broadcast.
    singular_distance : callable, optional
        Distance from ``(x1, x2)`` to the set where the field is not smooth.
    safety_margin : float
        Points closer than this to the singular set are inadmissible.
    """

    def __init__(self, name, value, gradient, hessian,
                 singular_distance=None, safety_margin=DEFAULT_SAFETY_MARGIN):
        self.name = name
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self._singular_distance = singular_distance or _no_singularity
        self.safety_margin = float(safety_margin)

    def __repr__(self):
        return f"ScalarField2D({self.name!r})"

    def __call__(self, x1, x2):
        return self.value(x1, x2)

    def value(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        return np.asarray(self._value(x1, x2), float) + np.zeros(x1.shape)

    def gradient(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        zero = np.zeros(x1.shape)
        return tuple(np.asarray(g, float) + zero for g in self._gradient(x1, x2))

    def hessian(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        zero = np.zeros(x1.shape)
        return tuple(np.asarray(h, float) + zero for h in self._hessian(x1, x2))

    def hessian_matrix(self, x):
        """Symmetric 2x2 Hessian at a single point."""
        h11, h12, h22 = (float(h) for h in self.hessian(*x))
        return np.array([[h11, h12], [h12, h22]])

    def singular_distance(self, x1, x2):
        return np.asarray(self._singular_distance(np.asarray(x1, float),
                                                  np.asarray(x2, float)))

    def admissible(self, x1, x2, margin=0.0):
        """True where the closed disk of radius ``margin`` stays smooth."""
        d = self.singular_distance(x1, x2)
        finite = np.isfinite(x1) & np.isfinite(x2)
        return finite & (d > self.safety_margin + margin)

    def require_admissible(self, x1, x2, margin=0.0, what="point"):
        ok = self.admissible(x1, x2, margin)
        if not np.all(ok):
            raise InadmissiblePointError(
                f"{what} outside the smooth domain of {self.name}")

    def rotated(self, angle, center=(0.0, 0.0)):
        """The field ``y -> f(c + R(-angle)(y - c))``, i.e. f rotated by ``angle``."""
        c, s = np.cos(angle), np.sin(angle)
        c1, c2 = center

        def back(y1, y2):
            d1, d2 = y1 - c1, y2 - c2
            return c1 + c * d1 + s * d2, c2 - s * d1 + c * d2

        def value(y1, y2):
            return self._value(*back(y1, y2))

        def gradient(y1, y2):
            g1, g2 = self._gradient(*back(y1, y2))
            return c * g1 - s * g2, s * g1 + c * g2

        def hessian(y1, y2):
            h11, h12, h22 = self._hessian(*back(y1, y2))
            # R H R^T
            r11 = c * c * h11 - 2 * c * s * h12 + s * s * h22
            r12 = c * s * (h11 - h22) + (c * c - s * s) * h12
            r22 = s * s * h11 + 2 * c * s * h12 + c * c * h22
            return r11, r12, r22

        def dist(y1, y2):
            return self._singular_distance(*back(y1, y2))

        return ScalarField2D(f"{self.name}@rot({angle:g})", value, gradient,
                             hessian, dist, self.safety_margin)

    def translated(self, shift):
        """The field ``y -> f(y - shift)``."""
        t1, t2 = shift
        return ScalarField2D(
            f"{self.name}@shift({t1:g},{t2:g})",
            lambda y1, y2: self._value(y1 - t1, y2 - t2),
            lambda y1, y2: self._gradient(y1 - t1, y2 - t2),
            lambda y1, y2: self._hessian(y1 - t1, y2 - t2),
            lambda y1, y2: self._singular_distance(y1 - t1, y2 - t2),
            self.safety_margin,
        )


# ---------------------------------------------------------------------------
# field constructors

def constant(c=0.0):
    c = float(c)
    return ScalarField2D(
        f"constant:{c:g}",
        lambda x, y: np.full(x.shape, c),
        lambda x, y: (0.0, 0.0),
        lambda x, y: (0.0, 0.0, 0.0),
    )


def affine(a=3.0, b=-4.0, c=2.0):
    a, b, c = float(a), float(b), float(c)
    return ScalarField2D(
        f"affine:{a:g},{b:g},{c:g}",
        lambda x, y: a * x + b * y + c,
        lambda x, y: (a, b),
        lambda x, y: (0.0, 0.0, 0.0),
    )


def quadratic(a=1.0, b=2.0):
    """``a x1^2 + b x2^2``; (1, 2) and (1, -1) are the usual test cases."""
    a, b = float(a), float(b)
    return ScalarField2D(
        f"quadratic:{a:g},{b:g}",
        lambda x, y: a * x * x + b * y * y,
        lambda x, y: (2 * a * x, 2 * b * y),
        lambda x, y: (2 * a, 0.0, 2 * b),
    )


def fundamental_solution(p):
    """The radial p-harmonic function ``|x|^((p-2)/(p-1))`` for ``1 < p < 2``."""
    p = float(p)
    if not 1.0 < p < 2.0:
        raise ValueError(f"fundamental_solution needs 1 < p < 2, got {p!r}")
    k = (p - 2.0) / (p - 1.0)

    def value(x, y):
        return (x * x + y * y) ** (k / 2)

    def gradient(x, y):
        s = k * (x * x + y * y) ** (k / 2 - 1)
        return s * x, s * y

    def hessian(x, y):
        r2 = x * x + y * y
        s = k * r2 ** (k / 2 - 1)
        q = (k - 2) / r2
        return s * (1 + q * x * x), s * q * x * y, s * (1 + q * y * y)

    return ScalarField2D(f"fundsol:{p:g}", value, gradient, hessian,
                         _origin_distance)


def _xy():
    return ScalarField2D("xy", lambda x, y: x * y, lambda x, y: (y, x),
                         lambda x, y: (0.0, 1.0, 0.0))


def _cubic():
    return ScalarField2D(
        "cubic",
        lambda x, y: x ** 3 - 3 * x * y * y,
        lambda x, y: (3 * x * x - 3 * y * y, -6 * x * y),
        lambda x, y: (6 * x, -6 * y, -6 * x),
    )


def _poly3():
    return ScalarField2D(
        "poly3",
        lambda x, y: x ** 3 + 2 * x * y * y - y ** 3 + x * y,
        lambda x, y: (3 * x * x + 2 * y * y + y, 4 * x * y - 3 * y * y + x),
        lambda x, y: (6 * x, 4 * y + 1, 4 * x - 6 * y),
    )


def _quartic():
    return ScalarField2D(
        "quartic",
        lambda x, y: x ** 4 - y ** 4 + x * y,
        lambda x, y: (4 * x ** 3 + y, x - 4 * y ** 3),
        lambda x, y: (12 * x * x, 1.0, -12 * y * y),
    )


def _sinexp():
    def hessian(x, y):
        e = np.exp(y)
        return -np.sin(x) * e, np.cos(x) * e, np.sin(x) * e

    return ScalarField2D(
        "sinexp",
        lambda x, y: np.sin(x) * np.exp(y),
        lambda x, y: (np.cos(x) * np.exp(y), np.sin(x) * np.exp(y)),
        hessian,
    )


def _expcos():
    def gradient(x, y):
        e = np.exp(x)
        return e * np.cos(y), -e * np.sin(y)

    def hessian(x, y):
        e = np.exp(x)
        return e * np.cos(y), -e * np.sin(y), -e * np.cos(y)

    return ScalarField2D("expcos", lambda x, y: np.exp(x) * np.cos(y),
                         gradient, hessian)


def _sincos():
    def gradient(x, y):
        return np.cos(x) * np.cos(2 * y), -2 * np.sin(x) * np.sin(2 * y)

    def hessian(x, y):
        return (-np.sin(x) * np.cos(2 * y), -2 * np.cos(x) * np.sin(2 * y),
                -4 * np.sin(x) * np.cos(2 * y))

    return ScalarField2D("sincos", lambda x, y: np.sin(x) * np.cos(2 * y),
                         gradient, hessian)


def _expaff(a=0.3, b=0.7):
    a, b = float(a), float(b)

    def gradient(x, y):
        e = np.exp(a * x + b * y)
        return a * e, b * e

    def hessian(x, y):
        e = np.exp(a * x + b * y)
        return a * a * e, a * b * e, b * b * e

    return ScalarField2D(f"expaff:{a:g},{b:g}", lambda x, y: np.exp(a * x + b * y),
                         gradient, hessian)


def _coscosh():
    return ScalarField2D(
        "coscosh",
        lambda x, y: np.cos(x) * np.cosh(y),
        lambda x, y: (-np.sin(x) * np.cosh(y), np.cos(x) * np.sinh(y)),
        lambda x, y: (-np.cos(x) * np.cosh(y), -np.sin(x) * np.sinh(y),
                      np.cos(x) * np.cosh(y)),
    )


def _sinsin():
    return ScalarField2D(
        "sinsin",
        lambda x, y: np.sin(x) * np.sin(y) + x,
        lambda x, y: (np.cos(x) * np.sin(y) + 1, np.sin(x) * np.cos(y)),
        lambda x, y: (-np.sin(x) * np.sin(y), np.cos(x) * np.cos(y),
                      -np.sin(x) * np.sin(y)),
    )


def _gauss():
    def gradient(x, y):
        e = np.exp(-(x * x + y * y))
        return -2 * x * e, -2 * y * e

    def hessian(x, y):
        e = np.exp(-(x * x + y * y))
        return (4 * x * x - 2) * e, 4 * x * y * e, (4 * y * y - 2) * e

    return ScalarField2D("gauss", lambda x, y: np.exp(-(x * x + y * y)),
                         gradient, hessian)


def _log():
    def gradient(x, y):
        r2 = x * x + y * y
        return x / r2, y / r2

    def hessian(x, y):
        r4 = (x * x + y * y) ** 2
        return (y * y - x * x) / r4, -2 * x * y / r4, (x * x - y * y) / r4

    return ScalarField2D("log", lambda x, y: 0.5 * np.log(x * x + y * y),
                         gradient, hessian, _origin_distance)


def _rcubed():
    def gradient(x, y):
        r = np.hypot(x, y)
        return 3 * r * x, 3 * r * y

    def hessian(x, y):
        r = np.hypot(x, y)
        safe = np.where(r > 0, r, 1.0)
        inv = np.where(r > 0, 3.0 / safe, 0.0)
        return 3 * r + inv * x * x, inv * x * y, 3 * r + inv * y * y

    return ScalarField2D("rcubed", lambda x, y: np.hypot(x, y) ** 3,
                         gradient, hessian)


def _multiquadric():
    def gradient(x, y):
        q = np.sqrt(1 + x * x + y * y)
        return x / q, y / q

    def hessian(x, y):
        q3 = (1 + x * x + y * y) ** 1.5
        return (1 + y * y) / q3, -x * y / q3, (1 + x * x) / q3

    return ScalarField2D("multiquadric", lambda x, y: np.sqrt(1 + x * x + y * y),
                         gradient, hessian)


def _dipole():
    def gradient(x, y):
        r4 = (x * x + y * y) ** 2
        return (y * y - x * x) / r4, -2 * x * y / r4

    def hessian(x, y):
        r6 = (x * x + y * y) ** 3
        h11 = (2 * x ** 3 - 6 * x * y * y) / r6
        return h11, (6 * x * x * y - 2 * y ** 3) / r6, -h11

    return ScalarField2D("dipole", lambda x, y: x / (x * x + y * y),
                         gradient, hessian, _origin_distance)


_FACTORIES: dict[str, Callable[..., ScalarField2D]] = {
    "constant": constant,
    "affine": affine,
    "quadratic": quadratic,
    "paraboloid": lambda: quadratic(1.0, 2.0),
    "saddle": lambda: quadratic(1.0, -1.0),
    "xy": _xy,
    "cubic": _cubic,
    "poly3": _poly3,
    "quartic": _quartic,
    "sinexp": _sinexp,
    "expcos": _expcos,
    "sincos": _sincos,
    "expaff": _expaff,
    "coscosh": _coscosh,
    "sinsin": _sinsin,
    "gauss": _gauss,
    "log": _log,
    "rcubed": _rcubed,
    "multiquadric": _multiquadric,
    "dipole": _dipole,
    "fundsol": fundamental_solution,
}

BATTERY_IDS = (
    "affine:3,-4,2",
    "paraboloid",
    "saddle",
    "xy",
    "cubic",
    "poly3",
    "quartic",
    "sinexp",
    "expcos",
    "sincos",
    "expaff",
    "coscosh",
    "sinsin",
    "gauss",
    "log",
    "rcubed",
    "multiquadric",
    "dipole",
    "fundsol:1.5",
    "fundsol:1.2",
)


def field_from_id(identifier):
    """Build a field from ``"name"`` or ``"name:arg1,arg2,..."``."""
    name, _, args = str(identifier).strip().partition(":")
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown field {name!r}; choose from "
                         f"{sorted(_FACTORIES)}") from None
    params = [float(a) for a in args.split(",")] if args else []
    try:
        return factory(*params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for field {name!r}: {args!r}") from exc


def battery():
    """The named battery of 20 test fields, keyed by identifier."""
    return {fid: field_from_id(fid) for fid in BATTERY_IDS}


@dataclass(frozen=True)
class ConsistencyReport:
    points: tuple
    h: float
    gradient_deviation: np.ndarray
    hessian_deviation: np.ndarray

    @property
    def max_gradient_deviation(self):
        return float(np.max(self.gradient_deviation, initial=0.0))

    @property
    def max_hessian_deviation(self):
        return float(np.max(self.hessian_deviation, initial=0.0))


def check_field_consistency(f, pts, h=1e-5):
    """Compare analytic derivatives with centred finite differences.

    Gradient entries are checked against differences of ``value`` and the
    Hessian against differences of ``gradient``; both errors are O(h^2).
    """
    h = check_positive("h", h)
    pts = [Point2.of(pt) for pt in pts]
    x1 = np.array([pt.x1 for pt in pts])
    x2 = np.array([pt.x2 for pt in pts])
    f.require_admissible(x1, x2, margin=2 * h, what="consistency point")

    g1, g2 = f.gradient(x1, x2)
    d1 = (f.value(x1 + h, x2) - f.value(x1 - h, x2)) / (2 * h)
    d2 = (f.value(x1, x2 + h) - f.value(x1, x2 - h)) / (2 * h)
    grad_dev = np.maximum(np.abs(g1 - d1), np.abs(g2 - d2))

    h11, h12, h22 = f.hessian(x1, x2)
    a1, a2 = f.gradient(x1 + h, x2)
    b1, b2 = f.gradient(x1 - h, x2)
    c1, c2 = f.gradient(x1, x2 + h)
    e1, e2 = f.gradient(x1, x2 - h)
    fd11 = (a1 - b1) / (2 * h)
    fd21 = (a2 - b2) / (2 * h)
    fd12 = (c1 - e1) / (2 * h)
    fd22 = (c2 - e2) / (2 * h)
    hess_dev = np.max(np.abs([h11 - fd11, h12 - fd12, h12 - fd21, h22 - fd22]),
                      axis=0)
    return ConsistencyReport(tuple(pts), h, grad_dev, hess_dev)
