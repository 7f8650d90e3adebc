"""Laplace-type operators at points with nonvanishing gradient.

For a smooth field with gradient ``g`` and Hessian ``H``::

    laplacian        = tr H
    infty_laplacian  = g^T H g / |g|^2
    one_laplacian    = g_perp^T H g_perp / |g|^2,   g_perp = (-g2, g1)
    p_laplacian      = |g|^(p-2) (laplacian + (p - 2) infty_laplacian)

The p-Laplacian is always computed through the last line; the two other
rearrangements are used only as checks in :func:`check_decompositions`.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import DegenerateGradientError, check_exponent
from .fields import Point2

__all__ = [
    "GRADIENT_FLOOR",
    "OperatorValues",
    "DecompositionResiduals",
    "evaluate_operators",
    "operator_arrays",
    "check_decompositions",
    "verify_p_harmonic_pointwise",
    "nondegenerate_points",
]

GRADIENT_FLOOR = 1e-10


@dataclass(frozen=True)
class OperatorValues:
    laplacian: float
    one_laplacian: float
    infty_laplacian: float
    p_laplacian: float
    grad_norm: float
    p: float


class DecompositionResiduals(NamedTuple):
    mean_infty: float
    mean_one: float
    one_infty: float
    scale: float

    def max_relative(self):
        return max(abs(self.mean_infty), abs(self.mean_one),
                   abs(self.one_infty)) / self.scale


def operator_arrays(g1, g2, h11, h12, h22, p, gradient_floor=GRADIENT_FLOOR):
    """Vectorised operator values from derivative arrays.

    Returns ``(laplacian, one_laplacian, infty_laplacian, p_laplacian,
    grad_norm)`` as arrays.
    """
    g1, g2, h11, h12, h22 = np.broadcast_arrays(
        *(np.asarray(a, float) for a in (g1, g2, h11, h12, h22)))
    norm2 = g1 * g1 + g2 * g2
    norm = np.sqrt(norm2)
    if np.any(~(norm >= gradient_floor)):
        raise DegenerateGradientError(
            f"|Df| = {np.min(norm):.3g} below gradient floor {gradient_floor:g}")
    lap = h11 + h22
    infty = (g1 * g1 * h11 + 2 * g1 * g2 * h12 + g2 * g2 * h22) / norm2
    one = (g2 * g2 * h11 - 2 * g1 * g2 * h12 + g1 * g1 * h22) / norm2
    plap = norm ** (p - 2) * (lap + (p - 2) * infty)
    return lap, one, infty, plap, norm


def _derivatives(f, x1, x2):
    f.require_admissible(x1, x2)
    return (*f.gradient(x1, x2), *f.hessian(x1, x2))


def evaluate_operators(f, x, p, gradient_floor=GRADIENT_FLOOR):
    """Evaluate all four operators of ``f`` at the point ``x``.

    Raises
    ------
    DegenerateGradientError
        If ``|Df(x)| < gradient_floor``; the normalised operators are not
        defined at critical points.
    """
    p = check_exponent(p)
    x = Point2.of(x)
    vals = operator_arrays(*_derivatives(f, x.x1, x.x2), p, gradient_floor)
    lap, one, infty, plap, norm = (float(v) for v in vals)
    return OperatorValues(lap, one, infty, plap, norm, p)


def check_decompositions(f, x, p, gradient_floor=GRADIENT_FLOOR):
    """Residuals of the three rearrangements of the p-Laplacian.

    ``scale`` is the magnitude of the summed terms, ``|g|^(p-2)`` times
    ``|lap| + |one| + |infty|``, floored at 1, so ``max_relative()`` is a
    meaningful relative rounding measure even where the p-Laplacian vanishes.
    """
    ops = evaluate_operators(f, x, p, gradient_floor)
    p = ops.p
    w = ops.grad_norm ** (p - 2)
    lap, one, inf = ops.laplacian, ops.one_laplacian, ops.infty_laplacian
    r1 = ops.p_laplacian - w * (lap + (p - 2) * inf)
    r2 = ops.p_laplacian - w * ((p - 1) * lap + (2 - p) * one)
    r3 = ops.p_laplacian - w * (one + (p - 1) * inf)
    scale = max(1.0, w * (abs(lap) + abs(one) + abs(inf)))
    return DecompositionResiduals(r1, r2, r3, scale)


def verify_p_harmonic_pointwise(f, pts, p, tol=1e-9, gradient_floor=GRADIENT_FLOOR):
    """Return ``(ok, max_abs)`` where ``ok`` means ``max |Δ_p f| <= tol`` on ``pts``."""
    p = check_exponent(p)
    pts = [Point2.of(pt) for pt in pts]
    x1 = np.array([pt.x1 for pt in pts])
    x2 = np.array([pt.x2 for pt in pts])
    plap = operator_arrays(*_derivatives(f, x1, x2), p, gradient_floor)[3]
    worst = float(np.max(np.abs(plap), initial=0.0))
    return worst <= tol, worst


def nondegenerate_points(f, n, rng, box=(-1.0, 1.0), min_gradient=1e-2,
                         margin=0.2, max_draws=100_000):
    """``n`` uniform points in ``box``^2 with ``|grad f| >= min_gradient``.

    Points within ``margin`` of a singularity of ``f`` are rejected as well.
    """
    rng = np.random.default_rng(rng)
    lo, hi = box
    out = []
    draws = 0
    while len(out) < n:
        if draws >= max_draws:
            raise DegenerateGradientError(
                f"{f.name}: only {len(out)} of {n} nondegenerate points in {max_draws} draws")
        x1, x2 = rng.uniform(lo, hi, 2)
        draws += 1
        if not f.admissible(x1, x2, margin):
            continue
        g1, g2 = f.gradient(x1, x2)
        if np.hypot(g1, g2) >= min_gradient:
            out.append(Point2(float(x1), float(x2)))
    return out
