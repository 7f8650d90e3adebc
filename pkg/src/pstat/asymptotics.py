"""Remainders of the small-radius expansions and of the mean-value formulas.

Four expansions relate a local statistic to an operator value::

    f(x) - boundary mean = -ε²/4 Δf       + o(ε²)
    f(x) - ball mean     = -ε²/8 Δf       + o(ε²)
    f(x) - median        = -ε²/2 Δ₁f      + o(ε²)
    f(x) - midrange      = -ε²/2 Δ∞f      + o(ε²)

and three combinations of statistics reproduce ``f(x)`` up to o(ε²) exactly
when ``Δ_p f(x) = 0``.  The functions here evaluate these remainders on a
ladder of radii and fit the observed decay rate.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from ._validation import AntipodalFailure, check_exponent
from .circle_stats import (
    CircleSpec,
    ball_extrema,
    ball_mean,
    boundary_mean,
    median_antipodal,
    median_sampled,
)
from .fields import Point2
from .operators import evaluate_operators, verify_p_harmonic_pointwise

__all__ = [
    "ExpansionKind",
    "ExpansionReport",
    "ConsistencyVerdict",
    "FormulaConsistencyReport",
    "NOISE_FLOOR",
    "DEFAULT_RADII",
    "fe1_weights",
    "fe2_weights",
    "manfredi_weights",
    "residual",
    "fit_slope",
    "expansion_report",
    "tends_to_zero",
    "verify_theorem1_consistency",
]

NOISE_FLOOR = 1e-13
DEFAULT_RADII = tuple(2.0 ** -k for k in range(3, 11))
DEFAULT_SLOPE_MARGIN = 0.3


class ExpansionKind(enum.Enum):
    BOUNDARY_MEAN_LAPLACIAN = "boundary-mean"
    BALL_MEAN_LAPLACIAN = "ball-mean"
    MEDIAN_ONE_LAPLACIAN = "median"
    MIDRANGE_INFTY_LAPLACIAN = "midrange"
    SCHEME_FE1 = "scheme-fe1"
    SCHEME_FE2 = "scheme-fe2"
    SCHEME_MANFREDI = "scheme-manfredi"

    @property
    def is_scheme(self):
        return self.value.startswith("scheme-")

    @property
    def coefficient(self):
        """Factor multiplying ``ε² · operator`` in the expansion (None for schemes)."""
        return _COEFFICIENTS.get(self)

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "-")
        for kind in cls:
            if key in (kind.value, kind.name.lower().replace("_", "-")):
                return kind
        raise ValueError(f"unknown expansion kind {text!r}; choose from "
                         f"{[k.value for k in cls]}")


_COEFFICIENTS = {
    ExpansionKind.BOUNDARY_MEAN_LAPLACIAN: 0.25,
    ExpansionKind.BALL_MEAN_LAPLACIAN: 0.125,
    ExpansionKind.MEDIAN_ONE_LAPLACIAN: 0.5,
    ExpansionKind.MIDRANGE_INFTY_LAPLACIAN: 0.5,
}


def fe1_weights(p):
    """(median, boundary mean) weights ``(2/p - 1, 2 - 2/p)``."""
    p = check_exponent(p)
    return 2.0 / p - 1.0, 2.0 - 2.0 / p


def fe2_weights(p):
    """(median, max, min) weights ``(1/p, (p-1)/(2p), (p-1)/(2p))``."""
    p = check_exponent(p)
    w = (p - 1.0) / (2.0 * p)
    return 1.0 / p, w, w


def manfredi_weights(p, dim=2):
    """(max, min, ball mean) weights ``(α/2, α/2, β)``.

    ``α = (p - 2)/(p + N)`` and ``β = (2 + N)/(p + N)``.
    """
    p = check_exponent(p)
    alpha = (p - 2.0) / (p + dim)
    beta = (2.0 + dim) / (p + dim)
    return alpha / 2, alpha / 2, beta


def _median(f, spec):
    try:
        return median_antipodal(f, spec)[1]
    except AntipodalFailure:
        return median_sampled(f, CircleSpec(spec.center, spec.radius, 4096))


def residual(f, x, eps, kind, p=2.0, samples=256, rings=16):
    """Remainder of one expansion or formula at radius ``eps``.

    For the four expansions this is ``f(x) - stat + c ε² · op``; for the
    scheme kinds it is ``f(x)`` minus the weighted statistics.
    """
    kind = ExpansionKind.parse(kind)
    x = Point2.of(x)
    ops = evaluate_operators(f, x, p)
    spec = CircleSpec(x, eps, samples)
    fx = float(f.value(*x))

    if kind is ExpansionKind.BOUNDARY_MEAN_LAPLACIAN:
        return fx - boundary_mean(f, spec) + kind.coefficient * eps ** 2 * ops.laplacian
    if kind is ExpansionKind.BALL_MEAN_LAPLACIAN:
        return fx - ball_mean(f, spec, rings) + kind.coefficient * eps ** 2 * ops.laplacian
    if kind is ExpansionKind.MEDIAN_ONE_LAPLACIAN:
        return fx - _median(f, spec) + kind.coefficient * eps ** 2 * ops.one_laplacian
    if kind is ExpansionKind.MIDRANGE_INFTY_LAPLACIAN:
        hi, lo = ball_extrema(f, spec, rings)
        return fx - 0.5 * (hi + lo) + kind.coefficient * eps ** 2 * ops.infty_laplacian

    if kind is ExpansionKind.SCHEME_FE1:
        w_med, w_mean = fe1_weights(p)
        return fx - (w_med * _median(f, spec) + w_mean * boundary_mean(f, spec))
    if kind is ExpansionKind.SCHEME_FE2:
        w_med, w_hi, w_lo = fe2_weights(p)
        hi, lo = ball_extrema(f, spec, rings)
        return fx - (w_med * _median(f, spec) + w_hi * hi + w_lo * lo)
    w_hi, w_lo, w_ball = manfredi_weights(p)
    hi, lo = ball_extrema(f, spec, rings)
    return fx - (w_hi * hi + w_lo * lo + w_ball * ball_mean(f, spec, rings))


def fit_slope(radii, residuals, noise_floor=NOISE_FLOOR):
    """Least-squares slope of ``log|r|`` against ``log ε``.

    Residuals at or below ``noise_floor`` are discarded.  Returns
    ``(slope, degenerate)``; when fewer than three residuals survive the fit
    is degenerate.  If *every* residual is below the floor the remainder
    vanishes to rounding and the slope is reported as ``inf``; otherwise a
    degenerate fit yields ``nan``.
    """
    radii = np.asarray(radii, float)
    res = np.abs(np.asarray(residuals, float))
    keep = res > noise_floor
    if keep.sum() >= 3:
        slope = np.polyfit(np.log(radii[keep]), np.log(res[keep]), 1)[0]
        return float(slope), False
    if not keep.any():
        return math.inf, True
    return math.nan, True


@dataclass(frozen=True)
class ExpansionReport:
    field: str
    kind: ExpansionKind
    point: Point2
    p: float
    radii: tuple
    residuals: tuple
    fitted_slope: float
    degenerate: bool

    @property
    def normalized_residuals(self):
        return tuple(r / e ** 2 for r, e in zip(self.residuals, self.radii))

    def rows(self):
        """CSV rows ``(field, x1, x2, kind, p, eps, residual, normalized_residual)``."""
        for e, r, n in zip(self.radii, self.residuals, self.normalized_residuals):
            yield (self.field, self.point.x1, self.point.x2, self.kind.value,
                   self.p, e, r, n)

    def summary(self):
        return {
            "field": self.field,
            "kind": self.kind.value,
            "x": list(self.point),
            "p": self.p,
            "fitted_slope": self.fitted_slope,
            "degenerate": self.degenerate,
            "normalized_tail_decreasing": _tail_decreasing(self.normalized_residuals),
        }


def _tail_decreasing(normalized, count=3):
    tail = np.abs(np.asarray(normalized[-count:]))
    return bool(np.all(np.diff(tail) < 0))


def expansion_report(f, x, kind, p=2.0, radii=DEFAULT_RADII, samples=256,
                     rings=16, noise_floor=NOISE_FLOOR):
    """Residuals on a ladder of strictly decreasing radii plus the fitted slope."""
    kind = ExpansionKind.parse(kind)
    x = Point2.of(x)
    radii = tuple(float(e) for e in radii)
    if len(radii) < 3:
        raise ValueError("need at least three radii")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    res = tuple(ordered_map(
        lambda e: residual(f, x, e, kind, p, samples, rings), radii))
    slope, degenerate = fit_slope(radii, res, noise_floor)
    return ExpansionReport(f.name, kind, x, float(p), radii, res, slope, degenerate)


def tends_to_zero(report, margin=DEFAULT_SLOPE_MARGIN, noise_floor=NOISE_FLOOR):
    """Whether ``residual / ε²`` tends to zero along the ladder.

    Accepted if the fitted slope exceeds ``2 + margin``, or if the local
    slopes between the last three residuals all do (so a noisy head of the
    ladder cannot mask the asymptotic tail).  A remainder below the noise
    floor at every radius counts as zero.
    """
    if report.degenerate and math.isinf(report.fitted_slope):
        return True
    if report.fitted_slope > 2 + margin:
        return True
    res = np.abs(np.asarray(report.residuals[-3:]))
    radii = np.asarray(report.radii[-3:])
    if np.any(res <= noise_floor):
        return False
    local = np.log(res[1:] / res[:-1]) / np.log(radii[1:] / radii[:-1])
    return bool(np.all(local > 2 + margin))


@dataclass(frozen=True)
class ConsistencyVerdict:
    point: Point2
    fe1: ExpansionReport
    fe2: ExpansionReport
    fe1_ok: bool
    fe2_ok: bool

    @property
    def ok(self):
        return self.fe1_ok and self.fe2_ok


@dataclass(frozen=True)
class FormulaConsistencyReport:
    p: float
    passed: bool
    pointwise_p_harmonic: bool
    max_abs_p_laplacian: float
    verdicts: tuple


def verify_theorem1_consistency(f, pts, p, radii=DEFAULT_RADII,
                                tol_slope=DEFAULT_SLOPE_MARGIN, samples=256,
                                rings=16):
    """Check that both mean-value formulas hold to o(ε²) at every point.

    The verdict comes from the residual ladders alone; the pointwise value of
    ``max |Δ_p f|`` is recorded alongside for diagnosis.
    """
    p = check_exponent(p)
    pts = [Point2.of(pt) for pt in pts]
    harmonic, worst = verify_p_harmonic_pointwise(f, pts, p)

    def one(pt):
        r1 = expansion_report(f, pt, ExpansionKind.SCHEME_FE1, p, radii, samples, rings)
        r2 = expansion_report(f, pt, ExpansionKind.SCHEME_FE2, p, radii, samples, rings)
        return ConsistencyVerdict(pt, r1, r2, tends_to_zero(r1, tol_slope),
                                  tends_to_zero(r2, tol_slope))

    verdicts = tuple(ordered_map(one, pts))
    return FormulaConsistencyReport(p, all(v.ok for v in verdicts), harmonic, worst, verdicts)

