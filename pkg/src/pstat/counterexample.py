"""The fundamental solution as a counterexample to exact mean-value identities.

For ``u_p(x) = |x|^((p-2)/(p-1))`` with ``1 < p < 2`` and the circle of
radius ``eps`` around ``(x1, 0)``, the circle median and the circle mean
have the closed forms used below.  The formulas that hold to o(eps^2) fail
at every small ``eps``; the functions here quantify by how much.
"""

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import adaptive_periodic_mean

__all__ = [
    "CounterexampleCase",
    "fundsol_median",
    "fundsol_mean",
    "residual_fe1_nonasymptotic",
    "residual_fe1_derivative",
    "fe1_derivative_sides",
    "derivative_identity_deviation",
    "residual_fe2_nonasymptotic",
    "FE2_QUARTIC_COEFFICIENT",
    "DERIVATIVE_CUBIC_COEFFICIENT",
    "counterexample_table",
]

# leading coefficients of (D + eps) / eps^3 and of the Fe2 residual / eps^4
DERIVATIVE_CUBIC_COEFFICIENT = -21 / 8
FE2_QUARTIC_COEFFICIENT = 7 / 12

_QUAD_TOL = 1e-13


@dataclass(frozen=True)
class CounterexampleCase:
    p: float = 1.5
    x1: float = 1.0
    eps: float = 0.1

    def __post_init__(self):
        if not 1 < self.p < 2:
            raise ValueError(f"p must lie in (1, 2), got {self.p!r}")
        if not self.x1 > 0:
            raise ValueError(f"x1 must be positive, got {self.x1!r}")
        if not 0 < self.eps < self.x1:
            raise ValueError(f"eps must lie in (0, x1), got {self.eps!r}")

    @property
    def half_exponent(self):
        """``(p - 2) / (2 (p - 1))``, the exponent applied to ``|x|^2``."""
        return (self.p - 2) / (2 * (self.p - 1))


def fundsol_median(case):
    """Closed-form circle median ``(x1^2 + eps^2)^((p-2)/(2(p-1)))``."""
    return (case.x1 ** 2 + case.eps ** 2) ** case.half_exponent


def fundsol_mean(case, quadrature_nodes=64, tol=_QUAD_TOL):
    """Circle mean of ``u_p`` by node-doubling periodic trapezoid."""
    if quadrature_nodes < 64:
        raise ValueError("quadrature_nodes must be at least 64")
    a, x1, e = case.half_exponent, case.x1, case.eps
    return adaptive_periodic_mean(
        lambda t: (x1 * x1 + 2 * x1 * e * np.cos(t) + e * e) ** a,
        quadrature_nodes, tol)


def residual_fe1_nonasymptotic(case):
    """``u_p(x) - (2/p - 1) median - (2 - 2/p) mean`` at finite ``eps``."""
    p = case.p
    return (case.x1 ** (2 * case.half_exponent)
            - (2 / p - 1) * fundsol_median(case)
            - (2 - 2 / p) * fundsol_mean(case))


def fe1_derivative_sides(case, tol=_QUAD_TOL):
    """Both sides of the identity obtained by differentiating the Fe1 equation in ``eps``.

    Returns ``(lhs, rhs)`` with
    ``lhs = (2 - p) (x1^2 + eps^2)^(a - 1) eps`` and
    ``rhs = (2 - 2p)/(2π) ∫ (x1^2 + 2 x1 eps cos θ + eps^2)^(a - 1) (x1 cos θ + eps) dθ``,
    ``a = (p - 2)/(2(p - 1))``.  They agree iff the derivative of the residual
    vanishes.
    """
    p, a, x1, e = case.p, case.half_exponent, case.x1, case.eps
    lhs = (2 - p) * (x1 * x1 + e * e) ** (a - 1) * e
    mean = adaptive_periodic_mean(
        lambda t: (x1 * x1 + 2 * x1 * e * np.cos(t) + e * e) ** (a - 1)
        * (x1 * np.cos(t) + e), 64, tol)
    return lhs, (2 - 2 * p) * mean


def residual_fe1_derivative(case):
    """``d/d eps`` of :func:`residual_fe1_nonasymptotic`, from the integral identity.

    The residual derivative equals ``(2a/p) (rhs - lhs)`` with the two sides
    from :func:`fe1_derivative_sides`.
    """
    lhs, rhs = fe1_derivative_sides(case)
    return 2 * case.half_exponent * (rhs - lhs) / case.p


def derivative_identity_deviation(eps, tol=_QUAD_TOL):
    """``D(eps) = (1/π) ∫ ((1 + 2 eps cos θ + eps^2)/(1 + eps^2))^(-3/2) (cos θ + eps) dθ``.

    The differentiated identity at ``p = 3/2, x1 = 1`` requires ``D(eps) = -eps``;
    in fact ``D(eps) = -eps - (21/8) eps^3 + O(eps^5)``.
    """
    eps = float(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    q = 1 + eps * eps
    return 2 * adaptive_periodic_mean(
        lambda t: ((1 + 2 * eps * np.cos(t) + eps * eps) / q) ** -1.5
        * (np.cos(t) + eps), 64, tol)


def residual_fe2_nonasymptotic(eps):
    """``RHS - 1`` of the Fe2 equation for ``u_{3/2}`` at ``(1, 0)``.

    Uses median ``(1 + eps^2)^(-1/2)``, max ``1/(1 - eps)`` and min
    ``1/(1 + eps)``; the result is ``(7/12) eps^4 + O(eps^6)``.
    """
    eps = float(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    # both parts written relative to 1 to avoid cancellation
    median_part = (2 / 3) * math.expm1(-0.5 * math.log1p(eps * eps))
    extrema_part = (1 / 6) * (2 * eps * eps / (1 - eps * eps))
    return median_part + extrema_part


def counterexample_table(eps_values):
    """Rows ``(eps, D, (D + eps)/eps^3, fe2_residual, fe2_residual/eps^4)`` and verdicts."""
    rows = []
    for eps in eps_values:
        eps = float(eps)
        d = derivative_identity_deviation(eps)
        r2 = residual_fe2_nonasymptotic(eps)
        rows.append({
            "eps": eps,
            "D": d,
            "D_plus_eps_over_eps3": (d + eps) / eps ** 3,
            "fe2_residual": r2,
            "fe2_residual_over_eps4": r2 / eps ** 4,
        })
    small = [r for r in rows if r["eps"] <= 0.05]
    verdict = {
        "derivative_identity_fails": all(r["D"] + r["eps"] < 0 for r in small) if small else None,
        "fe2_residual_positive": all(r["fe2_residual"] > 0 for r in rows),
        "cubic_coefficient_estimate": rows[int(np.argmin([r["eps"] for r in rows]))]
        ["D_plus_eps_over_eps3"] if rows else math.nan,
        "quartic_coefficient_estimate": rows[int(np.argmin([r["eps"] for r in rows]))]
        ["fe2_residual_over_eps4"] if rows else math.nan,
    }
    return rows, verdict
