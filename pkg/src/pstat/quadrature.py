"""Periodic trapezoidal rules with node doubling."""

import numpy as np

from ._validation import QuadratureError

__all__ = ["periodic_mean", "adaptive_periodic_mean", "half_period_mean"]


def periodic_mean(func, nodes):
    """Equal-weight mean of ``func`` over ``nodes`` equispaced angles in [0, 2π)."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    return float(np.mean(func(theta)))


def half_period_mean(func, nodes):
    """Mean over [0, 2π) for integrands even in θ, using [0, π] only.

    Trapezoid on ``nodes + 1`` points of [0, π] with halved end weights.
    """
    theta = np.pi * np.arange(nodes + 1) / nodes
    vals = func(theta)
    return float((vals[1:-1].sum() + 0.5 * (vals[0] + vals[-1])) / nodes)


def adaptive_periodic_mean(func, nodes=64, tol=1e-13, max_nodes=1 << 20):
    """Double the node count until successive means agree to ``tol``.

    Each doubling reuses the previous samples, so only the new odd nodes are
    evaluated.
    """
    if nodes < 1:
        raise ValueError("nodes must be positive")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    total = float(np.sum(func(theta)))
    prev = total / nodes
    while nodes < max_nodes:
        mid = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
        total += float(np.sum(func(mid)))
        nodes *= 2
        cur = total / nodes
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureError(f"periodic trapezoid did not reach {tol:g} "
                          f"within {max_nodes} nodes")
