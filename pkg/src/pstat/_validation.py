"""Exceptions and small argument checks shared across the package."""

import math


class PStatError(Exception):
    """Base class for all package errors."""


class InadmissiblePointError(PStatError, ValueError):
    """A point (or a circle/ball around it) leaves the field's smooth domain."""


class DegenerateGradientError(PStatError, ValueError):
    """The gradient is below the floor; the operators are undefined there."""


class AntipodalFailure(PStatError, RuntimeError):
    """No unique antipodal level crossing could be bracketed on the circle."""


class QuadratureError(PStatError, RuntimeError):
    """Node doubling did not reach the requested tolerance."""


def check_finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(name, value):
    value = check_finite(name, value)
    if value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    return value


def check_exponent(p, low=1.0, high=math.inf):
    """Return ``p`` as a float if ``low < p < high``."""
    p = float(p)
    if not (low < p < high):
        raise ValueError(f"p must lie in ({low}, {high}), got {p!r}")
    return p


def check_even_samples(samples, minimum=8):
    samples = int(samples)
    if samples < minimum or samples % 2:
        raise ValueError(f"samples must be even and >= {minimum}, got {samples}")
    return samples
