"""Medians, means and p-harmonic functions in the plane.

Local statistics on circles and disks, the differential operators they
approximate, small-radius expansion checks, a value-iteration solver for the
p-Laplace Dirichlet problem and the fundamental-solution counterexample.
"""

__version__ = "0.1.0"

from ._validation import (
    AntipodalFailure,
    DegenerateGradientError,
    InadmissiblePointError,
    PStatError,
    QuadratureError,
)
from .fields import Point2, ScalarField2D, battery, field_from_id, fundamental_solution
from .operators import check_decompositions, evaluate_operators
from .circle_stats import CircleSpec, CircleStatistics, circle_statistics
from .asymptotics import ExpansionKind, expansion_report, verify_theorem1_consistency
from .solver import GridDomain, PHarmonicSolver, SolverProblem, convergence_study, solve
from .counterexample import CounterexampleCase, counterexample_table

__all__ = [
    "AntipodalFailure",
    "DegenerateGradientError",
    "InadmissiblePointError",
    "PStatError",
    "QuadratureError",
    "Point2",
    "ScalarField2D",
    "battery",
    "field_from_id",
    "fundamental_solution",
    "check_decompositions",
    "evaluate_operators",
    "CircleSpec",
    "CircleStatistics",
    "circle_statistics",
    "ExpansionKind",
    "expansion_report",
    "verify_theorem1_consistency",
    "GridDomain",
    "PHarmonicSolver",
    "SolverProblem",
    "convergence_study",
    "solve",
    "CounterexampleCase",
    "counterexample_table",
]
