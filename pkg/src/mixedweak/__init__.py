"""Numerical laboratory for mixed weak-type inequalities on the line.

The package measures both sides of Sawyer-type level-set bounds for the
Hilbert transform, its BMO commutators, and Orlicz maximal operators on a
uniform dyadic grid, with refinement stability of the measured sup-ratio as
the quantitative signal.  Submodules hold the operator layers (``grid``,
``young``, ``weights``, ``maximal``, ``czd``, ``singular``); the experiment
drivers and the ``mixedweak`` command line live in ``verify`` and ``cli``.
"""

from ._errors import MixedWeakError, PreflightError
from .verify import (
    ExperimentConfig,
    InequalityReport,
    run_base_sawyer,
    run_theorem1,
    run_theorem2,
    run_theorem3,
)

__all__ = [
    "ExperimentConfig",
    "InequalityReport",
    "MixedWeakError",
    "PreflightError",
    "run_base_sawyer",
    "run_theorem1",
    "run_theorem2",
    "run_theorem3",
]

__version__ = "0.1.0"
