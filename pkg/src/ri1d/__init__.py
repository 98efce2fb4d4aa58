"""One-dimensional random interlacements toolkit.

Exact closed-form laws, unbiased samplers and numerically stable survival
kernels for the simple random walk conditioned to avoid the origin, plus a
statistical harness used by the ``ri1d`` command line tool.
"""

__version__ = "0.1.0"

from .rngs import RngState
from .capacity import IntervalSet, EquilibriumMeasure, potential_kernel, capacity, capacity_hat, equilibrium_measure
from .core_walks import WalkPath
from .interlacements import Level, WindowSample, LocalTimeLaw
from .ring_kernel import RingConfig, SurvivalKernel
from .mc import EmpiricalSummary, Experiment, Verdict

__all__ = [
    "RngState",
    "IntervalSet",
    "EquilibriumMeasure",
    "potential_kernel",
    "capacity",
    "capacity_hat",
    "equilibrium_measure",
    "WalkPath",
    "Level",
    "WindowSample",
    "LocalTimeLaw",
    "RingConfig",
    "SurvivalKernel",
    "EmpiricalSummary",
    "Experiment",
    "Verdict",
    "__version__",
]
