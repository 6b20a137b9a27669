"""Energy-aware scheduling with speed scaling: exact and approximate solvers."""

from .dichotomy import DichotomyResult, iteration_cap, maximize_throughput
from .dp_agreeable import solve_agreeable
from .dp_equal import solve_equal
from .model import (Instance, Job, PowerModel, SchedulePlan, Slice,
                    energy_of, throughput_of, validate_plan)
from .primal_dual import guarantee_report, solve, verify_dual

__all__ = [
    "DichotomyResult", "Instance", "Job", "PowerModel", "SchedulePlan", "Slice",
    "energy_of", "guarantee_report", "iteration_cap", "maximize_throughput",
    "solve", "solve_agreeable", "solve_equal", "throughput_of", "validate_plan",
    "verify_dual",
]
