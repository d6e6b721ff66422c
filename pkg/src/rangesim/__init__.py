"""Byzantine-robust distributed SGD simulator.

Core pieces: a median-centered trimmed-mean estimator, a two-state Markov
corruption process with attack strategies, the robust averaging normalized
gradient optimizer with baseline aggregation rules, analytical
failure-probability bounds, and a seeded experiment harness with a CLI.
"""

from .corruption import (AttackContext, CorruptionProcess, DirectedToOptimum,
                         InvertAndBoost, LargeRandom, MarkovCorruptionModel,
                         produce_feedback, stationary_distribution)
from .errors import ConfigError, InfeasibleParameterError, RangeSimError
from .estimator import (RobustMeanConfig, coordinate_median, robust_mean,
                        trim_error_constant, trimmed_mean)
from .harness import RunResult, run_experiment, sweep, validate_bounds, write_run
from .optimizer import (BaselineOptimizer, CoordinateMedianRule, MeanRule,
                        NormClipRule, RangeConfig, RangeOptimizer, baseline_step,
                        project)
from .planner import BoundInputs, BoundReport, compute_report
from .problems import SA, SAA, LinearRegressionProblem, NonConvexToyProblem

__version__ = "0.1.0"

__all__ = [
    "AttackContext", "BaselineOptimizer", "BoundInputs", "BoundReport",
    "ConfigError", "CoordinateMedianRule", "CorruptionProcess",
    "DirectedToOptimum", "InfeasibleParameterError", "InvertAndBoost",
    "LargeRandom", "LinearRegressionProblem", "MarkovCorruptionModel",
    "MeanRule", "NonConvexToyProblem", "NormClipRule", "RangeConfig",
    "RangeOptimizer", "RangeSimError", "RobustMeanConfig", "RunResult",
    "SA", "SAA", "baseline_step", "compute_report", "coordinate_median",
    "produce_feedback", "project", "robust_mean", "run_experiment",
    "stationary_distribution", "sweep", "trim_error_constant", "trimmed_mean",
    "validate_bounds", "write_run",
]
