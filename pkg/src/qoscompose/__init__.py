"""Energy-aware QoS service composition with a hybrid SFLA/GA optimizer."""

from qoscompose.algorithms import ALGORITHMS, make_config, run_algorithm
from qoscompose.baselines import BaselineConfig, brute_force_optimum, run_ca, run_ga, run_gapso, run_pso
from qoscompose.model import (
    Atomic,
    Branch,
    CandidateService,
    CompositionProblem,
    Fork,
    Loop,
    QosTriple,
    Sequence,
    TaskClass,
    find_violations,
    validate_problem,
)
from qoscompose.qos import Evaluator, ObjectiveBounds, aggregate_qos, fitness, normalize_objectives, objective_bounds
from qoscompose.records import RunRecord
from qoscompose.sfga import SfgaConfig, run_sfga

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "Atomic",
    "BaselineConfig",
    "Branch",
    "CandidateService",
    "CompositionProblem",
    "Evaluator",
    "Fork",
    "Loop",
    "ObjectiveBounds",
    "QosTriple",
    "RunRecord",
    "Sequence",
    "SfgaConfig",
    "TaskClass",
    "aggregate_qos",
    "brute_force_optimum",
    "find_violations",
    "fitness",
    "make_config",
    "normalize_objectives",
    "objective_bounds",
    "run_algorithm",
    "run_ca",
    "run_ga",
    "run_gapso",
    "run_pso",
    "run_sfga",
    "validate_problem",
]
