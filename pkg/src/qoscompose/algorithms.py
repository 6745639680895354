"""Uniform entry point over SFGA and the baselines."""

from __future__ import annotations

from dataclasses import fields

from qoscompose.baselines import RUNNERS, BaselineConfig
from qoscompose.errors import ConfigInvalid
from qoscompose.model import CompositionProblem
from qoscompose.qos import Evaluator
from qoscompose.records import RunRecord
from qoscompose.sfga import SfgaConfig, run_sfga

ALGORITHMS = ("sfga", "ga", "pso", "ca", "gapso")


def make_config(algorithm: str, **knobs) -> SfgaConfig | BaselineConfig:
    """Build a validated config for ``algorithm``; unknown knobs are rejected."""
    algorithm = algorithm.lower()
    if algorithm == "sfga":
        cls = SfgaConfig
    elif algorithm in RUNNERS:
        cls = BaselineConfig
        knobs = {**knobs, "algorithm": algorithm}
    else:
        raise ConfigInvalid(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(knobs) - allowed)
    if unknown:
        raise ConfigInvalid(f"unknown option(s) for {algorithm}: {', '.join(unknown)}")
    return cls(**knobs).validate()


def run_algorithm(
    problem: CompositionProblem,
    config: SfgaConfig | BaselineConfig,
    instance: str = "",
    evaluator: Evaluator | None = None,
) -> RunRecord:
    if isinstance(config, SfgaConfig):
        return run_sfga(problem, config, instance, evaluator)
    return RUNNERS[config.algorithm](problem, config, instance, evaluator)
