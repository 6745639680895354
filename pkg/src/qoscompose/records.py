from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any

from qoscompose.model import Genome, QosTriple
from qoscompose.qos import Evaluator


@dataclass
class RunRecord:
    """Outcome of one seeded optimizer run.

    ``trace[0]`` is the best fitness of the initial population and each
    further entry the best-so-far after one generation, so the trace is
    non-increasing and ends at ``best_fitness``.
    """

    algorithm: str
    instance: str
    seed: int
    best_genome: Genome
    best_fitness: float
    trace: list[float]
    evaluations: int
    wall_time: float
    best_qos: QosTriple | None = None
    config: dict[str, Any] = field(default_factory=dict)
    level: int | None = None

    def same_result(self, other: "RunRecord") -> bool:
        """Equality on everything except wall time."""
        a = asdict(self)
        b = asdict(other)
        a.pop("wall_time")
        b.pop("wall_time")
        return a == b

    def to_json(self) -> str:
        d = asdict(self)
        d["best_genome"] = list(self.best_genome)
        d["best_qos"] = list(self.best_qos) if self.best_qos is not None else None
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        d = json.loads(text)
        d["best_genome"] = tuple(d["best_genome"])
        if d.get("best_qos") is not None:
            d["best_qos"] = QosTriple.of(d["best_qos"])
        return cls(**d)


class Tracker:
    """Best-so-far bookkeeping shared by all optimizers."""

    def __init__(self, evaluator: Evaluator):
        self.evaluator = evaluator
        self.start_calls = evaluator.calls
        self.start_time = time.perf_counter()
        self.best_genome: Genome | None = None
        self.best_fitness = float("inf")
        self.trace: list[float] = []
        self.stall = 0

    @property
    def evaluations(self) -> int:
        return self.evaluator.calls - self.start_calls

    def offer(self, genome: Genome, f: float) -> bool:
        if f < self.best_fitness:
            self.best_fitness = f
            self.best_genome = genome
            return True
        return False

    def end_generation(self) -> None:
        if self.trace and self.best_fitness < self.trace[-1]:
            self.stall = 0
        elif self.trace:
            self.stall += 1
        self.trace.append(self.best_fitness)

    def should_stop(self, generation: int, generations: int, stall_limit, max_evaluations) -> bool:
        if generation >= generations:
            return True
        if stall_limit is not None and self.stall >= stall_limit:
            return True
        if max_evaluations is not None and self.evaluations >= max_evaluations:
            return True
        return False

    def finish(self, algorithm: str, instance: str, seed: int, config: dict) -> RunRecord:
        return RunRecord(
            algorithm=algorithm,
            instance=instance,
            seed=seed,
            best_genome=self.best_genome,
            best_fitness=self.best_fitness,
            trace=list(self.trace),
            evaluations=self.evaluations,
            wall_time=time.perf_counter() - self.start_time,
            best_qos=QosTriple(*self.evaluator.aggregate(self.best_genome)),
            config=config,
        )
