"""Service composition domain model.

A problem has ``m`` abstract tasks, each with a pool of candidate services
described by a (response time, energy, cost) triple, a workflow tree that says
how the tasks are composed, and three objective weights. A genome picks one
candidate index per task.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence as SequenceT, Union

from qoscompose.errors import InvalidGenome, InvalidProblem, Violation

TOL = 1e-9

Genome = tuple[int, ...]


@dataclass(frozen=True)
class QosTriple:
    response_time: float
    energy: float
    cost: float

    def __post_init__(self):
        for name in ("response_time", "energy", "cost"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, float(v))

    def astuple(self) -> tuple[float, float, float]:
        return (self.response_time, self.energy, self.cost)

    def __iter__(self) -> Iterator[float]:
        return iter(self.astuple())

    @classmethod
    def of(cls, values: SequenceT[float]) -> "QosTriple":
        t, e, c = values
        return cls(t, e, c)


@dataclass(frozen=True)
class CandidateService:
    task_index: int
    candidate_index: int
    qos: QosTriple
    service_id: str = ""


@dataclass(frozen=True)
class TaskClass:
    index: int
    candidates: tuple[CandidateService, ...]

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))

    def __len__(self) -> int:
        return len(self.candidates)

    @classmethod
    def from_triples(cls, index: int, triples, ids=None) -> "TaskClass":
        """Build a task from raw ``(T, E, C)`` triples, numbering candidates in order."""
        cands = []
        for j, tr in enumerate(triples):
            q = tr if isinstance(tr, QosTriple) else QosTriple.of(tr)
            sid = ids[j] if ids is not None else f"t{index}c{j}"
            cands.append(CandidateService(index, j, q, sid))
        return cls(index, tuple(cands))


# -- workflow tree ---------------------------------------------------------


@dataclass(frozen=True)
class Atomic:
    task: int


@dataclass(frozen=True)
class Sequence:
    children: tuple["WorkflowNode", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Loop:
    child: "WorkflowNode"
    k: int


@dataclass(frozen=True)
class Branch:
    children: tuple["WorkflowNode", ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))


@dataclass(frozen=True)
class Fork:
    children: tuple["WorkflowNode", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


WorkflowNode = Union[Atomic, Sequence, Loop, Branch, Fork]


def iter_nodes(node: WorkflowNode, path: str = "workflow"):
    """Yield ``(path, node)`` pairs in depth-first pre-order."""
    yield path, node
    if isinstance(node, Loop):
        yield from iter_nodes(node.child, f"{path}.child")
    elif isinstance(node, (Sequence, Branch, Fork)):
        for i, ch in enumerate(node.children):
            yield from iter_nodes(ch, f"{path}.children[{i}]")


def task_indices(node: WorkflowNode) -> list[int]:
    return [n.task for _, n in iter_nodes(node) if isinstance(n, Atomic)]


def sequence_of(m: int) -> Sequence:
    return Sequence(tuple(Atomic(i) for i in range(m)))


@dataclass(frozen=True)
class CompositionProblem:
    tasks: tuple[TaskClass, ...]
    workflow: WorkflowNode
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    name: str = field(default="", compare=True)

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def m(self) -> int:
        return len(self.tasks)

    @property
    def pool_sizes(self) -> tuple[int, ...]:
        return tuple(len(t.candidates) for t in self.tasks)

    @property
    def combinations(self) -> int:
        return math.prod(self.pool_sizes)

    def candidate(self, task: int, index: int) -> CandidateService:
        return self.tasks[task].candidates[index]


def find_violations(problem: CompositionProblem) -> list[Violation]:
    """Return every broken invariant of ``problem``; empty means valid."""
    out: list[Violation] = []

    w = problem.weights
    if len(w) != 3:
        out.append(Violation("BadWeight", "weights", w))
    else:
        for i, wi in enumerate(w):
            if not math.isfinite(wi) or wi < 0:
                out.append(Violation("BadWeight", f"weights[{i}]", wi))
        s = math.fsum(w)
        if abs(s - 1.0) > TOL:
            out.append(Violation("WeightSumMismatch", "weights", s))

    for pos, task in enumerate(problem.tasks):
        if task.index != pos:
            out.append(Violation("BadTaskIndex", f"tasks[{pos}].index", task.index))
        if not task.candidates:
            out.append(Violation("EmptyCandidates", f"tasks[{pos}]", pos))
        for j, c in enumerate(task.candidates):
            if c.candidate_index != j or c.task_index != pos:
                out.append(
                    Violation(
                        "BadCandidateIndex",
                        f"tasks[{pos}].candidates[{j}]",
                        (c.task_index, c.candidate_index),
                    )
                )

    m = len(problem.tasks)
    seen: dict[int, str] = {}
    for path, node in iter_nodes(problem.workflow):
        if isinstance(node, Atomic):
            if not isinstance(node.task, int) or not 0 <= node.task < m:
                out.append(Violation("DanglingTaskIndex", path, node.task))
            elif node.task in seen:
                out.append(Violation("DuplicateTask", path, node.task))
            else:
                seen[node.task] = path
        elif isinstance(node, Loop):
            if not isinstance(node.k, int) or node.k < 1:
                out.append(Violation("BadLoopCount", f"{path}.k", node.k))
        elif isinstance(node, Branch):
            ps = node.probabilities
            if len(ps) != len(node.children):
                out.append(Violation("BadProbabilitySum", f"{path}.probabilities", len(ps)))
                continue
            for i, p in enumerate(ps):
                if not (0.0 <= p <= 1.0):
                    out.append(Violation("BadProbability", f"{path}.probabilities[{i}]", p))
            s = math.fsum(ps)
            if abs(s - 1.0) > TOL:
                out.append(Violation("BadProbabilitySum", path, s))
        if isinstance(node, (Sequence, Branch, Fork)) and not node.children:
            out.append(Violation("EmptyComposite", path))

    for i in range(m):
        if i not in seen:
            out.append(Violation("MissingTask", f"tasks[{i}]", i))
    return out


def validate_problem(problem: CompositionProblem) -> CompositionProblem:
    """Return ``problem`` unchanged, or raise :class:`InvalidProblem` listing all violations."""
    violations = find_violations(problem)
    if violations:
        raise InvalidProblem(violations)
    return problem


def check_genome(problem: CompositionProblem, genome: SequenceT[int]) -> Genome:
    g = tuple(genome)
    sizes = problem.pool_sizes
    if len(g) != len(sizes):
        raise InvalidGenome(f"genome has {len(g)} genes, problem has {len(sizes)} tasks")
    for i, (gi, n) in enumerate(zip(g, sizes)):
        if not 0 <= gi < n:
            raise InvalidGenome(f"gene {i} = {gi} outside [0, {n})")
    return g
