"""QoS aggregation over workflow trees, normalization and the scalar fitness.

Aggregation rules per node type, applied recursively on raw values:

============  ===============  ===============  ====================
node          response time    energy           cost
============  ===============  ===============  ====================
Sequence      sum              sum              product
Loop(k)       k * T(child)     k * E(child)     C(child) ** k
Branch(p)     sum p_i * T_i    sum p_i * E_i    sum p_i * C_i
Fork          max              max              min
============  ===============  ===============  ====================

The three aggregate objectives are then min-max normalized against fixed
per-problem bounds and combined with the problem weights; lower is better.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence as SequenceT

from qoscompose.model import (
    Atomic,
    Branch,
    CompositionProblem,
    Fork,
    Genome,
    Loop,
    QosTriple,
    Sequence,
    WorkflowNode,
    check_genome,
)

Triple = tuple[float, float, float]


def _combine(node: WorkflowNode, leaf: Callable[[int], Triple]) -> Triple:
    if isinstance(node, Atomic):
        return leaf(node.task)
    if isinstance(node, Sequence):
        t, e, c = 0.0, 0.0, 1.0
        for ch in node.children:
            ct, ce, cc = _combine(ch, leaf)
            t += ct
            e += ce
            c *= cc
        return (t, e, c)
    if isinstance(node, Loop):
        ct, ce, cc = _combine(node.child, leaf)
        return (node.k * ct, node.k * ce, cc**node.k)
    if isinstance(node, Branch):
        t, e, c = 0.0, 0.0, 0.0
        for p, ch in zip(node.probabilities, node.children):
            ct, ce, cc = _combine(ch, leaf)
            t += p * ct
            e += p * ce
            c += p * cc
        return (t, e, c)
    if isinstance(node, Fork):
        parts = [_combine(ch, leaf) for ch in node.children]
        return (
            max(p[0] for p in parts),
            max(p[1] for p in parts),
            min(p[2] for p in parts),
        )
    raise TypeError(f"unknown workflow node {node!r}")


def aggregate_qos(
    workflow: WorkflowNode, problem: CompositionProblem, genome: SequenceT[int]
) -> QosTriple:
    """Raw aggregate QoS of the services selected by ``genome`` over ``workflow``."""
    g = check_genome(problem, genome)
    tasks = problem.tasks

    def leaf(i: int) -> Triple:
        return tasks[i].candidates[g[i]].qos.astuple()

    return QosTriple(*_combine(workflow, leaf))


@dataclass(frozen=True)
class ObjectiveBounds:
    lower: QosTriple
    upper: QosTriple

    def __post_init__(self):
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


def objective_bounds(problem: CompositionProblem) -> ObjectiveBounds:
    """Aggregate the per-task component-wise minima (and maxima).

    Every aggregation operator is monotone non-decreasing in each operand, so
    any achievable aggregate lies inside the returned box. The box itself may
    not be attainable by a single selection.
    """
    lows = []
    highs = []
    for task in problem.tasks:
        qs = [c.qos.astuple() for c in task.candidates]
        lows.append(tuple(min(q[r] for q in qs) for r in range(3)))
        highs.append(tuple(max(q[r] for q in qs) for r in range(3)))
    lower = _combine(problem.workflow, lows.__getitem__)
    upper = _combine(problem.workflow, highs.__getitem__)
    return ObjectiveBounds(QosTriple(*lower), QosTriple(*upper))


def _norm(v: float, lo: float, hi: float) -> float:
    span = hi - lo
    if span <= 0.0:
        return 0.0
    x = (v - lo) / span
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


def normalize_objectives(raw: QosTriple, bounds: ObjectiveBounds) -> QosTriple:
    lo, hi = bounds.lower, bounds.upper
    return QosTriple(
        _norm(raw.response_time, lo.response_time, hi.response_time),
        _norm(raw.energy, lo.energy, hi.energy),
        _norm(raw.cost, lo.cost, hi.cost),
    )


def fitness(
    problem: CompositionProblem, genome: SequenceT[int], bounds: ObjectiveBounds
) -> float:
    """Weighted sum of normalized objectives; in [0, 1], lower is better."""
    n = normalize_objectives(aggregate_qos(problem.workflow, problem, genome), bounds)
    w1, w2, w3 = problem.weights
    return w1 * n.response_time + w2 * n.energy + w3 * n.cost


# -- compiled evaluator ------------------------------------------------------


def _compile(node: WorkflowNode, table) -> Callable[[Genome], Triple]:
    if isinstance(node, Atomic):
        col = table[node.task]
        i = node.task
        return lambda g: col[g[i]]

    if isinstance(node, Sequence):
        if all(isinstance(ch, Atomic) for ch in node.children):
            cols = [(ch.task, table[ch.task]) for ch in node.children]

            def flat_seq(g):
                t, e, c = 0.0, 0.0, 1.0
                for i, col in cols:
                    q = col[g[i]]
                    t += q[0]
                    e += q[1]
                    c *= q[2]
                return (t, e, c)

            return flat_seq
        parts = [_compile(ch, table) for ch in node.children]

        def seq(g):
            t, e, c = 0.0, 0.0, 1.0
            for f in parts:
                q = f(g)
                t += q[0]
                e += q[1]
                c *= q[2]
            return (t, e, c)

        return seq

    if isinstance(node, Loop):
        inner = _compile(node.child, table)
        k = node.k

        def loop(g):
            q = inner(g)
            return (k * q[0], k * q[1], q[2] ** k)

        return loop

    if isinstance(node, Branch):
        parts = list(zip(node.probabilities, [_compile(ch, table) for ch in node.children]))

        def branch(g):
            t, e, c = 0.0, 0.0, 0.0
            for p, f in parts:
                q = f(g)
                t += p * q[0]
                e += p * q[1]
                c += p * q[2]
            return (t, e, c)

        return branch

    if isinstance(node, Fork):
        parts = [_compile(ch, table) for ch in node.children]

        def fork(g):
            qs = [f(g) for f in parts]
            return (
                max(q[0] for q in qs),
                max(q[1] for q in qs),
                min(q[2] for q in qs),
            )

        return fork

    raise TypeError(f"unknown workflow node {node!r}")


class Evaluator:
    """Fast fitness for one problem.

    The workflow is compiled once into closures over plain tuples, and
    fitness values are memoized per genome. ``calls`` counts every request,
    cached or not, so algorithms can report a logical evaluation count.
    Results agree exactly with :func:`fitness`.
    """

    def __init__(
        self,
        problem: CompositionProblem,
        bounds: ObjectiveBounds | None = None,
        cache: bool = True,
    ):
        self.problem = problem
        self.bounds = bounds if bounds is not None else objective_bounds(problem)
        self.sizes = problem.pool_sizes
        table = [[c.qos.astuple() for c in t.candidates] for t in problem.tasks]
        self._agg = _compile(problem.workflow, table)
        self._lo = self.bounds.lower.astuple()
        self._hi = self.bounds.upper.astuple()
        self._w = problem.weights
        self._cache: dict[Genome, float] | None = {} if cache else None
        self.calls = 0

    def aggregate(self, genome: Genome) -> Triple:
        return self._agg(genome)

    def _fitness(self, genome: Genome) -> float:
        t, e, c = self._agg(genome)
        lo, hi, w = self._lo, self._hi, self._w
        return (
            w[0] * _norm(t, lo[0], hi[0])
            + w[1] * _norm(e, lo[1], hi[1])
            + w[2] * _norm(c, lo[2], hi[2])
        )

    def __call__(self, genome: Genome) -> float:
        self.calls += 1
        cache = self._cache
        if cache is None:
            return self._fitness(genome)
        f = cache.get(genome)
        if f is None:
            f = cache[genome] = self._fitness(genome)
        return f
