import math
import random

import numpy as np
import pytest
from hypothesis import strategies as st

from qoscompose.instances import random_workflow
from qoscompose.model import (
    Atomic,
    Branch,
    CompositionProblem,
    Fork,
    Loop,
    Sequence,
    TaskClass,
)

# Quality matrix of the worked 11-task example: (response time, energy, cost).
TABLE1 = [
    [(30, 48, 90), (26, 70, 40), (19, 96, 63)],
    [(65, 100, 49), (38, 79, 70), (55, 89, 60), (67, 99, 41)],
    [(46, 114, 96), (68, 125, 76), (90, 111, 47)],
    [(69, 116, 57), (87, 99, 86), (46, 147, 39)],
    [(74, 117, 91), (61, 86, 45)],
    [(29, 109, 88), (40, 90, 37), (63, 120, 101)],
    [(74, 71, 44), (39, 113, 93), (45, 110, 73)],
    [(61, 100, 28), (49, 98, 74)],
    [(66, 130, 55), (52, 82, 36), (73, 121, 105)],
    [(80, 33, 58), (37, 105, 51)],
    [(29, 79, 87), (74, 75, 42), (54, 77, 106)],
]


def make_problem(pools, workflow=None, weights=(1 / 3, 1 / 3, 1 / 3), name="test"):
    tasks = tuple(TaskClass.from_triples(i, p) for i, p in enumerate(pools))
    if workflow is None:
        workflow = Sequence(tuple(Atomic(i) for i in range(len(pools)))) if len(pools) > 1 else Atomic(0)
    return CompositionProblem(tasks, workflow, weights, name)


@pytest.fixture
def table1():
    return TABLE1


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


def naive_aggregate(node, triple_of):
    """Independent aggregation oracle: direct transcription of the rule table."""
    if isinstance(node, Atomic):
        return tuple(float(x) for x in triple_of(node.task))
    if isinstance(node, Loop):
        t, e, c = naive_aggregate(node.child, triple_of)
        return (node.k * t, node.k * e, c**node.k)
    kids = [naive_aggregate(ch, triple_of) for ch in node.children]
    if isinstance(node, Sequence):
        return (math.fsum(k[0] for k in kids), math.fsum(k[1] for k in kids), math.prod(k[2] for k in kids))
    if isinstance(node, Branch):
        ps = node.probabilities
        return tuple(math.fsum(p * k[r] for p, k in zip(ps, kids)) for r in range(3))
    if isinstance(node, Fork):
        return (max(k[0] for k in kids), max(k[1] for k in kids), min(k[2] for k in kids))
    raise TypeError(node)


def random_problem(rng: random.Random, max_tasks=5, max_cands=4, max_combos=1000, shape="mixed",
                   integer=True):
    """Small random instance with at most ``max_combos`` selections."""
    while True:
        m = rng.randint(1, max_tasks)
        sizes = [rng.randint(1, max_cands) for _ in range(m)]
        if math.prod(sizes) <= max_combos:
            break
    draw = (lambda lo, hi: float(rng.randint(lo, hi))) if integer else rng.uniform
    pools = [[(draw(1, 100), draw(1, 150), draw(1, 110)) for _ in range(n)] for n in sizes]
    if shape == "sequence" or m == 1:
        wf = None
    else:
        wf = random_workflow(list(range(m)), np.random.default_rng(rng.getrandbits(32)))
    w = [rng.random() + 1e-3 for _ in range(3)]
    s = sum(w)
    weights = (w[0] / s, w[1] / s, 1.0 - w[0] / s - w[1] / s)
    return make_problem(pools, wf, weights)


@st.composite
def problems(draw, max_tasks=5, max_cands=4, max_combos=1000, shape="mixed"):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_problem(random.Random(seed), max_tasks, max_cands, max_combos, shape)


def small_instance(seed=2024, tasks=4, cands=3):
    """Integer-valued Sequence instance with ``cands ** tasks`` selections."""
    rng = random.Random(seed)
    pools = [
        [(rng.randint(19, 90), rng.randint(33, 147), rng.randint(28, 106)) for _ in range(cands)]
        for _ in range(tasks)
    ]
    return make_problem(pools)
