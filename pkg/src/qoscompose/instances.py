"""Service pools, instance sampling and the instance file format.

Instance documents are JSON with this layout (schema tag ``qoscompose/1``)::

    {
      "schema": "qoscompose/1",
      "name": "demo",
      "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
      "tasks": [
        {"index": 0, "candidates": [{"id": "s1", "qos": [30.0, 48.0, 90.0]}, ...]},
        ...
      ],
      "workflow": {"type": "sequence", "children": [{"type": "atomic", "task": 0}, ...]}
    }

Workflow nodes are ``atomic`` (``task``), ``sequence`` / ``fork``
(``children``), ``loop`` (``child``, ``k``) and ``branch`` (``children``,
``probabilities``). Floats are written with Python's shortest round-trip
repr, so reading a document back gives bit-identical values.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qoscompose.errors import (
    BadNumber,
    EmptyFile,
    InvalidShape,
    InvalidSpec,
    InvalidWeights,
    MissingColumn,
    ParseError,
    SchemaVersionMismatch,
)
from qoscompose.model import (
    Atomic,
    Branch,
    CompositionProblem,
    Fork,
    Loop,
    QosTriple,
    Sequence,
    TaskClass,
    WorkflowNode,
)

SCHEMA = "qoscompose/1"
SHAPES = ("sequence", "fork", "mixed")


@dataclass(frozen=True)
class ServicePool:
    services: tuple[tuple[str, QosTriple], ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "services", tuple(self.services))
        if not self.services:
            raise InvalidSpec("a service pool must be non-empty")

    def __len__(self) -> int:
        return len(self.services)


@dataclass(frozen=True)
class ColumnMap:
    """Where to find each attribute: 0-based indices or header names.

    ``id_column`` of ``None`` numbers services by data row instead.
    """

    response_time: int | str = 1
    energy: int | str = 2
    cost: int | str = 3
    id_column: int | str | None = 0

    def __post_init__(self):
        cols = (self.response_time, self.energy, self.cost)
        if len(set(cols)) != 3:
            raise InvalidSpec(f"attribute columns must be distinct, got {cols}")


def parse_service_pool_csv(
    text: str,
    column_map: ColumnMap = ColumnMap(),
    has_header: bool = False,
    source: str = "",
) -> ServicePool:
    """Parse comma-separated QoS rows. Lines starting with ``#`` are skipped."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    header = None
    if has_header:
        if not rows:
            raise EmptyFile(f"{source or 'input'} has no header")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
    if not rows:
        raise EmptyFile(f"{source or 'input'} has no data rows")

    def resolve(col):
        if isinstance(col, str):
            if header is None or col not in header:
                raise MissingColumn(col)
            return header.index(col)
        return col

    attr = [resolve(c) for c in (column_map.response_time, column_map.energy, column_map.cost)]
    id_col = resolve(column_map.id_column) if column_map.id_column is not None else None

    services = []
    for r, row in enumerate(rows, start=1):
        vals = []
        for c in attr:
            if c >= len(row):
                raise MissingColumn(c)
            cell = row[c].strip()
            try:
                v = float(cell)
            except ValueError:
                raise BadNumber(r, c, cell) from None
            if not math.isfinite(v) or v < 0:
                raise BadNumber(r, c, cell)
            vals.append(v)
        if id_col is not None:
            if id_col >= len(row):
                raise MissingColumn(id_col)
            sid = row[id_col].strip()
        else:
            sid = f"row{r}"
        services.append((sid, QosTriple(*vals)))
    return ServicePool(tuple(services), source)


def load_service_pool_csv(
    path, column_map: ColumnMap = ColumnMap(), has_header: bool = False
) -> ServicePool:
    p = Path(path)
    return parse_service_pool_csv(p.read_text(encoding="utf-8"), column_map, has_header, str(p))


def write_service_pool_csv(pool: ServicePool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["service_id", "response_time", "energy", "cost"])
    for sid, q in pool.services:
        w.writerow([sid, repr(q.response_time), repr(q.energy), repr(q.cost)])
    return buf.getvalue()


@dataclass(frozen=True)
class SyntheticSpec:
    """Uniform attribute ranges; defaults span the worked example's extremes."""

    size: int
    seed: int = 0
    response_time: tuple[float, float] = (19.0, 90.0)
    energy: tuple[float, float] = (33.0, 147.0)
    cost: tuple[float, float] = (28.0, 106.0)

    def validate(self) -> "SyntheticSpec":
        if self.size < 1:
            raise InvalidSpec("pool size must be positive")
        for name in ("response_time", "energy", "cost"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi) or not math.isfinite(hi):
                raise InvalidSpec(f"bad {name} range {(lo, hi)}")
        return self


def generate_synthetic_pool(spec: SyntheticSpec) -> ServicePool:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    cols = [
        rng.uniform(lo, hi, spec.size)
        for lo, hi in (spec.response_time, spec.energy, spec.cost)
    ]
    services = tuple(
        (f"syn{i}", QosTriple(float(cols[0][i]), float(cols[1][i]), float(cols[2][i])))
        for i in range(spec.size)
    )
    return ServicePool(services, f"synthetic(seed={spec.seed})")


def random_workflow(task_ids: list[int], rng: np.random.Generator, max_loop: int = 3) -> WorkflowNode:
    """Random tree using every task exactly once.

    Groups of tasks are split into two to four contiguous parts under a
    randomly chosen composite node; single tasks are sometimes wrapped in a loop.
    """
    if len(task_ids) == 1:
        leaf = Atomic(int(task_ids[0]))
        if rng.random() < 0.25:
            return Loop(leaf, int(rng.integers(1, max_loop + 1)))
        return leaf
    parts = int(rng.integers(2, min(4, len(task_ids)) + 1))
    cuts = sorted(rng.choice(np.arange(1, len(task_ids)), size=parts - 1, replace=False).tolist())
    bounds = [0, *cuts, len(task_ids)]
    children = tuple(
        random_workflow(task_ids[a:b], rng, max_loop) for a, b in zip(bounds, bounds[1:])
    )
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return Sequence(children)
    if kind == 1:
        return Fork(children)
    if kind == 2:
        raw = rng.random(len(children)) + 0.05
        ps = [float(x) for x in raw / raw.sum()]
        ps[-1] = 1.0 - math.fsum(ps[:-1])
        return Branch(children, tuple(ps))
    return Loop(Sequence(children), int(rng.integers(1, max_loop + 1)))


def _check_weights(weights) -> tuple[float, float, float]:
    try:
        w = tuple(float(x) for x in weights)
    except (TypeError, ValueError):
        raise InvalidWeights(f"weights must be three numbers, got {weights!r}") from None
    if len(w) != 3 or any(not math.isfinite(x) or x < 0 for x in w):
        raise InvalidWeights(f"weights must be three non-negative numbers, got {weights!r}")
    if abs(math.fsum(w) - 1.0) > 1e-9:
        raise InvalidWeights(f"weights must sum to 1, got {math.fsum(w)}")
    return w


def sample_instance(
    pool: ServicePool,
    task_count: int,
    candidates_per_task: int,
    workflow_shape: str | WorkflowNode = "sequence",
    weights=(1 / 3, 1 / 3, 1 / 3),
    seed: int = 0,
    name: str = "",
) -> CompositionProblem:
    """Draw ``task_count`` candidate pools of ``candidates_per_task`` services each.

    Services are drawn without replacement when the pool is large enough,
    otherwise with replacement.
    """
    if task_count < 1 or candidates_per_task < 1:
        raise InvalidSpec("task_count and candidates_per_task must be positive")
    w = _check_weights(weights)
    rng = np.random.default_rng(seed)
    need = task_count * candidates_per_task
    if len(pool) >= need:
        picks = rng.permutation(len(pool))[:need]
    else:
        picks = rng.integers(0, len(pool), need)
    tasks = []
    for t in range(task_count):
        chosen = [pool.services[int(k)] for k in picks[t * candidates_per_task : (t + 1) * candidates_per_task]]
        tasks.append(TaskClass.from_triples(t, [q for _, q in chosen], [sid for sid, _ in chosen]))

    if isinstance(workflow_shape, (Atomic, Sequence, Loop, Branch, Fork)):
        workflow = workflow_shape
    elif workflow_shape == "sequence":
        workflow = Sequence(tuple(Atomic(i) for i in range(task_count)))
    elif workflow_shape == "fork":
        workflow = Fork(tuple(Atomic(i) for i in range(task_count)))
    elif workflow_shape == "mixed":
        workflow = random_workflow(list(range(task_count)), rng)
    else:
        raise InvalidShape(f"unknown workflow shape {workflow_shape!r}; choose from {SHAPES}")
    if task_count == 1 and isinstance(workflow, (Sequence, Fork)):
        workflow = Atomic(0)
    return CompositionProblem(tuple(tasks), workflow, w, name)


# -- instance documents -----------------------------------------------------


def _node_to_dict(node: WorkflowNode) -> dict:
    if isinstance(node, Atomic):
        return {"type": "atomic", "task": node.task}
    if isinstance(node, Sequence):
        return {"type": "sequence", "children": [_node_to_dict(c) for c in node.children]}
    if isinstance(node, Fork):
        return {"type": "fork", "children": [_node_to_dict(c) for c in node.children]}
    if isinstance(node, Loop):
        return {"type": "loop", "k": node.k, "child": _node_to_dict(node.child)}
    if isinstance(node, Branch):
        return {
            "type": "branch",
            "probabilities": list(node.probabilities),
            "children": [_node_to_dict(c) for c in node.children],
        }
    raise TypeError(f"unknown workflow node {node!r}")


def problem_to_dict(problem: CompositionProblem) -> dict:
    return {
        "schema": SCHEMA,
        "name": problem.name,
        "weights": list(problem.weights),
        "tasks": [
            {
                "index": t.index,
                "candidates": [
                    {"id": c.service_id, "qos": list(c.qos.astuple())} for c in t.candidates
                ],
            }
            for t in problem.tasks
        ],
        "workflow": _node_to_dict(problem.workflow),
    }


def dumps_instance(problem: CompositionProblem) -> str:
    return json.dumps(problem_to_dict(problem), indent=1, allow_nan=False) + "\n"


def _get(d, key, path, kind):
    if not isinstance(d, dict):
        raise ParseError(path, "expected an object")
    if key not in d:
        raise ParseError(path, f"missing field {key!r}")
    v = d[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{path}.{key}", "expected a number")
        return float(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ParseError(f"{path}.{key}", "expected an integer")
        return v
    if not isinstance(v, kind):
        raise ParseError(f"{path}.{key}", f"expected {kind.__name__}")
    return v


def _node_from_dict(d, path: str) -> WorkflowNode:
    kind = _get(d, "type", path, str)
    if kind == "atomic":
        return Atomic(_get(d, "task", path, int))
    if kind in ("sequence", "fork", "branch"):
        kids = _get(d, "children", path, list)
        children = tuple(_node_from_dict(c, f"{path}.children[{i}]") for i, c in enumerate(kids))
        if kind == "sequence":
            return Sequence(children)
        if kind == "fork":
            return Fork(children)
        ps = _get(d, "probabilities", path, list)
        for i, p in enumerate(ps):
            if isinstance(p, bool) or not isinstance(p, (int, float)):
                raise ParseError(f"{path}.probabilities[{i}]", "expected a number")
        return Branch(children, tuple(float(p) for p in ps))
    if kind == "loop":
        return Loop(_node_from_dict(_get(d, "child", path, dict), f"{path}.child"), _get(d, "k", path, int))
    raise ParseError(f"{path}.type", f"unknown node type {kind!r}")


def problem_from_dict(doc) -> CompositionProblem:
    if not isinstance(doc, dict):
        raise ParseError("$", "expected an object")
    if "schema" not in doc:
        raise ParseError("$", "missing field 'schema'")
    if doc["schema"] != SCHEMA:
        raise SchemaVersionMismatch(doc["schema"], SCHEMA)
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ParseError("$.name", "expected a string")
    weights = _get(doc, "weights", "$", list)
    if len(weights) != 3:
        raise ParseError("$.weights", "expected three weights")
    ws = []
    for i, w in enumerate(weights):
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise ParseError(f"$.weights[{i}]", "expected a number")
        ws.append(float(w))

    tasks = []
    for ti, td in enumerate(_get(doc, "tasks", "$", list)):
        path = f"$.tasks[{ti}]"
        index = _get(td, "index", path, int)
        cands = []
        for ci, cd in enumerate(_get(td, "candidates", path, list)):
            cpath = f"{path}.candidates[{ci}]"
            sid = _get(cd, "id", cpath, str)
            qos = _get(cd, "qos", cpath, list)
            if len(qos) != 3 or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in qos):
                raise ParseError(f"{cpath}.qos", "expected three numbers")
            try:
                q = QosTriple(*qos)
            except ValueError as e:
                raise ParseError(f"{cpath}.qos", str(e)) from None
            cands.append((sid, q))
        tasks.append(TaskClass.from_triples(index, [q for _, q in cands], [s for s, _ in cands]))
    workflow = _node_from_dict(_get(doc, "workflow", "$", dict), "$.workflow")
    return CompositionProblem(tuple(tasks), workflow, tuple(ws), name)


def loads_instance(text: str) -> CompositionProblem:
    """Parse an instance document. Structural validity is not checked here."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.pos, e.msg) from None
    return problem_from_dict(doc)


def save_instance(problem: CompositionProblem, path) -> None:
    Path(path).write_text(dumps_instance(problem), encoding="utf-8")


def load_instance(path) -> CompositionProblem:
    return loads_instance(Path(path).read_text(encoding="utf-8"))
