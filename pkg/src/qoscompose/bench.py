"""Scenario runner, summary statistics and plot-ready CSV emission.

A scenario is a grid of (level, algorithm, seed) cells, where a level is the
number of candidate services per task. Every cell samples its own instance
from ``(level, seed)`` alone, so all algorithms in a column see the same
instance and a cell's result does not depend on execution order or on the
number of workers.

Scenario files are JSON with schema tag ``qosbench/1``::

    {
      "schema": "qosbench/1",
      "name": "scenario1",
      "levels": [10, 20, 30, 40, 50],
      "task_count": 11,
      "algorithms": ["sfga", "ga", "pso", "ca", "gapso"],
      "seeds": [0, 1, 2],
      "population_size": 50,
      "evaluations": 5000,
      "overrides": {"sfga": {"memeplex_count": 5}},
      "workflow": "sequence",
      "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
      "source": {"synthetic": {"response_time": [19, 90], "energy": [33, 147], "cost": [28, 106]}}
    }

``source`` may instead be ``{"csv": {"path": "qws.csv", "columns": [1, 2, 3],
"id_column": 0, "header": false}}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from qoscompose.algorithms import ALGORITHMS, make_config, run_algorithm
from qoscompose.errors import (
    EmptyGroup,
    EmptyInput,
    InvalidSpec,
    ParseError,
    QosComposeError,
    ScenarioError,
    SchemaVersionMismatch,
)
from qoscompose.instances import (
    ColumnMap,
    ServicePool,
    SyntheticSpec,
    generate_synthetic_pool,
    load_service_pool_csv,
    sample_instance,
)
from qoscompose.records import RunRecord

SCHEMA = "qosbench/1"

RESULTS_HEADER = (
    "algorithm,instance,level,seed,best_fitness,agg_response_time,"
    "agg_energy,agg_cost,evaluations,wall_time_s"
)
RESULT_FIELDS = tuple(RESULTS_HEADER.split(","))
REAL_FIELDS = ("best_fitness", "agg_response_time", "agg_energy", "agg_cost", "wall_time_s")
INT_FIELDS = ("level", "seed", "evaluations")

# Column order of the summary tables.
TABLE_ORDER = ("pso", "ga", "gapso", "ca", "sfga")


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    levels: tuple[int, ...]
    seeds: tuple[int, ...]
    algorithms: tuple[str, ...] = ALGORITHMS
    task_count: int = 11
    population_size: int = 50
    evaluations: int = 5000
    overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    workflow: str = "sequence"
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    synthetic: SyntheticSpec | None = None
    csv_source: dict[str, Any] | None = None

    def validate(self) -> "ScenarioSpec":
        if not self.levels or any(lv < 1 for lv in self.levels):
            raise InvalidSpec("levels must be a non-empty list of positive integers")
        if not self.seeds:
            raise InvalidSpec("at least one seed is required")
        if not self.algorithms:
            raise InvalidSpec("at least one algorithm is required")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise InvalidSpec(f"unknown algorithm {a!r}")
        if self.task_count < 1 or self.population_size < 2 or self.evaluations < 1:
            raise InvalidSpec("task_count, population_size and evaluations must be positive")
        if self.synthetic is not None and self.csv_source is not None:
            raise InvalidSpec("choose either a synthetic or a csv source")
        return self

    def cells(self) -> list[tuple[int, str, int]]:
        return [(lv, a, s) for lv in self.levels for a in self.algorithms for s in self.seeds]


def preset(name: str, seeds=range(30)) -> ScenarioSpec:
    """The two published scenario grids on synthetic pools."""
    levels = {"scenario1": (10, 20, 30, 40, 50), "scenario2": (100, 200, 300, 400)}
    if name not in levels:
        raise InvalidSpec(f"unknown preset {name!r}; choose from {sorted(levels)}")
    return ScenarioSpec(name=name, levels=levels[name], seeds=tuple(seeds))


def scenario_from_dict(doc) -> ScenarioSpec:
    if not isinstance(doc, dict) or "schema" not in doc:
        raise ParseError("$", "missing field 'schema'")
    if doc["schema"] != SCHEMA:
        raise SchemaVersionMismatch(doc["schema"], SCHEMA)
    try:
        synthetic = None
        csv_source = None
        src = doc.get("source", {"synthetic": {}})
        if "synthetic" in src:
            syn = src["synthetic"]
            synthetic = SyntheticSpec(
                size=1,
                response_time=tuple(syn.get("response_time", (19.0, 90.0))),
                energy=tuple(syn.get("energy", (33.0, 147.0))),
                cost=tuple(syn.get("cost", (28.0, 106.0))),
            )
        elif "csv" in src:
            csv_source = dict(src["csv"])
            if "path" not in csv_source:
                raise ParseError("$.source.csv", "missing field 'path'")
        else:
            raise ParseError("$.source", "expected 'synthetic' or 'csv'")
        spec = ScenarioSpec(
            name=str(doc.get("name", "scenario")),
            levels=tuple(int(x) for x in doc["levels"]),
            seeds=tuple(int(x) for x in doc["seeds"]),
            algorithms=tuple(str(a).lower() for a in doc.get("algorithms", ALGORITHMS)),
            task_count=int(doc.get("task_count", 11)),
            population_size=int(doc.get("population_size", 50)),
            evaluations=int(doc.get("evaluations", 5000)),
            overrides={k.lower(): dict(v) for k, v in doc.get("overrides", {}).items()},
            workflow=str(doc.get("workflow", "sequence")),
            weights=tuple(float(w) for w in doc.get("weights", (1 / 3, 1 / 3, 1 / 3))),
            synthetic=synthetic,
            csv_source=csv_source,
        )
    except KeyError as e:
        raise ParseError("$", f"missing field {e.args[0]!r}") from None
    except (TypeError, ValueError, AttributeError) as e:
        raise ParseError("$", str(e)) from None
    return spec.validate()


def load_scenario(path) -> ScenarioSpec:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.pos, e.msg) from None
    return scenario_from_dict(doc)


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


def _csv_pool(spec: ScenarioSpec) -> ServicePool:
    src = spec.csv_source
    cols = src.get("columns", [1, 2, 3])
    cmap = ColumnMap(cols[0], cols[1], cols[2], src.get("id_column", 0))
    return load_service_pool_csv(src["path"], cmap, bool(src.get("header", False)))


def build_instance(spec: ScenarioSpec, level: int, seed: int, pool: ServicePool | None = None):
    """The instance for one (level, seed) column of the grid."""
    if pool is None:
        syn = spec.synthetic or SyntheticSpec(size=1)
        pool = generate_synthetic_pool(
            SyntheticSpec(
                size=level * spec.task_count,
                seed=derive_seed(level, seed, 0),
                response_time=syn.response_time,
                energy=syn.energy,
                cost=syn.cost,
            )
        )
    name = f"{spec.name}-L{level}-s{seed}"
    return sample_instance(
        pool,
        spec.task_count,
        level,
        spec.workflow,
        spec.weights,
        seed=derive_seed(level, seed, 1),
        name=name,
    )


def _run_cell(args) -> RunRecord:
    spec, pool, level, algorithm, seed = args
    try:
        problem = build_instance(spec, level, seed, pool)
        knobs = {
            "population_size": spec.population_size,
            "generations": spec.evaluations,
            "max_evaluations": spec.evaluations,
            "seed": seed,
        }
        knobs.update(spec.overrides.get(algorithm, {}))
        record = run_algorithm(problem, make_config(algorithm, **knobs), problem.name)
    except QosComposeError as e:
        raise ScenarioError(level, algorithm, seed, e) from e
    record.level = level
    return record


def run_scenario(spec: ScenarioSpec, workers: int = 1) -> list[RunRecord]:
    """Run every cell; records come back in (level, algorithm, seed) grid order.

    The evaluation budget is shared by all algorithms: each stops once it has
    spent ``spec.evaluations`` fitness evaluations (finishing its generation).
    """
    spec.validate()
    pool = _csv_pool(spec) if spec.csv_source is not None else None
    jobs = [(spec, pool, lv, a, s) for lv, a, s in spec.cells()]
    if workers <= 1:
        return [_run_cell(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


# -- statistics --------------------------------------------------------------


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    std: float
    min: float
    q1: float
    median: float
    q3: float
    max: float


def summarize_stats(values) -> SummaryStats:
    """Mean, sample standard deviation (n - 1) and type-7 quartiles."""
    a = np.asarray(list(values), dtype=float)
    if a.size == 0:
        raise EmptyInput("cannot summarize an empty list")
    std = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    q1, med, q3 = (float(x) for x in np.quantile(a, [0.25, 0.5, 0.75], method="linear"))
    return SummaryStats(
        count=int(a.size),
        mean=float(np.mean(a)),
        std=std,
        min=float(a.min()),
        q1=q1,
        median=med,
        q3=q3,
        max=float(a.max()),
    )


# -- CSV emission ------------------------------------------------------------


def record_row(r: RunRecord) -> dict[str, Any]:
    q = r.best_qos
    return {
        "algorithm": r.algorithm,
        "instance": r.instance,
        "level": r.level,
        "seed": r.seed,
        "best_fitness": r.best_fitness,
        "agg_response_time": q.response_time if q else math.nan,
        "agg_energy": q.energy if q else math.nan,
        "agg_cost": q.cost if q else math.nan,
        "evaluations": r.evaluations,
        "wall_time_s": r.wall_time,
    }


def emit_results_csv(records, timing: bool = True) -> str:
    """One row per record. Without ``timing`` the wall-time cell is left empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write(RESULTS_HEADER + "\n")
    for r in records:
        row = record_row(r) if isinstance(r, RunRecord) else r
        out = []
        for f in RESULT_FIELDS:
            v = row[f]
            if f == "wall_time_s" and not timing:
                out.append("")
            elif f in REAL_FIELDS:
                out.append(f"{v:.6f}")
            elif v is None:
                out.append("")
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


def parse_results_csv(text: str) -> list[dict[str, Any]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or ",".join(rows[0]) != RESULTS_HEADER:
        raise ParseError(1, "unexpected results header")
    out = []
    for n, raw in enumerate(rows[1:], start=2):
        if not raw:
            continue
        if len(raw) != len(RESULT_FIELDS):
            raise ParseError(n, f"expected {len(RESULT_FIELDS)} fields, got {len(raw)}")
        row: dict[str, Any] = {}
        for f, cell in zip(RESULT_FIELDS, raw):
            try:
                if f in REAL_FIELDS:
                    row[f] = float(cell) if cell != "" else None
                elif f in INT_FIELDS:
                    row[f] = int(cell) if cell != "" else None
                else:
                    row[f] = cell
            except ValueError:
                raise ParseError(n, f"bad value {cell!r} in column {f}") from None
        out.append(row)
    return out


def _metric_getter(metric: str | Callable) -> Callable:
    if callable(metric):
        return metric

    def get(item):
        row = record_row(item) if isinstance(item, RunRecord) else item
        if metric not in row:
            raise KeyError(f"unknown metric {metric!r}")
        return row[metric]

    return get


def group_by(items, key: str = "algorithm") -> dict[Any, list]:
    groups: dict[Any, list] = {}
    for it in items:
        row = record_row(it) if isinstance(it, RunRecord) else it
        groups.setdefault(row[key], []).append(it)
    return groups


BOXPLOT_HEADER = "group,count,min,q1,median,q3,max,mean,std"


def emit_boxplot_data(groups: dict[Any, list], metric: str | Callable = "agg_energy") -> str:
    """Five-number summary plus mean and std of ``metric`` for each group."""
    get = _metric_getter(metric)
    lines = [BOXPLOT_HEADER]
    for name, items in groups.items():
        if not items:
            raise EmptyGroup(name)
        s = summarize_stats(get(it) for it in items)
        lines.append(
            f"{name},{s.count},{s.min:.6f},{s.q1:.6f},{s.median:.6f},"
            f"{s.q3:.6f},{s.max:.6f},{s.mean:.6f},{s.std:.6f}"
        )
    return "\n".join(lines) + "\n"


def emit_traces_csv(records) -> str:
    """Convergence traces in long form, one row per (record, generation)."""
    lines = ["algorithm,instance,level,seed,generation,best_fitness"]
    for r in records:
        lv = "" if r.level is None else r.level
        for g, f in enumerate(r.trace):
            lines.append(f"{r.algorithm},{r.instance},{lv},{r.seed},{g},{f:.6f}")
    return "\n".join(lines) + "\n"


def stats_table(items, metric: str = "agg_energy", title: str = "") -> str:
    """Mean / Std. Deviation table with one column per algorithm."""
    groups = group_by(items)
    names = [a for a in TABLE_ORDER if a in groups] + sorted(a for a in groups if a not in TABLE_ORDER)
    stats = {a: summarize_stats(_metric_getter(metric)(it) for it in groups[a]) for a in names}
    width = max(12, *(len(a) + 2 for a in names))
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'':<16}" + "".join(f"{a.upper():>{width}}" for a in names))
    lines.append(f"{'Mean':<16}" + "".join(f"{stats[a].mean:>{width}.4f}" for a in names))
    lines.append(f"{'Std. Deviation':<16}" + "".join(f"{stats[a].std:>{width}.5f}" for a in names))
    lines.append(f"{'N':<16}" + "".join(f"{stats[a].count:>{width}d}" for a in names))
    return "\n".join(lines) + "\n"


def summary_report(items, metrics=("agg_energy", "best_fitness", "agg_response_time", "agg_cost")) -> str:
    """Pooled and per-level tables for each metric."""
    parts = []
    for metric in metrics:
        parts.append(stats_table(items, metric, f"== {metric} (all levels) =="))
        by_level = group_by(items, "level")
        for lv in sorted(by_level, key=lambda x: (x is None, x)):
            parts.append(stats_table(by_level[lv], metric, f"-- {metric}, level {lv} --"))
    return "\n".join(parts)
