import json
import math
import random
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from qoscompose.bench import (
    BOXPLOT_HEADER,
    RESULTS_HEADER,
    ScenarioSpec,
    build_instance,
    emit_boxplot_data,
    emit_results_csv,
    emit_traces_csv,
    group_by,
    load_scenario,
    parse_results_csv,
    preset,
    run_scenario,
    stats_table,
    summarize_stats,
    summary_report,
)
from qoscompose.errors import EmptyGroup, EmptyInput, InvalidSpec, ParseError, ScenarioError, SchemaVersionMismatch
from qoscompose.model import validate_problem


def tiny_spec(**kw):
    base = dict(
        name="tiny",
        levels=(3, 5),
        seeds=(0, 1),
        task_count=3,
        population_size=10,
        evaluations=60,
        overrides={"sfga": {"memeplex_count": 2}},
    )
    base.update(kw)
    return ScenarioSpec(**base)


class TestSummaryStats:
    def test_three(self):
        s = summarize_stats([1, 2, 3])
        assert (s.mean, s.std) == (2.0, 1.0)

    def test_singleton(self):
        s = summarize_stats([5])
        assert (s.count, s.mean, s.std) == (1, 5.0, 0.0)
        assert s.min == s.q1 == s.median == s.q3 == s.max == 5.0

    def test_type7_quartiles(self):
        s = summarize_stats([1, 2, 3, 4, 5])
        assert (s.q1, s.median, s.q3) == (2.0, 3.0, 4.0)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            summarize_stats([])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200))
    @settings(max_examples=300, deadline=None)
    def test_two_pass_reference(self, xs):
        s = summarize_stats(xs)
        mean = math.fsum(xs) / len(xs)
        var = math.fsum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
        scale = max(1.0, max(abs(x) for x in xs))
        assert abs(s.mean - mean) <= 1e-9 * scale
        assert abs(s.std - math.sqrt(var)) <= 1e-9 * scale
        assert s.min <= s.q1 <= s.median <= s.q3 <= s.max
        assert s.median == pytest.approx(statistics.median(xs), abs=1e-9 * scale)


def _records():
    return run_scenario(tiny_spec(levels=(3,), seeds=(0, 1, 2)))


class TestResultsCsv:
    def test_header_only(self):
        assert emit_results_csv([]) == RESULTS_HEADER + "\n"

    def test_one_record(self):
        [r] = run_scenario(tiny_spec(levels=(3,), seeds=(0,), algorithms=("ga",)))
        lines = emit_results_csv([r]).splitlines()
        assert len(lines) == 2
        assert len(lines[1].split(",")) == 10

    def test_numeric_roundtrip(self):
        recs = _records()
        rows = parse_results_csv(emit_results_csv(recs))
        assert len(rows) == len(recs)
        for r, row in zip(recs, rows):
            assert row["algorithm"] == r.algorithm and row["seed"] == r.seed and row["level"] == r.level
            assert row["evaluations"] == r.evaluations
            assert row["best_fitness"] == round(r.best_fitness, 6)
            assert row["agg_energy"] == round(r.best_qos.energy, 6)
            assert row["wall_time_s"] == round(r.wall_time, 6)

    def test_no_timing_is_stable(self):
        a = emit_results_csv(_records(), timing=False)
        b = emit_results_csv(_records(), timing=False)
        assert a == b
        assert all(line.endswith(",") for line in a.splitlines()[1:])

    def test_bad_header(self):
        with pytest.raises(ParseError):
            parse_results_csv("a,b\n1,2\n")


class TestBoxplot:
    def test_five_numbers(self):
        out = emit_boxplot_data({"x": [1, 2, 3, 4, 5]}, metric=lambda v: v)
        header, row = out.splitlines()
        assert header == BOXPLOT_HEADER
        cells = dict(zip(header.split(","), row.split(",")))
        assert [float(cells[k]) for k in ("min", "q1", "median", "q3", "max")] == [1, 2, 3, 4, 5]
        assert float(cells["mean"]) == 3.0

    def test_one_row_per_algorithm(self):
        recs = _records()
        out = emit_boxplot_data(group_by(recs), "agg_energy")
        assert len(out.splitlines()) == 1 + 5

    def test_empty_group(self):
        with pytest.raises(EmptyGroup):
            emit_boxplot_data({"ga": []})

    def test_tables_and_traces(self):
        recs = _records()
        table = stats_table(recs, "agg_energy", "Energy")
        assert table.splitlines()[1].split() == ["PSO", "GA", "GAPSO", "CA", "SFGA"]
        assert "Std. Deviation" in table
        assert "level 3" in summary_report(recs)
        traces = emit_traces_csv(recs).splitlines()
        assert len(traces) == 1 + sum(len(r.trace) for r in recs)


class TestScenario:
    def test_grid_count(self):
        spec = tiny_spec(levels=(10, 20, 30, 40, 50), seeds=tuple(range(10)), evaluations=20)
        recs = run_scenario(spec)
        assert len(recs) == 250
        assert [(r.level, r.algorithm, r.seed) for r in recs] == spec.cells()

    def test_single_cell(self):
        assert len(run_scenario(tiny_spec(levels=(4,), seeds=(7,), algorithms=("pso",)))) == 1

    def test_deterministic(self):
        a, b = run_scenario(tiny_spec()), run_scenario(tiny_spec())
        assert all(x.same_result(y) for x, y in zip(a, b))

    def test_worker_count_irrelevant(self):
        spec = tiny_spec()
        one = emit_results_csv(run_scenario(spec, workers=1), timing=False)
        many = emit_results_csv(run_scenario(spec, workers=3), timing=False)
        assert one == many

    def test_same_instance_for_every_algorithm(self):
        recs = run_scenario(tiny_spec(levels=(3,), seeds=(4,)))
        assert len({r.instance for r in recs}) == 1

    def test_budget_is_shared(self):
        recs = run_scenario(tiny_spec(levels=(5,), seeds=(0,), evaluations=100))
        assert all(100 <= r.evaluations < 100 + 2 * 10 for r in recs)

    def test_error_names_the_cell(self):
        spec = tiny_spec(overrides={"ga": {"mutation_rate": 3.0}})
        with pytest.raises(ScenarioError) as exc:
            run_scenario(spec)
        assert (exc.value.level, exc.value.algorithm, exc.value.seed) == (3, "ga", 0)

    def test_invalid_specs(self):
        with pytest.raises(InvalidSpec):
            tiny_spec(levels=()).validate()
        with pytest.raises(InvalidSpec):
            tiny_spec(seeds=()).validate()
        with pytest.raises(InvalidSpec):
            tiny_spec(algorithms=("sa",)).validate()

    def test_built_instances_valid(self):
        spec = tiny_spec(workflow="mixed", task_count=6)
        for lv in (1, 2, 7):
            for s in range(5):
                validate_problem(build_instance(spec, lv, s))

    def test_presets(self):
        assert preset("scenario1").levels == (10, 20, 30, 40, 50)
        assert preset("scenario2", seeds=[1]).levels == (100, 200, 300, 400)
        assert len(preset("scenario1").seeds) == 30
        with pytest.raises(InvalidSpec):
            preset("scenario3")


class TestScenarioFile:
    def test_load(self, tmp_path):
        doc = {
            "schema": "qosbench/1",
            "name": "file",
            "levels": [3],
            "seeds": [0, 1],
            "task_count": 3,
            "algorithms": ["SFGA", "ga"],
            "population_size": 10,
            "evaluations": 40,
            "overrides": {"sfga": {"memeplex_count": 2}},
        }
        path = tmp_path / "s.json"
        path.write_text(json.dumps(doc))
        spec = load_scenario(path)
        assert spec.algorithms == ("sfga", "ga")
        assert len(run_scenario(spec)) == 4

    def test_csv_source(self, tmp_path):
        rng = random.Random(0)
        lines = [f"s{i},{rng.randint(1, 90)},{rng.randint(1, 90)},{rng.randint(1, 90)}" for i in range(30)]
        (tmp_path / "pool.csv").write_text("\n".join(lines))
        doc = {"schema": "qosbench/1", "levels": [4], "seeds": [0], "task_count": 3, "algorithms": ["ga"],
               "population_size": 6, "evaluations": 30,
               "source": {"csv": {"path": str(tmp_path / "pool.csv"), "columns": [1, 2, 3]}}}
        (tmp_path / "s.json").write_text(json.dumps(doc))
        [r] = run_scenario(load_scenario(tmp_path / "s.json"))
        assert r.best_qos is not None

    def test_schema_and_parse_errors(self, tmp_path):
        (tmp_path / "a.json").write_text(json.dumps({"schema": "qosbench/9", "levels": [1], "seeds": [0]}))
        with pytest.raises(SchemaVersionMismatch):
            load_scenario(tmp_path / "a.json")
        (tmp_path / "b.json").write_text('{"schema": "qosbench/1", "levels": [1')
        with pytest.raises(ParseError):
            load_scenario(tmp_path / "b.json")
        (tmp_path / "c.json").write_text(json.dumps({"schema": "qosbench/1", "seeds": [0]}))
        with pytest.raises(ParseError):
            load_scenario(tmp_path / "c.json")
