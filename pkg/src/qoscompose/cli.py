"""Command-line interface.

Exit status is 0 on success, 1 on a usage error and 2 on a data error
(unreadable or malformed input, invalid instance, oversized oracle request).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from qoscompose.algorithms import ALGORITHMS, make_config, run_algorithm
from qoscompose.baselines import brute_force_optimum
from qoscompose.bench import (
    emit_boxplot_data,
    emit_results_csv,
    emit_traces_csv,
    group_by,
    load_scenario,
    parse_results_csv,
    preset,
    run_scenario,
    summary_report,
    stats_table,
)
from qoscompose.errors import QosComposeError
from qoscompose.instances import (
    SHAPES,
    ColumnMap,
    SyntheticSpec,
    dumps_instance,
    generate_synthetic_pool,
    load_instance,
    load_service_pool_csv,
    sample_instance,
    write_service_pool_csv,
)
from qoscompose.model import find_violations, validate_problem

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _columns(text: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three columns, e.g. 1,2,3")
    return [int(p) if p.isdigit() else p for p in parts]


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _seed_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _knob(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected key=value")
    k, v = text.split("=", 1)
    for cast in (int, float):
        try:
            return k, cast(v)
        except ValueError:
            pass
    if v.lower() in ("true", "false"):
        return k, v.lower() == "true"
    if v.lower() == "none":
        return k, None
    return k, v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qoscompose", description="QoS-aware service composition with SFGA and baselines.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic pool or a problem instance")
    g.add_argument("kind", choices=("pool", "instance"))
    g.add_argument("--seed", type=_seed, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--size", type=int, default=100, help="pool size (kind=pool)")
    g.add_argument("--tasks", type=int, default=11)
    g.add_argument("--candidates", type=int, default=10)
    g.add_argument("--shape", default="sequence", choices=SHAPES)
    g.add_argument("--weights", type=_floats, default=(1 / 3, 1 / 3, 1 / 3))
    g.add_argument("--pool", help="sample from this CSV pool instead of a synthetic one")
    g.add_argument("--columns", type=_columns, default=[1, 2, 3])
    g.add_argument("--id-column", default="0", help="id column index/name, or 'none'")
    g.add_argument("--header", action="store_true")

    s = sub.add_parser("solve", help="run one algorithm on one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--algo", default="sfga", choices=ALGORITHMS)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--generations", type=int, default=100)
    s.add_argument("--pop", type=int, default=50)
    s.add_argument("--memeplexes", type=int, default=5)
    s.add_argument("--max-evals", type=int)
    s.add_argument("--stall-limit", type=int)
    s.add_argument("--set", type=_knob, action="append", default=[], metavar="KEY=VALUE",
                   help="extra algorithm knob, e.g. mutation_rate=0.2")
    s.add_argument("--out", help="write the run record as JSON")

    b = sub.add_parser("bench", help="run a scenario grid")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="scenario file (qosbench/1)")
    src.add_argument("--preset", choices=("scenario1", "scenario2"))
    b.add_argument("--seeds", type=_seed_list, help="override seeds, e.g. 0-29")
    b.add_argument("--out-dir", required=True)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--no-timing", action="store_true")
    b.add_argument("--metric", default="agg_energy")

    st = sub.add_parser("stats", help="summarize a records CSV")
    st.add_argument("--records", required=True)
    st.add_argument("--metric", default="agg_energy")
    st.add_argument("--by-level", action="store_true")

    o = sub.add_parser("oracle", help="exhaustively solve a small instance")
    o.add_argument("--instance", required=True)
    o.add_argument("--cap", type=int, default=10**6)

    v = sub.add_parser("validate", help="check an instance file")
    v.add_argument("--instance", required=True)
    return p


def _cmd_gen(a) -> int:
    if a.kind == "pool":
        pool = generate_synthetic_pool(SyntheticSpec(size=a.size, seed=a.seed))
        Path(a.out).write_text(write_service_pool_csv(pool), encoding="utf-8")
        print(f"wrote {len(pool)} services to {a.out}")
        return EXIT_OK
    if a.pool:
        idc = None if a.id_column.lower() == "none" else (int(a.id_column) if a.id_column.isdigit() else a.id_column)
        pool = load_service_pool_csv(a.pool, ColumnMap(*a.columns, id_column=idc), a.header)
    else:
        pool = generate_synthetic_pool(SyntheticSpec(size=a.tasks * a.candidates, seed=a.seed))
    problem = sample_instance(pool, a.tasks, a.candidates, a.shape, a.weights, a.seed,
                              name=Path(a.out).stem)
    validate_problem(problem)
    Path(a.out).write_text(dumps_instance(problem), encoding="utf-8")
    print(f"wrote instance with {problem.m} tasks x {a.candidates} candidates to {a.out}")
    return EXIT_OK


def _cmd_solve(a) -> int:
    problem = validate_problem(load_instance(a.instance))
    knobs = {"population_size": a.pop, "generations": a.generations, "seed": a.seed,
             "max_evaluations": a.max_evals, "stall_limit": a.stall_limit}
    if a.algo == "sfga":
        knobs["memeplex_count"] = a.memeplexes
    knobs.update(dict(a.set))
    rec = run_algorithm(problem, make_config(a.algo, **knobs), problem.name or Path(a.instance).stem)
    q = rec.best_qos
    print(f"algorithm     {rec.algorithm}")
    print(f"best genome   {' '.join(map(str, rec.best_genome))}")
    print(f"best fitness  {rec.best_fitness:.6f}")
    print(f"response time {q.response_time:.6f}")
    print(f"energy        {q.energy:.6f}")
    print(f"cost          {q.cost:.6f}")
    print(f"evaluations   {rec.evaluations}  generations {len(rec.trace) - 1}  wall {rec.wall_time:.3f}s")
    if a.out:
        Path(a.out).write_text(rec.to_json() + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_bench(a) -> int:
    spec = load_scenario(a.spec) if a.spec else preset(a.preset)
    if a.seeds:
        spec = dataclasses.replace(spec, seeds=tuple(a.seeds))
    records = run_scenario(spec, workers=a.workers)
    out = Path(a.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "records.csv").write_text(emit_results_csv(records, timing=not a.no_timing), encoding="utf-8")
    (out / "traces.csv").write_text(emit_traces_csv(records), encoding="utf-8")
    (out / f"boxplot_{a.metric}.csv").write_text(
        emit_boxplot_data(group_by(records), a.metric), encoding="utf-8"
    )
    for lv, items in group_by(records, "level").items():
        (out / f"boxplot_{a.metric}_L{lv}.csv").write_text(
            emit_boxplot_data(group_by(items), a.metric), encoding="utf-8"
        )
    report = summary_report(records)
    (out / "summary.txt").write_text(report, encoding="utf-8")
    print(stats_table(records, a.metric, f"{spec.name}: {a.metric}"))
    print(f"{len(records)} records written to {out}")
    return EXIT_OK


def _cmd_stats(a) -> int:
    rows = parse_results_csv(Path(a.records).read_text(encoding="utf-8"))
    if not rows:
        print("no records", file=sys.stderr)
        return EXIT_DATA
    if a.metric == "all":
        print(summary_report(rows), end="")
        return EXIT_OK
    print(stats_table(rows, a.metric, f"{a.metric} (all levels)"), end="")
    if a.by_level:
        for lv, items in sorted(group_by(rows, "level").items(), key=lambda kv: (kv[0] is None, kv[0])):
            print()
            print(stats_table(items, a.metric, f"{a.metric}, level {lv}"), end="")
    return EXIT_OK


def _cmd_oracle(a) -> int:
    problem = validate_problem(load_instance(a.instance))
    genome, best, count = brute_force_optimum(problem, a.cap)
    print(f"combinations  {count}")
    print(f"best genome   {' '.join(map(str, genome))}")
    print(f"best fitness  {best:.6f}")
    return EXIT_OK


def _cmd_validate(a) -> int:
    problem = load_instance(a.instance)
    violations = find_violations(problem)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return EXIT_DATA
    print(f"ok: {problem.m} tasks, {problem.combinations} combinations")
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "stats": _cmd_stats,
    "oracle": _cmd_oracle,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (QosComposeError, OSError, ValueError) as e:
        print(f"qoscompose {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
