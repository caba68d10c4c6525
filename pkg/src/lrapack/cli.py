"""Command-line harness: generate, solve, verify, bound, export, and benchmark.

Exit codes: 0 on success, 2 when validation or verification fails, 3 on usage
errors (bad tokens, unreadable files, malformed input).  Errors are printed as
single machine-parseable lines ``error: <detail>`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import algorithms, bounds, generator, model
from .placement import DEFAULT_BACKEND, available_backends, verify_solution

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_USAGE = 3

BENCH_HEADER = ["instance", "algorithm", "nodes", "lb", "deviation_pct", "time_ms", "seed", "failed"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fail_usage(message: str) -> "SystemExit":
    print(f"error: {message}", file=sys.stderr)
    return SystemExit(EXIT_USAGE)


def _fail_invalid(message: str) -> "SystemExit":
    print(f"error: {message}", file=sys.stderr)
    return SystemExit(EXIT_INVALID)


def _load_instance(path: str) -> model.Instance:
    try:
        return model.load_instance(path)
    except (OSError, json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        raise _fail_usage(f"cannot read instance {path}: {exc}")


def _require_valid(instance: model.Instance, path: str) -> None:
    problems = model.validate(instance)
    if problems:
        for p in problems:
            print(f"error: {path}: {p}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _parse_tokens(tokens: list[str], eps: float) -> list[algorithms.AlgoConfig]:
    configs = []
    for token in tokens:
        try:
            configs.append(algorithms.parse_algorithm(token, eps=eps))
        except ValueError as exc:
            raise _fail_usage(str(exc))
    return configs


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_generate(args) -> int:
    try:
        profile = generator.load_profile(args.profile) if args.profile else generator.default_profile()
        shape = None
        if args.temporal == "sinusoid":
            shape = generator.TemporalShape(kind="sinusoid")
        elif args.temporal == "none":
            shape = generator.TemporalShape(kind="none")
        profile = generator.with_overrides(
            profile,
            num_apps=args.apps,
            density=args.density,
            graph_class=args.graph_class,
            epochs=args.epochs,
            temporal_shape=shape,
        )
        instance = generator.gen_instance(profile, args.seed)
    except (generator.ProfileError, OSError, json.JSONDecodeError, ValueError) as exc:
        raise _fail_usage(f"generate: {exc}")
    model.save_instance(instance, args.out)
    print(f"wrote {args.out}: |L|={instance.num_apps} replicas={instance.total_replicas} "
          f"arcs={len(instance.graph)} d'={instance.dimensions}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    configs = _parse_tokens([args.algo], args.eps)
    instance = _load_instance(args.instance)
    _require_valid(instance, args.instance)
    solution = algorithms.solve(instance, configs[0], backend=args.backend)
    if args.time_mode == "zero":
        solution.wall_time_ms = 0.0
    payload = model.solution_to_dict(solution)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return EXIT_OK


def _cmd_verify(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance, args.instance)
    try:
        solution = model.load_solution(args.solution)
    except (OSError, json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        raise _fail_usage(f"cannot read solution {args.solution}: {exc}")
    problems = verify_solution(instance, solution)
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def _cmd_validate(args) -> int:
    instance = _load_instance(args.instance)
    problems = model.validate(instance)
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def _cmd_lb(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance, args.instance)
    bound = bounds.lower_bound(instance)
    print(f"LB={bound.value} dim={bound.binding_dimension}")
    return EXIT_OK


def _cmd_export_ilp(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance, args.instance)
    n_nodes = args.nodes
    if n_nodes is None:
        ff = algorithms.solve(instance, "ff", backend=args.backend)
        n_nodes = ff.nodes_used
    if n_nodes < 1:
        raise _fail_usage("export-ilp: node count must be >= 1")
    text = bounds.export_ilp(instance, n_nodes)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"wrote {args.out}: {n_nodes} candidate nodes")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    instance = _load_instance(args.instance)
    _require_valid(instance, args.instance)
    try:
        solution = bounds.brute_force_opt(instance, limit=args.limit)
    except bounds.OracleLimitError as exc:
        raise _fail_usage(f"oracle: {exc}")
    if args.time_mode == "zero":
        solution.wall_time_ms = 0.0
    if args.out:
        model.save_solution(solution, args.out)
    print(f"optimum={solution.nodes_used}")
    return EXIT_OK


def _cmd_import_csv(args) -> int:
    try:
        capacity = [int(v) for v in args.capacity.split(",")]
        instance = model.read_csv_instance(
            args.apps_csv, args.affinity_csv, capacity,
            resource_types=args.resource_types, epochs=args.epochs, name=args.name,
        )
    except (OSError, ValueError) as exc:
        raise _fail_usage(f"import-csv: {exc}")
    problems = model.validate(instance)
    if problems:
        for p in problems:
            print(f"error: imported instance invalid: {p}", file=sys.stderr)
        return EXIT_INVALID
    model.save_instance(instance, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Benchmark


def _bench_one(job):
    instance_path, token, eps, backend, time_mode = job
    instance = model.load_instance(instance_path)
    config = algorithms.parse_algorithm(token, eps=eps)
    solution = algorithms.solve(instance, config, backend=backend)
    problems = verify_solution(instance, solution)
    if problems:
        return {"error": f"{instance_path} / {token}: {problems[0]}"}
    lb = bounds.lower_bound(instance).value
    if solution.failed or lb == 0:
        deviation = ""
    else:
        deviation = repr(100.0 * (solution.nodes_used - lb) / lb)
    time_ms = 0.0 if time_mode == "zero" else solution.wall_time_ms
    return {
        "instance": instance.name,
        "algorithm": token,
        "nodes": solution.nodes_used,
        "lb": lb,
        "deviation_pct": deviation,
        "time_ms": repr(float(time_ms)),
        "seed": "" if instance.seed is None else instance.seed,
        "failed": "true" if solution.failed else "false",
    }


def run_bench(instance_paths: list[str], tokens: list[str], out_path: str,
              jobs: int = 1, eps: float = 1.0, backend: str | None = None,
              time_mode: str = "wall", summary_out=None) -> None:
    """One verified row per (instance, algorithm); rows in input order.

    Every solution is re-checked before its row is written; any verification
    failure aborts the run.  The summary groups rows by algorithm with mean
    deviation and mean time.
    """
    job_list = [
        (path, token, eps, backend, time_mode)
        for path in instance_paths
        for token in tokens
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bench_one, job_list))
    else:
        rows = [_bench_one(job) for job in job_list]
    for row in rows:
        if "error" in row:
            raise RuntimeError(f"solution failed verification: {row['error']}")
    with open(out_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(BENCH_HEADER)
        for row in rows:
            writer.writerow([row["instance"], row["algorithm"], row["nodes"], row["lb"],
                             row["deviation_pct"], row["time_ms"], row["seed"], row["failed"]])
    if summary_out is None:
        summary_out = sys.stdout
    by_algo: dict[str, list[dict]] = {}
    for row in rows:
        by_algo.setdefault(row["algorithm"], []).append(row)
    print("algorithm,instances,mean_deviation_pct,mean_time_ms", file=summary_out)
    for token in tokens:
        group = by_algo.get(token, [])
        devs = [float(r["deviation_pct"]) for r in group if r["deviation_pct"] != ""]
        times = [float(r["time_ms"]) for r in group]
        mean_dev = sum(devs) / len(devs) if devs else float("nan")
        mean_time = sum(times) / len(times) if times else float("nan")
        print(f"{token},{len(group)},{mean_dev:.4f},{mean_time:.3f}", file=summary_out)


def _cmd_bench(args) -> int:
    _parse_tokens(args.algos, args.eps)  # fail fast on bad tokens
    for path in args.instances:
        instance = _load_instance(path)
        _require_valid(instance, path)
    try:
        run_bench(args.instances, args.algos, args.out, jobs=args.jobs,
                  eps=args.eps, backend=args.backend, time_mode=args.time_mode)
    except RuntimeError as exc:
        raise _fail_invalid(str(exc))
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_backends(args) -> int:
    names = available_backends()
    for name in names:
        marker = " (default)" if name == DEFAULT_BACKEND else ""
        print(f"{name}{marker}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrapack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate an instance from a profile")
    p.add_argument("--profile", help="profile JSON (omit for the shipped default)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--apps", type=int, help="override the profile's application count")
    p.add_argument("--density", type=float, help="override the target affinity density")
    p.add_argument("--graph-class", choices=generator.GRAPH_CLASSES)
    p.add_argument("--epochs", type=int)
    p.add_argument("--temporal", choices=["none", "sinusoid"],
                   help="override the temporal demand shape")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="run one algorithm on an instance")
    p.add_argument("instance")
    p.add_argument("--algo", required=True)
    p.add_argument("--out", help="solution JSON path (default: stdout)")
    p.add_argument("--eps", type=float, default=1.0, help="weight for avgexp measures")
    p.add_argument("--backend", choices=["cython", "python"])
    p.add_argument("--time-mode", choices=["wall", "zero"], default="wall",
                   help="zero makes output byte-reproducible")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="check a solution against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("validate", help="check instance well-formedness")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("lb", help="print the node-count lower bound")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_lb)

    p = sub.add_parser("export-ilp", help="write the integer model in text form")
    p.add_argument("instance")
    p.add_argument("--nodes", type=int, help="candidate node count (default: first-fit count)")
    p.add_argument("--out")
    p.add_argument("--backend", choices=["cython", "python"])
    p.set_defaults(func=_cmd_export_ilp)

    p = sub.add_parser("oracle", help="exact optimum for tiny instances")
    p.add_argument("instance")
    p.add_argument("--limit", type=int, default=10, help="max total replicas")
    p.add_argument("--out", help="solution JSON path")
    p.add_argument("--time-mode", choices=["wall", "zero"], default="wall")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("import-csv", help="convert CSV app/affinity tables to instance JSON")
    p.add_argument("--apps-csv", required=True)
    p.add_argument("--affinity-csv", required=True)
    p.add_argument("--capacity", required=True, help="comma-separated, one entry per dimension")
    p.add_argument("--resource-types", type=int, required=True)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--name", default="csv-import")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_import_csv)

    p = sub.add_parser("bench", help="run an algorithm set over an instance set")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--algos", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--backend", choices=["cython", "python"])
    p.add_argument("--time-mode", choices=["wall", "zero"], default="wall",
                   help="zero makes the CSV byte-reproducible")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("backends", help="list available placement kernels")
    p.set_defaults(func=_cmd_backends)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
