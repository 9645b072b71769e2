"""Command-line entry point: ``boa-nurse {gen,validate,solve,oracle,bench}``.

Exit codes: 0 ok, 2 usage error, 3 invalid instance, 4 oracle search space
too large, 5 input file missing or unreadable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .engine import Mode, RunConfig, run
from .generator import SUITES, GeneratorSpec, generate, write_suite
from .instance import Instance, InstanceError, dumps_instance, instance_from_dict, validate
from .oracle import SEARCH_LIMIT, SearchSpaceTooLarge, brute_force_optimum, search_space
from .rules import ContributionWeights

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_GUARD, EXIT_IO = 0, 2, 3, 4, 5
SUITE_ENV = "BOA_NURSE_SUITE"
CENSORED_COST = 255.0
MODE_ORDER = {m.value: n for n, m in enumerate(Mode)}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def load(path: str, check: bool = True) -> Instance:
    text = _read_text(path)
    try:
        instance = instance_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: not valid JSON ({exc})", EXIT_INVALID) from None
    except (InstanceError, TypeError, KeyError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from None
    if check:
        problems = validate(instance)
        if problems:
            raise CliError(f"{path}: invalid instance\n  " + "\n  ".join(problems), EXIT_INVALID)
    return instance


def _pair(text: str) -> tuple[int, int]:
    parts = [int(v) for v in text.split(",")]
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'lo,hi' or a single integer")
    return parts[0], parts[1]


def _weights(text: str) -> ContributionWeights:
    try:
        return ContributionWeights.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_solver_flags(p: argparse.ArgumentParser, mode_default: str | None = "op") -> None:
    if mode_default is not None:
        p.add_argument("--mode", choices=[m.value for m in Mode], default=mode_default)
    p.add_argument("--generations", type=int, default=2000)
    p.add_argument("--population", type=int, default=140)
    p.add_argument("--elites", type=int, default=40)
    p.add_argument("--k", type=int, default=5, help="list length of the k-cheapest rule")
    p.add_argument("--weights", type=_weights, default=ContributionWeights(),
                   help="contribution weights wp,w1,w2,w3 (default 1,8,2,1)")
    p.add_argument("--wdemand", type=float, default=200.0)
    p.add_argument("--alpha", type=float, default=0.0, help="additive smoothing of learned counts")
    p.add_argument("--selection-size", type=int, default=None)
    p.add_argument("--parallel", action="store_true", help="decode offspring on several threads")


def _config(args, mode: str, seed: int) -> RunConfig:
    try:
        return RunConfig(mode=Mode(mode), generations=args.generations, population=args.population,
                         elites=args.elites, w_demand=args.wdemand, k_cheapest=args.k,
                         weights=args.weights, alpha=args.alpha, seed=seed,
                         selection_size=args.selection_size, parallel=args.parallel)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None


def _check_weights(args, instance: Instance) -> None:
    if len(args.weights.grades) < instance.grades:
        raise CliError(f"--weights needs {instance.grades} grade weights", EXIT_USAGE)


def cmd_gen(args) -> int:
    if args.suite:
        if not args.out:
            raise CliError("--suite needs --out DIR", EXIT_USAGE)
        for name in write_suite(args.suite, args.out):
            print(Path(args.out) / name)
        return EXIT_OK
    try:
        spec = GeneratorSpec(n_nurses=args.nurses, grades=args.grades, day_fraction=args.day_fraction,
                             D_range=args.D, N_range=args.N, demand_tightness=args.tightness,
                             cost_profile=args.cost_profile, seed=args.seed,
                             senior_share=args.senior_share, combined_nurses=args.combined,
                             B_range=args.B)
        instance = generate(spec)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    text = dumps_instance(instance, {"generator": spec.to_dict()})
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = load(args.instance, check=False)
    problems = validate(instance)
    if problems:
        print(f"{args.instance}: {len(problems)} problem(s)", file=sys.stderr)
        for problem in problems:
            print(f"  {problem}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{args.instance}: ok ({instance.n_nurses} nurses, {instance.n_patterns} patterns, "
          f"{instance.grades} grades)")
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = load(args.instance)
    _check_weights(args, instance)
    report = run(instance, _config(args, args.mode, args.seed))
    text = report.to_json(include_timing=args.timing) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.trace:
        Path(args.trace).write_text(report.trace_csv())
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = load(args.instance)
    try:
        opt = brute_force_optimum(instance, w_demand=args.wdemand, limit=args.limit)
    except SearchSpaceTooLarge as exc:
        print(f"{args.instance}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    print(json.dumps({
        "fitness": opt.fitness,
        "total_preference": opt.total_preference,
        "undercover_units": opt.undercover_units,
        "feasible": opt.undercover_units == 0,
        "assignment": [j + 1 for j in opt.assignment],
        "search_space": search_space(instance),
    }, indent=1))
    return EXIT_OK


def default_suite_dir() -> Path:
    env = os.environ.get(SUITE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("boa_nurse") / "suites" / "standard"))


def _suite_files(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise CliError(f"suite {path} does not exist", EXIT_IO)
    files = sorted(path.glob("*.json"))
    if not files:
        raise CliError(f"suite {path} contains no instance files", EXIT_IO)
    return files


def _bench_cell(job):
    path, instance, config = job
    report = run(instance, config)
    roster = report.best_roster
    return path, config.mode.value, config.seed, roster.fitness, roster.feasible, report.wall_time


def summarize(fitnesses, feasible, optimum=None, censor=CENSORED_COST) -> dict:
    """One table row: best, censored mean and the infeasible / optimal / within-3 counts."""
    fitnesses = np.asarray(fitnesses, dtype=float)
    feasible = np.asarray(feasible, dtype=bool)
    censored = np.where(feasible, fitnesses, censor)
    row = {
        "runs": len(fitnesses),
        "best": float(fitnesses[feasible].min()) if feasible.any() else None,
        "mean": float(censored.mean()),
        "inf": int((~feasible).sum()),
        "opt_hits": None,
        "within3": None,
    }
    if optimum is not None:
        row["opt_hits"] = int((fitnesses <= optimum).sum())
        row["within3"] = int((fitnesses <= optimum + 3).sum())
    return row


def cmd_bench(args) -> int:
    suite = Path(args.suite) if args.suite else default_suite_dir()
    files = _suite_files(suite)
    modes = [m.strip() for m in args.modes.split(",")]
    bad = [m for m in modes if m not in MODE_ORDER]
    if bad:
        raise CliError(f"unknown modes {bad}", EXIT_USAGE)
    instances = {str(f): load(str(f)) for f in files}
    for instance in instances.values():
        _check_weights(args, instance)

    optima = {}
    for path, instance in instances.items():
        if search_space(instance) <= args.oracle_limit:
            opt = brute_force_optimum(instance, w_demand=args.wdemand, limit=args.oracle_limit)
            optima[path] = opt.fitness

    jobs = [(path, instances[path], _config(args, mode, seed))
            for path in instances for mode in modes for seed in range(args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_bench_cell, jobs))
    else:
        results = [_bench_cell(job) for job in jobs]

    cells: dict[tuple[str, str], list] = {}
    for path, mode, seed, fit, ok, wall in results:
        cells.setdefault((path, mode), []).append((seed, fit, ok, wall))

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["instance", "mode", "runs", "best", "mean", "inf", "opt_hits", "within3", "optimum"]
    if args.timing:
        header.append("wall_time")
    writer.writerow(header)
    for path, mode in sorted(cells, key=lambda key: (Path(key[0]).stem, MODE_ORDER[key[1]])):
        runs = sorted(cells[(path, mode)])
        row = summarize([r[1] for r in runs], [r[2] for r in runs], optima.get(path), args.censor)
        optimum = optima.get(path)
        line = [Path(path).stem, mode, row["runs"], _fmt(row["best"]), _fmt(row["mean"]), row["inf"],
                _fmt(row["opt_hits"]), _fmt(row["within3"]),
                _fmt(optimum)]
        if args.timing:
            line.append(f"{sum(r[3] for r in runs):.3f}")
        writer.writerow(line)
    if args.out:
        Path(args.out).write_text(out.getvalue())
    else:
        sys.stdout.write(out.getvalue())
    return EXIT_OK


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return f"{value:.2f}" if isinstance(value, float) else str(value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boa-nurse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic instance (or a named suite)")
    p.add_argument("--nurses", type=int, default=30)
    p.add_argument("--grades", type=int, default=3)
    p.add_argument("--day-fraction", type=float, default=0.6)
    p.add_argument("--D", type=_pair, default=(4, 5), help="day shifts per week, 'lo,hi'")
    p.add_argument("--N", type=_pair, default=(3, 4), help="night shifts per week, 'lo,hi'")
    p.add_argument("--B", type=_pair, default=(4, 5), help="shifts per week for combined nurses")
    p.add_argument("--combined", type=int, default=0, help="number of nurses allowed combined patterns")
    p.add_argument("--tightness", type=float, default=0.8)
    p.add_argument("--senior-share", type=float, default=0.5)
    p.add_argument("--cost-profile", choices=["mixture", "uniform", "zero"], default="mixture")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", choices=sorted(SUITES), help="write a whole named suite to --out DIR")
    p.add_argument("--out", help="output file (directory with --suite); stdout if omitted")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check an instance file ('-' reads stdin)")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="run the solver on one instance and print a JSON report")
    p.add_argument("instance")
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--trace", help="write the per-generation best fitness as CSV")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exhaustive optimum of a tiny instance")
    p.add_argument("instance")
    p.add_argument("--wdemand", type=float, default=200.0)
    p.add_argument("--limit", type=int, default=SEARCH_LIMIT)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="sweep seeds and modes over a suite, print a CSV summary")
    p.add_argument("suite", nargs="?", help=f"directory of instances (default: ${SUITE_ENV} or the bundled suite)")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--modes", default="rd,cp,op")
    _add_solver_flags(p, mode_default=None)
    p.add_argument("--oracle-limit", type=int, default=10**6,
                   help="compute the exhaustive optimum when the search space is at most this large")
    p.add_argument("--censor", type=float, default=CENSORED_COST)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"boa-nurse: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
