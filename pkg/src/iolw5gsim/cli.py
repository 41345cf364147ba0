"""Command-line interface: validate, run and sweep scenarios.

Exit codes: 0 ok, 2 validation failure, 3 I/O error, 4 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from importlib import resources
from pathlib import Path

from .config import ScenarioError, load_scenario
from .report import build_report, write_report
from .scenario import run as run_scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_USAGE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # keep exit codes stable
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def default_scenario_path() -> Path:
    return Path(str(resources.files("iolw5gsim").joinpath("data/default.scenario")))


def _read_config(path: str) -> bytes:
    return Path(path).read_bytes()


def _load(path: str):
    config_bytes = _read_config(path)
    scenario = load_scenario(config_bytes.decode("utf-8"))
    return scenario, config_bytes


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        _load(args.config)
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}:{d}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{args.config}: ok")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario, config_bytes = _load(args.config)
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}:{d}", file=sys.stderr)
        return EXIT_INVALID
    result = run_scenario(scenario, args.seed)
    report = build_report(result, scenario, config_bytes, deterministic=args.deterministic)
    written = write_report(report, result, Path(args.out), fmt=args.format)
    summary = {
        "end_to_end_mean_us": result.end_to_end.mean_us if result.end_to_end.count else None,
        "p99_us": result.end_to_end.percentile(99) if result.end_to_end.count else None,
        "losses": result.losses,
        "files": [str(p) for p in written],
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.seeds < 1:
        print("sweep: --seeds must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        scenario, config_bytes = _load(args.config)
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}:{d}", file=sys.stderr)
        return EXIT_INVALID
    seeds = [args.seed + i for i in range(args.seeds)]
    if args.parallel > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            per_seed = list(pool.map(partial(run_scenario, scenario), seeds))
    else:
        per_seed = [run_scenario(scenario, s) for s in seeds]
    per_seed.sort(key=lambda r: r.seeds)
    merged = per_seed[0]
    for r in per_seed[1:]:
        merged = merged.merge(r)
    out_dir = Path(args.out)
    report = build_report(merged, scenario, config_bytes, deterministic=args.deterministic)
    write_report(report, merged, out_dir, fmt=args.format)
    per_seed_summary = {
        str(r.seeds[0]): {
            "toggles": r.toggles,
            "losses": r.losses,
            "mean_us": r.end_to_end.mean_us if r.end_to_end.count else None,
        }
        for r in per_seed
    }
    (out_dir / "per_seed.json").write_text(
        json.dumps(per_seed_summary, sort_keys=True, indent=2) + "\n"
    )
    print(json.dumps({"seeds": seeds, "toggles": merged.toggles}, sort_keys=True))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iolw5gsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    for name, func in (("run", _cmd_run), ("sweep", _cmd_sweep)):
        p = sub.add_parser(name, help=f"{name} a scenario")
        p.add_argument("config")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--out", default="out")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument(
            "--deterministic", action="store_true",
            help="suppress timestamps so reports are byte-identical on replay",
        )
        if name == "sweep":
            p.add_argument("--seeds", type=int, default=1, help="number of seeds")
            p.add_argument("--parallel", type=int, default=1)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except OSError as exc:
        print(f"iolw5gsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
