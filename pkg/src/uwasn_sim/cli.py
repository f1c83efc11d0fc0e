"""Command line entry point: ``uwasn-sim {run,sweep,ga-trace,validate-config}``.

Exit status: 0 success, 1 usage or configuration error, 2 runtime error,
3 when ``ga-trace`` finds no route from the source to the sink.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .engine import RngStream
from .experiment import (PROTOCOLS, CellError, SweepSpec, default_workers, deploy_for,
                         parse_node_range, run_simulation, run_sweep)
from .ga import Topology, Unreachable, evolve
from .metrics import write_round_series, write_sweep

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_UNREACHABLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(path) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    try:
        return load_config(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except ConfigError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    config = _load(args.config)
    seed = config.seed if args.seed is None else args.seed
    rounds = config.rounds if args.rounds is None else args.rounds
    if rounds < 0:
        raise UsageError("--rounds must be non-negative")
    result = run_simulation(config, args.protocol, seed, rounds=rounds)
    target = _out_dir(args.out) / f"rounds_{args.protocol}_{seed}.csv"
    write_round_series(result.metrics, target, args.protocol, seed)
    print(target)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args.config)
    if args.rounds is not None:
        if args.rounds < 0:
            raise UsageError("--rounds must be non-negative")
        config = config.replace(rounds=args.rounds)
    try:
        protocols = tuple(p.strip() for p in args.protocols.split(",") if p.strip())
        spec = SweepSpec(protocols, tuple(parse_node_range(args.nodes)), args.seeds, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    workers = default_workers() if args.workers is None else args.workers
    summaries = run_sweep(spec, workers=workers)
    target = _out_dir(args.out) / "sweep.csv"
    write_sweep(summaries, target)
    print(target)
    return EXIT_OK


def ga_trace(config: ScenarioConfig, seed: int) -> list[tuple[int, float, float]]:
    """Evolve one route for the deepest source and return the per-generation
    ``(generation, best_cost, mean_cost)`` history."""
    state = deploy_for(config, seed)
    source = min(state.source_ids, key=lambda i: (-state.nodes[i].depth, i))
    history: list = []
    evolve(source, state.sink_id, Topology.from_state(state), config.ga,
           RngStream(seed, "ga"), history=history)
    return history


def cmd_ga_trace(args) -> int:
    config = _load(args.config)
    seed = config.seed if args.seed is None else args.seed
    try:
        history = ga_trace(config, seed)
    except Unreachable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    target = _out_dir(args.out) / f"ga_trace_{seed}.csv"
    try:
        with target.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("generation", "best_cost", "mean_cost"))
            for gen, best, mean in history:
                writer.writerow((gen, f"{best:.6f}", f"{mean:.6f}"))
    except OSError as exc:
        raise OSError(f"cannot write {target}: {exc.strerror or exc}") from exc
    print(target)
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load(args.config)
    print(f"ok: {config.num_nodes} nodes, {config.num_sources} sources, {config.rounds} rounds")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uwasn-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one protocol and write the round series")
    run.add_argument("--config")
    run.add_argument("--protocol", required=True, choices=sorted(PROTOCOLS))
    run.add_argument("--seed", type=int)
    run.add_argument("--rounds", type=int)
    run.add_argument("--out", default=".")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="protocol x node count x seed grid")
    sweep.add_argument("--config")
    sweep.add_argument("--protocols", default="vbf,dbr,eer")
    sweep.add_argument("--nodes", default="4:76:8", metavar="START:STOP:STEP")
    sweep.add_argument("--seeds", type=int, default=30)
    sweep.add_argument("--rounds", type=int)
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--out", default=".")
    sweep.set_defaults(func=cmd_sweep)

    trace = sub.add_parser("ga-trace", help="per-generation GA costs for the deepest source")
    trace.add_argument("--config")
    trace.add_argument("--seed", type=int)
    trace.add_argument("--out", default=".")
    trace.set_defaults(func=cmd_ga_trace)

    validate = sub.add_parser("validate-config", help="parse a config file and report errors")
    validate.add_argument("--config", required=True)
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CellError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
