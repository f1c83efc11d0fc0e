"""Single runs and protocol x density x seed sweeps."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .config import ScenarioConfig
from .engine import RngStream, Simulation
from .ga import EerProtocol
from .metrics import RoundMetrics, RunSummary, summarize
from .routing import DbrProtocol, Protocol, VbfProtocol
from .world import NetworkState, deploy

PROTOCOLS = {"vbf": VbfProtocol, "dbr": DbrProtocol, "eer": EerProtocol}


def make_protocol(name: str) -> Protocol:
    try:
        return PROTOCOLS[name]()
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}") from None


def deploy_for(config: ScenarioConfig, seed: int) -> NetworkState:
    """Deployment depends only on (config, seed), never on the protocol."""
    return deploy(config, RngStream(seed, "deployment"))


@dataclass
class RunResult:
    summary: RunSummary
    metrics: list[RoundMetrics]
    simulation: Simulation


def run_simulation(config: ScenarioConfig, protocol: str, seed: int,
                   rounds: int | None = None, record_trace: bool = False) -> RunResult:
    state = deploy_for(config, seed)
    sim = Simulation(state, make_protocol(protocol), seed=seed, record_trace=record_trace)
    metrics = sim.run(config.rounds if rounds is None else rounds)
    summary = summarize(protocol, seed, config.num_nodes, metrics)
    return RunResult(summary, metrics, sim)


def parse_node_range(text: str) -> list[int]:
    """``START:STOP:STEP`` with STOP included when it lies on the grid."""
    try:
        start, stop, step = (int(part) for part in text.split(":"))
    except ValueError:
        raise ValueError(f"node range must look like START:STOP:STEP, got {text!r}") from None
    if step < 1 or stop < start:
        raise ValueError(f"empty node range {text!r}")
    counts = list(range(start, stop + 1, step))
    if counts[0] < 2:
        raise ValueError("every node count must be at least 2")
    return counts


def sized_config(base: ScenarioConfig, num_nodes: int) -> ScenarioConfig:
    """``base`` resized to ``num_nodes``; the source count shrinks if the
    network is too small to hold it."""
    return base.replace(num_nodes=num_nodes,
                        num_sources=min(base.num_sources, num_nodes - 1))


@dataclass(frozen=True)
class SweepSpec:
    protocols: tuple[str, ...]
    node_counts: tuple[int, ...]
    seeds: int
    base_config: ScenarioConfig

    def __post_init__(self):
        if not self.protocols:
            raise ValueError("no protocols selected")
        for name in self.protocols:
            if name not in PROTOCOLS:
                raise ValueError(f"unknown protocol {name!r}")
        if not self.node_counts or min(self.node_counts) < 2:
            raise ValueError("node counts must be non-empty and at least 2")
        if self.seeds < 1:
            raise ValueError("need at least one seed")

    def cells(self) -> list[tuple[str, int, int]]:
        return [(p, n, s)
                for p in sorted(set(self.protocols))
                for n in self.node_counts
                for s in range(1, self.seeds + 1)]


class CellError(RuntimeError):
    pass


def run_cell(base: ScenarioConfig, protocol: str, num_nodes: int, seed: int) -> RunSummary:
    try:
        return run_simulation(sized_config(base, num_nodes), protocol, seed).summary
    except Exception as exc:
        raise CellError(f"cell protocol={protocol} num_nodes={num_nodes} seed={seed} failed: {exc}") from exc


def _run_cell_args(args):
    return run_cell(*args)


def default_workers() -> int:
    return max(1, int(os.environ.get("UWASN_SIM_WORKERS", "1")))


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[RunSummary]:
    """Run every cell; results come back in canonical order regardless of
    completion order."""
    workers = default_workers() if workers is None else workers
    jobs = [(spec.base_config, p, n, s) for p, n, s in spec.cells()]
    if workers <= 1:
        results = [_run_cell_args(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_args, jobs))
    return sorted(results, key=lambda s: (s.protocol, s.num_nodes, s.seed))
