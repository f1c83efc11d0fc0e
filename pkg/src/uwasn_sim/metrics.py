"""Per-round and per-run statistics and the two CSV output schemas."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

ROUND_SERIES_HEADER = ("protocol", "seed", "round", "pdr_cum", "delay_mean_s",
                       "residual_total_j", "alive_nodes")
SWEEP_HEADER = ("protocol", "seed", "num_nodes", "pdr", "delay_mean_s", "lifetime_round")


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    generated: int
    delivered: int
    delay_samples: tuple[float, ...]
    residual_total: float
    alive_nodes: int
    dropped: int = 0

    def __post_init__(self):
        if self.delivered > self.generated:
            raise ValueError("delivered exceeds generated")
        if len(self.delay_samples) != self.delivered:
            raise ValueError("need exactly one delay sample per delivered packet")


@dataclass(frozen=True)
class RunSummary:
    protocol: str
    seed: int
    num_nodes: int
    pdr: float
    mean_delay: float | None
    lifetime_round: int | None
    final_residual: float = math.nan


def pdr(delivered: int, generated: int) -> float:
    if generated < 0 or delivered < 0:
        raise ValueError("counts must be non-negative")
    return delivered / generated if generated else 0.0


def network_lifetime(alive_counts: Sequence[int], total_sensors: int) -> int | None:
    """First round (1-based) in which any sensor is dead, or None."""
    if not alive_counts:
        raise ValueError("empty alive-count series")
    for index, alive in enumerate(alive_counts, start=1):
        if alive < total_sensors:
            return index
    return None


def mean_delay(metrics: Iterable[RoundMetrics]) -> float | None:
    samples = [d for m in metrics for d in m.delay_samples]
    return math.fsum(samples) / len(samples) if samples else None


def summarize(protocol: str, seed: int, num_nodes: int,
              metrics: Sequence[RoundMetrics]) -> RunSummary:
    generated = sum(m.generated for m in metrics)
    delivered = sum(m.delivered for m in metrics)
    lifetime = network_lifetime([m.alive_nodes for m in metrics], num_nodes - 1) if metrics else None
    return RunSummary(
        protocol=protocol,
        seed=seed,
        num_nodes=num_nodes,
        pdr=pdr(delivered, generated),
        mean_delay=mean_delay(metrics),
        lifetime_round=lifetime,
        final_residual=metrics[-1].residual_total if metrics else math.nan,
    )


def _f(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def _open_for_write(path):
    path = Path(path)
    try:
        return path.open("w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_round_series(metrics: Sequence[RoundMetrics], path, protocol: str, seed: int) -> Path:
    """One row per round with cumulative PDR and cumulative mean delay.

    The delay column is left empty until the first delivery.
    """
    generated = delivered = 0
    delay_sum = 0.0
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROUND_SERIES_HEADER)
        for m in sorted(metrics, key=lambda m: m.round):
            generated += m.generated
            delivered += m.delivered
            delay_sum += math.fsum(m.delay_samples)
            writer.writerow([
                protocol, seed, m.round,
                _f(pdr(delivered, generated)),
                _f(delay_sum / delivered if delivered else None),
                _f(m.residual_total),
                m.alive_nodes,
            ])
    return Path(path)


def write_sweep(summaries: Iterable[RunSummary], path) -> Path:
    rows = sorted(summaries, key=lambda s: (s.protocol, s.num_nodes, s.seed))
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for s in rows:
            writer.writerow([
                s.protocol, s.seed, s.num_nodes, _f(s.pdr), _f(s.mean_delay),
                "" if s.lifetime_round is None else s.lifetime_round,
            ])
    return Path(path)
