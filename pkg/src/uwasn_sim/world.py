"""Network state: deployment, mobility, power toggling and energy bookkeeping."""
from __future__ import annotations

import copy
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .channel import link_energy
from .config import PowerLevel, ScenarioConfig

SINK_ID = 0


@dataclass(slots=True)
class Position:
    x: float
    y: float
    z: float  # depth, positive downward

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(slots=True)
class SensorNode:
    id: int
    pos: Position
    energy: float
    power_level: PowerLevel = PowerLevel.HIGH
    is_sink: bool = False
    is_source: bool = False
    alive: bool = True

    @property
    def depth(self) -> float:
        return self.pos.z


def debit_energy(node: SensorNode, amount: float, alive_threshold: float) -> float:
    """Remove up to ``amount`` joules from ``node`` and return what was removed.

    Saturates at zero. The sink has unlimited energy and is never debited.
    """
    if amount < 0:
        raise ValueError("cannot debit a negative amount")
    if node.is_sink:
        return 0.0
    taken = min(node.energy, amount)
    node.energy -= taken
    node.alive = node.energy >= alive_threshold
    return taken


class NetworkState:
    """Mutable node population for one simulation instance.

    ``debited`` keeps the per-node sum of all energy removed so the energy
    ledger can be audited against the initial budget.
    """

    def __init__(self, config: ScenarioConfig, nodes: list[SensorNode]):
        self.config = config
        self.nodes = nodes
        sinks = [n.id for n in nodes if n.is_sink]
        if len(sinks) != 1:
            raise ValueError(f"expected exactly one sink, found {len(sinks)}")
        if [n.id for n in nodes] != list(range(len(nodes))):
            raise ValueError("node ids must be dense and ordered 0..n-1")
        self.sink_id = sinks[0]
        self.alive_threshold = link_energy(PowerLevel.LOW, config)[0]
        self.debited = [0.0] * len(nodes)
        self._positions: np.ndarray | None = None
        self._distances: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def sink(self) -> SensorNode:
        return self.nodes[self.sink_id]

    @property
    def source_ids(self) -> list[int]:
        return [n.id for n in self.nodes if n.is_source]

    @property
    def sensor_ids(self) -> list[int]:
        return [n.id for n in self.nodes if not n.is_sink]

    def debit(self, node_id: int, amount: float) -> float:
        taken = debit_energy(self.nodes[node_id], amount, self.alive_threshold)
        self.debited[node_id] += taken
        return taken

    def residual_total(self) -> float:
        return math.fsum(n.energy for n in self.nodes if not n.is_sink)

    def alive_count(self) -> int:
        return sum(1 for n in self.nodes if not n.is_sink and n.alive)

    def positions(self) -> np.ndarray:
        """(n, 3) array of positions, cached until the next move."""
        if self._positions is None:
            self._positions = np.array([n.pos.as_tuple() for n in self.nodes], dtype=float)
        return self._positions

    def distances(self) -> np.ndarray:
        if self._distances is None:
            p = self.positions()
            diff = p[:, None, :] - p[None, :, :]
            self._distances = np.sqrt((diff * diff).sum(axis=-1))
        return self._distances

    def invalidate(self) -> None:
        """Drop cached geometry; call after editing node positions by hand."""
        self._positions = None
        self._distances = None

    def copy(self) -> "NetworkState":
        return copy.deepcopy(self)

    def position_digest(self) -> str:
        """SHA-256 of the raw position array, for topology pairing checks."""
        return hashlib.sha256(self.positions().tobytes()).hexdigest()


def _clamp(value: float, hi: float) -> float:
    return min(max(value, 0.0), hi)


def deploy(config: ScenarioConfig, rng) -> NetworkState:
    """Scatter ``num_nodes - 1`` sensors uniformly and put the sink at the
    surface centre. The ``num_sources`` deepest sensors become sources."""
    region = config.region
    sink = SensorNode(
        id=SINK_ID,
        pos=Position(region.x_max / 2, region.y_max / 2, 0.0),
        energy=math.inf,
        is_sink=True,
    )
    nodes = [sink]
    for i in range(1, config.num_nodes):
        pos = Position(
            rng.uniform(0.0, region.x_max),
            rng.uniform(0.0, region.y_max),
            rng.uniform(0.0, region.z_max),
        )
        nodes.append(SensorNode(id=i, pos=pos, energy=config.initial_energy))
    deepest = sorted(nodes[1:], key=lambda n: (-n.pos.z, n.id))[: config.num_sources]
    for node in deepest:
        node.is_source = True
    return NetworkState(config, nodes)


def apply_mobility(state: NetworkState, rng) -> NetworkState:
    """Drift every sensor inside a horizontal disk plus a small vertical
    jitter, clamped to the region. Three draws per sensor, dead or alive,
    so the mobility stream stays aligned across protocols."""
    cfg = state.config
    region = cfg.region
    for node in state.nodes:
        if node.is_sink:
            continue
        theta = rng.uniform(0.0, 2 * math.pi)
        radius = cfg.drift_horizontal * math.sqrt(rng.random())
        dz = rng.uniform(-cfg.drift_vertical, cfg.drift_vertical)
        p = node.pos
        p.x = _clamp(p.x + radius * math.cos(theta), region.x_max)
        p.y = _clamp(p.y + radius * math.sin(theta), region.y_max)
        p.z = _clamp(p.z + dz, region.z_max)
    state.invalidate()
    return state


def toggle_power_levels(state: NetworkState, round_no: int) -> NetworkState:
    """Flip every sensor's power level on multiples of the toggle period."""
    if round_no < 1:
        raise ValueError("rounds are numbered from 1")
    if round_no % state.config.power_toggle_period == 0:
        for node in state.nodes:
            if not node.is_sink:
                node.power_level = node.power_level.flipped()
    return state
