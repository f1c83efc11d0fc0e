import math

import pytest

from uwasn_sim.config import ChannelMode, PowerLevel, ScenarioConfig
from uwasn_sim.ga import Topology
from uwasn_sim.world import NetworkState, Position, SensorNode


def build_state(coords, config=None, energies=None, sources=(1,), level=PowerLevel.HIGH):
    """Hand-placed network; ``coords[0]`` is the sink."""
    n = len(coords)
    if config is None:
        config = ScenarioConfig(num_nodes=n, num_sources=len(sources))
    nodes = []
    for i, (x, y, z) in enumerate(coords):
        energy = math.inf if i == 0 else (energies[i] if energies else config.initial_energy)
        nodes.append(SensorNode(id=i, pos=Position(float(x), float(y), float(z)), energy=energy,
                                power_level=level, is_sink=i == 0, is_source=i in sources))
    state = NetworkState(config, nodes)
    for node in nodes:
        if not node.is_sink:
            node.alive = node.energy >= state.alive_threshold
    return state


def still_config(num_nodes, num_sources=1, **overrides):
    """Deterministic channel, no drift: nothing random except the GA."""
    base = dict(num_nodes=num_nodes, num_sources=num_sources,
                channel_mode=ChannelMode.DETERMINISTIC,
                drift_horizontal=0.0, drift_vertical=0.0)
    base.update(overrides)
    return ScenarioConfig(**base)


def random_topology(rng, n, side=300.0, connected=False):
    """Random placement in a cube, redrawn until node 1 has a multi-hop choice
    (and, with ``connected``, until every node reaches the sink)."""
    while True:
        cfg = ScenarioConfig(num_nodes=n, num_sources=1, channel_mode=ChannelMode.DETERMINISTIC)
        pos = [(side / 2, side / 2, 0.0)] + [
            (rng.uniform(0, side), rng.uniform(0, side), rng.uniform(0, side)) for _ in range(n - 1)]
        energy = [math.inf] + [rng.uniform(1.0, 100.0) for _ in range(n - 1)]
        topo = Topology(cfg, pos, energy, [True] * n, 0)
        topo.positions = pos
        if not topo.reachable(1) or len(topo.neighbors[1]) < 2:
            continue
        if not connected or all(topo.reachable(u) for u in range(1, n)):
            return topo


def line_topology(points, energies=None, **overrides):
    n = len(points)
    cfg = ScenarioConfig(num_nodes=n, num_sources=1, **overrides)
    energy = [math.inf] + list(energies or [100.0] * (n - 1))
    topo = Topology(cfg, points, energy, [True] * n, 0)
    topo.positions = points
    return topo


@pytest.fixture
def defaults():
    return ScenarioConfig()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
