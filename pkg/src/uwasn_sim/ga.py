"""Genetic-algorithm route planning (EER) and an exhaustive reference search.

Chromosomes are plain tuples of node ids, ``(source, ..., sink)``. All
operators work against a :class:`Topology`, an immutable snapshot of the
network taken when a packet is generated.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Sequence

from .channel import SOUND_SPEED, lowest_sufficient_level
from .config import GaConfig, PowerLevel, ScenarioConfig
from .routing import Protocol, forward

Chromosome = tuple[int, ...]

SINK_BIAS = 0.7
WALK_RETRIES = 50
MUTATION_RETRIES = 20
COST_TOLERANCE = 1e-12


class Unreachable(Exception):
    def __init__(self, source: int):
        self.source = source
        super().__init__(f"no path from node {source} to the sink")


@dataclass(frozen=True)
class Fitness:
    cost: float
    fitness: float

    @classmethod
    def from_cost(cls, cost: float) -> "Fitness":
        return cls(cost, 1.0 / (1.0 + cost))


class Topology:
    """Connectivity and energy snapshot used for planning.

    Links exist between live nodes (and the sink) no further apart than the
    high-power range. Each link costs the transmit energy of the cheapest
    power level that reaches across it.
    """

    def __init__(self, config: ScenarioConfig, positions: Sequence[Sequence[float]],
                 energy: Sequence[float], alive: Sequence[bool], sink: int):
        self.config = config
        self.n = len(positions)
        self.sink = sink
        self.energy = list(energy)
        self.alive = [bool(a) or i == sink for i, a in enumerate(alive)]
        duration = config.tx_duration
        level_cost = {lvl: config.power_for(lvl) * duration for lvl in PowerLevel}
        self.min_link_cost = level_cost[PowerLevel.LOW]
        pts = [tuple(map(float, p)) for p in positions]
        self.dist = [[math.dist(a, b) for b in pts] for a in pts]
        self.sink_dist = [row[sink] for row in self.dist]
        self.link_cost = [[math.inf] * self.n for _ in range(self.n)]
        self.neighbors: list[list[int]] = [[] for _ in range(self.n)]
        for u in range(self.n):
            if not self.alive[u] or u == sink:
                continue
            for v in range(self.n):
                if v == u or not self.alive[v]:
                    continue
                level = lowest_sufficient_level(self.dist[u][v], config)
                if level is not None:
                    self.link_cost[u][v] = level_cost[level]
                    self.neighbors[u].append(v)

    @classmethod
    def from_state(cls, state) -> "Topology":
        return cls(
            state.config,
            [n.pos.as_tuple() for n in state.nodes],
            [n.energy for n in state.nodes],
            [n.alive for n in state.nodes],
            state.sink_id,
        )

    def reachable(self, source: int) -> bool:
        seen = {source}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if u == self.sink:
                return True
            for v in self.neighbors[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return False

    def shortest_hop_path(self, source: int) -> Chromosome | None:
        parent = {source: None}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if u == self.sink:
                path = []
                while u is not None:
                    path.append(u)
                    u = parent[u]
                return tuple(reversed(path))
            for v in self.neighbors[u]:
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        return None

    def is_valid(self, path: Sequence[int], source: int | None = None) -> bool:
        if len(path) < 2 or path[-1] != self.sink or len(set(path)) != len(path):
            return False
        if source is not None and path[0] != source:
            return False
        return all(math.isfinite(self.link_cost[u][v]) for u, v in zip(path, path[1:]))


def path_cost(path: Sequence[int], topo: Topology, ga: GaConfig) -> float:
    energy = 0.0
    for u, v in zip(path, path[1:]):
        energy += topo.link_cost[u][v]
    bottleneck = min(topo.energy[u] for u in path if u != topo.sink)
    return (ga.w_e * energy
            + ga.w_h * (len(path) - 1)
            + ga.w_b * topo.config.initial_energy / (ga.epsilon + bottleneck))


def evaluate(chromosome: Sequence[int], topo: Topology, ga: GaConfig) -> Fitness:
    if not topo.is_valid(chromosome):
        raise ValueError(f"invalid chromosome {tuple(chromosome)}")
    return Fitness.from_cost(path_cost(chromosome, topo, ga))


def _walk(topo: Topology, prefix: Sequence[int], rng) -> Chromosome | None:
    """Sink-biased random walk extending ``prefix``; None if it strands."""
    path = list(prefix)
    visited = set(path)
    current = path[-1]
    sink_dist = topo.sink_dist
    for _ in range(2 * topo.n):
        options = [v for v in topo.neighbors[current] if v not in visited]
        if not options:
            return None
        if rng.random() < SINK_BIAS:
            current = min(options, key=lambda v: (sink_dist[v], v))
        else:
            current = options[rng.randrange(len(options))]
        path.append(current)
        if current == topo.sink:
            return tuple(path)
        visited.add(current)
    return None


def init_population(source: int, sink: int, topo: Topology, n: int, rng) -> list[Chromosome]:
    if source == sink:
        raise ValueError("source and sink must differ")
    if sink != topo.sink:
        raise ValueError("sink does not match the topology")
    if not topo.alive[source] or not topo.reachable(source):
        raise Unreachable(source)
    population: list[Chromosome | None] = []
    for _ in range(n):
        for _ in range(WALK_RETRIES + 1):
            path = _walk(topo, (source,), rng)
            if path is not None:
                break
        population.append(path)
    successes = [p for p in population if p is not None]
    if not successes:
        # every walk stranded although a path exists; seed with the hop-shortest one
        successes = [topo.shortest_hop_path(source)]
    return [p if p is not None else successes[rng.randrange(len(successes))] for p in population]


def select_parents(population: Sequence[Chromosome], fitnesses: Sequence[float],
                   mode: str = "top_two", rng=None,
                   tournament_size: int = 3) -> tuple[Chromosome, Chromosome]:
    """Pick two parents. ``top_two`` takes the two fittest (ties go to the
    lexicographically smaller path); ``tournament`` runs two independent
    tournaments of ``tournament_size`` entrants."""
    if len(population) < 2:
        raise ValueError("need at least two chromosomes")

    def rank(i):
        return (-fitnesses[i], population[i])

    if mode == "top_two":
        first, second = sorted(range(len(population)), key=rank)[:2]
        return population[first], population[second]
    if mode == "tournament":
        k = min(tournament_size, len(population))
        picks = [min(rng.sample(range(len(population)), k), key=rank) for _ in range(2)]
        return population[picks[0]], population[picks[1]]
    raise ValueError(f"unknown selection mode {mode!r}")


def remove_cycles(path: Sequence[int]) -> Chromosome:
    """Cut out the loop between the first and last visit of any repeated node."""
    path = list(path)
    while True:
        seen: dict[int, int] = {}
        for i, node in enumerate(path):
            if node in seen:
                first = seen[node]
                last = len(path) - 1 - path[::-1].index(node)
                path = path[:first] + path[last:]
                break
            seen[node] = i
        else:
            return tuple(path)


def crossover(parent_a: Chromosome, parent_b: Chromosome, rng) -> tuple[Chromosome, Chromosome]:
    """Swap suffixes at a random interior node shared by both parents."""
    common = sorted(set(parent_a[1:-1]).intersection(parent_b[1:-1]))
    if not common:
        return parent_a, parent_b
    cut = common[rng.randrange(len(common))]
    ia, ib = parent_a.index(cut), parent_b.index(cut)
    child_a = remove_cycles(parent_a[:ia] + parent_b[ib:])
    child_b = remove_cycles(parent_b[:ib] + parent_a[ia:])
    return child_a, child_b


def mutate(chromosome: Chromosome, topo: Topology, rate: float, rng) -> Chromosome:
    """With probability ``rate``, cut after a random interior node and regrow."""
    if rng.random() >= rate or len(chromosome) < 3:
        return chromosome
    keep = rng.randrange(1, len(chromosome) - 1)
    prefix = chromosome[: keep + 1]
    for _ in range(MUTATION_RETRIES):
        grown = _walk(topo, prefix, rng)
        if grown is not None:
            return grown
    return chromosome


def evolve(source: int, sink: int, topo: Topology, ga: GaConfig, rng,
           history: list | None = None) -> Chromosome:
    """Run the generational loop and return the cheapest path seen.

    When ``history`` is given, one ``(generation, best_cost, mean_cost)``
    tuple is appended per generation; ``best_cost`` is the best so far.
    """
    n = ga.population_size
    cache: dict[Chromosome, float] = {}

    def cost_of(path: Chromosome) -> float:
        cost = cache.get(path)
        if cost is None:
            cost = cache[path] = path_cost(path, topo, ga)
        return cost

    population = init_population(source, sink, topo, n, rng)
    costs = [cost_of(p) for p in population]
    best_cost, best = min(zip(costs, population))
    generation = 1
    if history is not None:
        history.append((generation, best_cost, math.fsum(costs) / n))
    if topo.neighbors[source] == [sink]:
        # the direct link is the only simple path
        return best

    stall = 0
    while generation < ga.max_generations and stall < ga.convergence_window:
        fitnesses = [1.0 / (1.0 + c) for c in costs]
        ranked = sorted(range(n), key=lambda i: (costs[i], population[i]))
        offspring = [population[ranked[0]], population[ranked[1]]]
        parents = None
        while len(offspring) < n:
            if parents is None or ga.selection_mode != "top_two":
                # top-two selection is deterministic, so reuse it within a generation
                parents = select_parents(population, fitnesses, ga.selection_mode, rng,
                                         ga.tournament_size)
            for child in crossover(*parents, rng):
                if len(offspring) < n:
                    offspring.append(mutate(child, topo, ga.mutation_rate, rng))
        population = offspring
        costs = [cost_of(p) for p in population]
        generation += 1
        gen_cost, gen_best = min(zip(costs, population))
        if gen_cost < best_cost - COST_TOLERANCE:
            best_cost, best = gen_cost, gen_best
            stall = 0
        else:
            stall += 1
        if history is not None:
            history.append((generation, best_cost, math.fsum(costs) / n))
    return best


def oracle_best_path(source: int, sink: int, topo: Topology, ga: GaConfig,
                     max_nodes: int = 12) -> Chromosome:
    """Exact minimum-cost simple path by depth-first branch and bound.

    Neighbours are expanded in ascending id order, so the first optimum
    found is also the lexicographically smallest. A branch is cut only when
    its cost lower bound already exceeds the incumbent, which keeps the
    search exact: extending a path never lowers any cost term.
    """
    if topo.n > max_nodes:
        raise ValueError(f"exhaustive search limited to {max_nodes} nodes")
    if source == sink or sink != topo.sink:
        raise ValueError("bad source/sink pair")
    if not topo.alive[source] or not topo.reachable(source):
        raise Unreachable(source)

    w_e, w_h, w_b = ga.w_e, ga.w_h, ga.w_b
    budget = topo.config.initial_energy
    step_floor = w_e * topo.min_link_cost + w_h
    best: list = [math.inf, None]

    def bottleneck_term(residual: float) -> float:
        return w_b * budget / (ga.epsilon + residual)

    def dfs(path: list[int], on_path: set[int], energy: float, residual: float):
        u = path[-1]
        partial = w_e * energy + w_h * (len(path) - 1) + bottleneck_term(residual)
        if partial + step_floor > best[0] + COST_TOLERANCE * max(1.0, best[0]):
            return
        for v in topo.neighbors[u]:
            if v in on_path:
                continue
            link = topo.link_cost[u][v]
            if v == sink:
                cost = w_e * (energy + link) + w_h * len(path) + bottleneck_term(residual)
                if cost < best[0] - COST_TOLERANCE * max(1.0, abs(cost)):
                    best[0], best[1] = cost, tuple(path) + (v,)
                continue
            path.append(v)
            on_path.add(v)
            dfs(path, on_path, energy + link, min(residual, topo.energy[v]))
            path.pop()
            on_path.discard(v)

    dfs([source], {source}, 0.0, topo.energy[source])
    return best[1]


class EerProtocol(Protocol):
    """Source-routed delivery along a GA-planned path.

    Every hop uses the cheapest power level that spans it and retries a
    lost packet up to ``max_retries`` times after an acknowledgement
    timeout of one packet time plus a round trip.
    """

    name = "eer"
    max_retries = 3

    def __init__(self):
        self._topology: Topology | None = None
        self._tries: dict[tuple[int, int], int] = {}
        self.routes: list[tuple[int, Chromosome]] = []

    def begin_round(self, sim) -> None:
        self._topology = None
        self._tries.clear()

    def originate(self, sim, packet):
        if self._topology is None:
            self._topology = Topology.from_state(sim.state)
        try:
            route = evolve(packet.source, sim.state.sink_id, self._topology, sim.config.ga, sim.rng_ga)
        except Unreachable:
            return None
        self.routes.append((sim.round, route))
        return replace(packet, route=route)

    def decide(self, node, packet, sim):
        return forward(0.0)

    def transmit(self, sim, node, packet) -> None:
        route = packet.route
        nxt = route[len(packet.hops)]
        d = sim.distance(node.id, nxt)
        level = lowest_sufficient_level(d, sim.config)
        if level is None or not sim.can_transmit(node.id, level):
            return
        key = (packet.id, node.id)
        tries = self._tries.get(key, 0) + 1
        self._tries[key] = tries
        if sim.unicast(node.id, nxt, packet, level):
            return
        if tries <= self.max_retries:
            sim.schedule_hold(node.id, packet, sim.config.tx_duration + 2 * d / SOUND_SPEED)
