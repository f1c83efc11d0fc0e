"""
GA routes against exhaustive search
===================================

On small graphs the cheapest path can be found exactly. Here the GA is run
on random ten-node deployments and its answer compared with the exact one.
"""

import math
import random

import numpy as np

from uwasn_sim import GaConfig, ScenarioConfig
from uwasn_sim.ga import Topology, evolve, oracle_best_path, path_cost

rng = random.Random(0)
ga = GaConfig()
config = ScenarioConfig(num_nodes=10, num_sources=1)


def random_network(n=10, side=300.0):
    while True:
        pos = [(side / 2, side / 2, 0.0)] + [tuple(rng.uniform(0, side) for _ in range(3))
                                             for _ in range(n - 1)]
        energy = [math.inf] + [rng.uniform(5, 100) for _ in range(n - 1)]
        topo = Topology(config, pos, energy, [True] * n, 0)
        if topo.reachable(1):
            return topo


gaps = []
for trial in range(20):
    topo = random_network()
    exact = oracle_best_path(1, 0, topo, ga)
    history = []
    found = evolve(1, 0, topo, ga, random.Random(trial), history=history)
    gaps.append(path_cost(found, topo, ga) - path_cost(exact, topo, ga))
    if trial < 3:
        print(f"trial {trial}: ga {found} exact {exact} after {len(history)} generations")

gaps = np.array(gaps)
print(f"\nexact match in {np.sum(gaps < 1e-9)}/{len(gaps)} trials, worst gap {gaps.max():.4f}")
