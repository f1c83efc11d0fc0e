"""Discrete-event simulator for underwater acoustic sensor networks with
GA-planned energy-efficient routing (EER) and the VBF and DBR baselines."""
from .config import ChannelMode, GaConfig, PowerLevel, Region, ScenarioConfig, parse_config
from .engine import RngStream, Simulation
from .experiment import SweepSpec, deploy_for, make_protocol, run_simulation, run_sweep
from .ga import Topology, Unreachable, evolve, oracle_best_path
from .world import NetworkState, deploy

__all__ = [
    "ChannelMode", "GaConfig", "NetworkState", "PowerLevel", "Region", "RngStream",
    "ScenarioConfig", "Simulation", "SweepSpec", "Topology", "Unreachable", "deploy",
    "deploy_for", "evolve", "make_protocol", "oracle_best_path", "parse_config",
    "run_simulation", "run_sweep",
]

__version__ = "0.1.0"
