"""Simulation harness - simulated providers and deterministic scenario runs."""

from qos_broker.simulation.generators import ConstantGenerator, DriftGenerator, UniformGenerator
from qos_broker.simulation.providers import SimProviderConfig, SimulatedProvider, spawn_provider
from qos_broker.simulation.scenario import Scenario, ScenarioRun, load_scenario, run_scenario

__all__ = [
    "ConstantGenerator",
    "DriftGenerator",
    "UniformGenerator",
    "SimProviderConfig",
    "SimulatedProvider",
    "spawn_provider",
    "Scenario",
    "ScenarioRun",
    "load_scenario",
    "run_scenario",
]
