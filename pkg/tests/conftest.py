"""Pytest configuration and fixtures for qos-broker tests."""

import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

import pytest
import structlog

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

ROOT = Path(__file__).parent.parent
DATA_DIR = ROOT / "data"
SCENARIO_DIR = ROOT / "scenarios"
GOLDEN_DIR = ROOT / "golden"

# Minima, weights and sensitivities of the worked example
EXAMPLE_PROFILE = {
    "minima": {"availability": 0.98, "response_time": 0.65, "reliability": 0.95, "throughput": 0.90},
    "weights": {"availability": 0.35, "response_time": 0.15, "reliability": 0.35, "throughput": 0.15},
    "sensitivities": {"availability": 1, "response_time": 1, "reliability": 1, "throughput": 1},
}

EXAMPLE_OFFERINGS = {
    "SP1": {"availability": 0.94, "response_time": 0.70, "reliability": 0.98, "throughput": 0.70},
    "SP2": {"availability": 0.98, "response_time": 0.60, "reliability": 0.97, "throughput": 0.65},
    "SP3": {"availability": 0.97, "response_time": 0.80, "reliability": 0.96, "throughput": 0.75},
    "SP4": {"availability": 0.98, "response_time": 0.85, "reliability": 0.98, "throughput": 0.70},
}

SERVICE = "grammar-checker"


@pytest.fixture(scope="session", autouse=True)
def setup_test_environment():
    """Point the broker at a throwaway data directory."""
    data_dir = Path(tempfile.mkdtemp()) / "qos-broker"
    os.environ["QOS_BROKER_DATA_DIR"] = str(data_dir)

    yield

    shutil.rmtree(data_dir.parent, ignore_errors=True)


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo logging configuration done by CLI tests."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def catalog():
    from qos_broker.qos.attributes import default_catalog

    return default_catalog()


@pytest.fixture
def example_profile(catalog):
    from qos_broker.qos.profiles import validate_profile

    return validate_profile(EXAMPLE_PROFILE).aligned(catalog)


@pytest.fixture
def example_offerings(catalog):
    return [(pid, catalog.vector(qos)) for pid, qos in EXAMPLE_OFFERINGS.items()]


@pytest.fixture
def data_dir():
    """Fresh broker data directory per test."""
    path = Path(tempfile.mkdtemp()) / "data"
    yield path
    shutil.rmtree(path.parent, ignore_errors=True)


@pytest.fixture
def clock():
    from qos_broker.clock import LogicalClock

    return LogicalClock()


@pytest.fixture
def fresh_broker(data_dir, clock):
    """Broker on a fresh data directory with a logical clock and sequential ids."""
    from qos_broker.broker.coordinator import Broker
    from qos_broker.config import BrokerConfig
    from qos_broker.simulation.scenario import SequentialIds

    broker = Broker(BrokerConfig(data_dir=data_dir), clock=clock, id_factory=SequentialIds())

    yield broker

    broker.close()


@pytest.fixture
def fresh_sink():
    """Provide a fresh telemetry sink for each test."""
    from qos_broker.telemetry.sink import TelemetrySink

    path = Path(tempfile.mkdtemp()) / "telemetry"
    sink = TelemetrySink(path)

    yield sink

    shutil.rmtree(path.parent, ignore_errors=True)


def provider_record(provider_id: str, qos: dict, price: float = 100.0) -> dict:
    return {
        "provider_id": provider_id,
        "name": provider_id,
        "offerings": [{"service_type": SERVICE, "qos": qos, "price": price}],
    }


def consumer_record(consumer_id: str = "university", group: str = "CIT", **extra) -> dict:
    record = {
        "consumer_id": consumer_id,
        "name": consumer_id.title(),
        "group": group,
        "profiles": {SERVICE: EXAMPLE_PROFILE},
        "principals": ["student-001", "staff-001"],
    }
    record.update(extra)
    return record


def load_scenario_data(name: str) -> dict:
    with open(SCENARIO_DIR / f"{name}.json") as f:
        return json.load(f)
