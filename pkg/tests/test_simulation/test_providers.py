"""Tests for generators and simulated providers."""

from datetime import timedelta

import numpy as np
import pytest

from qos_broker.clock import EPOCH
from qos_broker.errors import AttributeValueError, ResponderUnreachable, UnknownAttributeError
from qos_broker.simulation.generators import ConstantGenerator, DriftGenerator, UniformGenerator
from qos_broker.simulation.providers import SimProviderConfig, provider_rng, spawn_provider
from qos_broker.sla.documents import PenaltyClause, ServiceRequest, draft_sla
from qos_broker.sla.negotiation import Action, NegotiationMessage
from tests.conftest import EXAMPLE_OFFERINGS, SERVICE


def _config(**extra):
    data = {
        "provider_id": "SP4",
        "offering": {"service_type": SERVICE, "qos": EXAMPLE_OFFERINGS["SP4"], "price": 100.0},
    }
    data.update(extra)
    return SimProviderConfig.model_validate(data)


@pytest.fixture
def proposal(catalog, example_profile):
    config = _config()
    request = ServiceRequest(consumer_id="university", service_type=SERVICE, profile=example_profile)
    document = draft_sla(
        request, "SP4", config.offering, PenaltyClause(), EPOCH, timedelta(days=30)
    )
    return NegotiationMessage(session_id="neg-0001", round=1, action=Action.PROPOSE, document=document)


class TestGenerators:
    """Tests for true-QoS generators."""

    def test_drift(self):
        """Drift holds its start value until the onset, then moves linearly."""
        drift = DriftGenerator(start=1.0, slope=-0.25, onset=60)
        rng = np.random.default_rng(0)

        assert drift.value_at(0, rng) == 1.0
        assert drift.value_at(60, rng) == 1.0
        assert drift.value_at(66, rng) == pytest.approx(-0.5)

    def test_uniform_within_bounds(self):
        uniform = UniformGenerator(low=100, high=200)
        rng = np.random.default_rng(0)

        assert all(100 <= uniform.value_at(t, rng) <= 200 for t in range(100))

    def test_uniform_order(self):
        with pytest.raises(ValueError):
            UniformGenerator(low=2, high=1)

    def test_negative_onset(self):
        with pytest.raises(ValueError):
            DriftGenerator(start=1.0, slope=0.0, onset=-1)


class TestSpawnProvider:
    """Tests for spawn_provider."""

    def test_unknown_attribute(self, catalog):
        config = _config(generators={"latency": {"kind": "constant", "value": 1.0}})
        with pytest.raises(UnknownAttributeError):
            spawn_provider(config, catalog, 1, EPOCH)

    def test_generator_out_of_bounds(self, catalog):
        config = _config(generators={"availability": {"kind": "constant", "value": 1.5}})
        with pytest.raises(AttributeValueError):
            spawn_provider(config, catalog, 1, EPOCH)

    def test_rng_split_by_provider(self):
        a = provider_rng(7, "SP1").random(4)
        b = provider_rng(7, "SP2").random(4)
        again = provider_rng(7, "SP1").random(4)

        assert not np.array_equal(a, b)
        assert np.array_equal(a, again)


class TestEmitSamples:
    """Tests for SimulatedProvider.emit_samples."""

    def test_ticks_before_until(self, catalog):
        """One sample per generated attribute per tick, strictly before until."""
        config = _config(
            generators={
                "response_time": {"kind": "constant", "value": 150},
                "throughput": {"kind": "constant", "value": 950},
            },
            sample_interval=6,
        )
        provider = spawn_provider(config, catalog, 1, EPOCH)
        samples = provider.emit_samples(EPOCH + timedelta(seconds=60))

        assert len(samples) == 20
        assert samples[0].attribute_id == "response_time"
        assert samples[-1].timestamp == EPOCH + timedelta(seconds=54)

        later = provider.emit_samples(EPOCH + timedelta(seconds=66))
        assert [s.timestamp for s in later] == [EPOCH + timedelta(seconds=60)] * 2

    def test_fraction_samples_are_binary(self, catalog):
        config = _config(generators={"availability": {"kind": "uniform", "low": 0.2, "high": 0.8}})
        provider = spawn_provider(config, catalog, 3, EPOCH)

        values = {s.value for s in provider.emit_samples(EPOCH + timedelta(seconds=600))}
        assert values <= {0.0, 1.0}

    def test_availability_matches_generator(self, catalog):
        """Over many samples the measured availability tracks the true probability."""
        config = _config(
            generators={"availability": {"kind": "constant", "value": 0.9}}, sample_interval=1
        )
        provider = spawn_provider(config, catalog, 11, EPOCH)
        samples = provider.emit_samples(EPOCH + timedelta(seconds=10000))

        assert len(samples) == 10000
        assert abs(np.mean([s.value for s in samples]) - 0.9) <= 0.02

    def test_mean_values_clamped(self, catalog):
        config = _config(generators={"throughput": {"kind": "drift", "start": 1000, "slope": 10}})
        provider = spawn_provider(config, catalog, 1, EPOCH)

        assert max(s.value for s in provider.emit_samples(EPOCH + timedelta(seconds=60))) == 1000

    def test_same_seed_same_samples(self, catalog):
        config = _config(generators={"availability": ConstantGenerator(value=0.5)})
        first = spawn_provider(config, catalog, 5, EPOCH).emit_samples(EPOCH + timedelta(hours=1))
        second = spawn_provider(config, catalog, 5, EPOCH).emit_samples(EPOCH + timedelta(hours=1))

        assert first == second


class TestNegotiationPolicies:
    """Tests for provider negotiation policies."""

    def test_accept_always(self, catalog, proposal):
        reply = spawn_provider(_config(), catalog, 1, EPOCH).respond(proposal)
        assert reply.action == Action.ACCEPT
        assert reply.document == proposal.document

    def test_reject_always(self, catalog, proposal):
        config = _config(policy={"kind": "reject-always"})
        assert spawn_provider(config, catalog, 1, EPOCH).respond(proposal).action == Action.REJECT

    def test_unsupported_term_rejected(self, catalog, proposal):
        """A proposal demanding a term the offering lacks is refused whatever the policy."""
        demanding = proposal.model_copy(
            update={
                "document": proposal.document.model_copy(
                    update={"terms": {"tenant-isolation": True}}
                )
            }
        )
        provider = spawn_provider(_config(), catalog, 1, EPOCH)

        assert provider.respond(demanding).action == Action.REJECT

        supported = _config(
            offering={
                "service_type": SERVICE,
                "qos": EXAMPLE_OFFERINGS["SP4"],
                "price": 100.0,
                "terms": {"tenant-isolation": True},
            }
        )
        assert spawn_provider(supported, catalog, 1, EPOCH).respond(demanding).action == (
            Action.ACCEPT
        )

    def test_counter_once(self, catalog, proposal):
        """The first proposal of a session is countered, the next one accepted."""
        config = _config(
            policy={"kind": "counter-once", "delta": {"availability": -0.1}, "cost_delta": 5}
        )
        provider = spawn_provider(config, catalog, 1, EPOCH)
        counter = provider.respond(proposal)

        assert counter.action == Action.COUNTER
        assert counter.document.guarantees["availability"] == pytest.approx(0.88)
        assert counter.document.cost == 105.0
        assert provider.respond(proposal).action == Action.ACCEPT

    def test_counter_delta_bounds(self):
        with pytest.raises(ValueError):
            _config(policy={"kind": "counter-once", "delta": {"availability": 1.5}})

    def test_accept_if_cost_at_least(self, catalog, proposal):
        config = _config(policy={"kind": "accept-if-cost-at-least", "floor": 120})
        reply = spawn_provider(config, catalog, 1, EPOCH).respond(proposal)

        assert reply.action == Action.COUNTER
        assert reply.document.cost == 120

        cheap = _config(policy={"kind": "accept-if-cost-at-least", "floor": 50})
        assert spawn_provider(cheap, catalog, 1, EPOCH).respond(proposal).action == Action.ACCEPT

    def test_unreachable(self, catalog, proposal):
        config = _config(policy={"kind": "unreachable"})
        with pytest.raises(ResponderUnreachable):
            spawn_provider(config, catalog, 1, EPOCH).respond(proposal)
