"""Simulated SaaS providers: advertise, negotiate per policy, emit samples."""

import hashlib
from datetime import datetime, timedelta
from typing import Annotated, Any, Literal

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from qos_broker.broker.records import SIM_SCHEME
from qos_broker.errors import ResponderUnreachable, UnknownAttributeError
from qos_broker.monitoring.samples import MeasurementSample
from qos_broker.qos.attributes import AttributeCatalog
from qos_broker.qos.offerings import Offering
from qos_broker.qos.terms import unmet_terms
from qos_broker.simulation.generators import Generator, check_bounds, clamp
from qos_broker.sla.negotiation import Action, NegotiationMessage

logger = structlog.get_logger(__name__)

DEFAULT_SAMPLE_INTERVAL = 6.0


class AcceptAlways(BaseModel):
    kind: Literal["accept-always"] = "accept-always"


class RejectAlways(BaseModel):
    kind: Literal["reject-always"] = "reject-always"


class CounterOnce(BaseModel):
    """Counter the first proposal with shifted guarantees and cost, accept afterwards."""

    kind: Literal["counter-once"] = "counter-once"
    delta: dict[str, float] = Field(default_factory=dict)
    cost_delta: float = 0.0

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, value: dict[str, float]) -> dict[str, float]:
        for attribute_id, shift in value.items():
            if not -1.0 <= shift <= 1.0:
                raise ValueError(f"{attribute_id}: delta {shift} outside [-1, 1]")
        return value


class AcceptIfCostAtLeast(BaseModel):
    """Accept proposals priced at or above the floor, otherwise counter at the floor."""

    kind: Literal["accept-if-cost-at-least"] = "accept-if-cost-at-least"
    floor: float = Field(ge=0.0)


class Unreachable(BaseModel):
    kind: Literal["unreachable"] = "unreachable"


NegotiationPolicy = Annotated[
    AcceptAlways | RejectAlways | CounterOnce | AcceptIfCostAtLeast | Unreachable,
    Field(discriminator="kind"),
]


class SimProviderConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    provider_id: str = Field(min_length=1)
    name: str = ""
    offering: Offering
    generators: dict[str, Generator] = Field(default_factory=dict)
    policy: NegotiationPolicy = Field(default_factory=AcceptAlways)
    sample_interval: float = Field(default=DEFAULT_SAMPLE_INTERVAL, gt=0.0)
    source_id: str = "sim"

    @property
    def endpoint(self) -> str:
        return f"{SIM_SCHEME}{self.provider_id}"

    def record(self) -> dict[str, Any]:
        """ProviderRecord body for registration with the broker."""
        return {
            "provider_id": self.provider_id,
            "name": self.name or self.provider_id,
            "offerings": [self.offering.model_dump(mode="json")],
            "endpoint": self.endpoint,
        }


def _shift(value: float, delta: float) -> float:
    """Guarantee moved by delta, kept in [0, 1] and rounded to drop float drift."""
    return round(min(1.0, max(0.0, value + delta)), 10)


def provider_rng(seed: int, provider_id: str) -> np.random.Generator:
    """Generator split from the scenario seed by provider id, independent of other providers."""
    key = int.from_bytes(hashlib.sha256(provider_id.encode()).digest()[:8], "big")
    return np.random.default_rng([seed, key])


class SimulatedProvider:
    """Handle of a spawned provider; also the Responder for its sim:// endpoint."""

    def __init__(
        self,
        config: SimProviderConfig,
        catalog: AttributeCatalog,
        rng: np.random.Generator,
        spawned_at: datetime,
    ):
        self.config = config
        self.catalog = catalog
        self.rng = rng
        self.spawned_at = spawned_at
        self._tick = 0
        self._countered: set[str] = set()

    @property
    def provider_id(self) -> str:
        return self.config.provider_id

    @property
    def endpoint(self) -> str:
        return self.config.endpoint

    def respond(self, message: NegotiationMessage) -> NegotiationMessage:
        """Answer a broker proposal according to the configured policy."""
        policy = self.config.policy
        proposal = message.document

        def reply(action: Action, document: Any = None) -> NegotiationMessage:
            return NegotiationMessage(
                session_id=message.session_id,
                round=message.round,
                action=action,
                document=document,
            )

        if isinstance(policy, Unreachable):
            raise ResponderUnreachable(f"{self.endpoint} does not answer")
        if proposal is None or isinstance(policy, RejectAlways):
            return reply(Action.REJECT)
        if unmet_terms(proposal.terms, self.config.offering.terms):
            return reply(Action.REJECT)
        if isinstance(policy, AcceptAlways):
            return reply(Action.ACCEPT, proposal)

        if isinstance(policy, CounterOnce):
            if message.session_id in self._countered:
                return reply(Action.ACCEPT, proposal)
            self._countered.add(message.session_id)
            guarantees = {
                attribute_id: _shift(value, policy.delta.get(attribute_id, 0.0))
                for attribute_id, value in proposal.guarantees.items()
            }
            counter = proposal.model_copy(
                update={
                    "guarantees": self.catalog.vector(guarantees),
                    "cost": max(0.0, proposal.cost + policy.cost_delta),
                }
            )
            return reply(Action.COUNTER, counter)

        if proposal.cost >= policy.floor:
            return reply(Action.ACCEPT, proposal)
        return reply(Action.COUNTER, proposal.model_copy(update={"cost": policy.floor}))

    def emit_samples(self, until: datetime) -> list[MeasurementSample]:
        """Samples for every tick before ``until``, one per generated attribute, catalog order."""
        interval = self.config.sample_interval
        samples = []
        while True:
            elapsed = self._tick * interval
            moment = self.spawned_at + timedelta(seconds=elapsed)
            if moment >= until:
                break
            for spec in self.catalog.attributes:
                generator = self.config.generators.get(spec.id)
                if generator is None:
                    continue
                value = generator.value_at(elapsed, self.rng)
                if spec.aggregation == "fraction":
                    value = 1.0 if self.rng.random() < value else 0.0
                else:
                    value = clamp(value, spec)
                samples.append(
                    MeasurementSample(
                        provider_id=self.provider_id,
                        service_type=self.config.offering.service_type,
                        attribute_id=spec.id,
                        timestamp=moment,
                        value=value,
                        source_id=self.config.source_id,
                    )
                )
            self._tick += 1
        return samples


def spawn_provider(
    config: SimProviderConfig,
    catalog: AttributeCatalog,
    seed: int,
    spawned_at: datetime,
) -> SimulatedProvider:
    """Validate generators against the catalog and start a provider.

    Args:
        config: Provider configuration.
        catalog: Attribute catalog of the broker.
        seed: Scenario seed; the provider's generator is split from it.
        spawned_at: Logical time the provider starts emitting.

    Returns:
        SimulatedProvider handle.
    """
    for attribute_id, generator in config.generators.items():
        if attribute_id not in catalog:
            raise UnknownAttributeError(f"{config.provider_id}: unknown attribute {attribute_id}")
        check_bounds(generator, catalog.get(attribute_id))
    catalog.align(config.offering.qos)

    logger.debug("provider_spawned", provider_id=config.provider_id, policy=config.policy.kind)
    return SimulatedProvider(config, catalog, provider_rng(seed, config.provider_id), spawned_at)
