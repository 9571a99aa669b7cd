"""Records kept by the broker: providers, consumers, policies, credentials, provisioning."""

import fnmatch
from datetime import datetime
from typing import Any, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)

from qos_broker.qos.offerings import Offering
from qos_broker.qos.profiles import RequirementProfile
from qos_broker.qos.terms import TermValue, validate_terms
from qos_broker.selection.ranking import RankingResult
from qos_broker.sla.contracts import Contract
from qos_broker.sla.negotiation import FailureReason, NegotiationState, TranscriptEntry

SIM_SCHEME = "sim://"


class ProviderRecord(BaseModel):
    """A registered SaaS provider and its offerings, one per service type."""

    model_config = ConfigDict(frozen=True)

    provider_id: str = Field(min_length=1)
    name: str = ""
    offerings: tuple[Offering, ...] = Field(min_length=1)
    endpoint: str = ""

    @model_validator(mode="before")
    @classmethod
    def _default_endpoint(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("endpoint") and data.get("provider_id"):
            return {**data, "endpoint": f"{SIM_SCHEME}{data['provider_id']}"}
        return data

    @model_validator(mode="after")
    def _unique_service_types(self) -> "ProviderRecord":
        types = [o.service_type for o in self.offerings]
        if len(set(types)) != len(types):
            raise ValueError(f"{self.provider_id}: one offering per service type")
        return self

    def offering(self, service_type: str) -> Offering | None:
        for offering in self.offerings:
            if offering.service_type == service_type:
                return offering
        return None


class ConsumerRecord(BaseModel):
    """A subscribed consumer (an organization) and its member principals."""

    model_config = ConfigDict(frozen=True)

    consumer_id: str = Field(min_length=1)
    name: str = ""
    profiles: dict[str, RequirementProfile]
    demanded_terms: dict[str, TermValue] = Field(default_factory=dict)
    group: str | None = None
    principals: tuple[str, ...] = ()

    @field_validator("demanded_terms")
    @classmethod
    def _check_terms(cls, value: dict[str, TermValue]) -> dict[str, TermValue]:
        return validate_terms(value)


class AuthorizationRule(BaseModel):
    """Allow or deny an action; principal, action, consumer and group are glob patterns."""

    model_config = ConfigDict(frozen=True)

    principal: str = "*"
    action: str = "*"
    consumer: str = "*"
    group: str = "*"
    effect: Literal["allow", "deny"]

    def matches(self, principal_id: str, action: str, consumer_id: str, group: str | None) -> bool:
        return (
            fnmatch.fnmatchcase(principal_id, self.principal)
            and fnmatch.fnmatchcase(action, self.action)
            and fnmatch.fnmatchcase(consumer_id, self.consumer)
            and (self.group == "*" or fnmatch.fnmatchcase(group or "", self.group))
        )


class SelectionRule(BaseModel):
    """Provider allow/deny lists and an acceptance-threshold override."""

    model_config = ConfigDict(frozen=True)

    consumer: str = "*"
    service_type: str = "*"
    allow: tuple[str, ...] | None = None
    deny: tuple[str, ...] = ()
    min_acceptance: float | None = Field(default=None, ge=0.0, le=1.0)

    def matches(self, consumer_id: str, service_type: str) -> bool:
        return fnmatch.fnmatchcase(consumer_id, self.consumer) and fnmatch.fnmatchcase(
            service_type, self.service_type
        )


class Policy(BaseModel):
    model_config = ConfigDict(frozen=True)

    policy_id: str = Field(min_length=1)
    kind: Literal["authorization", "selection"]
    authorization: AuthorizationRule | None = None
    selection: SelectionRule | None = None

    @model_validator(mode="after")
    def _one_rule(self) -> "Policy":
        if (self.authorization is None) == (self.selection is None):
            raise ValueError(f"{self.policy_id}: exactly one of authorization/selection")
        if (self.kind == "authorization") != (self.authorization is not None):
            raise ValueError(f"{self.policy_id}: rule does not match kind {self.kind}")
        return self


class AuthorizationDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    allowed: bool
    reason: str
    policy_id: str | None = None


class CredentialMapping(BaseModel):
    """Provider-side credential minted for a member principal."""

    model_config = ConfigDict(frozen=True)

    principal_id: str
    provider_id: str
    token: str
    issued_at: datetime
    expires_at: datetime

    @property
    def key(self) -> str:
        return credential_key(self.principal_id, self.provider_id)

    def is_active(self, now: datetime) -> bool:
        return now < self.expires_at


def credential_key(principal_id: str, provider_id: str) -> str:
    return f"{principal_id}::{provider_id}"


class NegotiationAttempt(BaseModel):
    model_config = ConfigDict(frozen=True)

    provider_id: str
    session_id: str
    state: NegotiationState
    reason: FailureReason | None = None
    rounds: int
    transcript: tuple[TranscriptEntry, ...]


ProvisioningFailure = Literal["no-accepted-providers", "no-agreement"]


class ProvisioningResult(BaseModel):
    """Outcome of one service request: ranking, attempts in order, contract or failure."""

    model_config = ConfigDict(frozen=True)

    request_id: str
    consumer_id: str
    service_type: str
    ranking: RankingResult
    attempts: tuple[NegotiationAttempt, ...] = ()
    contract: Contract | None = None
    failure: ProvisioningFailure | None = None
    started_at: datetime
    finished_at: datetime

    @model_validator(mode="after")
    def _prefix_of_accepted(self) -> "ProvisioningResult":
        accepted = self.ranking.accepted
        if self.attempted != accepted[: len(self.attempted)]:
            raise ValueError("Attempted providers must follow the accepted ranking order")
        if (self.contract is None) == (self.failure is None):
            raise ValueError("A provisioning result has either a contract or a failure")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def attempted(self) -> list[str]:
        return [attempt.provider_id for attempt in self.attempts]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def outcome(self) -> str:
        return "contract" if self.contract else f"failed:{self.failure}"


class UsageRow(BaseModel):
    service_type: str
    provider_id: str | None
    requests: int = 0
    credential_accesses: int = 0


class UsageReport(BaseModel):
    group: str | None
    start: datetime
    end: datetime
    rows: list[UsageRow]

    @property
    def total_requests(self) -> int:
        return sum(row.requests for row in self.rows)

    @property
    def total_credential_accesses(self) -> int:
        return sum(row.credential_accesses for row in self.rows)
