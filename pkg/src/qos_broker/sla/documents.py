"""SLA documents and drafting."""

from datetime import datetime, timedelta

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qos_broker.errors import ServiceTypeMismatchError
from qos_broker.qos.attributes import QoSVector
from qos_broker.qos.offerings import Offering
from qos_broker.qos.profiles import RequirementProfile
from qos_broker.qos.terms import TermValue, validate_terms


class PenaltyClause(BaseModel):
    """Credits owed once violations exceed the threshold V."""

    model_config = ConfigDict(frozen=True)

    violation_threshold: int = Field(default=3, ge=1)
    credit_per_violation: float = Field(default=5.0, ge=0.0)


class ServiceRequest(BaseModel):
    """What the broker negotiates on behalf of a consumer."""

    model_config = ConfigDict(frozen=True)

    consumer_id: str
    service_type: str
    profile: RequirementProfile
    demanded_terms: dict[str, TermValue] = Field(default_factory=dict)


class SLADocument(BaseModel):
    """Terms under negotiation or agreed between a consumer and a provider."""

    model_config = ConfigDict(frozen=True)

    consumer_id: str
    provider_id: str
    service_type: str
    guarantees: QoSVector
    cost: float = Field(ge=0.0)
    penalty: PenaltyClause = Field(default_factory=PenaltyClause)
    valid_from: datetime
    valid_until: datetime
    terms: dict[str, TermValue] = Field(default_factory=dict)

    @field_validator("terms")
    @classmethod
    def _check_terms(cls, value: dict[str, TermValue]) -> dict[str, TermValue]:
        return validate_terms(value)

    @model_validator(mode="after")
    def _check_validity(self) -> "SLADocument":
        if self.valid_from >= self.valid_until:
            raise ValueError("SLA validity window must start before it ends")
        return self


def draft_sla(
    request: ServiceRequest,
    provider_id: str,
    offering: Offering,
    penalty: PenaltyClause,
    valid_from: datetime,
    validity: timedelta,
) -> SLADocument:
    """Draft the broker's opening proposal.

    Guarantees are the consumer's minima; advertised QoS above them is not
    an obligation. Cost is the offering's list price. The budget is checked
    when counters are evaluated, not here.

    Args:
        request: Consumer, service type, profile and demanded terms.
        provider_id: Provider the proposal is addressed to.
        offering: Provider's offering for the service type.
        penalty: Penalty clause from the broker configuration.
        valid_from: Start of the validity window.
        validity: Length of the validity window.

    Returns:
        SLADocument ready to propose.
    """
    if offering.service_type != request.service_type:
        raise ServiceTypeMismatchError(
            f"{provider_id} offers {offering.service_type}, request is for {request.service_type}"
        )

    return SLADocument(
        consumer_id=request.consumer_id,
        provider_id=provider_id,
        service_type=request.service_type,
        guarantees=request.profile.minima,
        cost=offering.price,
        penalty=penalty,
        valid_from=valid_from,
        valid_until=valid_from + validity,
        terms=dict(request.demanded_terms),
    )
