"""Provider offerings."""

from pydantic import BaseModel, ConfigDict, Field, field_validator

from qos_broker.qos.attributes import QoSVector
from qos_broker.qos.terms import TermValue, validate_terms


class Offering(BaseModel):
    """Advertised QoS, list price and supported terms for one service type."""

    model_config = ConfigDict(frozen=True)

    service_type: str = Field(min_length=1)
    qos: QoSVector
    price: float = Field(ge=0.0)
    terms: dict[str, TermValue] = Field(default_factory=dict)

    @field_validator("terms")
    @classmethod
    def _check_terms(cls, value: dict[str, TermValue]) -> dict[str, TermValue]:
        return validate_terms(value)
