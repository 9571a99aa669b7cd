"""True-QoS generators of simulated providers.

For fraction attributes a generator yields the probability that a sample is
up; for mean attributes it yields the raw metric value.
"""

from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qos_broker.errors import AttributeValueError
from qos_broker.qos.attributes import AttributeSpec


class ConstantGenerator(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant"] = "constant"
    value: float

    def bounds(self) -> tuple[float, float]:
        return self.value, self.value

    def value_at(self, elapsed: float, rng: np.random.Generator) -> float:
        return self.value


class UniformGenerator(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform"] = "uniform"
    low: float
    high: float

    @model_validator(mode="after")
    def _ordered(self) -> "UniformGenerator":
        if self.low > self.high:
            raise ValueError(f"uniform low {self.low} above high {self.high}")
        return self

    def bounds(self) -> tuple[float, float]:
        return self.low, self.high

    def value_at(self, elapsed: float, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))


class DriftGenerator(BaseModel):
    """Holds ``start`` until ``onset`` seconds after spawn, then moves by ``slope`` per second."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["drift"] = "drift"
    start: float
    slope: float
    onset: float = Field(default=0.0, ge=0.0)

    def bounds(self) -> tuple[float, float]:
        return self.start, self.start

    def value_at(self, elapsed: float, rng: np.random.Generator) -> float:
        if elapsed < self.onset:
            return self.start
        return self.start + self.slope * (elapsed - self.onset)


Generator = Annotated[
    ConstantGenerator | UniformGenerator | DriftGenerator, Field(discriminator="kind")
]


def check_bounds(generator: Generator, spec: AttributeSpec) -> None:
    """Raise AttributeValueError when the generator's parameters leave the attribute bounds."""
    low, high = generator.bounds()
    if low < spec.raw_min or high > spec.raw_max:
        raise AttributeValueError(
            spec.id,
            f"{generator.kind} generator range [{low}, {high}] outside "
            f"[{spec.raw_min}, {spec.raw_max}]",
        )


def clamp(value: float, spec: AttributeSpec) -> float:
    return min(spec.raw_max, max(spec.raw_min, value))
