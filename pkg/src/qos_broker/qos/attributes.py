"""QoS attribute catalog, normalized vectors, and metric normalization."""

import json
import math
from collections.abc import Iterator, Mapping
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_serializer, model_validator

from qos_broker.errors import AttributeValueError, CatalogMismatchError, UnknownAttributeError

Direction = Literal["higher-is-better", "lower-is-better"]
Aggregation = Literal["mean", "fraction"]


class AttributeSpec(BaseModel):
    """One QoS attribute and the reference bounds of its raw metric."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    name: str = ""
    direction: Direction = "higher-is-better"
    raw_min: float
    raw_max: float
    aggregation: Aggregation = "mean"
    unit: str | None = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "AttributeSpec":
        if not (math.isfinite(self.raw_min) and math.isfinite(self.raw_max)):
            raise ValueError(f"{self.id}: reference bounds must be finite")
        if self.raw_min >= self.raw_max:
            raise ValueError(
                f"{self.id}: raw_min {self.raw_min} must be below raw_max {self.raw_max}"
            )
        return self

    @property
    def display_name(self) -> str:
        return self.name or self.id


class QoSVector(BaseModel):
    """Normalized qualities in [0, 1], one per catalog attribute, in catalog order.

    Serializes as an ``{attribute_id: value}`` mapping and accepts the same
    mapping on input.
    """

    model_config = ConfigDict(frozen=True)

    attributes: tuple[str, ...]
    values: tuple[float, ...]

    @model_validator(mode="before")
    @classmethod
    def _from_mapping(cls, data: Any) -> Any:
        if isinstance(data, Mapping) and set(data) != {"attributes", "values"}:
            return {"attributes": tuple(data), "values": tuple(data.values())}
        return data

    @model_validator(mode="after")
    def _check_values(self) -> "QoSVector":
        if not self.attributes:
            raise ValueError("QoS vector must not be empty")
        if len(self.attributes) != len(self.values):
            raise ValueError(
                f"{len(self.attributes)} attributes but {len(self.values)} values"
            )
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("QoS vector attribute ids must be unique")
        for attribute_id, value in zip(self.attributes, self.values):
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise AttributeValueError(attribute_id, f"quality {value} outside [0, 1]")
        return self

    @model_serializer
    def _to_mapping(self) -> dict[str, float]:
        return self.as_mapping()

    def as_mapping(self) -> dict[str, float]:
        return dict(zip(self.attributes, self.values))

    def __getitem__(self, attribute_id: str) -> float:
        try:
            return self.values[self.attributes.index(attribute_id)]
        except ValueError:
            raise UnknownAttributeError(f"Unknown attribute: {attribute_id}") from None

    def items(self) -> Iterator[tuple[str, float]]:
        return iter(zip(self.attributes, self.values))

    def __len__(self) -> int:
        return len(self.values)

    def dominates(self, other: "QoSVector") -> bool:
        """True when every value is at least the other's value."""
        require_same_catalog(self.attributes, other.attributes)
        return all(a >= b for a, b in zip(self.values, other.values))


class AttributeCatalog(BaseModel):
    """Ordered attribute catalog shared by every vector and profile."""

    model_config = ConfigDict(frozen=True)

    attributes: tuple[AttributeSpec, ...]

    @model_validator(mode="after")
    def _check_ids(self) -> "AttributeCatalog":
        if not self.attributes:
            raise ValueError("Catalog must contain at least one attribute")
        ids = [spec.id for spec in self.attributes]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"Duplicate attribute ids: {duplicates}")
        return self

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(spec.id for spec in self.attributes)

    def __len__(self) -> int:
        return len(self.attributes)

    def __contains__(self, attribute_id: object) -> bool:
        return attribute_id in self.ids

    def get(self, attribute_id: str) -> AttributeSpec:
        for spec in self.attributes:
            if spec.id == attribute_id:
                return spec
        raise UnknownAttributeError(f"Unknown attribute: {attribute_id}")

    def vector(self, mapping: Mapping[str, float]) -> QoSVector:
        """Build a QoSVector in catalog order from an attribute mapping."""
        unknown = sorted(set(mapping) - set(self.ids))
        if unknown:
            raise UnknownAttributeError(f"Unknown attributes: {unknown}")
        missing = [i for i in self.ids if i not in mapping]
        if missing:
            raise CatalogMismatchError(f"Missing attributes: {missing}")
        return QoSVector(attributes=self.ids, values=tuple(float(mapping[i]) for i in self.ids))

    def align(self, vector: QoSVector) -> QoSVector:
        """Reorder a vector into catalog order."""
        return self.vector(vector.as_mapping())


def require_same_catalog(left: tuple[str, ...], right: tuple[str, ...]) -> None:
    """Raise CatalogMismatchError unless both attribute orders are identical."""
    if tuple(left) != tuple(right):
        raise CatalogMismatchError(f"Catalog mismatch: {list(left)} vs {list(right)}")


def normalize_metric(raw: float, spec: AttributeSpec) -> float:
    """Map a raw metric in native units onto a quality in [0, 1].

    Clamped min-max scaling; lower-is-better attributes are inverted.

    Args:
        raw: Raw metric value.
        spec: Attribute the metric belongs to.

    Returns:
        Normalized quality, 1 meaning highest quality.
    """
    if not math.isfinite(raw):
        raise AttributeValueError(spec.id, f"raw value {raw} is not finite")

    span = spec.raw_max - spec.raw_min
    if spec.direction == "higher-is-better":
        quality = (raw - spec.raw_min) / span
    else:
        quality = (spec.raw_max - raw) / span

    return min(1.0, max(0.0, quality))


def default_catalog() -> AttributeCatalog:
    """The four attributes of the worked example, in its column order."""
    return AttributeCatalog(
        attributes=(
            AttributeSpec(
                id="availability",
                name="Availability",
                raw_min=0.0,
                raw_max=1.0,
                aggregation="fraction",
            ),
            AttributeSpec(
                id="response_time",
                name="1/Response time",
                direction="lower-is-better",
                raw_min=100.0,
                raw_max=1100.0,
                unit="ms",
            ),
            AttributeSpec(
                id="reliability",
                name="Reliability",
                raw_min=0.0,
                raw_max=1.0,
                aggregation="fraction",
            ),
            AttributeSpec(
                id="throughput",
                name="Throughput",
                raw_min=0.0,
                raw_max=1000.0,
                unit="req/s",
            ),
        )
    )


def load_catalog(path: Path) -> AttributeCatalog:
    """Load a catalog JSON file: a list of attributes or ``{"attributes": [...]}``."""
    with open(path) as f:
        data = json.load(f)
    if isinstance(data, list):
        data = {"attributes": data}
    return AttributeCatalog.model_validate(data)
