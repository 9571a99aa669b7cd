"""Measurement samples and the append-only sample log."""

import json
import math
import threading
from collections import defaultdict
from collections.abc import Iterable
from datetime import datetime
from pathlib import Path

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qos_broker.clock import ensure_utc
from qos_broker.errors import AttributeValueError

logger = structlog.get_logger(__name__)

SeriesKey = tuple[str, str, str]  # (provider_id, service_type, attribute_id)


class MeasurementSample(BaseModel):
    """One raw metric observation from a measurement source."""

    model_config = ConfigDict(frozen=True)

    provider_id: str = Field(min_length=1)
    service_type: str = Field(min_length=1)
    attribute_id: str = Field(min_length=1)
    timestamp: datetime
    value: float
    source_id: str = "broker"

    @field_validator("timestamp")
    @classmethod
    def _utc(cls, value: datetime) -> datetime:
        return ensure_utc(value)

    @model_validator(mode="after")
    def _finite(self) -> "MeasurementSample":
        if not math.isfinite(self.value):
            raise AttributeValueError(self.attribute_id, f"sample value {self.value} is not finite")
        return self

    @property
    def key(self) -> SeriesKey:
        return (self.provider_id, self.service_type, self.attribute_id)


class SampleLog:
    """Samples appended to a JSON-lines file and indexed per series in memory."""

    def __init__(self, path: Path):
        self.path = path
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._series: dict[SeriesKey, list[MeasurementSample]] = defaultdict(list)
        self._count = 0
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        with open(self.path) as f:
            for line in f:
                if not line.strip():
                    continue
                try:
                    sample = MeasurementSample.model_validate(json.loads(line))
                except (json.JSONDecodeError, ValueError):
                    logger.warning("sample_line_skipped", path=str(self.path))
                    continue
                self._index(sample)

    def _index(self, sample: MeasurementSample) -> None:
        self._series[sample.key].append(sample)
        self._count += 1

    def append(self, samples: Iterable[MeasurementSample]) -> int:
        """Durably append samples; returns the total number of samples held."""
        batch = list(samples)
        with self._lock:
            with open(self.path, "a") as f:
                for sample in batch:
                    f.write(sample.model_dump_json() + "\n")
            for sample in batch:
                self._index(sample)
            return self._count

    def query(
        self,
        provider_id: str,
        service_type: str | None,
        attribute_id: str,
        start: datetime,
        end: datetime,
    ) -> list[MeasurementSample]:
        """Samples of one series with start <= timestamp < end, in arrival order.

        A service_type of None matches every service type of the provider.
        """
        with self._lock:
            keys = [
                key
                for key in self._series
                if key[0] == provider_id
                and key[2] == attribute_id
                and (service_type is None or key[1] == service_type)
            ]
            return [
                sample
                for key in sorted(keys)
                for sample in self._series[key]
                if start <= sample.timestamp < end
            ]

    def all(self) -> list[MeasurementSample]:
        with self._lock:
            return [s for key in sorted(self._series) for s in self._series[key]]

    def __len__(self) -> int:
        return self._count
