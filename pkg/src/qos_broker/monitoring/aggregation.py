"""Tumbling-window aggregation of raw samples into normalized indicators."""

import math
import statistics
from collections.abc import Sequence
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from pydantic import BaseModel, ConfigDict, Field, model_validator

from qos_broker.clock import ensure_utc
from qos_broker.qos.attributes import AttributeSpec, normalize_metric

_UNIX_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class Window(BaseModel):
    """Half-open time interval [start, end)."""

    model_config = ConfigDict(frozen=True)

    start: datetime
    end: datetime

    @model_validator(mode="after")
    def _check(self) -> "Window":
        if self.start >= self.end:
            raise ValueError("Window must start before it ends")
        return self

    def contains(self, moment: datetime) -> bool:
        return self.start <= moment < self.end


class IndicatorWindow(BaseModel):
    """Aggregated, normalized value of one attribute over one window."""

    model_config = ConfigDict(frozen=True)

    provider_id: str
    attribute_id: str
    window: Window
    value: float = Field(ge=0.0, le=1.0)
    sample_count: int = Field(ge=1)


@dataclass(frozen=True)
class NoData:
    """No samples fell into the window; distinct from a zero indicator."""

    provider_id: str
    attribute_id: str
    window: Window


def align_up(moment: datetime, length_seconds: int, origin: datetime = _UNIX_EPOCH) -> datetime:
    """First window boundary at or after moment; boundaries are counted from origin."""
    origin = ensure_utc(origin)
    offset = (ensure_utc(moment) - origin).total_seconds()
    return origin + timedelta(seconds=math.ceil(offset / length_seconds) * length_seconds)


def align_down(moment: datetime, length_seconds: int, origin: datetime = _UNIX_EPOCH) -> datetime:
    """Last window boundary at or before moment."""
    origin = ensure_utc(origin)
    offset = (ensure_utc(moment) - origin).total_seconds()
    return origin + timedelta(seconds=math.floor(offset / length_seconds) * length_seconds)


def tumbling_windows(
    start: datetime,
    end: datetime,
    length_seconds: int,
    origin: datetime = _UNIX_EPOCH,
) -> list[Window]:
    """Complete windows lying inside [start, end), on boundaries counted from origin."""
    length = timedelta(seconds=length_seconds)
    windows = []
    cursor = align_up(start, length_seconds, origin)
    while cursor + length <= ensure_utc(end):
        windows.append(Window(start=cursor, end=cursor + length))
        cursor += length
    return windows


def aggregate_values(values: Sequence[float], spec: AttributeSpec) -> float:
    """Raw sample values of one window to a normalized indicator.

    Fraction attributes count samples with a positive value as up; mean
    attributes average the raw values. Both then go through normalize_metric.
    """
    if not values:
        raise ValueError(f"{spec.id}: cannot aggregate an empty window")
    if spec.aggregation == "fraction":
        raw = sum(1 for v in values if v > 0) / len(values)
    else:
        raw = statistics.fmean(values)
    return normalize_metric(raw, spec)


def aggregate_window(
    provider_id: str,
    spec: AttributeSpec,
    window: Window,
    values: Sequence[float],
) -> IndicatorWindow | NoData:
    """Indicator for one (provider, attribute, window), or NoData when empty."""
    if not values:
        return NoData(provider_id=provider_id, attribute_id=spec.id, window=window)
    return IndicatorWindow(
        provider_id=provider_id,
        attribute_id=spec.id,
        window=window,
        value=aggregate_values(values, spec),
        sample_count=len(values),
    )
