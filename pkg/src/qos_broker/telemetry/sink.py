"""Telemetry sink - JSONL file writer for broker usage events."""

import json
import threading
from datetime import datetime
from pathlib import Path
from typing import Any

import structlog
from dateutil.parser import isoparse

from qos_broker.clock import ensure_utc

logger = structlog.get_logger(__name__)

MAX_FILE_SIZE = 100 * 1024 * 1024  # 100MB


class TelemetrySink:
    """Usage event sink that appends to JSONL files."""

    def __init__(self, path: Path):
        """Initialize telemetry sink.

        Args:
            path: Path to telemetry directory.
        """
        self.path = path
        self.path.mkdir(parents=True, exist_ok=True)
        self.events_file = self.path / "events.jsonl"
        self._lock = threading.Lock()

    def _should_rotate(self) -> bool:
        """Check if file should be rotated."""
        if not self.events_file.exists():
            return False
        return self.events_file.stat().st_size >= MAX_FILE_SIZE

    def _rotate(self) -> None:
        """Rotate events file."""
        rotation = 1
        while (self.path / f"events.jsonl.{rotation}").exists():
            rotation += 1

        self.events_file.rename(self.path / f"events.jsonl.{rotation}")

    def _files(self) -> list[Path]:
        """Rotated files oldest first, then the live file."""
        rotated = sorted(
            self.path.glob("events.jsonl.*"), key=lambda p: int(p.suffix.lstrip("."))
        )
        return [*rotated, self.events_file]

    def write(self, event: dict[str, Any]) -> None:
        """Append one event; events must carry an ISO ``timestamp``.

        Args:
            event: Event dictionary to write.
        """
        if "timestamp" not in event:
            raise ValueError("Telemetry events need a timestamp")

        with self._lock:
            if self._should_rotate():
                self._rotate()
            with open(self.events_file, "a") as f:
                f.write(json.dumps(event, sort_keys=True) + "\n")

    def read_events(
        self,
        start_time: datetime | None = None,
        end_time: datetime | None = None,
        event_type: str | None = None,
    ) -> list[dict[str, Any]]:
        """Read events in file order.

        Args:
            start_time: Keep events at or after this time.
            end_time: Keep events strictly before this time.
            event_type: Filter by event type.

        Returns:
            List of matching events.
        """
        events: list[dict[str, Any]] = []
        start = ensure_utc(start_time) if start_time else None
        end = ensure_utc(end_time) if end_time else None

        with self._lock:
            for file in self._files():
                if not file.exists():
                    continue
                with open(file) as f:
                    for line in f:
                        try:
                            event = json.loads(line)
                        except json.JSONDecodeError:
                            logger.warning("telemetry_line_skipped", file=str(file))
                            continue

                        if event_type and event.get("event_type") != event_type:
                            continue

                        if start or end:
                            event_time = ensure_utc(isoparse(event["timestamp"]))
                            if start and event_time < start:
                                continue
                            if end and event_time >= end:
                                continue

                        events.append(event)

        return events
