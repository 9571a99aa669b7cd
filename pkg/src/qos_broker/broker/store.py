"""Record store - append-only JSONL log plus periodic snapshot, one per entity class."""

import json
import os
import threading
from collections.abc import Callable
from pathlib import Path
from typing import Generic, TypeVar

import structlog
from pydantic import BaseModel

from qos_broker.errors import DuplicateRecordError, RecordNotFoundError

logger = structlog.get_logger(__name__)

R = TypeVar("R", bound=BaseModel)


class RecordStore(Generic[R]):
    """Records of one class, durable in ``<name>.jsonl`` and ``<name>.snapshot.json``.

    Every change appends ``{"op", "id", "record"}`` to the log. After
    ``snapshot_every`` entries the full state is written to the snapshot
    and the log is truncated. Opening a store loads the snapshot and
    replays the log over it.
    """

    def __init__(
        self,
        data_dir: Path,
        name: str,
        model: type[R],
        key: Callable[[R], str],
        snapshot_every: int = 100,
    ):
        self.name = name
        self.model = model
        self.key = key
        self.snapshot_every = snapshot_every
        data_dir.mkdir(parents=True, exist_ok=True)
        self.log_file = data_dir / f"{name}.jsonl"
        self.snapshot_file = data_dir / f"{name}.snapshot.json"
        self._lock = threading.RLock()
        self._records: dict[str, R] = {}
        self._log_entries = 0
        self._recover()

    def _recover(self) -> None:
        if self.snapshot_file.exists():
            with open(self.snapshot_file) as f:
                snapshot = json.load(f)
            for record_id, data in snapshot["records"].items():
                self._records[record_id] = self.model.model_validate(data)

        if not self.log_file.exists():
            return
        with open(self.log_file) as f:
            for line in f:
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    self._replay(entry)
                except (json.JSONDecodeError, KeyError, ValueError):
                    logger.warning("store_line_skipped", store=self.name)
                    continue
                self._log_entries += 1

    def _replay(self, entry: dict) -> None:
        if entry["op"] == "put":
            self._records[entry["id"]] = self.model.model_validate(entry["record"])
        elif entry["op"] == "delete":
            self._records.pop(entry["id"], None)
        else:
            raise ValueError(f"Unknown op: {entry['op']}")

    def _append(self, op: str, record_id: str, record: R | None) -> None:
        entry = {
            "op": op,
            "id": record_id,
            "record": record.model_dump(mode="json") if record is not None else None,
        }
        with open(self.log_file, "a") as f:
            f.write(json.dumps(entry) + "\n")
            f.flush()
            os.fsync(f.fileno())
        self._log_entries += 1

    def _maybe_snapshot(self) -> None:
        if self._log_entries >= self.snapshot_every:
            self._snapshot()

    def _snapshot(self) -> None:
        tmp = self.snapshot_file.with_suffix(".json.tmp")
        records = {rid: r.model_dump(mode="json") for rid, r in sorted(self._records.items())}
        with open(tmp, "w") as f:
            json.dump({"records": records}, f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, self.snapshot_file)
        self.log_file.write_text("")
        logger.info("snapshot_written", store=self.name, records=len(records))
        self._log_entries = 0

    def add(self, record: R) -> R:
        """Store a new record; its id must not be taken."""
        record_id = self.key(record)
        with self._lock:
            if record_id in self._records:
                raise DuplicateRecordError(f"{self.name}: {record_id} already exists")
            self._append("put", record_id, record)
            self._records[record_id] = record
            self._maybe_snapshot()
        return record

    def put(self, record: R) -> R:
        """Insert or replace a record."""
        record_id = self.key(record)
        with self._lock:
            self._append("put", record_id, record)
            self._records[record_id] = record
            self._maybe_snapshot()
        return record

    def delete(self, record_id: str) -> None:
        with self._lock:
            if record_id not in self._records:
                raise RecordNotFoundError(f"{self.name}: {record_id} not found")
            self._append("delete", record_id, None)
            del self._records[record_id]
            self._maybe_snapshot()

    def get(self, record_id: str) -> R:
        with self._lock:
            try:
                return self._records[record_id].model_copy(deep=True)
            except KeyError:
                raise RecordNotFoundError(f"{self.name}: {record_id} not found") from None

    def find(self, record_id: str) -> R | None:
        with self._lock:
            record = self._records.get(record_id)
            return record.model_copy(deep=True) if record is not None else None

    def all(self) -> list[R]:
        """Every record, ordered by id."""
        with self._lock:
            return [self._records[rid].model_copy(deep=True) for rid in sorted(self._records)]

    def __contains__(self, record_id: object) -> bool:
        with self._lock:
            return record_id in self._records

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)
