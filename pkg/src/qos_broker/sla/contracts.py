"""Agreed contracts, penalty accounting and the contract store."""

import json
import os
import threading
from datetime import datetime
from enum import Enum
from pathlib import Path

import structlog
from pydantic import BaseModel, Field

from qos_broker.errors import ContractStateError, DuplicateRecordError, RecordNotFoundError
from qos_broker.sla.documents import SLADocument

logger = structlog.get_logger(__name__)


class ContractStatus(str, Enum):
    ACTIVE = "Active"
    TERMINATED = "Terminated"


class Contract(BaseModel):
    """A signed SLA and its running violation tally."""

    contract_id: str
    document: SLADocument
    agreed_at: datetime
    status: ContractStatus = ContractStatus.ACTIVE
    violations: int = Field(default=0, ge=0)
    credited: float = Field(default=0.0, ge=0.0)
    session_id: str | None = None

    @property
    def provider_id(self) -> str:
        return self.document.provider_id

    @property
    def consumer_id(self) -> str:
        return self.document.consumer_id

    @property
    def is_active(self) -> bool:
        return self.status == ContractStatus.ACTIVE


def owed_credit(violations: int, violation_threshold: int, credit_per_violation: float) -> float:
    """Total credit owed for a violation count: nothing up to V, then linear."""
    return credit_per_violation * max(0, violations - violation_threshold)


def apply_penalty(contract: Contract, new_violations: int) -> float:
    """Add violations to an Active contract and return the credit they trigger.

    Credits are incremental: the amount returned is what is owed in total
    minus what was already credited, never negative.

    Args:
        contract: Active contract; updated in place.
        new_violations: Number of violation events to add.

    Returns:
        Newly owed credit in currency units.
    """
    if not contract.is_active:
        raise ContractStateError(f"Contract {contract.contract_id} is {contract.status.value}")
    if new_violations < 0:
        raise ValueError(f"Violation count cannot decrease: {new_violations}")

    penalty = contract.document.penalty
    contract.violations += new_violations
    owed = owed_credit(
        contract.violations, penalty.violation_threshold, penalty.credit_per_violation
    )
    credit = max(0.0, owed - contract.credited)
    contract.credited += credit
    return credit


class ContractStore:
    """Contracts persisted as one JSON file per contract id.

    Reads return copies; writes are serialized per contract.
    """

    def __init__(self, path: Path):
        self.path = path
        self.path.mkdir(parents=True, exist_ok=True)
        self._contracts: dict[str, Contract] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._load()

    def _load(self) -> None:
        for file in sorted(self.path.glob("*.json")):
            with open(file) as f:
                contract = Contract.model_validate(json.load(f))
            self._contracts[contract.contract_id] = contract
            self._locks[contract.contract_id] = threading.Lock()

    def _write(self, contract: Contract) -> None:
        target = self.path / f"{contract.contract_id}.json"
        tmp = target.with_suffix(".json.tmp")
        with open(tmp, "w") as f:
            f.write(contract.model_dump_json(indent=2))
        os.replace(tmp, target)

    def _lock_for(self, contract_id: str) -> threading.Lock:
        with self._registry_lock:
            if contract_id not in self._locks:
                raise RecordNotFoundError(f"Contract not found: {contract_id}")
            return self._locks[contract_id]

    def add(self, contract: Contract) -> Contract:
        with self._registry_lock:
            if contract.contract_id in self._contracts:
                raise DuplicateRecordError(f"Contract exists: {contract.contract_id}")
            self._locks[contract.contract_id] = threading.Lock()
            self._contracts[contract.contract_id] = contract.model_copy(deep=True)
            self._write(contract)
        logger.info(
            "contract_stored",
            contract_id=contract.contract_id,
            provider_id=contract.provider_id,
            consumer_id=contract.consumer_id,
        )
        return contract

    def get(self, contract_id: str) -> Contract:
        with self._lock_for(contract_id):
            return self._contracts[contract_id].model_copy(deep=True)

    def all(self) -> list[Contract]:
        with self._registry_lock:
            ids = sorted(self._contracts)
        return [self.get(contract_id) for contract_id in ids]

    def active_for(self, consumer_id: str, provider_id: str | None = None) -> list[Contract]:
        """Active contracts of a consumer, optionally with one provider."""
        return [
            c
            for c in self.all()
            if c.is_active
            and c.consumer_id == consumer_id
            and (provider_id is None or c.provider_id == provider_id)
        ]

    def record_violations(self, contract_id: str, count: int) -> tuple[Contract, float]:
        """Apply violations to a stored contract; returns the updated copy and new credit."""
        with self._lock_for(contract_id):
            contract = self._contracts[contract_id]
            credit = apply_penalty(contract, count)
            self._write(contract)
            snapshot = contract.model_copy(deep=True)
        if count:
            logger.info(
                "violations_recorded",
                contract_id=contract_id,
                new_violations=count,
                total_violations=snapshot.violations,
                credit=credit,
            )
        return snapshot, credit

    def terminate(self, contract_id: str) -> Contract:
        with self._lock_for(contract_id):
            contract = self._contracts[contract_id]
            if not contract.is_active:
                raise ContractStateError(f"Contract {contract_id} is already terminated")
            contract.status = ContractStatus.TERMINATED
            self._write(contract)
            snapshot = contract.model_copy(deep=True)
        logger.info("contract_terminated", contract_id=contract_id)
        return snapshot
