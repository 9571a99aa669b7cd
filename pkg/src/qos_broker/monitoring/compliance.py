"""SLA compliance checks, violation events and compliance reports."""

import json
import math
import threading
from collections.abc import Iterable, Mapping
from datetime import datetime
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from qos_broker.errors import ContractStateError
from qos_broker.monitoring.aggregation import IndicatorWindow, NoData, Window
from qos_broker.sla.contracts import Contract

# A window violates a guarantee when measured < guaranteed - SHORTFALL_EPSILON
SHORTFALL_EPSILON = 1e-9


class ViolationEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    contract_id: str
    attribute_id: str
    window: Window
    measured: float
    guaranteed: float
    timestamp: datetime


class ComplianceResult(BaseModel):
    """Outcome of checking one contract over one window."""

    contract_id: str
    window: Window
    indicators: dict[str, float | None]
    violations: list[ViolationEvent] = Field(default_factory=list)
    no_data: list[str] = Field(default_factory=list)
    credit: float = 0.0

    @property
    def compliant(self) -> bool:
        return not self.violations


class AttributeCompliance(BaseModel):
    attribute_id: str
    windows_observed: int = 0
    no_data_windows: int = 0
    violations: int = 0
    worst_indicator: float | None = None


class ComplianceReport(BaseModel):
    contract_id: str
    start: datetime
    end: datetime
    attributes: list[AttributeCompliance]
    total_violations: int
    total_credit: float


def check_compliance(
    contract: Contract,
    window: Window,
    indicators: Mapping[str, IndicatorWindow | NoData],
) -> ComplianceResult:
    """Compare window indicators with the contract's guarantees.

    A violation is a strict shortfall; a missing indicator is reported as
    no-data and never counts as a violation.

    Args:
        contract: Active contract.
        window: Window the indicators were aggregated over.
        indicators: Indicator (or NoData) per guaranteed attribute.

    Returns:
        ComplianceResult listing violations and no-data attributes.
    """
    if not contract.is_active:
        raise ContractStateError(f"Contract {contract.contract_id} is {contract.status.value}")
    return evaluate_window(contract, window, indicators)


def evaluate_window(
    contract: Contract,
    window: Window,
    indicators: Mapping[str, IndicatorWindow | NoData],
) -> ComplianceResult:
    """Compliance of one window regardless of contract status; used for audits."""
    values: dict[str, float | None] = {}
    violations = []
    no_data = []

    for attribute_id, guaranteed in contract.document.guarantees.items():
        indicator = indicators.get(attribute_id)
        if not isinstance(indicator, IndicatorWindow):
            values[attribute_id] = None
            no_data.append(attribute_id)
            continue

        values[attribute_id] = indicator.value
        if indicator.value < guaranteed - SHORTFALL_EPSILON:
            violations.append(
                ViolationEvent(
                    contract_id=contract.contract_id,
                    attribute_id=attribute_id,
                    window=window,
                    measured=indicator.value,
                    guaranteed=guaranteed,
                    timestamp=window.end,
                )
            )

    return ComplianceResult(
        contract_id=contract.contract_id,
        window=window,
        indicators=values,
        violations=violations,
        no_data=no_data,
    )


def compliance_report(
    contract: Contract,
    results: Iterable[ComplianceResult],
    start: datetime,
    end: datetime,
) -> ComplianceReport:
    """Summarize stored window results lying inside [start, end).

    Credit is the sum of the credits stored with the windows in the period.
    """
    rows = {a: AttributeCompliance(attribute_id=a) for a in contract.document.guarantees.attributes}

    in_period = sorted(
        (r for r in results if r.window.start >= start and r.window.end <= end),
        key=lambda r: r.window.start,
    )
    for result in in_period:
        violated = {v.attribute_id for v in result.violations}
        for attribute_id, value in result.indicators.items():
            row = rows.setdefault(attribute_id, AttributeCompliance(attribute_id=attribute_id))
            if value is None:
                row.no_data_windows += 1
                continue
            row.windows_observed += 1
            if row.worst_indicator is None or value < row.worst_indicator:
                row.worst_indicator = value
            if attribute_id in violated:
                row.violations += 1

    total = sum(row.violations for row in rows.values())
    return ComplianceReport(
        contract_id=contract.contract_id,
        start=start,
        end=end,
        attributes=list(rows.values()),
        total_violations=total,
        total_credit=math.fsum(result.credit for result in in_period),
    )


class ComplianceLog:
    """Evaluated (contract, window) results appended as JSON lines."""

    def __init__(self, path: Path):
        self.path = path
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._results: dict[str, list[ComplianceResult]] = {}
        self._evaluated: set[tuple[str, datetime]] = set()
        if self.path.exists():
            with open(self.path) as f:
                for line in f:
                    if line.strip():
                        self._index(ComplianceResult.model_validate(json.loads(line)))

    def _index(self, result: ComplianceResult) -> None:
        self._results.setdefault(result.contract_id, []).append(result)
        self._evaluated.add((result.contract_id, result.window.start))

    def is_evaluated(self, contract_id: str, window: Window) -> bool:
        with self._lock:
            return (contract_id, window.start) in self._evaluated

    def append(self, result: ComplianceResult) -> None:
        with self._lock:
            with open(self.path, "a") as f:
                f.write(result.model_dump_json() + "\n")
            self._index(result)

    def results(self, contract_id: str) -> list[ComplianceResult]:
        with self._lock:
            return [r.model_copy(deep=True) for r in self._results.get(contract_id, [])]
