"""Monitor: ingestion, aggregation and contract evaluation over the sample log."""

import threading
from collections.abc import Iterable
from datetime import datetime, timedelta
from pathlib import Path

import structlog

from qos_broker.clock import Clock, SystemClock, ensure_utc
from qos_broker.errors import UnknownAttributeError
from qos_broker.monitoring.aggregation import (
    IndicatorWindow,
    NoData,
    Window,
    aggregate_values,
    aggregate_window,
    align_down,
    tumbling_windows,
)
from qos_broker.monitoring.compliance import (
    ComplianceLog,
    ComplianceReport,
    ComplianceResult,
    ViolationEvent,
    check_compliance,
    compliance_report,
    evaluate_window,
)
from qos_broker.monitoring.samples import MeasurementSample, SampleLog
from qos_broker.qos.attributes import AttributeCatalog, QoSVector
from qos_broker.sla.contracts import Contract, ContractStore

logger = structlog.get_logger(__name__)


class Monitor:
    """Measurement service of the broker.

    Samples and evaluated windows live in the data directory
    (``samples.jsonl``, ``compliance.jsonl``); penalties go to the
    contract store.
    """

    def __init__(
        self,
        catalog: AttributeCatalog,
        data_dir: Path,
        contracts: ContractStore,
        window_seconds: int = 60,
        clock: Clock | None = None,
    ):
        self.catalog = catalog
        self.contracts = contracts
        self.window_seconds = window_seconds
        self.clock = clock or SystemClock()
        self.samples = SampleLog(data_dir / "samples.jsonl")
        self.results = ComplianceLog(data_dir / "compliance.jsonl")
        self._evaluation_lock = threading.Lock()

    def ingest(self, samples: Iterable[MeasurementSample]) -> int:
        """Append a batch of samples; nothing is stored if any sample is invalid.

        Returns:
            Number of samples accepted.
        """
        batch = list(samples)
        for sample in batch:
            if sample.attribute_id not in self.catalog:
                raise UnknownAttributeError(f"Unknown attribute: {sample.attribute_id}")
        self.samples.append(batch)
        logger.debug("samples_ingested", count=len(batch), total=len(self.samples))
        return len(batch)

    def ingest_measurement(self, sample: MeasurementSample) -> int:
        return self.ingest([sample])

    def aggregate_window(
        self,
        provider_id: str,
        attribute_id: str,
        window: Window,
        service_type: str | None = None,
    ) -> IndicatorWindow | NoData:
        spec = self.catalog.get(attribute_id)
        values = [
            s.value
            for s in self.samples.query(
                provider_id, service_type, attribute_id, window.start, window.end
            )
        ]
        return aggregate_window(provider_id, spec, window, values)

    def indicators(
        self, provider_id: str, service_type: str, window: Window
    ) -> dict[str, IndicatorWindow | NoData]:
        return {
            attribute_id: self.aggregate_window(provider_id, attribute_id, window, service_type)
            for attribute_id in self.catalog.ids
        }

    def contract_windows(self, contract: Contract, until: datetime) -> list[Window]:
        """Complete windows from valid_from up to min(until, valid_until).

        Windows follow each other from valid_from without gaps; a trailing
        partial window waits for a later watermark.
        """
        valid_from = ensure_utc(contract.document.valid_from)
        end = min(ensure_utc(until), ensure_utc(contract.document.valid_until))
        return tumbling_windows(valid_from, end, self.window_seconds, origin=valid_from)

    def evaluate_contract(self, contract_id: str, until: datetime) -> list[ComplianceResult]:
        """Check every complete, not yet evaluated window of a contract up to a watermark.

        Violations go through the contract's penalty clause; each evaluated
        window is persisted once, so repeated calls are no-ops.

        Args:
            contract_id: Contract to evaluate.
            until: Watermark; windows ending after it are left for later.

        Returns:
            Results of the windows evaluated by this call.
        """
        evaluated = []
        with self._evaluation_lock:
            contract = self.contracts.get(contract_id)
            for window in self.contract_windows(contract, until):
                if not contract.is_active:
                    break
                if self.results.is_evaluated(contract_id, window):
                    continue

                result = check_compliance(
                    contract,
                    window,
                    self.indicators(contract.provider_id, contract.document.service_type, window),
                )
                contract, credit = self.contracts.record_violations(
                    contract_id, len(result.violations)
                )
                result.credit = credit
                self.results.append(result)
                evaluated.append(result)

                for violation in result.violations:
                    logger.info(
                        "violation_recorded",
                        contract_id=contract_id,
                        attribute_id=violation.attribute_id,
                        window_start=window.start.isoformat(),
                        measured=violation.measured,
                        guaranteed=violation.guaranteed,
                    )
        return evaluated

    def evaluate_all(self, until: datetime | None = None) -> list[ComplianceResult]:
        """Evaluate every Active contract up to the watermark (default: now)."""
        watermark = until or self.clock.now()
        results = []
        for contract in self.contracts.all():
            if contract.is_active:
                results.extend(self.evaluate_contract(contract.contract_id, watermark))
        return results

    def compliance_report(
        self, contract_id: str, start: datetime, end: datetime
    ) -> ComplianceReport:
        contract = self.contracts.get(contract_id)
        return compliance_report(
            contract, self.results.results(contract_id), ensure_utc(start), ensure_utc(end)
        )

    def recompute_violations(
        self, contract: Contract, windows: Iterable[Window]
    ) -> list[ViolationEvent]:
        """Rebuild violation events from the raw sample log, ordered by window then attribute."""
        events = []
        for window in sorted(windows, key=lambda w: w.start):
            result = evaluate_window(
                contract,
                window,
                self.indicators(contract.provider_id, contract.document.service_type, window),
            )
            events.extend(sorted(result.violations, key=lambda v: v.attribute_id))
        return events

    def stored_violations(self, contract_id: str) -> list[ViolationEvent]:
        """Violation events persisted by evaluation, ordered by window then attribute."""
        events = []
        for result in sorted(self.results.results(contract_id), key=lambda r: r.window.start):
            events.extend(sorted(result.violations, key=lambda v: v.attribute_id))
        return events

    def observed_qos(
        self,
        provider_id: str,
        service_type: str,
        start: datetime,
        end: datetime,
    ) -> QoSVector | None:
        """QoS vector aggregated over [start, end), or None if any attribute has no data."""
        observed = {}
        for spec in self.catalog.attributes:
            values = [
                s.value
                for s in self.samples.query(provider_id, service_type, spec.id, start, end)
            ]
            if not values:
                return None
            observed[spec.id] = aggregate_values(values, spec)
        return self.catalog.vector(observed)

    def recent_qos(self, provider_id: str, service_type: str, windows: int) -> QoSVector | None:
        """Observed QoS over the last complete windows before now."""
        end = align_down(self.clock.now(), self.window_seconds)
        start = end - timedelta(seconds=windows * self.window_seconds)
        return self.observed_qos(provider_id, service_type, start, end)
