"""Monitoring - measurement ingestion, windowed indicators, SLA compliance."""

from qos_broker.monitoring.aggregation import (
    IndicatorWindow,
    NoData,
    Window,
    aggregate_values,
    aggregate_window,
    tumbling_windows,
)
from qos_broker.monitoring.compliance import (
    ComplianceReport,
    ComplianceResult,
    ViolationEvent,
    check_compliance,
    compliance_report,
)
from qos_broker.monitoring.monitor import Monitor
from qos_broker.monitoring.samples import MeasurementSample, SampleLog

__all__ = [
    "IndicatorWindow",
    "NoData",
    "Window",
    "aggregate_values",
    "aggregate_window",
    "tumbling_windows",
    "ComplianceReport",
    "ComplianceResult",
    "ViolationEvent",
    "check_compliance",
    "compliance_report",
    "Monitor",
    "MeasurementSample",
    "SampleLog",
]
