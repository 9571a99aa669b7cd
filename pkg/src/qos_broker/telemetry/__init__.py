"""Telemetry module - usage event capture."""

from qos_broker.telemetry.events import (
    CREDENTIAL_ACCESS,
    SERVICE_REQUEST,
    emit_credential_access,
    emit_event,
    emit_service_request,
)
from qos_broker.telemetry.sink import TelemetrySink

__all__ = [
    "CREDENTIAL_ACCESS",
    "SERVICE_REQUEST",
    "emit_credential_access",
    "emit_event",
    "emit_service_request",
    "TelemetrySink",
]
