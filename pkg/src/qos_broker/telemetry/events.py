"""Usage event emission."""

from datetime import datetime
from typing import Any
from uuid import uuid4

from qos_broker.telemetry.sink import TelemetrySink

SERVICE_REQUEST = "service.request"
CREDENTIAL_ACCESS = "credential.access"


def emit_event(
    sink: TelemetrySink,
    event_type: str,
    timestamp: datetime,
    attributes: dict[str, Any],
    trace_id: str | None = None,
) -> dict[str, Any]:
    """Emit a usage event.

    Args:
        sink: Sink the event is appended to.
        event_type: Type of event (e.g., "service.request", "credential.access").
        timestamp: Event time from the broker clock.
        attributes: Event attributes.
        trace_id: Optional trace ID for correlation.

    Returns:
        The emitted event.
    """
    event = {
        "timestamp": timestamp.isoformat(),
        "event_type": event_type,
        "trace_id": trace_id or str(uuid4()),
        "attributes": attributes,
    }
    sink.write(event)
    return event


def emit_service_request(
    sink: TelemetrySink,
    timestamp: datetime,
    request_id: str,
    consumer_id: str,
    group: str | None,
    service_type: str,
    provider_id: str | None,
    outcome: str,
) -> dict[str, Any]:
    """Emit service.request event."""
    attributes = {
        "broker.request.id": request_id,
        "broker.consumer.id": consumer_id,
        "broker.consumer.group": group,
        "broker.service.type": service_type,
        "broker.provider.id": provider_id,
        "broker.request.outcome": outcome,
    }
    return emit_event(sink, SERVICE_REQUEST, timestamp, attributes, trace_id=f"req-{request_id}")


def emit_credential_access(
    sink: TelemetrySink,
    timestamp: datetime,
    principal_id: str,
    consumer_id: str,
    group: str | None,
    provider_id: str,
    service_type: str,
) -> dict[str, Any]:
    """Emit credential.access event."""
    attributes = {
        "broker.principal.id": principal_id,
        "broker.consumer.id": consumer_id,
        "broker.consumer.group": group,
        "broker.provider.id": provider_id,
        "broker.service.type": service_type,
    }
    return emit_event(sink, CREDENTIAL_ACCESS, timestamp, attributes)
