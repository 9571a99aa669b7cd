"""Broker API routing, shared by the HTTP server and the simulation harness."""

import re
from collections import Counter
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any

import structlog
from pydantic import BaseModel, ValidationError

from qos_broker.broker.coordinator import Broker
from qos_broker.errors import (
    AuthorizationDenied,
    BrokerError,
    DuplicateRecordError,
    RecordNotFoundError,
    UnknownAttributeError,
    UnknownPrincipalError,
    UnknownTierError,
)

logger = structlog.get_logger(__name__)

Query = Mapping[str, str]
Params = dict[str, str]
Reply = tuple[int, Any]
Handler = Callable[[Params, Query, Any], Reply]


@dataclass(frozen=True)
class Route:
    method: str
    template: str
    pattern: re.Pattern[str]
    handler: Handler

    @property
    def name(self) -> str:
        return f"{self.method} {self.template}"


def _compile(template: str) -> re.Pattern[str]:
    return re.compile("^" + re.sub(r"\{(\w+)\}", r"(?P<\1>[^/]+)", template) + "$")


def _dump(value: BaseModel) -> Any:
    return value.model_dump(mode="json")


def _require(body: Any, *names: str) -> list[Any]:
    if not isinstance(body, Mapping):
        raise ValueError("Request body must be a JSON object")
    missing = [name for name in names if not body.get(name)]
    if missing:
        raise ValueError(f"Missing fields: {missing}")
    return [body[name] for name in names]


def error_status(error: Exception) -> int:
    """HTTP status for an exception raised while handling a request."""
    if isinstance(error, AuthorizationDenied):
        return 403
    if isinstance(error, DuplicateRecordError):
        return 409
    if isinstance(error, (RecordNotFoundError, UnknownPrincipalError)):
        return 404
    if isinstance(error, (ValidationError, ValueError, UnknownAttributeError, UnknownTierError)):
        return 400
    if isinstance(error, BrokerError):
        return 422
    return 500


class BrokerApi:
    """Maps (method, path, query, body) to broker operations and JSON-ready payloads.

    Error bodies are ``{"success": false, "error": message}``.
    """

    def __init__(self, broker: Broker):
        self.broker = broker
        self.hits: Counter[str] = Counter()
        self.routes = [
            Route(method, template, _compile(template), handler)
            for method, template, handler in (
                ("GET", "/health", self._health),
                ("POST", "/providers", self._register_provider),
                ("POST", "/consumers", self._subscribe_consumer),
                ("POST", "/policies", self._add_policy),
                ("POST", "/requests", self._service_request),
                ("GET", "/rankings/{request_id}", self._ranking),
                ("POST", "/credentials", self._credentials),
                ("GET", "/reports/usage", self._usage_report),
                ("GET", "/contracts/{contract_id}", self._contract),
                ("POST", "/measurements", self._measurements),
                ("GET", "/compliance/{contract_id}", self._compliance),
            )
        ]

    @property
    def route_names(self) -> list[str]:
        return [route.name for route in self.routes]

    def dispatch(
        self,
        method: str,
        path: str,
        query: Query | None = None,
        body: Any = None,
    ) -> tuple[int, Any]:
        """Handle one request.

        Args:
            method: HTTP method.
            path: Request path without query string.
            query: Query parameters.
            body: Decoded JSON body, if any.

        Returns:
            (status code, JSON-serializable payload)
        """
        path_matched = False
        for route in self.routes:
            match = route.pattern.match(path)
            if not match:
                continue
            path_matched = True
            if route.method != method.upper():
                continue

            self.hits[route.name] += 1
            try:
                return route.handler(match.groupdict(), query or {}, body)
            except Exception as e:
                status = error_status(e)
                if status == 500:
                    logger.exception("request_failed", route=route.name)
                else:
                    logger.info("request_rejected", route=route.name, status=status, error=str(e))
                return status, {"success": False, "error": str(e)}

        if path_matched:
            return 405, {"success": False, "error": f"{method} not allowed on {path}"}
        return 404, {"success": False, "error": f"No route for {path}"}

    def _health(self, params: Params, query: Query, body: Any) -> Reply:
        return 200, self.broker.health()

    def _register_provider(self, params: Params, query: Query, body: Any) -> Reply:
        return 201, {"provider_id": self.broker.register_provider(body)}

    def _subscribe_consumer(self, params: Params, query: Query, body: Any) -> Reply:
        return 201, {"consumer_id": self.broker.subscribe_consumer(body)}

    def _add_policy(self, params: Params, query: Query, body: Any) -> Reply:
        return 201, {"policy_id": self.broker.add_policy(body)}

    def _service_request(self, params: Params, query: Query, body: Any) -> Reply:
        consumer_id, service_type = _require(body, "consumer_id", "service_type")
        result = self.broker.handle_service_request(
            consumer_id, service_type, principal_id=body.get("principal_id")
        )
        return 200, _dump(result)

    def _ranking(self, params: Params, query: Query, body: Any) -> Reply:
        return 200, _dump(self.broker.get_ranking(params["request_id"]))

    def _credentials(self, params: Params, query: Query, body: Any) -> Reply:
        principal_id, provider_id = _require(body, "principal_id", "provider_id")
        return 200, _dump(self.broker.resolve_credentials(principal_id, provider_id))

    def _usage_report(self, params: Params, query: Query, body: Any) -> Reply:
        if "from" not in query or "to" not in query:
            raise ValueError("Usage reports need 'from' and 'to'")
        report = self.broker.usage_report(query.get("group"), query["from"], query["to"])
        return 200, _dump(report)

    def _contract(self, params: Params, query: Query, body: Any) -> Reply:
        return 200, _dump(self.broker.get_contract(params["contract_id"]))

    def _measurements(self, params: Params, query: Query, body: Any) -> Reply:
        if not isinstance(body, list):
            raise ValueError("Measurements must be a JSON array of samples")
        return 202, {"accepted": self.broker.ingest(body)}

    def _compliance(self, params: Params, query: Query, body: Any) -> Reply:
        report = self.broker.compliance_report(
            params["contract_id"], query.get("from"), query.get("to")
        )
        return 200, _dump(report)
