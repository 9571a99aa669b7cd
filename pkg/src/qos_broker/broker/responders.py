"""Negotiation endpoints: in-process simulated responders and HTTP responders."""

import httpx
import structlog

from qos_broker.broker.records import SIM_SCHEME
from qos_broker.errors import InvalidReplyError, ResponderUnreachable
from qos_broker.sla.negotiation import NegotiationMessage, Responder

logger = structlog.get_logger(__name__)

DEFAULT_TIMEOUT = 5.0


class HttpResponder:
    """Provider endpoint reached by POSTing negotiation messages as JSON."""

    def __init__(
        self, url: str, client: httpx.Client | None = None, timeout: float = DEFAULT_TIMEOUT
    ):
        self.url = url
        self._client = client or httpx.Client(timeout=timeout)

    def respond(self, message: NegotiationMessage) -> NegotiationMessage:
        try:
            response = self._client.post(self.url, json=message.model_dump(mode="json"))
            response.raise_for_status()
        except httpx.HTTPError as e:
            logger.warning("responder_unreachable", url=self.url, error=str(e))
            raise ResponderUnreachable(f"{self.url}: {e}") from e
        # JSONDecodeError and ValidationError are both ValueErrors
        try:
            return NegotiationMessage.model_validate(response.json())
        except ValueError as e:
            logger.warning("responder_reply_invalid", url=self.url, error=str(e).splitlines()[0])
            raise InvalidReplyError(f"{self.url}: not a negotiation message") from e


class _Missing:
    def __init__(self, endpoint: str):
        self.endpoint = endpoint

    def respond(self, message: NegotiationMessage) -> NegotiationMessage:
        raise ResponderUnreachable(f"No responder listening at {self.endpoint}")


class ResponderDirectory:
    """Resolves a provider's endpoint address to a Responder."""

    def __init__(self, http_client: httpx.Client | None = None):
        self._simulated: dict[str, Responder] = {}
        self._http_client = http_client

    def attach(self, endpoint: str, responder: Responder) -> None:
        """Serve a ``sim://`` endpoint with an in-process responder."""
        if not endpoint.startswith(SIM_SCHEME):
            raise ValueError(f"Only {SIM_SCHEME} endpoints can be attached: {endpoint}")
        self._simulated[endpoint] = responder

    def resolve(self, endpoint: str) -> Responder:
        if endpoint.startswith(SIM_SCHEME):
            return self._simulated.get(endpoint) or _Missing(endpoint)
        if endpoint.startswith(("http://", "https://")):
            if self._http_client is None:
                self._http_client = httpx.Client(timeout=DEFAULT_TIMEOUT)
            return HttpResponder(endpoint, client=self._http_client)
        return _Missing(endpoint)

    def close(self) -> None:
        if self._http_client is not None:
            self._http_client.close()
