"""Credential gateway: member principals to provider-side credentials."""

import secrets
import threading
from collections.abc import Callable
from datetime import timedelta

import structlog

from qos_broker.broker.records import CredentialMapping, credential_key
from qos_broker.broker.store import RecordStore
from qos_broker.clock import Clock

logger = structlog.get_logger(__name__)


def random_token() -> str:
    """Opaque 128-bit token."""
    return secrets.token_hex(16)


class CredentialGateway:
    """Mints and returns credential mappings, at most one active per (principal, provider)."""

    def __init__(
        self,
        store: RecordStore[CredentialMapping],
        clock: Clock,
        ttl: timedelta,
        token_factory: Callable[[], str] = random_token,
    ):
        self.store = store
        self.clock = clock
        self.ttl = ttl
        self.token_factory = token_factory
        self._lock = threading.Lock()

    def resolve(self, principal_id: str, provider_id: str) -> tuple[CredentialMapping, bool]:
        """Active mapping for the pair, minting one when absent or expired.

        Returns:
            The mapping and whether it was minted by this call.
        """
        now = self.clock.now()
        with self._lock:
            current = self.store.find(credential_key(principal_id, provider_id))
            if current is not None and current.is_active(now):
                return current, False

            mapping = CredentialMapping(
                principal_id=principal_id,
                provider_id=provider_id,
                token=self.token_factory(),
                issued_at=now,
                expires_at=now + self.ttl,
            )
            self.store.put(mapping)

        logger.info(
            "credential_minted",
            principal_id=principal_id,
            provider_id=provider_id,
            expires_at=mapping.expires_at.isoformat(),
            replaced_expired=current is not None,
        )
        return mapping, True

    def active(self, principal_id: str, provider_id: str) -> CredentialMapping | None:
        """Current mapping if it has not expired; expired mappings are never returned."""
        mapping = self.store.find(credential_key(principal_id, provider_id))
        if mapping is None or not mapping.is_active(self.clock.now()):
            return None
        return mapping
