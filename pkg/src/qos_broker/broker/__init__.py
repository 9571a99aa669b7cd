"""Broker service - registry, profiles, policies, credentials, coordinator, API."""

from qos_broker.broker.api import BrokerApi
from qos_broker.broker.coordinator import Broker, parse_period
from qos_broker.broker.records import (
    AuthorizationDecision,
    AuthorizationRule,
    ConsumerRecord,
    CredentialMapping,
    NegotiationAttempt,
    Policy,
    ProviderRecord,
    ProvisioningResult,
    SelectionRule,
    UsageReport,
    UsageRow,
)
from qos_broker.broker.responders import HttpResponder, ResponderDirectory
from qos_broker.broker.store import RecordStore

__all__ = [
    "BrokerApi",
    "Broker",
    "parse_period",
    "AuthorizationDecision",
    "AuthorizationRule",
    "ConsumerRecord",
    "CredentialMapping",
    "NegotiationAttempt",
    "Policy",
    "ProviderRecord",
    "ProvisioningResult",
    "SelectionRule",
    "UsageReport",
    "UsageRow",
    "HttpResponder",
    "ResponderDirectory",
    "RecordStore",
]
