"""Exception hierarchy for the broker."""


class BrokerError(Exception):
    """Base class for every error raised by qos_broker."""


class AttributeValueError(BrokerError, ValueError):
    """A value for a QoS attribute is outside its domain."""

    def __init__(self, attribute_id: str, reason: str):
        self.attribute_id = attribute_id
        self.reason = reason
        super().__init__(f"{attribute_id}: {reason}")


class ProfileError(BrokerError, ValueError):
    """A requirement profile violates its invariants."""

    def __init__(self, reason: str, attribute_id: str | None = None):
        self.attribute_id = attribute_id
        self.reason = reason
        prefix = f"{attribute_id}: " if attribute_id else ""
        super().__init__(f"{prefix}{reason}")


class CatalogMismatchError(BrokerError, ValueError):
    """Vectors or profiles reference different attribute catalogs."""


class UnknownAttributeError(BrokerError, LookupError):
    """An attribute id does not exist in the catalog."""


class UnknownTierError(BrokerError, LookupError):
    """A service tier name is not defined in the tier table."""


class TierTableError(BrokerError, ValueError):
    """The tier table violates platinum >= gold >= silver."""


class ServiceTypeMismatchError(BrokerError, ValueError):
    """An offering does not provide the requested service type."""


class InvalidTransitionError(BrokerError):
    """A negotiation session was asked to leave the declared edge set."""


class ContractStateError(BrokerError):
    """The operation needs an Active contract."""


class DuplicateRecordError(BrokerError):
    """A record with the same id already exists."""


class RecordNotFoundError(BrokerError, LookupError):
    """No record with the requested id exists."""


class NoProvidersError(BrokerError):
    """No registered provider offers the requested service type."""


class UnknownPrincipalError(BrokerError, LookupError):
    """The principal does not belong to any subscribed consumer."""


class NoActiveContractError(BrokerError):
    """The principal's consumer holds no Active contract with the provider."""


class AuthorizationDenied(BrokerError):
    """An authorization policy denied the action."""

    def __init__(self, principal_id: str, action: str, reason: str):
        self.principal_id = principal_id
        self.action = action
        self.reason = reason
        super().__init__(f"{principal_id} may not {action}: {reason}")


class ReportPeriodError(BrokerError, ValueError):
    """A report period is malformed or empty."""


class ScenarioError(BrokerError, ValueError):
    """A scenario file is unreadable or violates its schema."""


class ResponderUnreachable(BrokerError, ConnectionError):
    """A provider negotiation endpoint could not be reached."""


class InvalidReplyError(ResponderUnreachable):
    """A provider endpoint answered with something other than a negotiation message."""


class EmptyOfferingsError(BrokerError, ValueError):
    """There is nothing to rank."""


class SweepGridError(BrokerError, ValueError):
    """A sensitivity grid is empty or its step is not positive."""


class SubjectCollisionError(BrokerError, ValueError):
    """An offering id collides with the sweep's consumer-minimum subject."""
