"""QoS model - attribute catalog, normalization, requirement profiles, tiers."""

from qos_broker.qos.attributes import (
    AttributeCatalog,
    AttributeSpec,
    QoSVector,
    default_catalog,
    load_catalog,
    normalize_metric,
)
from qos_broker.qos.offerings import Offering
from qos_broker.qos.profiles import RequirementProfile, load_profile, validate_profile
from qos_broker.qos.terms import KNOWN_TERMS, unmet_terms
from qos_broker.qos.tiers import (
    ServiceTier,
    TierTable,
    default_tier_table,
    load_tier_table,
    tier_to_profile,
)

__all__ = [
    "AttributeCatalog",
    "AttributeSpec",
    "QoSVector",
    "default_catalog",
    "load_catalog",
    "normalize_metric",
    "Offering",
    "RequirementProfile",
    "load_profile",
    "validate_profile",
    "KNOWN_TERMS",
    "unmet_terms",
    "ServiceTier",
    "TierTable",
    "default_tier_table",
    "load_tier_table",
    "tier_to_profile",
]
