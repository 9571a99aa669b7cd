"""Aggregate utility of a QoS vector under a requirement profile.

U = sum_i w_i * x_i ** beta_i, with 0 ** 0 taken as 1 (an indifferent consumer).
"""

import math
from decimal import ROUND_HALF_UP, Decimal

from pydantic import BaseModel, ConfigDict

from qos_broker.errors import AttributeValueError
from qos_broker.qos.attributes import QoSVector, require_same_catalog
from qos_broker.qos.profiles import RequirementProfile

CONSUMER_SUBJECT = "consumer-minimum"

# Acceptance compares U >= threshold - ACCEPTANCE_EPSILON
ACCEPTANCE_EPSILON = 1e-9


class UtilityScore(BaseModel):
    """Aggregate utility of one subject with its per-attribute contributions."""

    model_config = ConfigDict(frozen=True)

    subject: str
    utility: float
    contributions: dict[str, float]

    @property
    def display(self) -> str:
        return display_utility(self.utility)


def attribute_utility(x: float, beta: float, attribute_id: str = "x") -> float:
    """Utility x ** beta of one normalized quality.

    Args:
        x: Normalized quality in [0, 1].
        beta: Consumer sensitivity, >= 0.
        attribute_id: Used in error messages only.

    Returns:
        Utility in [0, 1].
    """
    if not math.isfinite(x) or not 0.0 <= x <= 1.0:
        raise AttributeValueError(attribute_id, f"quality {x} outside [0, 1]")
    if not math.isfinite(beta) or beta < 0.0:
        raise AttributeValueError(attribute_id, f"sensitivity {beta} must be >= 0")
    if beta == 0.0:
        return 1.0
    return x**beta


def aggregate_utility(
    qos: QoSVector, profile: RequirementProfile, subject: str = ""
) -> UtilityScore:
    """Weighted sum of attribute utilities.

    The sum is exactly rounded (math.fsum), so it does not depend on
    attribute order.
    """
    require_same_catalog(qos.attributes, profile.attributes)

    contributions = {
        attribute_id: profile.weights[attribute_id]
        * attribute_utility(x, profile.sensitivities[attribute_id], attribute_id)
        for attribute_id, x in qos.items()
    }
    return UtilityScore(
        subject=subject,
        utility=math.fsum(contributions.values()),
        contributions=contributions,
    )


def acceptance_threshold(profile: RequirementProfile) -> float:
    """Utility of the consumer's own minimum-requirements vector."""
    return aggregate_utility(profile.minima, profile, CONSUMER_SUBJECT).utility


def is_acceptable(utility: float, threshold: float) -> bool:
    """Inclusive acceptance: U >= threshold - epsilon."""
    return utility >= threshold - ACCEPTANCE_EPSILON


def display_utility(utility: float) -> str:
    """Round half-up to two decimals for display; comparisons never use this."""
    return str(Decimal(repr(utility)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
