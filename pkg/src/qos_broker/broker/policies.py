"""Policy evaluation: authorization decisions and selection pre-filters."""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from qos_broker.broker.records import AuthorizationDecision, Policy

DEFAULT_DENY = "no matching authorization policy"


def authorize(
    policies: Iterable[Policy],
    principal_id: str,
    action: str,
    consumer_id: str,
    group: str | None = None,
) -> AuthorizationDecision:
    """First matching authorization policy, in policy id order, decides; default deny.

    Args:
        policies: Every stored policy; selection policies are ignored.
        principal_id: Acting member identity.
        action: Action name (e.g. "submit_request").
        consumer_id: Consumer the action is performed for.
        group: Consumer group tag.

    Returns:
        AuthorizationDecision naming the deciding policy, if any.
    """
    for policy in sorted(policies, key=lambda p: p.policy_id):
        rule = policy.authorization
        if rule is None or not rule.matches(principal_id, action, consumer_id, group):
            continue
        return AuthorizationDecision(
            allowed=rule.effect == "allow",
            reason=f"{rule.effect} by {policy.policy_id}",
            policy_id=policy.policy_id,
        )
    return AuthorizationDecision(allowed=False, reason=DEFAULT_DENY)


@dataclass(frozen=True)
class SelectionFilter:
    """Providers left for ranking and the threshold override, if any."""

    provider_ids: list[str]
    threshold: float | None
    policy_ids: list[str]


def apply_selection_policies(
    policies: Iterable[Policy],
    consumer_id: str,
    service_type: str,
    provider_ids: Sequence[str],
) -> SelectionFilter:
    """Filter candidate providers through every matching selection policy.

    Allow lists intersect, deny lists subtract. When several policies set a
    minimum acceptance the highest one applies.
    """
    remaining = list(provider_ids)
    threshold: float | None = None
    applied = []

    for policy in sorted(policies, key=lambda p: p.policy_id):
        rule = policy.selection
        if rule is None or not rule.matches(consumer_id, service_type):
            continue
        applied.append(policy.policy_id)
        if rule.allow is not None:
            remaining = [p for p in remaining if p in rule.allow]
        remaining = [p for p in remaining if p not in rule.deny]
        if rule.min_acceptance is not None:
            threshold = max(threshold or 0.0, rule.min_acceptance)

    return SelectionFilter(provider_ids=remaining, threshold=threshold, policy_ids=applied)
