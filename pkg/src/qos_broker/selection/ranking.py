"""Ranking of provider offerings against a requirement profile."""

from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict

from qos_broker.errors import EmptyOfferingsError
from qos_broker.qos.attributes import QoSVector
from qos_broker.qos.profiles import RequirementProfile
from qos_broker.selection.utility import (
    UtilityScore,
    acceptance_threshold,
    aggregate_utility,
    is_acceptable,
)


class RankingEntry(BaseModel):
    """One ranked provider."""

    model_config = ConfigDict(frozen=True)

    provider_id: str
    score: UtilityScore
    accepted: bool

    @property
    def utility(self) -> float:
        return self.score.utility


class RankingResult(BaseModel):
    """Providers sorted by utility (descending, ties by provider id)."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[RankingEntry, ...]
    threshold: float
    profile: RequirementProfile

    @property
    def order(self) -> list[str]:
        return [entry.provider_id for entry in self.entries]

    @property
    def accepted(self) -> list[str]:
        return [entry.provider_id for entry in self.entries if entry.accepted]

    @property
    def rejected(self) -> list[str]:
        return [entry.provider_id for entry in self.entries if not entry.accepted]


def rank_offerings(
    offerings: Sequence[tuple[str, QoSVector]],
    profile: RequirementProfile,
    threshold: float | None = None,
) -> RankingResult:
    """Rank offerings by aggregate utility and flag those meeting the threshold.

    Args:
        offerings: (provider id, advertised QoS vector) pairs.
        profile: Consumer requirement profile.
        threshold: Override for the threshold derived from the profile minima
            (set by a selection policy).

    Returns:
        RankingResult sorted by utility descending, provider id ascending on ties.
    """
    if not offerings:
        raise EmptyOfferingsError("Cannot rank an empty list of offerings")

    cutoff = acceptance_threshold(profile) if threshold is None else threshold
    scores = [aggregate_utility(qos, profile, provider_id) for provider_id, qos in offerings]
    scores.sort(key=lambda s: (-s.utility, s.subject))

    return RankingResult(
        entries=tuple(
            RankingEntry(
                provider_id=score.subject,
                score=score,
                accepted=is_acceptable(score.utility, cutoff),
            )
            for score in scores
        ),
        threshold=cutoff,
        profile=profile,
    )
