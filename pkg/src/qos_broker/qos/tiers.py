"""Service tiers (platinum, gold, silver) and their minima templates."""

import json
from collections.abc import Mapping
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from qos_broker.errors import TierTableError, UnknownTierError
from qos_broker.qos.attributes import AttributeCatalog, QoSVector, default_catalog
from qos_broker.qos.profiles import RequirementProfile, validate_profile

TierName = Literal["platinum", "gold", "silver"]
TIER_ORDER: tuple[TierName, ...] = ("platinum", "gold", "silver")

# Minimum requirements of the worked example, adopted as the platinum row
PLATINUM_DEFAULTS = {
    "availability": 0.98,
    "response_time": 0.65,
    "reliability": 0.95,
    "throughput": 0.90,
}
GOLD_STEP = 0.05
SILVER_STEP = 0.10


class ServiceTier(BaseModel):
    """A named service level and its minimum qualities."""

    model_config = ConfigDict(frozen=True)

    name: TierName
    minima: QoSVector


class TierTable(BaseModel):
    """Tier name to minima template, ordered platinum >= gold >= silver."""

    model_config = ConfigDict(frozen=True)

    tiers: dict[str, QoSVector]

    @model_validator(mode="after")
    def _check_order(self) -> "TierTable":
        unknown = sorted(set(self.tiers) - set(TIER_ORDER))
        if unknown:
            raise TierTableError(f"Unknown tier names: {unknown}")

        present = [name for name in TIER_ORDER if name in self.tiers]
        for higher, lower in zip(present, present[1:]):
            upper, under = self.tiers[higher], self.tiers[lower]
            if upper.attributes != under.attributes:
                raise TierTableError(f"{higher} and {lower} use different attributes")
            for attribute_id, hi, lo in zip(upper.attributes, upper.values, under.values):
                if hi < lo:
                    raise TierTableError(
                        f"{attribute_id}: {higher} minimum {hi} below {lower} minimum {lo}"
                    )
        return self

    def tier(self, name: str) -> ServiceTier:
        if name not in self.tiers:
            raise UnknownTierError(f"Unknown tier: {name}. Defined: {sorted(self.tiers)}")
        return ServiceTier(name=name, minima=self.tiers[name])  # type: ignore[arg-type]


def default_tier_table(catalog: AttributeCatalog | None = None) -> TierTable:
    """Platinum from the worked example; gold and silver step down from it, floored at 0."""
    catalog = catalog or default_catalog()
    platinum = catalog.vector(PLATINUM_DEFAULTS)

    def lowered(step: float) -> QoSVector:
        return catalog.vector({a: round(max(0.0, v - step), 10) for a, v in platinum.items()})

    return TierTable(
        tiers={"platinum": platinum, "gold": lowered(GOLD_STEP), "silver": lowered(SILVER_STEP)}
    )


def load_tier_table(path: Path, catalog: AttributeCatalog | None = None) -> TierTable:
    """Load a tier table JSON file of the form ``{"tiers": {name: {attribute: minimum}}}``."""
    with open(path) as f:
        data = json.load(f)
    try:
        table = TierTable.model_validate(data)
    except ValidationError as exc:
        raise TierTableError(str(exc)) from exc
    if catalog is not None:
        table = TierTable(tiers={n: catalog.align(v) for n, v in table.tiers.items()})
    return table


def tier_to_profile(
    tier: ServiceTier,
    weights: Mapping[str, float],
    sensitivities: Mapping[str, float],
    budget: float | None = None,
) -> RequirementProfile:
    """Turn a tier into a requirement profile whose minima are the tier template.

    Args:
        tier: Service tier from the configured table.
        weights: Per-attribute weights summing to 1.
        sensitivities: Per-attribute sensitivities (>= 0).
        budget: Optional cost ceiling.

    Returns:
        Validated RequirementProfile.
    """
    return validate_profile(
        {
            "minima": tier.minima,
            "weights": dict(weights),
            "sensitivities": dict(sensitivities),
            "budget": budget,
        }
    )
