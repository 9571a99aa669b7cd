"""Consumer requirement profiles."""

import json
import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from qos_broker.errors import ProfileError
from qos_broker.qos.attributes import AttributeCatalog, QoSVector

WEIGHT_SUM_TOLERANCE = 1e-9


def profile_violations(
    minima: Mapping[str, Any],
    weights: Mapping[str, Any],
    sensitivities: Mapping[str, Any],
    budget: Any = None,
) -> list[ProfileError]:
    """List every invariant a candidate profile breaks, in attribute order."""
    problems: list[ProfileError] = []

    if not minima:
        problems.append(ProfileError("profile has no attributes"))
        return problems

    for name, table in (("weights", weights), ("sensitivities", sensitivities)):
        for attribute_id in minima:
            if attribute_id not in table:
                problems.append(ProfileError(f"missing from {name}", attribute_id))
        for attribute_id in table:
            if attribute_id not in minima:
                problems.append(ProfileError(f"{name} entry has no minimum", attribute_id))

    for attribute_id, value in minima.items():
        if not _is_number(value) or not 0.0 <= value <= 1.0:
            problems.append(ProfileError(f"minimum {value} outside [0, 1]", attribute_id))

    for attribute_id, value in weights.items():
        if not _is_number(value) or not 0.0 <= value <= 1.0:
            problems.append(ProfileError(f"weight {value} outside [0, 1]", attribute_id))

    for attribute_id, value in sensitivities.items():
        if not _is_number(value) or value < 0.0:
            problems.append(ProfileError(f"sensitivity {value} is negative", attribute_id))

    numeric_weights = [float(v) for v in weights.values() if _is_number(v)]
    if len(numeric_weights) == len(weights):
        total = math.fsum(numeric_weights)
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            problems.append(ProfileError(f"weights sum to {total:.12g}, expected 1"))

    if budget is not None and (not _is_number(budget) or budget < 0.0):
        problems.append(ProfileError(f"budget {budget} must be a non-negative amount"))

    return problems


def _is_number(value: Any) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


class RequirementProfile(BaseModel):
    """Minimum qualities M, weights w, sensitivities beta and an optional budget."""

    model_config = ConfigDict(frozen=True)

    minima: QoSVector
    weights: dict[str, float]
    sensitivities: dict[str, float]
    budget: float | None = None

    @model_validator(mode="before")
    @classmethod
    def _check_invariants(cls, data: Any) -> Any:
        if not isinstance(data, Mapping):
            return data
        minima = data.get("minima") or {}
        if isinstance(minima, QoSVector):
            minima = minima.as_mapping()
        problems = profile_violations(
            minima,
            data.get("weights") or {},
            data.get("sensitivities") or {},
            data.get("budget"),
        )
        if problems:
            raise problems[0]
        return data

    @property
    def attributes(self) -> tuple[str, ...]:
        return self.minima.attributes

    @property
    def weight_vector(self) -> tuple[float, ...]:
        return tuple(self.weights[a] for a in self.attributes)

    @property
    def sensitivity_vector(self) -> tuple[float, ...]:
        return tuple(self.sensitivities[a] for a in self.attributes)

    def with_uniform_sensitivity(self, beta: float) -> "RequirementProfile":
        """Copy of this profile with every sensitivity replaced by beta."""
        return validate_profile(
            {
                "minima": self.minima,
                "weights": self.weights,
                "sensitivities": {a: beta for a in self.attributes},
                "budget": self.budget,
            }
        )

    def aligned(self, catalog: AttributeCatalog) -> "RequirementProfile":
        """Copy of this profile with minima in catalog order."""
        return self.model_copy(update={"minima": catalog.align(self.minima)})


def validate_profile(candidate: RequirementProfile | Mapping[str, Any]) -> RequirementProfile:
    """Return a validated profile or raise ProfileError naming the offending attribute.

    Args:
        candidate: A profile (re-checked) or its JSON-shaped mapping.

    Returns:
        RequirementProfile satisfying every invariant.
    """
    data: Any = candidate.model_dump() if isinstance(candidate, RequirementProfile) else candidate
    if not isinstance(data, Mapping):
        raise ProfileError(f"profile must be a mapping, got {type(data).__name__}")
    try:
        return RequirementProfile.model_validate(data)
    except ValidationError as exc:
        raise _profile_error(exc) from exc


def _profile_error(exc: ValidationError) -> ProfileError:
    """Recover the first ProfileError wrapped by pydantic, or build one."""
    for error in exc.errors():
        cause = error.get("ctx", {}).get("error")
        if isinstance(cause, ProfileError):
            return cause
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or None
    return ProfileError(first.get("msg", "invalid profile"), location)


def load_profile(path: Path, catalog: AttributeCatalog | None = None) -> RequirementProfile:
    """Load a profile JSON file (fields minima, weights, sensitivities, budget)."""
    with open(path) as f:
        data = json.load(f)
    profile = validate_profile(data)
    return profile.aligned(catalog) if catalog else profile
