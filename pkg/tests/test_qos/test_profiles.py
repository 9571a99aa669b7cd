"""Tests for requirement profiles, tiers and qualitative terms."""

import copy
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qos_broker.errors import ProfileError, TierTableError, UnknownTierError
from qos_broker.qos.profiles import load_profile, profile_violations, validate_profile
from qos_broker.qos.terms import unmet_terms, validate_terms
from qos_broker.qos.tiers import (
    TierTable,
    default_tier_table,
    load_tier_table,
    tier_to_profile,
)
from tests.conftest import DATA_DIR, EXAMPLE_PROFILE


def _profile(**changes):
    data = copy.deepcopy(EXAMPLE_PROFILE)
    for key, value in changes.items():
        data[key] = value
    return data


class TestValidateProfile:
    """Tests for validate_profile."""

    def test_worked_example_profile(self):
        """The worked example profile is valid."""
        profile = validate_profile(EXAMPLE_PROFILE)

        assert profile.attributes == ("availability", "response_time", "reliability", "throughput")
        assert profile.weight_vector == (0.35, 0.15, 0.35, 0.15)
        assert profile.sensitivity_vector == (1.0, 1.0, 1.0, 1.0)
        assert profile.budget is None

    def test_weights_must_sum_to_one(self):
        """Weights summing to 0.99 are rejected."""
        weights = dict(EXAMPLE_PROFILE["weights"], throughput=0.14)
        with pytest.raises(ProfileError, match="sum"):
            validate_profile(_profile(weights=weights))

    def test_negative_sensitivity_names_attribute(self):
        """The error names the offending attribute."""
        sensitivities = dict(EXAMPLE_PROFILE["sensitivities"], reliability=-1)
        with pytest.raises(ProfileError) as info:
            validate_profile(_profile(sensitivities=sensitivities))

        assert info.value.attribute_id == "reliability"

    def test_minimum_outside_unit_interval(self):
        minima = dict(EXAMPLE_PROFILE["minima"], availability=1.2)
        with pytest.raises(ProfileError) as info:
            validate_profile(_profile(minima=minima))

        assert info.value.attribute_id == "availability"

    def test_missing_weight(self):
        """Every attribute needs a weight."""
        weights = {"availability": 0.5, "response_time": 0.5, "reliability": 0.0}
        with pytest.raises(ProfileError) as info:
            validate_profile(_profile(weights=weights))

        assert info.value.attribute_id == "throughput"

    def test_negative_budget(self):
        with pytest.raises(ProfileError, match="budget"):
            validate_profile(_profile(budget=-1))

    def test_not_a_mapping(self):
        with pytest.raises(ProfileError):
            validate_profile(["minima"])  # type: ignore[arg-type]

    def test_violations_listed_together(self):
        """profile_violations reports every broken invariant, not only the first."""
        problems = profile_violations(
            {"availability": 2.0, "reliability": 0.5},
            {"availability": 0.7, "reliability": 0.7},
            {"availability": -1, "reliability": 1},
        )
        reasons = [str(p) for p in problems]

        assert any("availability: minimum" in r for r in reasons)
        assert any("availability: sensitivity" in r for r in reasons)
        assert any("sum" in r for r in reasons)

    def test_uniform_sensitivity(self):
        """with_uniform_sensitivity keeps minima and weights."""
        profile = validate_profile(EXAMPLE_PROFILE).with_uniform_sensitivity(0.0)

        assert set(profile.sensitivities.values()) == {0.0}
        assert profile.weights == validate_profile(EXAMPLE_PROFILE).weights

    def test_aligned(self, catalog):
        """aligned() reorders minima into catalog order."""
        reversed_minima = dict(reversed(list(EXAMPLE_PROFILE["minima"].items())))
        profile = validate_profile(_profile(minima=reversed_minima)).aligned(catalog)

        assert profile.attributes == catalog.ids

    def test_load_bundled_profile(self, catalog):
        """data/example_profile.json loads as the worked example profile."""
        profile = load_profile(DATA_DIR / "example_profile.json", catalog)

        assert profile == validate_profile(EXAMPLE_PROFILE).aligned(catalog)


ATTRIBUTE_IDS = ("availability", "response_time", "reliability", "throughput")

loose_value = st.floats(min_value=-0.5, max_value=1.5, allow_nan=False)


@st.composite
def candidate_profiles(draw):
    """Profile mappings that may break any invariant, with weights optionally normalized."""
    ids = draw(st.lists(st.sampled_from(ATTRIBUTE_IDS), unique=True, max_size=4))
    keyed = st.lists(st.sampled_from(ATTRIBUTE_IDS), unique=True, max_size=4)
    weight_ids = ids if draw(st.booleans()) else draw(keyed)
    weights = {a: draw(st.floats(min_value=0.0, max_value=1.0)) for a in weight_ids}
    if draw(st.booleans()) and math.fsum(weights.values()) > 0:
        total = math.fsum(weights.values())
        weights = {a: w / total for a, w in weights.items()}
    if draw(st.booleans()):
        weights = {a: draw(loose_value) for a in weights}
    sensitivity_ids = ids if draw(st.booleans()) else draw(keyed)
    return {
        "minima": {a: draw(loose_value) for a in ids},
        "weights": weights,
        "sensitivities": {
            a: draw(st.floats(min_value=-1.0, max_value=5.0)) for a in sensitivity_ids
        },
        "budget": draw(st.none() | st.floats(min_value=-10.0, max_value=100.0)),
    }


class TestProfileProperties:
    """validate_profile agrees with profile_violations on random candidates."""

    @settings(max_examples=1000)
    @given(candidate=candidate_profiles())
    def test_valid_iff_no_violations(self, candidate):
        problems = profile_violations(
            candidate["minima"],
            candidate["weights"],
            candidate["sensitivities"],
            candidate["budget"],
        )

        if not problems:
            profile = validate_profile(candidate)
            assert profile.attributes == tuple(candidate["minima"])
            assert profile.weights == candidate["weights"]
            assert profile.budget == candidate["budget"]
            return

        with pytest.raises(ProfileError) as info:
            validate_profile(candidate)
        assert str(info.value) == str(problems[0])
        assert info.value.attribute_id == problems[0].attribute_id



class TestTiers:
    """Tests for the service tier table."""

    def test_default_table_matches_bundled_file(self, catalog):
        """Gold and silver step down from platinum by 0.05 and 0.10."""
        assert load_tier_table(DATA_DIR / "tiers.json", catalog) == default_tier_table(catalog)

    def test_platinum_is_worked_example_minima(self, catalog):
        platinum = default_tier_table(catalog).tier("platinum")

        assert platinum.minima.as_mapping() == EXAMPLE_PROFILE["minima"]

    def test_order_enforced(self, catalog):
        """A gold minimum above platinum is rejected."""
        platinum = catalog.vector({a: 0.5 for a in catalog.ids})
        gold = catalog.vector({a: 0.6 for a in catalog.ids})
        with pytest.raises((TierTableError, ValueError)):
            TierTable(tiers={"platinum": platinum, "gold": gold})

    def test_unknown_tier(self, catalog):
        with pytest.raises(UnknownTierError, match="bronze"):
            default_tier_table(catalog).tier("bronze")

    def test_invalid_file(self, tmp_path, catalog):
        path = tmp_path / "tiers.json"
        path.write_text(json.dumps({"tiers": {"bronze": EXAMPLE_PROFILE["minima"]}}))
        with pytest.raises(TierTableError):
            load_tier_table(path, catalog)

    def test_tier_to_profile(self, catalog):
        """A tier and weights give a profile whose minima are the tier template."""
        tier = default_tier_table(catalog).tier("gold")
        profile = tier_to_profile(
            tier, EXAMPLE_PROFILE["weights"], EXAMPLE_PROFILE["sensitivities"], budget=120.0
        )

        assert profile.minima == tier.minima
        assert profile.budget == 120.0


class TestTerms:
    """Tests for qualitative terms."""

    def test_valid_terms(self):
        terms = {"tenant-isolation": True, "security-audit": "annual"}
        assert validate_terms(terms) == terms

    def test_term_names_are_kebab_case(self):
        with pytest.raises(ValueError, match="kebab-case"):
            validate_terms({"Tenant_Isolation": True})

    def test_unmet_terms(self):
        """Dropped or changed terms are unmet, extra offered terms are fine."""
        demanded = {"tenant-isolation": True, "security-audit": "annual", "full-data-access": True}
        offered = {"tenant-isolation": True, "security-audit": "never", "anti-theft-mechanisms": True}

        assert unmet_terms(demanded, offered) == ["full-data-access", "security-audit"]
