"""Tests for utility computation and ranking."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qos_broker.errors import AttributeValueError, CatalogMismatchError, EmptyOfferingsError
from qos_broker.qos.attributes import QoSVector, default_catalog
from qos_broker.qos.profiles import validate_profile
from qos_broker.selection.ranking import rank_offerings
from qos_broker.selection.utility import (
    acceptance_threshold,
    aggregate_utility,
    attribute_utility,
    display_utility,
    is_acceptable,
)

EXPECTED_UTILITY = {"SP4": 0.9185, "SP3": 0.908, "SP1": 0.882, "SP2": 0.87}

quality = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
sensitivity = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)


@st.composite
def profiles(draw):
    """Random valid profiles over the default catalog."""
    ids = default_catalog().ids
    raw = draw(st.lists(st.integers(min_value=0, max_value=100), min_size=4, max_size=4))
    if sum(raw) == 0:
        raw = [1, 0, 0, 0]
    total = sum(raw)
    weights = [r / total for r in raw[:-1]]
    weights.append(1.0 - sum(weights))
    return validate_profile(
        {
            "minima": {a: draw(quality) for a in ids},
            "weights": {a: max(0.0, w) for a, w in zip(ids, weights)},
            "sensitivities": {a: draw(sensitivity) for a in ids},
        }
    )


@st.composite
def vectors(draw):
    catalog = default_catalog()
    return catalog.vector({a: draw(quality) for a in catalog.ids})


class TestAttributeUtility:
    """Tests for attribute_utility."""

    def test_linear(self):
        assert attribute_utility(0.7, 1.0) == 0.7

    def test_zero_to_the_zero_is_one(self):
        """An indifferent consumer is fully satisfied even by a zero quality."""
        assert attribute_utility(0.0, 0.0) == 1.0

    def test_zero_quality_with_positive_sensitivity(self):
        assert attribute_utility(0.0, 2.0) == 0.0

    def test_rejects_out_of_range_quality(self):
        with pytest.raises(AttributeValueError, match="availability"):
            attribute_utility(1.5, 1.0, "availability")

    def test_rejects_negative_sensitivity(self):
        with pytest.raises(AttributeValueError):
            attribute_utility(0.5, -0.1)

    @settings(max_examples=1000)
    @given(x=quality, low=sensitivity, high=sensitivity)
    def test_higher_sensitivity_never_raises_utility(self, x, low, high):
        """For x in [0, 1] the utility is non-increasing in beta."""
        low, high = sorted((low, high))
        assert attribute_utility(x, high) <= attribute_utility(x, low) + 1e-12


class TestWorkedExample:
    """The four-provider grammar-checker example."""

    def test_utilities(self, example_offerings, example_profile):
        for provider_id, qos in example_offerings:
            score = aggregate_utility(qos, example_profile, provider_id)
            assert score.utility == pytest.approx(EXPECTED_UTILITY[provider_id], abs=1e-12)

    def test_threshold(self, example_profile):
        assert acceptance_threshold(example_profile) == pytest.approx(0.908, abs=1e-12)
        assert display_utility(acceptance_threshold(example_profile)) == "0.91"

    def test_ranking(self, example_offerings, example_profile):
        """SP4 first, SP3 accepted at exactly the threshold, SP1 and SP2 rejected."""
        ranking = rank_offerings(example_offerings, example_profile)

        assert ranking.order == ["SP4", "SP3", "SP1", "SP2"]
        assert ranking.accepted == ["SP4", "SP3"]
        assert ranking.rejected == ["SP1", "SP2"]
        assert [e.score.display for e in ranking.entries] == ["0.92", "0.91", "0.88", "0.87"]

    def test_contributions_sum_to_utility(self, example_offerings, example_profile):
        score = aggregate_utility(example_offerings[3][1], example_profile, "SP4")

        assert sum(score.contributions.values()) == pytest.approx(score.utility)
        assert score.contributions["availability"] == pytest.approx(0.35 * 0.98)

    def test_catalog_mismatch(self, example_profile):
        vector = QoSVector(attributes=("availability",), values=(1.0,))
        with pytest.raises(CatalogMismatchError):
            aggregate_utility(vector, example_profile)


class TestRanking:
    """Tests for rank_offerings."""

    def test_ties_broken_by_provider_id(self, catalog, example_profile):
        qos = catalog.vector({a: 0.9 for a in catalog.ids})
        ranking = rank_offerings([("b", qos), ("a", qos), ("c", qos)], example_profile)

        assert ranking.order == ["a", "b", "c"]

    def test_threshold_override(self, example_offerings, example_profile):
        """A selection policy threshold replaces the one derived from the minima."""
        ranking = rank_offerings(example_offerings, example_profile, threshold=0.915)

        assert ranking.accepted == ["SP4"]
        assert ranking.threshold == 0.915

    def test_empty(self, example_profile):
        with pytest.raises(EmptyOfferingsError):
            rank_offerings([], example_profile)

    def test_display_rounds_half_up(self):
        assert display_utility(0.875) == "0.88"
        assert display_utility(0.9185) == "0.92"
        assert display_utility(0.87) == "0.87"

    def test_is_acceptable_inclusive(self):
        assert is_acceptable(0.908, 0.908)
        assert is_acceptable(0.908 - 1e-12, 0.908)
        assert not is_acceptable(0.907, 0.908)


class TestUtilityProperties:
    """Properties over random profiles and offerings."""

    @settings(max_examples=1000)
    @given(profile=profiles(), qos=vectors())
    def test_utility_in_unit_interval(self, profile, qos):
        assert -1e-12 <= aggregate_utility(qos, profile).utility <= 1.0 + 1e-12

    @settings(max_examples=1000)
    @given(profile=profiles(), qos=vectors())
    def test_dominating_minima_is_accepted(self, profile, qos):
        """An offering at least as good as the minima everywhere is always accepted."""
        if not qos.dominates(profile.minima):
            qos = default_catalog().vector(
                {a: max(x, m) for (a, x), m in zip(qos.items(), profile.minima.values)}
            )
        ranking = rank_offerings([("p", qos)], profile)

        assert ranking.accepted == ["p"]

    @settings(max_examples=1000)
    @given(profile=profiles(), offerings=st.lists(vectors(), min_size=1, max_size=6))
    def test_ranking_sorted_and_accepted_prefix(self, profile, offerings):
        """Utilities are non-increasing and the accepted set is a prefix of the order."""
        ranking = rank_offerings(
            [(f"p{i:02d}", qos) for i, qos in enumerate(offerings)], profile
        )
        utilities = [e.utility for e in ranking.entries]
        flags = [e.accepted for e in ranking.entries]

        assert utilities == sorted(utilities, reverse=True)
        assert flags == sorted(flags, reverse=True)

    @settings(max_examples=1000)
    @given(profile=profiles(), qos=vectors())
    def test_zero_sensitivity_gives_full_utility(self, profile, qos):
        """With every beta at 0 each attribute contributes its full weight."""
        indifferent = profile.with_uniform_sensitivity(0.0)
        assert aggregate_utility(qos, indifferent).utility == pytest.approx(1.0)

    @settings(max_examples=1000)
    @given(
        profile=profiles(),
        qos=vectors(),
        index=st.integers(min_value=0, max_value=3),
        raised=quality,
    )
    def test_raising_a_quality_never_lowers_utility(self, profile, qos, index, raised):
        values = list(qos.values)
        values[index] = max(values[index], raised)
        better = QoSVector(attributes=qos.attributes, values=tuple(values))

        assert (
            aggregate_utility(better, profile).utility
            >= aggregate_utility(qos, profile).utility - 1e-12
        )

    @settings(max_examples=1000)
    @given(profile=profiles(), qos=vectors(), low=sensitivity, high=sensitivity)
    def test_higher_uniform_sensitivity_never_raises_utility(self, profile, qos, low, high):
        low, high = sorted((low, high))
        relaxed = aggregate_utility(qos, profile.with_uniform_sensitivity(low)).utility
        strict = aggregate_utility(qos, profile.with_uniform_sensitivity(high)).utility

        assert strict <= relaxed + 1e-12

    @settings(max_examples=1000)
    @given(profile=profiles(), a=vectors(), b=vectors())
    def test_dominating_offering_scores_at_least_as_high(self, profile, a, b):
        upper = QoSVector(
            attributes=a.attributes, values=tuple(max(x, y) for x, y in zip(a.values, b.values))
        )
        assert upper.dominates(b)
        assert aggregate_utility(upper, profile).utility >= (
            aggregate_utility(b, profile).utility - 1e-12
        )

    @settings(max_examples=1000)
    @given(profile=profiles(), qos=vectors(), order=st.permutations(range(4)))
    def test_attribute_order_does_not_change_utility(self, profile, qos, order):
        """Reordering the attributes of both the vector and the profile keeps the utility."""
        ids = [profile.attributes[i] for i in order]
        reordered_profile = validate_profile(
            {
                "minima": {a: profile.minima[a] for a in ids},
                "weights": profile.weights,
                "sensitivities": profile.sensitivities,
            }
        )
        reordered_qos = QoSVector(attributes=tuple(ids), values=tuple(qos[a] for a in ids))

        assert reordered_profile.attributes == tuple(ids)
        assert aggregate_utility(reordered_qos, reordered_profile).utility == (
            aggregate_utility(qos, profile).utility
        )
        assert acceptance_threshold(reordered_profile) == acceptance_threshold(profile)

    @settings(max_examples=1000)
    @given(
        profile=profiles(),
        offerings=st.lists(vectors(), min_size=1, max_size=6),
        data=st.data(),
    )
    def test_offering_order_does_not_change_ranking(self, profile, offerings, data):
        named = [(f"p{i:02d}", qos) for i, qos in enumerate(offerings)]
        shuffled = data.draw(st.permutations(named))

        assert rank_offerings(shuffled, profile) == rank_offerings(named, profile)

    @settings(max_examples=1000)
    @given(profile=profiles())
    def test_minima_meet_their_own_threshold(self, profile):
        """The minima vector is accepted and its utility is the threshold."""
        ranking = rank_offerings([("minima", profile.minima)], profile)

        assert ranking.accepted == ["minima"]
        assert ranking.threshold == aggregate_utility(profile.minima, profile).utility
