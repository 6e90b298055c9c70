"""Tests for demand extraction and preference inference."""
from dataclasses import replace

from hypothesis import given, strategies as st
import pytest

from tourplanner.common import PreconditionError
from tourplanner.const import CATEGORIES, CUISINES, DAY_SLOTS, WEEKDAYS
from tourplanner.offline import responders_for
from tourplanner.profile import (
    CityPriceStats,
    EmptyCategorySet,
    ExplicitDemands,
    ExtractionError,
    InferredPrefs,
    StatsMissing,
    build_profile,
    city_stats,
    extract_demands,
    format_demand_fields,
    infer_preferences,
    parse_demand_fields,
    parse_query,
    render_query,
)
from tourplanner.providers import SchemaError
from tourplanner.providers.mock import MockProvider
from tourplanner.sandbox import UnknownCity, sandbox_from_dict

from .common import QUERY, SANDBOX_DOCUMENT

FOUR_DAY_QUERY = (
    "I am looking for a 4-day trip from Wuhan to Xi'an, departing on Thursday early "
    "morning and returning on Sunday evening, with a budget of ¥4100. I'm interested "
    "in historical sites and museums, along with enjoying diverse cuisines like "
    "barbecue, hot pot, Korean, and Japanese dishes."
)

XIAN_STATS = CityPriceStats(
    "Xi'an",
    {"Economy": 150.0, "Midscale": 300.0, "Upscale": 387.0, "Luxury": 900.0},
    (80.0, 120.0, 160.0),
)

DEMANDS = st.builds(
    ExplicitDemands,
    departure_day=st.sampled_from(WEEKDAYS),
    return_day=st.sampled_from(WEEKDAYS),
    departure_slot=st.sampled_from(DAY_SLOTS),
    return_slot=st.sampled_from(DAY_SLOTS),
    duration_days=st.integers(1, 9),
    origin_city=st.sampled_from(["Wuhan", "Nanjing", "Chengdu"]),
    dest_city=st.sampled_from(["Xi'an", "Beijing", "Hangzhou"]),
    other_requirements=st.lists(
        st.sampled_from(["historical sites", "museums", "hiking", "night markets"]),
        min_size=1,
        max_size=3,
        unique=True,
    ).map(tuple),
    budget=st.integers(500, 50000).map(float),
    cuisine_prefs=st.lists(
        st.sampled_from(["Barbecue", "Hot Pot", "Korean Cuisine", "Japanese Cuisine", "Snacks"]),
        max_size=4,
        unique=True,
    ).map(tuple),
)


def test_parse_templated_query():
    demands = parse_query(FOUR_DAY_QUERY)
    assert (demands.origin_city, demands.dest_city, demands.duration_days) == (
        "Wuhan",
        "Xi'an",
        4,
    )
    assert (demands.departure_day, demands.departure_slot) == ("Thursday", "early morning")
    assert (demands.return_day, demands.return_slot) == ("Sunday", "evening")
    assert demands.budget == 4100.0
    assert demands.other_requirements == ("historical sites", "museums")
    assert demands.cuisine_prefs == ("Barbecue", "Hot Pot", "Korean Cuisine", "Japanese Cuisine")
    assert demands.nights == 3


def test_plain_morning_means_early_morning():
    assert parse_query(FOUR_DAY_QUERY.replace("early morning", "morning")).departure_slot == (
        "early morning"
    )


def test_return_day_from_duration():
    query = (
        "I am looking for a 3-day trip from Wuhan to Xi'an, departing on Friday "
        "afternoon, with a budget of ¥3000."
    )
    assert parse_query(query).return_day == "Sunday"


def test_unparseable_query():
    with pytest.raises(ExtractionError):
        parse_query("Take me somewhere nice.")
    with pytest.raises(PreconditionError):
        parse_query("   ")


@given(DEMANDS)
def test_render_then_parse(demands):
    assert parse_query(render_query(demands)) == demands


def test_demand_fields_layout():
    demands = parse_query(FOUR_DAY_QUERY)
    text = format_demand_fields(demands)
    assert "Restaurant Type: [Barbecue, Hot Pot, Korean Cuisine, Japanese Cuisine]" in text
    assert parse_demand_fields(text) == demands
    with pytest.raises(SchemaError):
        parse_demand_fields("nothing useful")


def test_demand_fields_accept_misspelled_key():
    text = format_demand_fields(parse_query(FOUR_DAY_QUERY)).replace(
        "Restaurant Type", "Reastaurant Type"
    )
    assert parse_demand_fields(text).cuisine_prefs[0] == "Barbecue"


@pytest.mark.asyncio
async def test_extract_through_offline_provider(sandbox):
    provider = MockProvider(responders=responders_for(sandbox))
    assert await extract_demands(FOUR_DAY_QUERY, provider) == parse_query(FOUR_DAY_QUERY)


@pytest.mark.asyncio
async def test_extract_falls_back_to_rules():
    provider = MockProvider(responders={"*": lambda request, rng: "I cannot help with that."})
    demands = await extract_demands(FOUR_DAY_QUERY, provider)
    assert demands == parse_query(FOUR_DAY_QUERY)
    assert len(provider.call_log) == 3


def test_infer_preferences_example():
    prefs = infer_preferences(parse_query(FOUR_DAY_QUERY), XIAN_STATS)
    assert prefs == InferredPrefs("Upscale", (71, 216))


def test_infer_preferences_cheapest_when_poor():
    demands = parse_query(FOUR_DAY_QUERY.replace("¥4100", "¥500"))
    assert infer_preferences(demands, XIAN_STATS).hotel_category == "Economy"
    with pytest.raises(StatsMissing):
        infer_preferences(demands, CityPriceStats("Xi'an", {}, (1.0, 2.0, 3.0)))


@given(st.integers(300, 100000), st.integers(300, 100000))
def test_more_budget_never_lowers_category(low, high):
    low, high = sorted((low, high))
    demands = parse_query(FOUR_DAY_QUERY)
    poorer = infer_preferences(replace(demands, budget=float(low)), XIAN_STATS)
    richer = infer_preferences(replace(demands, budget=float(high)), XIAN_STATS)
    assert CATEGORIES.index(poorer.hotel_category) <= CATEGORIES.index(richer.hotel_category)


def sorted_quartile(values, fraction):
    """Return the linear-interpolation percentile of values."""
    ordered = sorted(values)
    position = fraction * (len(ordered) - 1)
    below = int(position)
    above = min(below + 1, len(ordered) - 1)
    return ordered[below] + (ordered[above] - ordered[below]) * (position - below)


def test_city_stats(sandbox):
    stats = city_stats(sandbox, "xi'an")
    assert stats.city == "Xi'an"
    assert stats.hotel_min_price == {"Economy": 168.0, "Upscale": 387.0, "Luxury": 980.0}
    prices = [121.5, 120.0, 130.5, 95.0]
    assert stats.meal_quartiles == pytest.approx(
        [sorted_quartile(prices, q) for q in (0.25, 0.5, 0.75)]
    )
    assert stats.transport_range == (340.0, 500.0)
    assert stats.ordered
    assert CityPriceStats.from_dict(stats.to_dict()) == stats


def test_city_stats_without_hotels():
    document = {**SANDBOX_DOCUMENT, "hotels": []}
    with pytest.raises(EmptyCategorySet):
        city_stats(sandbox_from_dict(document), "Xi'an")


@pytest.mark.asyncio
async def test_build_profile(sandbox):
    profile = await build_profile(QUERY, sandbox)
    assert profile.explicit.duration_days == 2
    assert profile.inferred.hotel_category == "Luxury"
    assert profile.raw_query == QUERY
    assert profile.requirement_texts()[0].startswith("historical sites, museums, Barbecue")


@pytest.mark.asyncio
async def test_build_profile_through_provider_matches_rules(sandbox):
    provider = MockProvider(responders=responders_for(sandbox))
    assert await build_profile(QUERY, sandbox, provider) == await build_profile(QUERY, sandbox)


@pytest.mark.asyncio
async def test_build_profile_unknown_city(sandbox):
    with pytest.raises(UnknownCity):
        await build_profile(QUERY.replace("Wuhan", "Lhasa"), sandbox)


def test_explicit_demands_validate():
    with pytest.raises(PreconditionError):
        ExplicitDemands("Thursday", "Friday", "early morning", "noon", 2, "Wuhan", "Xi'an", (), 1.0)
    with pytest.raises(PreconditionError):
        ExplicitDemands(None, None, None, None, 2, "Wuhan", "Xi'an", (), 1.0, ("Martian",))
    assert "Barbecue" in CUISINES
