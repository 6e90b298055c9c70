"""Fixtures for the tourplanner tests."""
import pytest

from tourplanner.config import build_providers, load_config
from tourplanner.itinerary import Itinerary
from tourplanner.profile import ExplicitDemands, InferredPrefs, UserProfile
from tourplanner.sandbox import generate_synthetic, sandbox_from_dict

from .common import DAY_ONE, DEST, LAST_DAY, ORIGIN, QUERY, SANDBOX_DOCUMENT, priced


@pytest.fixture
def sandbox():
    """Return the hand-built Xi'an sandbox."""
    return sandbox_from_dict(SANDBOX_DOCUMENT)


@pytest.fixture(scope="session")
def synthetic():
    """Return the default synthetic sandbox."""
    return generate_synthetic(0)


@pytest.fixture
def profile():
    """Return the profile of the two-day Xi'an query."""
    return UserProfile(
        ExplicitDemands(
            departure_day="Thursday",
            return_day="Friday",
            departure_slot="early morning",
            return_slot="afternoon",
            duration_days=2,
            origin_city=ORIGIN,
            dest_city=DEST,
            other_requirements=("historical sites", "museums"),
            budget=4100.0,
            cuisine_prefs=("Barbecue", "Hot Pot", "Korean Cuisine", "Japanese Cuisine"),
        ),
        InferredPrefs("Upscale", (80, 150)),
        QUERY,
    )


@pytest.fixture
def itinerary(sandbox):
    """Return the two-day itinerary built from the first and last day plans."""
    return Itinerary(
        query=QUERY,
        origin_city=ORIGIN,
        dest_city=DEST,
        duration_days=2,
        hotel="Kunyi Hotel",
        outbound="CA8219",
        inbound="CZ3890",
        days=(priced(sandbox, DAY_ONE, "Day 1"), priced(sandbox, LAST_DAY, "Day 2")),
        total_cost=1599.0,
    )


@pytest.fixture
def config():
    """Return the default run config."""
    return load_config()


@pytest.fixture
def providers(config, synthetic):
    """Return offline providers answering from the synthetic sandbox."""
    return build_providers(config, synthetic)
