"""Tests for the sandbox loader, queries and synthetic generator."""
import copy

import pytest

from tourplanner.common import ParseError, PreconditionError
from tourplanner.sandbox import (
    DuplicateId,
    UnknownCity,
    dump_sandbox,
    generate_synthetic,
    load_sandbox,
    sandbox_from_dict,
    save_sandbox,
)

from .common import SANDBOX_DOCUMENT


def document_with(section, index, **changes):
    """Return the fixture document with one record changed."""
    document = copy.deepcopy(SANDBOX_DOCUMENT)
    document[section][index].update(changes)
    return document


def test_counts_and_lookup(sandbox):
    assert sandbox.counts() == (2, 5, 4, 3, 4)
    museum = sandbox.resolve("Xi'an", "shaanxi  history MUSEUM", "attraction")
    assert museum.id == "xa-001"
    assert museum.duration_bounds == (5.0, 10.0)
    assert museum.opening_window == (540, 1050)
    assert museum.last_admission == 960
    assert sandbox.resolve("Wuhan", "Shaanxi History Museum", "attraction") is None
    assert sandbox.get("restaurant", "xr-003").avg_price == 130.5


def test_transport_resolves_by_code(sandbox):
    leg = sandbox.resolve(None, "CA8219", "transport")
    assert (leg.depart, leg.arrive, leg.day_slot) == (465, 560, "early morning")
    assert sandbox.resolve("Xi'an", "CA8219", "transport") is leg
    assert [leg.id for leg in sandbox.legs("Xi'an", "Wuhan")] == ["CZ3890", "G857"]


def test_city_lookup(sandbox):
    assert sandbox.has_city("xi'an")
    assert not sandbox.has_city("Lhasa")
    with pytest.raises(UnknownCity):
        sandbox.city("Lhasa")


@pytest.mark.parametrize(
    "text, bounds",
    [("1-2 hours", (1.0, 2.0)), ("0.5-1 day", (5.0, 10.0)), ("3 hours", (3.0, 3.0))],
)
def test_duration_forms(text, bounds):
    document = document_with("attractions", 1, duration=text)
    assert sandbox_from_dict(document).get("attraction", "xa-002").duration_bounds == bounds


def test_bad_opening_names_the_field():
    with pytest.raises(ParseError, match="field opening"):
        sandbox_from_dict(document_with("attractions", 0, opening="17:30-09:00"))


def test_last_admission_outside_opening():
    with pytest.raises(ParseError, match="last_admission"):
        sandbox_from_dict(document_with("attractions", 0, last_admission="18:00"))


def test_day_slot_must_match_departure():
    with pytest.raises(ParseError, match="day_slot"):
        sandbox_from_dict(document_with("transport", 0, day_slot="evening"))


def test_unknown_cuisine():
    with pytest.raises(ParseError, match="cuisine"):
        sandbox_from_dict(document_with("restaurants", 0, cuisine="Martian"))


def test_schema_version():
    document = copy.deepcopy(SANDBOX_DOCUMENT)
    document["schema_version"] = 2
    with pytest.raises(ParseError):
        sandbox_from_dict(document)


def test_unknown_city():
    with pytest.raises(UnknownCity):
        sandbox_from_dict(document_with("hotels", 0, city="Lhasa"))


def test_duplicate_id():
    with pytest.raises(DuplicateId):
        sandbox_from_dict(document_with("restaurants", 1, id="xr-001"))


def test_colliding_names():
    with pytest.raises(DuplicateId):
        sandbox_from_dict(document_with("attractions", 1, name="shaanxi history  museum"))


def test_save_and_load(tmp_path, synthetic):
    path = tmp_path / "sandbox.json"
    save_sandbox(synthetic, path)
    loaded = load_sandbox(path)
    assert loaded.to_dict() == synthetic.to_dict()
    assert dump_sandbox(loaded) == path.read_text(encoding="utf-8")


def test_synthetic_defaults(synthetic):
    assert synthetic.counts() == (2, 40, 60, 16, 16)
    assert [city.name for city in synthetic.cities] == ["Xi'an", "Wuhan"]
    hotels = synthetic.in_city("hotel", "Xi'an")
    assert {hotel.category for hotel in hotels} == {"Economy", "Midscale", "Upscale", "Luxury"}
    for leg in synthetic.transport:
        assert leg.arrive > leg.depart
    assert {leg.mode for leg in synthetic.transport} == {"flight", "train"}


def test_synthetic_legs_alternate_modes():
    sandbox = generate_synthetic(1, {"cities": 2, "transport": 2})
    modes = [leg.mode for leg in sandbox.transport if leg.origin_city == "Xi'an"]
    assert sorted(modes) == ["flight", "train"]
    trains = [leg for leg in sandbox.transport if leg.mode == "train"]
    assert all(leg.id.startswith("G") for leg in trains)


def test_synthetic_is_deterministic():
    assert generate_synthetic(3).to_dict() == generate_synthetic(3).to_dict()
    assert generate_synthetic(3).to_dict() != generate_synthetic(4).to_dict()


def test_synthetic_spec():
    sandbox = generate_synthetic(1, {"cities": 3, "attractions": 5, "transport": 2})
    assert sandbox.counts() == (3, 15, 90, 24, 12)
    with pytest.raises(PreconditionError):
        generate_synthetic(1, {"cities": 0})
    with pytest.raises(PreconditionError):
        generate_synthetic(1, {"hotels": -1})
