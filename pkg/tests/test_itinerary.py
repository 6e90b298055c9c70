"""Tests for plan documents, step resolution and the Markdown emitter."""
import pytest

from tourplanner.common import ParseError
from tourplanner.itinerary import (
    Itinerary,
    Proposal,
    Step,
    canonical_steps_text,
    day_roles,
    dump_itinerary,
    enrich,
    load_itinerary,
    parse_proposal,
    render_markdown,
    resolve_step,
    visited_keys,
)
from tourplanner.providers import SchemaError

from .common import DAY_ONE, DEST, LAST_DAY, ORIGIN, day


def test_step_spellings():
    step = Step.from_dict(
        {"start": "08:30", "end": "09:00", "type": "Local Transfer", "name": "Walk", "price": "0"}
    )
    assert (step.start, step.end, step.activity_type, step.price) == (510, 540, "local_transfer", 0)
    assert step.minutes == 30
    assert Step.from_dict(step.to_dict()) == step


@pytest.mark.parametrize(
    "document",
    [
        {"time": "09:00", "activity type": "meal", "name": "Lunch"},
        {"time": "10:00-09:00", "activity type": "meal", "name": "Lunch"},
        {"time": "09:00-10:00", "activity type": "breakfast", "name": "Lunch"},
        {"time": "09:00-10:00", "activity type": "meal", "name": " "},
        {"time": "09:00-10:00", "activity type": "meal", "name": "Lunch", "price": "cheap"},
        ["09:00-10:00", "meal"],
    ],
)
def test_step_rejects(document):
    with pytest.raises(ParseError):
        Step.from_dict(document)


def test_proposal_forms():
    proposal = Proposal.from_dict(DAY_ONE, agent_id="route", day_label="Day 1")
    assert proposal == day(DAY_ONE, agent_id="route")
    assert Proposal.from_dict(proposal.to_dict()) == proposal
    assert proposal.with_agent("budget").agent_id == "budget"
    with pytest.raises(ParseError):
        Proposal.from_dict({"steps": "none"})
    with pytest.raises(ParseError):
        Proposal.from_dict({"plan": [], "daily_cost": "a lot"})


def test_parse_proposal():
    text = '```json\n{"plan": [{"time": "07:45-09:20", "activity type": "transportation", ' \
        '"name": "CA8219"}]}\n```'
    proposal = parse_proposal(text, "route", "Day 1")
    assert (proposal.agent_id, proposal.day_label, len(proposal.steps)) == ("route", "Day 1", 1)
    with pytest.raises(SchemaError):
        parse_proposal('{"plan": [{"time": "late"}]}', "route", "Day 1")


def test_resolve_steps(sandbox):
    steps = day(DAY_ONE).steps
    assert resolve_step(steps[0], sandbox, ORIGIN, DEST)[1].id == "CA8219"
    assert resolve_step(steps[0], sandbox, ORIGIN, "Beijing") is None
    assert resolve_step(steps[1], sandbox, ORIGIN, DEST)[1].id == "xh-001"
    assert resolve_step(steps[3], sandbox, ORIGIN, ORIGIN) is None
    quarter = Step(1080, 1140, "meal", "muslim quarter")
    assert resolve_step(quarter, sandbox, ORIGIN, DEST)[1].id == "xa-005"
    pagoda = Step(1080, 1140, "meal", "Big Wild Goose Pagoda")
    assert resolve_step(pagoda, sandbox, ORIGIN, DEST) is None


def test_visited_keys(sandbox):
    assert visited_keys(day(DAY_ONE), sandbox, ORIGIN, DEST) == [
        ("restaurant", "xr-001"),
        ("attraction", "xa-001"),
        ("restaurant", "xr-002"),
    ]


def test_enrich_prices(sandbox):
    first = enrich(day(DAY_ONE), sandbox, ORIGIN, DEST)
    assert [step.price for step in first.steps] == [340.0, 387.0, 121.5, 0.0, 120.0]
    assert first.steps[0].mode == "flight"
    last = enrich(day(LAST_DAY), sandbox, ORIGIN, DEST)
    assert [step.price for step in last.steps] == [0.0, 0.0, 130.5, 0.0, 0.0, 500.0]
    unknown = enrich(day([{**DAY_ONE[2], "name": "Nowhere Grill"}]), sandbox, ORIGIN, DEST)
    assert unknown.steps[0].price is None


def test_canonical_steps_text(sandbox):
    assert canonical_steps_text(day(DAY_ONE)).splitlines()[0] == (
        "07:45-09:20 transportation CA8219"
    )


def test_itinerary_document(tmp_path, itinerary):
    assert Itinerary.from_dict(itinerary.to_dict()) == itinerary
    path = tmp_path / "itinerary.json"
    path.write_text(dump_itinerary(itinerary), encoding="utf-8")
    assert load_itinerary(path) == itinerary
    with pytest.raises(ParseError):
        Itinerary.from_dict({"days": []})


def test_render_markdown(itinerary):
    text = render_markdown(itinerary)
    assert text.startswith("**Day 1 Itinerary: Wuhan to Xi'an**\n")
    assert "### 07:45-09:20 | Travel by flight CA8219\n- **Price**: ¥340\n" in text
    assert "### 11:05-12:05 | Lunch at Beijing Zhengyangmen Roast Duck Restaurant" in text
    assert "- **Price**: ¥121.5" in text
    assert "### 17:50-19:20 | Dinner at Haocheng Zhen Yangcheng Lake Hairy Crab" in text
    assert "**Day 2 Itinerary**" in text
    assert "### 13:40-14:10 | Check-out from Kunyi Hotel" in text
    assert text.endswith("**Total Trip Cost**: ¥1599\n")


@pytest.mark.parametrize(
    "duration, roles",
    [(1, ["single"]), (2, ["first", "last"]), (4, ["first", "middle", "middle", "last"])],
)
def test_day_roles(duration, roles):
    assert day_roles(duration) == roles
