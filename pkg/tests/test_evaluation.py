"""Tests for the benchmark metrics and the judge protocol."""
from dataclasses import replace
import json

import pytest

from tourplanner.common import PreconditionError
from tourplanner.evaluation import (
    FEASIBILITY_FLAGS,
    RATIONALITY_FLAGS,
    EmptyInput,
    PlanCase,
    distance_ratio,
    evaluate_cases,
    feasibility,
    final_pass,
    load_cases,
    meal_prices_reasonable,
    micro_macro,
    rationality,
    surpass_rate,
    surpassing,
)
from tourplanner.providers import JudgeVerdict
from tourplanner.providers.mock import MockProvider

from .common import QUERY


@pytest.fixture
def case(itinerary, profile):
    """Return a case whose generated plan is its own reference."""
    return PlanCase("xian-2", QUERY, itinerary, itinerary, profile)


def with_demands(profile, **changes):
    """Return the profile with explicit demands changed."""
    return replace(profile, explicit=replace(profile.explicit, **changes))


def test_micro_macro():
    assert micro_macro([[True, False], [True, True]]) == (0.75, 0.5)
    assert micro_macro([{"a": True, "b": True}]) == (1.0, 1.0)
    with pytest.raises(EmptyInput):
        micro_macro([])
    with pytest.raises(EmptyInput):
        micro_macro([[], []])


def test_final_pass_route_bound():
    assert final_pass([True], {"budget_limit": True}, 15.0, 10.0)
    assert not final_pass([True], [True], 15.001, 10.0)
    assert not final_pass([True, False], [True], 5.0, 10.0)
    assert final_pass([True], [True], 19.0, 10.0, ratio=2.0)


def test_surpassing():
    verdicts = [JudgeVerdict(4, 3, ""), JudgeVerdict(2, 5, ""), None]
    assert surpassing(verdicts) == 0.5
    assert surpassing([JudgeVerdict(3, 3, "")]) == 1.0
    assert surpassing([None]) is None


def test_flags_of_valid_plan(case, sandbox, profile):
    feasible = feasibility(case, sandbox, profile)
    rational = rationality(case, sandbox, profile)
    assert list(feasible) == FEASIBILITY_FLAGS
    assert list(rational) == RATIONALITY_FLAGS
    assert all(feasible.values())
    assert all(rational.values())


def test_wrong_origin_fails_legs(case, sandbox, profile):
    feasible = feasibility(case, sandbox, with_demands(profile, origin_city="Beijing"))
    assert feasible["sandbox"] and feasible["completeness"]
    assert not feasible["departure"]
    assert not feasible["return"]


def test_wrong_slot_fails_departure(case, sandbox, profile):
    feasible = feasibility(case, sandbox, with_demands(profile, departure_slot="evening"))
    assert not feasible["departure"]
    assert feasible["return"]


def test_budget_limit(case, sandbox, profile):
    assert not rationality(case, sandbox, with_demands(profile, budget=1500.0))["budget_limit"]


def test_meal_prices(itinerary, sandbox):
    assert meal_prices_reasonable(itinerary, sandbox, (95, 130.5), 0.0)
    assert not meal_prices_reasonable(itinerary, sandbox, (95, 130), 0.0)
    assert meal_prices_reasonable(itinerary, sandbox, (95, 100), 0.5)


def test_distance_ratio(case, sandbox):
    assert distance_ratio(case, sandbox) == pytest.approx(1.0)


def test_case_needs_same_city(itinerary):
    with pytest.raises(PreconditionError):
        PlanCase("x", QUERY, replace(itinerary, dest_city="Beijing"), itinerary)


@pytest.mark.asyncio
async def test_evaluate_cases(case, sandbox):
    report = await evaluate_cases([case], sandbox, judge=MockProvider(judge=(4, 4)))
    assert report.feasibility == (1.0, 1.0)
    assert report.rationality == (1.0, 1.0)
    assert report.avg_route_distance_ratio == pytest.approx(1.0)
    assert report.final_pass_rate == 1.0
    assert report.final_surpassing_rate == 1.0
    document = report.to_dict()
    assert document["cases"][0]["judge"] == [4, 4]
    assert document["cases"][0]["eta"] == 1.0
    assert "micro" in document["definitions"]


@pytest.mark.asyncio
async def test_evaluate_without_judge(case, sandbox, profile):
    poor = replace(case, profile=with_demands(profile, budget=1500.0))
    report = await evaluate_cases([case, poor], sandbox)
    assert report.final_surpassing_rate is None
    assert report.rationality == (pytest.approx(11 / 12), 0.5)
    assert report.final_pass_rate == 0.5
    with pytest.raises(EmptyInput):
        await evaluate_cases([], sandbox)


@pytest.mark.asyncio
async def test_judge_failures_are_skipped(case):
    broken = MockProvider(responders={"judge": lambda request, rng: "no verdict"})
    assert await surpass_rate([case], broken) is None
    assert await surpass_rate([case], MockProvider(judge=(2, 5))) == 0.0


def test_load_cases(tmp_path, itinerary):
    document = {
        "query": QUERY,
        "generated": itinerary.to_dict(),
        "reference": itinerary.to_dict(),
    }
    (tmp_path / "b.json").write_text(json.dumps(document), encoding="utf-8")
    (tmp_path / "a.json").write_text(json.dumps({**document, "id": "first"}), encoding="utf-8")
    (tmp_path / "notes.txt").write_text("ignored", encoding="utf-8")
    cases = load_cases(tmp_path)
    assert [case.case_id for case in cases] == ["first", "b"]
    assert cases[1].generated == itinerary
    (tmp_path / "c.json").write_text(json.dumps({"query": QUERY}), encoding="utf-8")
    with pytest.raises(PreconditionError):
        load_cases(tmp_path)


def test_load_cases_needs_documents(tmp_path):
    with pytest.raises(EmptyInput):
        load_cases(tmp_path)
