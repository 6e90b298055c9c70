"""Tests for the offline responders that stand in for a chat model."""
import pytest

from tourplanner.ccot import day_plan_request, parse_team
from tourplanner.constraints import ScheduleRules
from tourplanner.itinerary import Proposal, parse_proposal
from tourplanner.offline import (
    CORE_AGENTS,
    OfflineResponder,
    agent_focus,
    keyword_hits,
    transfer_minutes,
)
from tourplanner.profile import CityPriceStats, parse_query
from tourplanner.providers import ChatRequest, extract_document

from .common import DAY_ONE, DEST, ORIGIN, QUERY, day, planning_context


@pytest.fixture
def responder(sandbox):
    """Return the responder of the fixture sandbox."""
    return OfflineResponder(sandbox)


def request(template, context):
    """Return a bare request carrying a context."""
    return ChatRequest("system", "user", True, template, context)


def test_keyword_hits():
    assert keyword_hits("Shaanxi History Museum", ("histor", "museum")) == 2
    assert keyword_hits("", ("museum",)) == 0


@pytest.mark.parametrize(
    "agent, focus",
    [
        ({"agent_id": "route_optimizer"}, "route"),
        ({"agent_id": "penny", "objective": "Keep the total cost low"}, "budget"),
        ({"agent_id": "x", "objective": "See it all", "priorities": ["temples"]}, "cultural"),
        ({"agent_id": "x", "objective": "See it all", "personality": "punctual"}, "schedule"),
        ({"agent_id": "x", "objective": "See it all"}, "base"),
        (None, "base"),
    ],
)
def test_agent_focus(agent, focus):
    assert agent_focus(agent) == focus


def test_transfer_minutes(sandbox):
    museum = sandbox.get("attraction", "xa-001")
    assert transfer_minutes(museum, museum) == 30
    wuhan = sandbox.city("Wuhan")
    assert transfer_minutes(museum, wuhan) > 1000


def test_extract_demands_reply(responder):
    reply = responder.extract_demands(request("extract_demands", {"query": QUERY}), None)
    assert "Departure City: [Wuhan]" in reply
    assert responder.extract_demands(request("extract_demands", {"query": "hi"}), None) == ""


def test_infer_preferences_reply(responder):
    stats = CityPriceStats(
        "Xi'an",
        {"Economy": 150.0, "Midscale": 300.0, "Upscale": 387.0, "Luxury": 900.0},
        (80.0, 120.0, 160.0),
    )
    context = {"demands": parse_query(QUERY).to_dict(), "stats": stats.to_dict()}
    reply = responder.infer_preferences(request("infer_preferences", context), None)
    assert reply.splitlines()[0].startswith("Hotel Cost: [")
    assert reply.splitlines()[1].startswith("Meal Cost Range: [")


def test_suggest_attractions_reply(responder):
    context = {"city": DEST, "requirements": ["historical sites", "museums"], "limit": 3}
    reply = responder.suggest_attractions(request("suggest_attractions", context), None)
    assert extract_document(reply) == ["Shaanxi History Museum", "Xi'an Museum"]
    context["requirements"] = ["fun"]
    assert responder.suggest_attractions(request("suggest_attractions", context), None) == "[]"


def test_build_agents_reply(responder):
    def team_for(query):
        context = {"query": query, "min_agents": 4, "max_agents": 6}
        return parse_team(responder.build_agents(request("build_agents", context), None))

    rich = team_for(QUERY)
    assert [agent.agent_id for agent in rich[:3]] == [agent["agent_id"] for agent in CORE_AGENTS]
    assert {"cultural_scholar", "foodie_explorer"} <= {agent.agent_id for agent in rich}
    assert len(team_for("A quiet weekend away.")) == 4


def test_day_plan_reply_opens_the_trip(sandbox, profile, responder):
    ctx = planning_context(sandbox, profile)
    agent = {"agent_id": "route_optimizer", "objective": "short hops"}
    context = {**ctx.request_context(), "agent": agent}
    proposal = parse_proposal(responder.day_plan(request("day_plan", context), None), "r", "Day 1")
    kinds = [step.activity_type for step in proposal.steps]
    assert kinds[:3] == ["transportation", "local_transfer", "check-in"]
    assert proposal.steps[0].name == "CA8219"
    assert proposal.steps[2].name == "Kunyi Hotel"
    for before, after in zip(proposal.steps, proposal.steps[1:]):
        assert before.end <= after.start


def test_day_plan_reply_closes_the_trip(sandbox, profile, responder):
    ctx = planning_context(sandbox, profile, role="last", label="Day 2")
    context = {**ctx.request_context(), "agent": {"agent_id": "budget_manager"}}
    text = responder.day_plan(request("day_plan", context), None)
    proposal = Proposal.from_dict(extract_document(text))
    kinds = [step.activity_type for step in proposal.steps]
    assert kinds[-3:] == ["check-out", "local_transfer", "transportation"]
    assert proposal.steps[-1].name == "CZ3890"
    buffer = ScheduleRules().buffer_for("flight")
    assert proposal.steps[-3].start <= proposal.steps[-1].start - buffer


def test_day_plan_request_renders(sandbox, profile):
    ctx = planning_context(sandbox, profile)
    agent = parse_team('[{"agent_id": "a", "objective": "b"}]')[0]
    built = day_plan_request(agent, ctx)
    assert built.template == "day_plan"
    assert "Shaanxi History Museum" in built.user_prompt
    assert built.context["outbound"] == "CA8219"
    assert built.context["inbound"] is None


def test_peer_review_reply(sandbox, responder):
    cheap = day(DAY_ONE[:4], agent_id="cheap").to_dict()
    full = day(DAY_ONE, agent_id="full").to_dict()
    context = {
        "origin": ORIGIN,
        "dest": DEST,
        "reviewer": {"agent_id": "budget_manager"},
        "plans": [full, cheap, {"agent_id": "broken", "plan": "none"}],
    }
    review = extract_document(responder.peer_review(request("peer_review", context), None))
    assert review["cheap"]["score"] == 8
    assert review["full"]["score"] == 3
    assert review["broken"]["score"] == -2


def test_arbitrate_and_repair_replies(sandbox, profile, responder):
    winner = day(DAY_ONE, agent_id="route_optimizer").to_dict()
    fused = extract_document(responder.arbitrate(request("arbitrate", {"plans": [winner]}), None))
    assert fused["agent_id"] == "committee"
    assert fused["plan"] == winner["plan"]
    ctx = planning_context(sandbox, profile)
    repaired = extract_document(
        responder.repair(request("repair", ctx.request_context()), None)
    )
    assert repaired["agent_id"] == "committee"
    assert repaired["plan"][0]["name"] == "CA8219"


def test_responders_cover_every_template(responder):
    assert set(responder.responders()) == {
        "extract_demands",
        "infer_preferences",
        "suggest_attractions",
        "build_agents",
        "day_plan",
        "peer_review",
        "arbitrate",
        "repair",
    }
