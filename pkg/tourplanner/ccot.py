"""Competitive consensus planning: agent team, proposals, arbitration, day loop."""
import asyncio
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field, replace

import numpy as np

from .common import (
    DimensionMismatch,
    PlannerLoggingAdapter,
    PreconditionError,
    TourPlannerError,
    format_clock,
    format_window,
    unit_rows,
)
from .const import (
    BASE_AGENT_ID,
    COMMITTEE_AGENT_ID,
    CONF_CCOT,
    CONF_CLUSTER,
    CONF_EPS0,
    CONF_EPS_DECAY,
    CONF_EPS_FLOOR,
    CONF_GRADE_FLOOR,
    CONF_MAX_AGENTS,
    CONF_MIN_AGENTS,
    CONF_MIN_SAMPLES,
    CONF_RECALL,
    CONF_SCHEDULE,
    CONF_SEMANTIC_PER_DAY,
    CONF_SMOOTHING,
    CONF_TOP_K,
    CONF_TOTAL_PER_DAY,
    DEFAULT_MAX_AGENTS,
    DEFAULT_MIN_AGENTS,
    DEFAULT_SMOOTHING,
    DEFAULT_TOP_K,
    KIND_HOTEL,
    KIND_RESTAURANT,
    ROLE_FIRST,
    ROLE_LAST,
    ROLE_SINGLE,
    STEP_MEAL,
    STEP_SIGHTSEEING,
)
from .constraints import ScheduleRules, check_day, day_cost, hard_score, total_cost
from .geo import ClusterConfig, InsufficientPoints, NoClusters, adaptive_cluster, anchor
from .geo import haversine, point_of
from .itinerary import (
    Itinerary,
    canonical_steps_text,
    day_roles,
    enrich,
    parse_proposal,
    visited_keys,
)
from .profile import build_profile
from .prompts import (
    TEMPLATE_ARBITRATE,
    TEMPLATE_BUILD_AGENTS,
    TEMPLATE_DAY_PLAN,
    TEMPLATE_PEER_REVIEW,
    TEMPLATE_REPAIR,
    as_json,
    request_for,
)
from .providers import SchemaError, TransportError, extract_document
from .recall import RecallConfig, recall_candidates

_LOGGER = logging.getLogger(__name__)

REVIEW_LIMIT = 10
STATION_MINUTES = 45
SOURCE_SYNTHESIS = "synthesis"
SOURCE_REPAIR = "repair"
SOURCE_FALLBACK = "fallback"

ProposalOutcome = namedtuple("ProposalOutcome", "agent_id proposal report reason")
ReviewResult = namedtuple("ReviewResult", "matrix critiques")


@dataclass(frozen=True)
class AgentSpec:
    """A specialist planning agent."""

    agent_id: str
    objective: str
    priorities: tuple = ()
    personality: str = ""

    def to_dict(self):
        """Return the JSON form."""
        return {
            "agent_id": self.agent_id,
            "objective": self.objective,
            "priorities": list(self.priorities),
            "personality": self.personality,
        }

    @classmethod
    def from_dict(cls, data):
        """Create from a model reply entry."""
        if not isinstance(data, dict):
            raise SchemaError("agent entry must be an object")
        agent_id = str(data.get("agent_id") or "").strip()
        objective = str(data.get("objective") or "").strip()
        if not agent_id or not objective:
            raise SchemaError("agent entry needs agent_id and objective")
        priorities = data.get("priorities") or ()
        if isinstance(priorities, str):
            priorities = [priorities]
        return cls(
            agent_id,
            objective,
            tuple(str(item) for item in priorities),
            str(data.get("personality") or ""),
        )


BASE_AGENT = AgentSpec(
    BASE_AGENT_ID,
    "Draft a feasible routing skeleton that keeps every schedule rule",
    ("feasibility", "short transfers", "meal windows"),
    "pragmatic generalist",
)


def parse_team(text):
    """Parse an agent team reply, rejecting duplicate ids."""
    document = extract_document(text)
    if isinstance(document, dict):
        document = document.get("agents", document)
    if not isinstance(document, list):
        raise SchemaError("agent team must be a JSON array")
    team = [AgentSpec.from_dict(entry) for entry in document]
    seen = set()
    for agent in team:
        if agent.agent_id in seen:
            raise SchemaError(f"duplicate agent_id {agent.agent_id!r}")
        seen.add(agent.agent_id)
    return team


async def instantiate_agents(
    query, provider, min_agents=DEFAULT_MIN_AGENTS, max_agents=DEFAULT_MAX_AGENTS
):
    """Return the specialist team for a query."""
    if not str(query).strip():
        raise PreconditionError("query must be non-empty")
    if not 1 <= min_agents <= max_agents:
        raise PreconditionError("need 1 <= min_agents <= max_agents")
    request = request_for(
        TEMPLATE_BUILD_AGENTS,
        {"query": query, "min_agents": min_agents, "max_agents": max_agents},
        query=query,
        min_agents=min_agents,
        max_agents=max_agents,
    )
    team = await provider.chat_structured(request, parse_team)
    if not min_agents <= len(team) <= max_agents:
        _LOGGER.debug(
            "Team of %d agents outside %d-%d, asking again", len(team), min_agents, max_agents
        )
        retry = request.with_repair(
            f"the team has {len(team)} agents, it needs {min_agents} to {max_agents}"
        )
        team = await provider.chat_structured(retry, parse_team)
    if not min_agents <= len(team) <= max_agents:
        raise TeamSizeError(f"team of {len(team)} agents, need {min_agents} to {max_agents}")
    _LOGGER.info("Planning team: %s", ", ".join(agent.agent_id for agent in team))
    return team


@dataclass
class PlanningContext:
    """What the agents see when they plan one day."""

    day_index: int
    day_label: str
    role: str
    sandbox: object
    profile: object
    origin: str
    dest: str
    hotel: object = None
    outbound: object = None
    inbound: object = None
    attractions: list = field(default_factory=list)
    restaurants: list = field(default_factory=list)
    used_ids: frozenset = frozenset()
    previous_days: tuple = ()
    anchors: object = None

    def __post_init__(self):
        """Drop venues already used on earlier days."""
        self.attractions = [a for a in self.attractions if (a.kind, a.id) not in self.used_ids]
        self.restaurants = [r for r in self.restaurants if (r.kind, r.id) not in self.used_ids]

    @property
    def is_first(self):
        """Return True if the day starts with the arrival."""
        return self.role in (ROLE_FIRST, ROLE_SINGLE)

    @property
    def is_last(self):
        """Return True if the day ends with the return leg."""
        return self.role in (ROLE_LAST, ROLE_SINGLE)

    def request_context(self):
        """Return the structured inputs of a day planning request."""
        demands = self.profile.explicit
        return {
            "day_index": self.day_index,
            "day_label": self.day_label,
            "role": self.role,
            "origin": self.origin,
            "dest": self.dest,
            "hotel": None if self.hotel is None else self.hotel.id,
            "outbound": self.outbound.id if self.is_first and self.outbound else None,
            "inbound": self.inbound.id if self.is_last and self.inbound else None,
            "attractions": [attraction.id for attraction in self.attractions],
            "restaurants": [restaurant.id for restaurant in self.restaurants],
            "meal_range": list(self.profile.inferred.meal_range),
            "budget": demands.budget,
            "requirements": list(demands.other_requirements),
            "cuisines": list(demands.cuisine_prefs),
        }

    def _label(self, entity):
        if self.anchors is None:
            return ""
        label = self.anchors.label_of(entity)
        return "" if label is None or label < 0 else f", cluster {label}"

    def given_information(self):
        """Return the sandbox facts of the day as prompt text."""
        lines = []
        if self.hotel is not None:
            lines.append("Hotel:")
            lines.append(
                f"- {self.hotel.name} ({self.hotel.category}, "
                f"¥{self.hotel.price_per_night:g}/night{self._label(self.hotel)})"
            )
        legs = []
        if self.is_first and self.outbound is not None:
            legs.append(self.outbound)
        if self.is_last and self.inbound is not None:
            legs.append(self.inbound)
        if legs:
            lines.append("Transport:")
            for leg in legs:
                lines.append(
                    f"- {leg.id}: {leg.mode} {leg.origin_city} to {leg.dest_city}, "
                    f"{format_clock(leg.depart)}-{format_clock(leg.arrive)}, ¥{leg.price:g}"
                )
        lines.append("Attractions:")
        for item in self.attractions:
            admission = (
                ""
                if item.last_admission is None
                else f", last admission {format_clock(item.last_admission)}"
            )
            lines.append(
                f"- {item.name}: open {format_window(item.opening_window)}{admission}, "
                f"{item.duration_bounds[0]:g}-{item.duration_bounds[1]:g} h, "
                f"fee ¥{item.entrance_fee:g}{self._label(item)}"
            )
        lines.append("Restaurants:")
        for item in self.restaurants:
            lines.append(
                f"- {item.name}: {item.cuisine}, ¥{item.avg_price:g}/person{self._label(item)}"
            )
        return "\n".join(lines)

    def previous_days_text(self):
        """Return the visits of earlier days as prompt text."""
        if not self.previous_days:
            return "None"
        return "\n".join(
            f"{day.day_label}: "
            + ", ".join(
                step.name
                for step in day.steps
                if step.activity_type in (STEP_SIGHTSEEING, STEP_MEAL)
            )
            for day in self.previous_days
        )

    def validate(self, proposal, rules=None):
        """Return the RuleReport of a proposal for this day."""
        return check_day(
            proposal,
            self.sandbox,
            self.origin,
            self.dest,
            self.role,
            self.used_ids,
            rules,
            self.anchors,
        )


async def _ask_plan(provider, request, agent_id, ctx):
    def parse(text):
        proposal = parse_proposal(text, agent_id, ctx.day_label)
        return enrich(proposal, ctx.sandbox, ctx.origin, ctx.dest)

    return await provider.chat_structured(request, parse)


def day_plan_request(agent, ctx, skeleton=None):
    """Return the day plan request of an agent."""
    return request_for(
        TEMPLATE_DAY_PLAN,
        {
            **ctx.request_context(),
            "agent": agent.to_dict(),
            "skeleton": None if skeleton is None else skeleton.to_dict(),
        },
        agent_profile=as_json(agent.to_dict()),
        day_label=ctx.day_label,
        given_information=ctx.given_information(),
        skeleton="None" if skeleton is None else as_json(skeleton.to_dict()),
        previous_days=ctx.previous_days_text(),
        query=ctx.profile.raw_query,
    )


def repair_request(proposal, report, ctx):
    """Return the fixer request for a plan that breaks rules."""
    return request_for(
        TEMPLATE_REPAIR,
        {
            **ctx.request_context(),
            "plan": proposal.to_dict(),
            "violations": [list(violation) for violation in report.violations],
        },
        violations="\n".join(
            f"- {v.rule}: {v.entity}: {v.detail}" for v in report.violations
        ),
        given_information=ctx.given_information(),
        plan=as_json(proposal.to_dict()),
        query=ctx.profile.raw_query,
        day_label=ctx.day_label,
    )


async def generate_skeleton(ctx, provider, rules=None):
    """Return the base routing draft of a day, repaired once if needed."""
    if not ctx.attractions:
        raise PreconditionError(f"{ctx.day_label}: no candidate attraction left")
    skeleton = await _ask_plan(provider, day_plan_request(BASE_AGENT, ctx), BASE_AGENT_ID, ctx)
    report = ctx.validate(skeleton, rules)
    if report.passed:
        return skeleton
    _LOGGER.debug("%s skeleton breaks %s, repairing", ctx.day_label, report.reason())
    skeleton = await _ask_plan(
        provider, repair_request(skeleton, report, ctx), BASE_AGENT_ID, ctx
    )
    report = ctx.validate(skeleton, rules)
    if not report.passed:
        raise ValidationError(f"{ctx.day_label} skeleton: {report.reason()}")
    return skeleton


async def refine_proposal(agent, skeleton, ctx, provider, rules=None):
    """Return the ProposalOutcome of one agent's refinement.

    Invalid or unreadable proposals come back with a reason instead of
    raising.
    """
    request = day_plan_request(agent, ctx, skeleton)
    try:
        proposal = await _ask_plan(provider, request, agent.agent_id, ctx)
    except (SchemaError, TransportError) as ex:
        _LOGGER.debug("%s: proposal of %s unusable: %s", ctx.day_label, agent.agent_id, ex)
        return ProposalOutcome(agent.agent_id, None, None, f"unusable reply: {ex}")
    report = ctx.validate(proposal, rules)
    if not report.passed:
        _LOGGER.debug(
            "%s: proposal of %s excluded: %s", ctx.day_label, agent.agent_id, report.reason()
        )
        return ProposalOutcome(agent.agent_id, proposal, report, report.reason())
    return ProposalOutcome(agent.agent_id, proposal, report, None)


@dataclass(frozen=True)
class DiversityWeights:
    """Similarity statistics and the normalized agent weights."""

    similarity: np.ndarray
    mean_similarity: np.ndarray
    raw_weights: np.ndarray
    weights: np.ndarray

    def to_dict(self):
        """Return the JSON form."""
        return {
            "similarity": self.similarity.tolist(),
            "mean_similarity": self.mean_similarity.tolist(),
            "raw_weights": self.raw_weights.tolist(),
            "weights": self.weights.tolist(),
        }


def diversity_weights(vectors, smoothing=DEFAULT_SMOOTHING):
    """Return weights inversely proportional to mean peer similarity."""
    if not smoothing > 0:
        raise PreconditionError("smoothing must be > 0")
    matrix = unit_rows(vectors)
    count = matrix.shape[0]
    if count < 2:
        raise PreconditionError("need at least 2 embeddings")
    similarity = matrix @ matrix.T
    mean = (similarity.sum(axis=1) - np.diag(similarity)) / (count - 1)
    # anti-correlated plans get the largest weight, not a negative one
    mean = np.maximum(mean, 0.0)
    raw = 1.0 / (mean + smoothing)
    return DiversityWeights(similarity, mean, raw, raw / raw.sum())


def single_weight():
    """Return the weights of a lone proposal."""
    one = np.ones(1)
    return DiversityWeights(np.ones((1, 1)), np.zeros(1), one, one)


def _review_score(value):
    if isinstance(value, dict):
        value = value.get("score")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    if not math.isfinite(value):
        return None
    return max(-REVIEW_LIMIT, min(REVIEW_LIMIT, math.floor(value + 0.5)))


def parse_review(text, agent_ids):
    """Return {agent_id: (score, critique)} for the entries a reply holds."""
    document = extract_document(text)
    if not isinstance(document, dict):
        raise SchemaError("review must be an object keyed by agent_id")
    found = {}
    for agent_id in agent_ids:
        entry = document.get(agent_id)
        score = _review_score(entry)
        if score is None:
            continue
        critique = entry.get("critique", "") if isinstance(entry, dict) else ""
        found[agent_id] = (score, str(critique))
    return found


async def _review(reviewer, proposals, provider, query, context):
    agent_ids = [proposal.agent_id for proposal in proposals]
    request = request_for(
        TEMPLATE_PEER_REVIEW,
        {
            **context,
            "reviewer": reviewer.to_dict(),
            "plans": [proposal.to_dict() for proposal in proposals],
        },
        reviewer_profile=as_json(reviewer.to_dict()),
        query=query,
        plans=as_json([proposal.to_dict() for proposal in proposals]),
    )
    found = {}
    for attempt in range(2):
        try:
            found.update(parse_review(await provider.chat(request), agent_ids))
        except (SchemaError, TransportError) as ex:
            _LOGGER.debug("Review by %s unusable: %s", reviewer.agent_id, ex)
            error = ex
        else:
            error = None
        missing = [agent_id for agent_id in agent_ids if agent_id not in found]
        if not missing:
            break
        if attempt == 0:
            request = request.with_repair(error or f"no score for {', '.join(missing)}")
    for agent_id in agent_ids:
        if agent_id not in found:
            _LOGGER.warning("%s gave %s no usable score, using 0", reviewer.agent_id, agent_id)
            found[agent_id] = (0, "")
    return [found[agent_id] for agent_id in agent_ids]


async def peer_review(reviewers, proposals, provider, query, context=None):
    """Return the integer score matrix (reviewer rows) and the critiques."""
    if not proposals:
        raise PreconditionError("nothing to review")
    rows = await asyncio.gather(
        *(_review(reviewer, proposals, provider, query, context or {}) for reviewer in reviewers)
    )
    matrix = np.asarray([[score for score, _ in row] for row in rows], dtype=int)
    critiques = {
        reviewer.agent_id: {
            proposal.agent_id: critique for proposal, (_, critique) in zip(proposals, row)
        }
        for reviewer, row in zip(reviewers, rows)
    }
    return ReviewResult(matrix.reshape(len(reviewers), len(proposals)), critiques)


def consensus_scores(weights, matrix):
    """Return Score(P_j) = sum_i w_i * s_ij."""
    weights = np.asarray(weights, dtype=float)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or weights.ndim != 1 or matrix.shape[0] != weights.size:
        raise DimensionMismatch(
            f"{weights.size} weights for a {'x'.join(map(str, matrix.shape))} score matrix"
        )
    if abs(weights.sum() - 1.0) > 1e-9:
        raise PreconditionError(f"weights sum to {weights.sum()}, not 1")
    return weights @ matrix


def select_top_k(scores, matrix, agent_ids, k=DEFAULT_TOP_K):
    """Return up to k agent ids by score, then best single review, then id."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    if not len(agent_ids):
        raise PreconditionError("no proposal to select from")
    column_max = np.asarray(matrix, dtype=float).max(axis=0)
    order = sorted(
        range(len(agent_ids)),
        key=lambda j: (-float(scores[j]), -float(column_max[j]), agent_ids[j]),
    )
    return [agent_ids[j] for j in order[:k]]


async def synthesize_day(winners, critiques, ctx, provider, rules=None):
    """Return (plan, source): the fused plan, its repair, or the top winner."""
    if not winners:
        raise PreconditionError("need at least one winner")
    request = request_for(
        TEMPLATE_ARBITRATE,
        {
            **ctx.request_context(),
            "plans": [winner.to_dict() for winner in winners],
            "critiques": list(critiques),
        },
        day_label=ctx.day_label,
        critiques="\n".join(f"- {text}" for text in critiques if text) or "None",
        given_information=ctx.given_information(),
        plans=as_json([winner.to_dict() for winner in winners]),
        query=ctx.profile.raw_query,
        budget=ctx.profile.explicit.budget,
        is_first_day=ctx.is_first,
        is_last_day=ctx.is_last,
        previous_days=ctx.previous_days_text(),
    )
    try:
        fused = await _ask_plan(provider, request, COMMITTEE_AGENT_ID, ctx)
    except (SchemaError, TransportError) as ex:
        _LOGGER.debug("%s synthesis unusable: %s", ctx.day_label, ex)
        fused, report = None, None
    else:
        report = ctx.validate(fused, rules)
        if report.passed:
            return fused, SOURCE_SYNTHESIS
    draft = fused if fused is not None else winners[0]
    report = report if fused is not None else ctx.validate(draft, rules)
    if not report.passed:
        try:
            fixed = await _ask_plan(
                provider, repair_request(draft, report, ctx), COMMITTEE_AGENT_ID, ctx
            )
        except (SchemaError, TransportError) as ex:
            _LOGGER.debug("%s repair unusable: %s", ctx.day_label, ex)
        else:
            if ctx.validate(fixed, rules).passed:
                return fixed, SOURCE_REPAIR
    _LOGGER.warning(
        "%s: synthesis and repair failed, keeping %s", ctx.day_label, winners[0].agent_id
    )
    return winners[0], SOURCE_FALLBACK


@dataclass
class ArbitrationRecord:
    """Everything arbitration computed for one day."""

    day_label: str
    entrants: list
    excluded: dict
    embeddings: list
    weights: DiversityWeights
    scores: np.ndarray
    critiques: dict
    consensus: np.ndarray
    winners: list
    source: str

    def to_dict(self):
        """Return the JSON form."""
        return {
            "day_label": self.day_label,
            "entrants": list(self.entrants),
            "excluded": dict(self.excluded),
            "embeddings": [list(map(float, vector)) for vector in self.embeddings],
            **self.weights.to_dict(),
            "scores": self.scores.tolist(),
            "critiques": self.critiques,
            "consensus": self.consensus.tolist(),
            "winners": list(self.winners),
            "source": self.source,
        }


@dataclass
class PlanResult:
    """The itinerary with the records and inputs that produced it."""

    itinerary: Itinerary
    records: list
    profile: object
    candidates: object
    anchors: object
    hard: object

    def records_dict(self):
        """Return the arbitration records as one document."""
        return {
            "config_hash": self.itinerary.config_hash,
            "profile": self.profile.to_dict(),
            "candidates": self.candidates.to_dict(),
            "clusters": None if self.anchors is None else self.anchors.to_dict(),
            "days": [record.to_dict() for record in self.records],
            "hard": self.hard.to_dict(),
        }


async def plan_day(ctx, agents, providers, rules=None, ccot_conf=None):
    """Run skeleton, refinement, arbitration and synthesis for one day."""
    ccot_conf = ccot_conf or {}
    log = PlannerLoggingAdapter(_LOGGER, {"context": ctx.day_label})
    chat = providers.chat
    try:
        skeleton = await generate_skeleton(ctx, chat, rules)
    except (ValidationError, SchemaError, TransportError) as ex:
        log.warning("Planning without a skeleton: %s", ex)
        skeleton = None
    outcomes = await asyncio.gather(
        *(refine_proposal(agent, skeleton, ctx, chat, rules) for agent in agents)
    )
    entrants = [outcome.proposal for outcome in outcomes if outcome.reason is None]
    excluded = {outcome.agent_id: outcome.reason for outcome in outcomes if outcome.reason}
    if not entrants and skeleton is not None:
        log.warning("Every proposal was excluded, the skeleton enters alone")
        entrants = [skeleton]
    if not entrants:
        raise PlanningFailure(
            f"{ctx.day_label}: no valid proposal ("
            + "; ".join(f"{k}: {v}" for k, v in excluded.items())
            + ")"
        )
    agent_ids = [proposal.agent_id for proposal in entrants]
    team = {agent.agent_id: agent for agent in [BASE_AGENT, *agents]}
    if len(entrants) > 1:
        embeddings = await providers.embed.embed(
            [canonical_steps_text(proposal) for proposal in entrants]
        )
        weights = diversity_weights(embeddings, ccot_conf.get(CONF_SMOOTHING, DEFAULT_SMOOTHING))
    else:
        embeddings, weights = [], single_weight()
    review = await peer_review(
        [team[agent_id] for agent_id in agent_ids],
        entrants,
        chat,
        ctx.profile.raw_query,
        ctx.request_context(),
    )
    consensus = consensus_scores(weights.weights, review.matrix)
    winners = select_top_k(
        consensus, review.matrix, agent_ids, ccot_conf.get(CONF_TOP_K, DEFAULT_TOP_K)
    )
    log.info(
        "%d entrants, %d excluded, winners %s",
        len(entrants),
        len(excluded),
        ", ".join(winners),
    )
    by_id = dict(zip(agent_ids, entrants))
    critiques = [
        f"{reviewer} on {winner}: {texts[winner]}"
        for winner in winners
        for reviewer, texts in review.critiques.items()
        if texts.get(winner)
    ]
    plan, source = await synthesize_day(
        [by_id[agent_id] for agent_id in winners], critiques, ctx, chat, rules
    )
    cost = day_cost(plan, ctx.sandbox, ctx.origin, ctx.dest, ctx.hotel, last_day=ctx.is_last)
    plan = replace(plan, day_label=ctx.day_label, daily_cost=cost)
    log.debug("Plan from %s, cost %.2f", source, cost)
    record = ArbitrationRecord(
        ctx.day_label,
        agent_ids,
        excluded,
        [np.asarray(vector).tolist() for vector in embeddings],
        weights,
        review.matrix,
        review.critiques,
        consensus,
        winners,
        source,
    )
    return plan, record


def choose_hotel(sandbox, city, category, anchors=None):
    """Return the hotel of a category nearest the largest attraction cluster."""
    hotels = sandbox.in_city(KIND_HOTEL, city)
    if not hotels:
        raise PlanningFailure(f"{city} has no hotel")
    pool = [hotel for hotel in hotels if hotel.category == category]
    if not pool:
        _LOGGER.warning("No %s hotel in %s, considering every hotel", category, city)
        pool = hotels
    target = None
    if anchors is not None:
        labels = [label for label in anchors.clusters.labels if label >= 0]
        largest = max(set(labels), key=lambda label: (labels.count(label), -label))
        target = anchors.clusters.centroids[largest]
    else:
        center = sandbox.city(city)
        if center.lat is not None and center.lon is not None:
            target = point_of(center)
    return min(
        pool,
        key=lambda hotel: (
            0.0 if target is None else haversine(target, point_of(hotel)),
            hotel.price_per_night,
            hotel.id,
        ),
    )


def _pick(legs, slot, latest_first):
    if not legs:
        return None
    matching = [leg for leg in legs if slot is None or leg.day_slot == slot]
    if not matching:
        _LOGGER.warning("No leg in the %s slot, choosing among all", slot)
        matching = legs
    return sorted(
        matching, key=lambda leg: ((-leg.depart if latest_first else leg.depart), leg.id)
    )[0]


def choose_legs(sandbox, origin, dest, demands, rules=None):
    """Return (outbound, inbound) legs for the requested day slots."""
    rules = rules or ScheduleRules()
    outbound = _pick(sandbox.legs(origin, dest), demands.departure_slot, False)
    back = sandbox.legs(dest, origin)
    if outbound is None or not back:
        raise PlanningFailure(f"no transport between {origin} and {dest}")
    if demands.duration_days == 1:
        earliest = outbound.arrive + STATION_MINUTES
        reachable = [
            leg for leg in back if leg.depart >= earliest + rules.buffer_for(leg.mode)
        ]
        if reachable:
            back = reachable
        else:
            _LOGGER.warning("No return leg leaves time after the %s arrival", outbound.id)
    return outbound, _pick(back, demands.return_slot, True)


def _cluster(attractions, sandbox, dest, duration, cluster_conf):
    cfg = ClusterConfig(
        min_clusters=duration,
        min_samples=cluster_conf[CONF_MIN_SAMPLES],
        eps0=cluster_conf[CONF_EPS0],
        eps_decay=cluster_conf[CONF_EPS_DECAY],
        eps_floor=cluster_conf[CONF_EPS_FLOOR],
    )
    try:
        clusters = adaptive_cluster([point_of(a) for a in attractions], cfg)
        return anchor(
            clusters,
            attractions,
            sandbox.in_city(KIND_HOTEL, dest),
            sandbox.in_city(KIND_RESTAURANT, dest),
        )
    except (InsufficientPoints, NoClusters) as ex:
        _LOGGER.warning("Planning without clusters: %s", ex)
        return None


async def plan_trip(query, sandbox, providers, config, config_hash=""):
    """Plan a whole trip day by day and return the PlanResult."""
    rules = ScheduleRules.from_config(config[CONF_SCHEDULE])
    recall_conf, ccot_conf = config[CONF_RECALL], config[CONF_CCOT]
    profile = await build_profile(query, sandbox, providers.chat)
    demands = profile.explicit
    origin = sandbox.city(demands.origin_city).name
    dest = sandbox.city(demands.dest_city).name
    duration = demands.duration_days
    recall_cfg = RecallConfig.for_duration(
        duration,
        recall_conf[CONF_SEMANTIC_PER_DAY],
        recall_conf[CONF_TOTAL_PER_DAY],
        recall_conf[CONF_GRADE_FLOOR],
    )
    candidates = await recall_candidates(
        profile, sandbox, providers.chat, providers.embed, recall_cfg
    )
    if not len(candidates):
        raise PlanningFailure("recall found no attraction")
    anchors = _cluster(candidates.attractions, sandbox, dest, duration, config[CONF_CLUSTER])
    hotel = (
        choose_hotel(sandbox, dest, profile.inferred.hotel_category, anchors)
        if duration > 1
        else None
    )
    outbound, inbound = choose_legs(sandbox, origin, dest, demands, rules)
    agents = await instantiate_agents(
        query,
        providers.chat,
        ccot_conf.get(CONF_MIN_AGENTS, DEFAULT_MIN_AGENTS),
        ccot_conf.get(CONF_MAX_AGENTS, DEFAULT_MAX_AGENTS),
    )
    restaurants = sandbox.in_city(KIND_RESTAURANT, dest)
    days, records, used = [], [], set()
    for index, role in enumerate(day_roles(duration), 1):
        ctx = PlanningContext(
            day_index=index,
            day_label=f"Day {index}",
            role=role,
            sandbox=sandbox,
            profile=profile,
            origin=origin,
            dest=dest,
            hotel=hotel,
            outbound=outbound,
            inbound=inbound,
            attractions=candidates.attractions,
            restaurants=restaurants,
            used_ids=frozenset(used),
            previous_days=tuple(days),
            anchors=anchors,
        )
        plan, record = await plan_day(ctx, agents, providers, rules, ccot_conf)
        days.append(plan)
        records.append(record)
        used.update(visited_keys(plan, sandbox, origin, dest))
    itinerary = Itinerary(
        query=query,
        origin_city=origin,
        dest_city=dest,
        duration_days=duration,
        hotel=None if hotel is None else hotel.name,
        outbound=outbound.id,
        inbound=inbound.id,
        days=tuple(days),
        config_hash=config_hash,
    )
    itinerary = replace(itinerary, total_cost=total_cost(itinerary, sandbox))
    hard = hard_score(itinerary, sandbox, profile)
    if hard.eta < 1:
        raise InfeasibleItinerary(
            f"itinerary scores eta {hard.eta:.3f}: "
            + "; ".join(f"{v.rule}: {v.entity}: {v.detail}" for v in hard.violations)
        )
    _LOGGER.info(
        "Planned %d days %s -> %s for ¥%.2f (eta %.3f)",
        duration,
        origin,
        dest,
        itinerary.total_cost,
        hard.eta,
    )
    return PlanResult(itinerary, records, profile, candidates, anchors, hard)


class PlanningFailure(TourPlannerError):
    """Error to indicate a day without any valid proposal."""


class InfeasibleItinerary(TourPlannerError):
    """Error to indicate a planned itinerary failing the hard constraints."""


class TeamSizeError(TourPlannerError):
    """Error to indicate an agent team outside the size bounds."""


class ValidationError(TourPlannerError):
    """Error to indicate a plan that still breaks rules after repair."""
