"""Prompt templates for every chat request the planner sends."""
from collections import namedtuple

from .common import canonical_json
from .providers import ChatRequest

Prompt = namedtuple("Prompt", "system user")

TEMPLATE_EXTRACT_DEMANDS = "extract_demands"
TEMPLATE_INFER_PREFERENCES = "infer_preferences"
TEMPLATE_SUGGEST_ATTRACTIONS = "suggest_attractions"
TEMPLATE_BUILD_AGENTS = "build_agents"
TEMPLATE_DAY_PLAN = "day_plan"
TEMPLATE_PEER_REVIEW = "peer_review"
TEMPLATE_ARBITRATE = "arbitrate"
TEMPLATE_REPAIR = "repair"

ACTIVITY_TYPES_TEXT = """Allowed "activity type" values:
- "transportation": the flight or train between the departure and destination cities.
- "check-in" / "check-out": hotel accommodation only.
- "sightseeing": a visit to an attraction from the attractions section.
- "meal": lunch or dinner at a restaurant from the restaurants section (no breakfast).
- "local_transfer": travel between consecutive activities inside the city."""

HARD_RULES_TEXT = """Hard rules:
1. Use only the hotels, transport, attractions and restaurants listed in the given information.
2. The first day starts with the arrival transportation, a transfer and the hotel check-in. \
The last day ends with the hotel check-out, a transfer and the return transportation.
3. Keep attractions and restaurants of a day inside one cluster where possible.
4. Every visit lies inside the opening hours, starts no later than the last admission and \
lasts between the minimum and maximum recommended duration (1 day = 10 hours).
5. Activities are sequential and never overlap. Consecutive activities are joined by a \
local_transfer of at least 30 minutes. No idle gap may exceed 1 hour. Nothing ends after 22:30.
6. Full days contain lunch starting 11:00-14:00 and dinner starting 17:00-20:00, at least \
5 hours apart. A visit to a food district during a meal window counts as that meal.
7. No attraction or restaurant may repeat within a day or across days.
8. Keep the total cost within the budget.
9. Nothing is scheduled within 2 hours of a flight departure or 1 hour of a train departure.
10. Neither the morning nor the afternoon of a full day may be empty."""

DAY_PLAN_FORMAT = """Reply with one JSON object:
{{
  "agent_id": "<your agent id>",
  "day_label": "{day_label}",
  "daily_cost": <number, CNY: transport, entrance fees, meals and the hotel night \
unless this is the final day>,
  "plan": [
    {{"time": "HH:MM-HH:MM", "activity type": "<type>", "name": "<exact name>", \
"description": "<one sentence>"}}
  ]
}}"""

TEMPLATES = {
    TEMPLATE_EXTRACT_DEMANDS: Prompt(
        "You are a travel assistant that turns a travel request into structured fields.",
        """Extract the fields below from the user query. Put every value in square \
brackets. Infer missing values from the query, except Other Requirements and \
Restaurant Type, which stay empty when not mentioned. A departure or return time given \
as "morning" means "early morning".

Departure Day: [day of the week]
Return Day: [day of the week]
Departure Time: [early morning/late morning/afternoon/evening]
Return Time: [early morning/late morning/afternoon/evening]
Duration: [number of days]
Departure City: [city]
Destination City: [city]
Other Requirements: [comma separated list]
Budget: [number]
Restaurant Type: [comma separated values from: {cuisines}]

User query:
{query}""",
    ),
    TEMPLATE_INFER_PREFERENCES: Prompt(
        "You are a travel assistant that infers implicit demands from a budget. "
        "Reply with exactly the two requested lines.",
        """Rules:
- Hotel Cost: with N = travel days - 1 nights, the per-night hotel budget is \
budget x 0.55 / N. Choose the highest of Luxury > Upscale > Midscale > Economy whose \
minimum price fits it, else the cheapest category available.
- Meal Cost Range: the per-day meal budget is budget x 0.35 / N. Give a reasonably \
broad integer range per meal, adjusted to the cuisine preferences.

Hotel Cost: [Luxury/Upscale/Midscale/Economy]
Meal Cost Range: [minimum, maximum]

User query:
{query}

Transportation prices: {transport_prices}
Hotel prices: {hotel_prices}
Restaurant meal prices: {meal_prices}
Budget: {budget}""",
    ),
    TEMPLATE_SUGGEST_ATTRACTIONS: Prompt(
        "You are a local guide who knows the attractions of {city}.",
        """Suggest up to {limit} attractions in {city} that match these interests: \
{requirements}.
Reply with a JSON array of attraction names only.""",
    ),
    TEMPLATE_BUILD_AGENTS: Prompt(
        "You are a chief travel planner who assembles a team of specialist agents.",
        """Analyze the query for core motives, constraints and conflicts, then create \
between {min_agents} and {max_agents} specialist agents (fewer for simple queries).
Each agent is a JSON object with "agent_id", "objective" (measurable: hours, CNY, km, \
count), "priorities" (ranked list) and "personality" (short traits).
Reply with a JSON array only.

User query:
{query}""",
    ),
    TEMPLATE_DAY_PLAN: Prompt(
        "You are a travel planning agent with this profile: {agent_profile}",
        """Plan {day_label} of the trip so it serves your objective and priorities while \
keeping the whole trip coherent.

{format}

{activity_types}

## Given information
{given_information}

## Base routing draft
{skeleton}

## Previous days
{previous_days}

## User query
{query}

{hard_rules}""",
    ),
    TEMPLATE_PEER_REVIEW: Prompt(
        "You are a travel agent reviewing competing plans. Your profile: {reviewer_profile}",
        """Score every plan from -10 to +10 (integers) against your objective and \
priorities: a baseline of +2, plus priority fit (0-10), plus bonuses for spatial \
coherence, diversity and budget fit, minus penalties for broken structure, timing or \
meal rules. Use -10 only for an empty plan.
Reply with one JSON object keyed by agent_id:
{{"<agent_id>": {{"score": <int>, "critique": "<at most 30 words>"}}}}

User query:
{query}

Competing plans:
{plans}""",
    ),
    TEMPLATE_ARBITRATE: Prompt(
        "You are the committee arbitrator. Fuse the winning day plans into one feasible "
        "itinerary for {day_label}. Use only items from the given information.",
        """Keep the geographic order of the best rated plan, pick the points of interest \
the reviews favour and keep every transfer sensible.

{format}

{hard_rules}

## Peer review insights
{critiques}

## Given information
{given_information}

## Winning plans (best first)
{plans}

User query: {query}
Budget: {budget}
First day: {is_first_day}
Last day: {is_last_day}
Previous days: {previous_days}""",
    ),
    TEMPLATE_REPAIR: Prompt(
        "You are a strict travel plan validator and fixer.",
        """The plan below breaks these rules:
{violations}

Replace each non-compliant item with a compliant one from the given information \
(prefer the same cluster), or drop it and shift its neighbours. Keep every other item.

{format}

{hard_rules}

## Given information
{given_information}

## Plan
{plan}

User query: {query}""",
    ),
}


def render(name, **values):
    """Return the (system, user) prompts of a template with values substituted."""
    template = TEMPLATES[name]
    values.setdefault("activity_types", ACTIVITY_TYPES_TEXT)
    values.setdefault("hard_rules", HARD_RULES_TEXT)
    if "day_label" in values:
        values.setdefault("format", DAY_PLAN_FORMAT.format(day_label=values["day_label"]))
    return template.system.format(**values), template.user.format(**values)


def request_for(name, context, structured=True, **values):
    """Return the ChatRequest for a template.

    `context` is the structured form of the inputs; it is part of the request
    identity and is what offline responders read.
    """
    system, user = render(name, **values)
    return ChatRequest(
        system,
        user,
        expects_structured=structured,
        template=name,
        context=context,
    )


def as_json(document):
    """Return a document as prompt text."""
    return canonical_json(document).strip()
