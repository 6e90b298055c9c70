"""Deterministic responders that answer planner prompts without a chat model.

Every reply is computed from the request context and the sandbox, so an
offline run is reproducible and its plans obey the schedule rules.
"""
import logging
import math
import re
from collections import namedtuple

from .common import TourPlannerError, format_clock
from .const import (
    AFTERNOON_WINDOW,
    BASE_AGENT_ID,
    COMMITTEE_AGENT_ID,
    KIND_ATTRACTION,
    KIND_HOTEL,
    KIND_RESTAURANT,
    KIND_TRANSPORT,
    MIN_TRANSFER,
    ROLE_FIRST,
    ROLE_LAST,
    ROLE_MIDDLE,
    ROLE_SINGLE,
    STEP_CHECK_IN,
    STEP_CHECK_OUT,
    STEP_LOCAL_TRANSFER,
    STEP_MEAL,
    STEP_SIGHTSEEING,
    STEP_TRANSPORTATION,
)
from .constraints import ScheduleRules, check_day, day_cost
from .geo import GeoPoint, haversine, point_of
from .itinerary import Proposal, Step, resolve_step
from .profile import (
    CityPriceStats,
    ExplicitDemands,
    format_demand_fields,
    infer_preferences,
    parse_query,
)
from .prompts import (
    TEMPLATE_ARBITRATE,
    TEMPLATE_BUILD_AGENTS,
    TEMPLATE_DAY_PLAN,
    TEMPLATE_EXTRACT_DEMANDS,
    TEMPLATE_INFER_PREFERENCES,
    TEMPLATE_PEER_REVIEW,
    TEMPLATE_REPAIR,
    TEMPLATE_SUGGEST_ATTRACTIONS,
    as_json,
)

_LOGGER = logging.getLogger(__name__)

Place = namedtuple("Place", "name lat lon")

STATION_TRANSFER = 45
HOTEL_DESK_MINUTES = 30
MEAL_MINUTES = 60
MIDDLE_DAY_START = 9 * 60
LUNCH_TARGET = 12 * 60
RESTAURANT_CHOICES = 8

FOCUS_BASE = "base"
FOCUS_ROUTE = "route"
FOCUS_BUDGET = "budget"
FOCUS_SCHEDULE = "schedule"
FOCUS_CULTURAL = "cultural"
FOCUS_FOODIE = "foodie"
FOCUS_NATURE = "nature"

CULTURAL_WORDS = (
    "histor",
    "cultur",
    "museum",
    "temple",
    "heritage",
    "palace",
    "pagoda",
    "art",
    "ancient",
    "architect",
    "relic",
)
NATURE_WORDS = (
    "nature",
    "natural",
    "scenic",
    "scenery",
    "park",
    "garden",
    "lake",
    "mountain",
    "hiking",
    "trail",
    "outdoor",
)
FOOD_WORDS = ("food", "cuisine", "culinary", "dining", "restaurant", "snack", "eat", "dish")

# first match wins, in this order
FOCUS_KEYWORDS = [
    (FOCUS_ROUTE, ("route", "distance", "km", "spatial", "geograph", "compact", "hop")),
    (FOCUS_BUDGET, ("budget", "cost", "cny", "price", "saving", "frugal", "cheap")),
    (FOCUS_CULTURAL, CULTURAL_WORDS),
    (FOCUS_FOODIE, FOOD_WORDS),
    (FOCUS_NATURE, NATURE_WORDS),
    (FOCUS_SCHEDULE, ("schedule", "pace", "punctual", "timing", "idle", "rest")),
]

CORE_AGENTS = [
    {
        "agent_id": "route_optimizer",
        "objective": "Keep the average hop between consecutive stops under 3 km",
        "priorities": ["short transfers", "one cluster per day", "no backtracking"],
        "personality": "methodical, map-minded",
    },
    {
        "agent_id": "budget_manager",
        "objective": "Keep the trip total within the stated budget in CNY",
        "priorities": ["total cost", "low entrance fees", "meals inside the price range"],
        "personality": "frugal, precise",
    },
    {
        "agent_id": "schedule_keeper",
        "objective": "Keep idle gaps under 30 minutes and every day within 22:30",
        "priorities": ["punctual transfers", "steady pace", "buffer before departures"],
        "personality": "calm, punctual",
    },
]
SPECIALIST_AGENTS = [
    (
        {
            "agent_id": "cultural_scholar",
            "objective": "Visit at least two history or culture sites per full day",
            "priorities": ["museums and heritage sites", "landmark grade", "guided depth"],
            "personality": "curious, well-read",
        },
        CULTURAL_WORDS,
    ),
    (
        {
            "agent_id": "foodie_explorer",
            "objective": "Serve the requested cuisines at two or more meals",
            "priorities": ["preferred cuisines", "restaurant rating", "food districts"],
            "personality": "adventurous, sociable",
        },
        FOOD_WORDS,
    ),
    (
        {
            "agent_id": "nature_seeker",
            "objective": "Spend at least three hours a day in parks or scenery",
            "priorities": ["parks and lakes", "outdoor time", "quiet spots"],
            "personality": "relaxed, outdoorsy",
        },
        NATURE_WORDS,
    ),
]

AGENT_FOCUS = {
    BASE_AGENT_ID: FOCUS_BASE,
    "route_optimizer": FOCUS_ROUTE,
    "budget_manager": FOCUS_BUDGET,
    "schedule_keeper": FOCUS_SCHEDULE,
    "cultural_scholar": FOCUS_CULTURAL,
    "foodie_explorer": FOCUS_FOODIE,
    "nature_seeker": FOCUS_NATURE,
}

BEST_REVIEW = 8
WORST_REVIEW = -2


def _tokens(text):
    return re.findall(r"[a-z]+", str(text or "").lower())


def keyword_hits(text, words):
    """Return how many tokens of text start with one of words."""
    return sum(1 for token in _tokens(text) if token.startswith(words))


def agent_focus(agent):
    """Return the planning focus of an agent description."""
    agent = agent or {}
    focus = AGENT_FOCUS.get(agent.get("agent_id"))
    if focus is not None:
        return focus
    texts = [
        str(agent.get("agent_id", "")).replace("_", " "),
        agent.get("objective", ""),
        *agent.get("priorities", ()),
        agent.get("personality", ""),
    ]
    for text in texts:
        for focus, words in FOCUS_KEYWORDS:
            if keyword_hits(text, words):
                return focus
    return FOCUS_BASE


def transfer_minutes(here, there):
    """Return the local transfer time between two places."""
    km = haversine(point_of(here), point_of(there))
    return max(MIN_TRANSFER, 5 * math.ceil((10 + 3 * km) / 5))


def _bounds(attraction):
    low, high = attraction.duration_bounds
    return math.ceil(low * 60), math.floor(high * 60)


def _fenced(document):
    return f"```json\n{as_json(document)}\n```"


class DayBuilder:
    """Greedy timeline builder for one day plan."""

    def __init__(self, sandbox, context, focus=FOCUS_BASE, rules=None):
        """Initialize a builder from a day planning request context."""
        self.sandbox = sandbox
        self.focus = focus
        self.rules = rules or ScheduleRules()
        self.role = context["role"]
        self.label = context["day_label"]
        self.origin = context["origin"]
        self.dest = context["dest"]
        self.hotel = self._entity(KIND_HOTEL, context.get("hotel"))
        self.outbound = self._entity(KIND_TRANSPORT, context.get("outbound"))
        self.inbound = self._entity(KIND_TRANSPORT, context.get("inbound"))
        self.meal_range = tuple(context.get("meal_range") or (0, float("inf")))
        self.cuisines = set(context.get("cuisines", ()))
        attractions = [
            self._entity(KIND_ATTRACTION, entity_id)
            for entity_id in context.get("attractions", ())
        ]
        self.attractions = [a for a in attractions if a is not None]
        self.attractions = self._ordered(self.attractions)
        self.restaurants = [
            restaurant
            for restaurant in (
                self._entity(KIND_RESTAURANT, entity_id)
                for entity_id in context.get("restaurants", ())
            )
            if restaurant is not None
        ]
        self.steps = []
        self.used = set()

    def _entity(self, kind, entity_id):
        return None if entity_id is None else self.sandbox.get(kind, entity_id)

    @property
    def base(self):
        """Return the place the day starts from."""
        if self.hotel is not None:
            return self.hotel
        city = self.sandbox.city(self.dest)
        if city.lat is not None and city.lon is not None:
            return Place(city.name, city.lat, city.lon)
        points = [point_of(a) for a in self.attractions] or [GeoPoint(0.0, 0.0)]
        return Place(
            city.name,
            sum(p.lat for p in points) / len(points),
            sum(p.lon for p in points) / len(points),
        )

    def _ordered(self, attractions):
        rank = {attraction.id: index for index, attraction in enumerate(attractions)}
        if self.focus == FOCUS_ROUTE:
            base = point_of(self.base)
            return sorted(
                attractions, key=lambda a: (haversine(base, point_of(a)), rank[a.id])
            )
        if self.focus in (FOCUS_CULTURAL, FOCUS_NATURE):
            words = CULTURAL_WORDS if self.focus == FOCUS_CULTURAL else NATURE_WORDS
            return sorted(
                attractions,
                key=lambda a: (-keyword_hits(f"{a.name} {a.feature_text}", words), rank[a.id]),
            )
        if self.focus == FOCUS_FOODIE:
            return sorted(attractions, key=lambda a: (not a.food_district, rank[a.id]))
        if self.focus == FOCUS_BUDGET:
            return sorted(attractions, key=lambda a: (a.entrance_fee, rank[a.id]))
        if self.focus == FOCUS_SCHEDULE:
            return sorted(attractions, key=lambda a: (-a.popularity, rank[a.id]))
        return list(attractions)

    def _restaurant_key(self, here):
        low, high = self.meal_range
        spot = point_of(here)

        def key(restaurant):
            if self.focus == FOCUS_FOODIE:
                taste = (restaurant.cuisine not in self.cuisines, -restaurant.rating)
            elif self.focus == FOCUS_BUDGET:
                taste = (False, restaurant.avg_price)
            else:
                taste = (False, 0.0)
            return (
                not low <= restaurant.avg_price <= high,
                taste,
                haversine(spot, point_of(restaurant)),
                restaurant.id,
            )

        return key

    def restaurants_near(self, here, exclude=()):
        """Return unused restaurants in preference order from a place."""
        return sorted(
            (
                r
                for r in self.restaurants
                if r.id not in self.used and r.id not in exclude
            ),
            key=self._restaurant_key(here),
        )

    def add(self, start, end, activity, name, description=""):
        """Append a step."""
        self.steps.append(Step(start, end, activity, name, description))

    def move(self, start, here, there):
        """Append a transfer between two places and return its end."""
        minutes = transfer_minutes(here, there)
        self.add(
            start,
            start + minutes,
            STEP_LOCAL_TRANSFER,
            f"Transfer to {there.name}",
            f"About {minutes} minutes from {here.name}.",
        )
        return start + minutes

    def visit(self, start, end, attraction):
        """Append a sightseeing step."""
        self.used.add(attraction.id)
        self.add(start, end, STEP_SIGHTSEEING, attraction.name, attraction.feature_text)

    def meal(self, start, restaurant):
        """Append a meal step and return its end."""
        self.used.add(restaurant.id)
        end = start + MEAL_MINUTES
        self.add(
            start,
            end,
            STEP_MEAL,
            restaurant.name,
            f"{restaurant.cuisine}, about ¥{restaurant.avg_price:g} per person.",
        )
        return end

    def _meal_option(self, cur, here, window, limit, back):
        low, high = window
        for restaurant in self.restaurants_near(here)[:RESTAURANT_CHOICES]:
            arrive = cur + transfer_minutes(here, restaurant)
            start = max(arrive, low)
            if start > high or start - arrive > self.rules.max_idle:
                continue
            if start + MEAL_MINUTES + back(restaurant) > limit:
                continue
            return restaurant, start
        return None

    def _visit_option(self, cur, here, limit, back):
        for attraction in self.attractions:
            if attraction.id in self.used:
                continue
            arrive = cur + transfer_minutes(here, attraction)
            opening, closing = attraction.opening_window
            start = max(arrive, opening)
            if start - arrive > self.rules.max_idle:
                continue
            if attraction.last_admission is not None and start > attraction.last_admission:
                continue
            low, high = _bounds(attraction)
            end = start + low
            if low > high or end > closing or end + back(attraction) > limit:
                continue
            return attraction, start, end
        return None

    def fill(self, cur, here, limit, back):
        """Greedily add visits and meals; return the final time and place.

        Meals come first whenever a meal window is reachable; the fill stops
        after dinner or when nothing more fits before `limit`.
        """
        meals = [self.rules.lunch_window, self.rules.dinner_window]
        while True:
            option = None
            for window in list(meals):
                option = self._meal_option(cur, here, window, limit, back)
                if option is not None:
                    restaurant, start = option
                    self.move(cur, here, restaurant)
                    cur, here = self.meal(start, restaurant), restaurant
                    meals = meals[meals.index(window) + 1 :]
                    break
            if option is not None:
                if not meals:
                    return cur, here
                continue
            option = self._visit_option(cur, here, limit, back)
            if option is None:
                return cur, here
            attraction, start, end = option
            self.move(cur, here, attraction)
            self.visit(start, end, attraction)
            cur, here = end, attraction

    def _home(self, place):
        return transfer_minutes(place, self.hotel)

    def first_day(self):
        """Arrival, hotel check-in, then an afternoon and evening fill."""
        leg = self.outbound
        self.add(
            leg.depart,
            leg.arrive,
            STEP_TRANSPORTATION,
            leg.id,
            f"{leg.mode.capitalize()} from {leg.origin_city} to {leg.dest_city}.",
        )
        cur = leg.arrive + STATION_TRANSFER
        self.add(
            leg.arrive,
            cur,
            STEP_LOCAL_TRANSFER,
            f"Transfer to {self.hotel.name}",
            "From the station to the hotel.",
        )
        self.add(cur, cur + HOTEL_DESK_MINUTES, STEP_CHECK_IN, self.hotel.name, "Drop the bags.")
        cur += HOTEL_DESK_MINUTES
        end, here = self.fill(cur, self.hotel, self.rules.day_end, self._home)
        if here is not self.hotel:
            self.move(end, here, self.hotel)

    def _middle_plan(self):
        rules = self.rules
        lunch_low, lunch_high = rules.lunch_window
        hotel = self.hotel
        for first in self.attractions:
            low1, high1 = _bounds(first)
            start1 = max(MIDDLE_DAY_START, first.opening_window[0])
            if first.last_admission is not None and start1 > first.last_admission:
                continue
            for lunch in self.restaurants_near(first)[:RESTAURANT_CHOICES]:
                hop1 = transfer_minutes(first, lunch)
                end1 = start1 + min(max(LUNCH_TARGET - hop1 - start1, low1), high1)
                lunch_at = max(end1 + hop1, lunch_low)
                if low1 > high1 or end1 > first.opening_window[1]:
                    continue
                if lunch_at - end1 - hop1 > rules.max_idle or lunch_at > lunch_high:
                    continue
                found = self._afternoon(first, lunch, lunch_at)
                if found is None:
                    continue
                second, start2, end2, dinner, dinner_at = found
                self.move(start1 - transfer_minutes(hotel, first), hotel, first)
                self.visit(start1, end1, first)
                self.move(end1, first, lunch)
                lunch_end = self.meal(lunch_at, lunch)
                self.move(lunch_end, lunch, second)
                self.visit(start2, end2, second)
                self.move(end2, second, dinner)
                dinner_end = self.meal(dinner_at, dinner)
                self.move(dinner_end, dinner, hotel)
                return True
        return False

    def _afternoon(self, first, lunch, lunch_at):
        rules = self.rules
        dinner_low, dinner_high = rules.dinner_window
        dinner_from = max(dinner_low, lunch_at + rules.meal_spacing)
        for second in self.attractions:
            if second.id == first.id:
                continue
            low2, high2 = _bounds(second)
            opening, closing = second.opening_window
            arrive = lunch_at + MEAL_MINUTES + transfer_minutes(lunch, second)
            start2 = max(arrive, opening)
            if low2 > high2 or start2 - arrive > rules.max_idle:
                continue
            if start2 >= AFTERNOON_WINDOW[1]:
                continue
            if second.last_admission is not None and start2 > second.last_admission:
                continue
            for dinner in self.restaurants_near(second, exclude=(lunch.id,))[
                :RESTAURANT_CHOICES
            ]:
                hop3 = transfer_minutes(second, dinner)
                end2 = start2 + min(max(dinner_from - hop3 - start2, low2), high2)
                if end2 > closing or end2 <= AFTERNOON_WINDOW[0]:
                    continue
                dinner_at = max(end2 + hop3, dinner_from)
                if dinner_at - end2 - hop3 > rules.max_idle or dinner_at > dinner_high:
                    continue
                home = dinner_at + MEAL_MINUTES + transfer_minutes(dinner, self.hotel)
                if home > rules.day_end:
                    continue
                return second, start2, end2, dinner, dinner_at
        return None

    def middle_day(self):
        """Morning visit, lunch, afternoon visit and dinner, from the hotel and back."""
        if self._middle_plan():
            return
        _LOGGER.debug("%s: no two-visit day found, filling greedily", self.label)
        end, here = self.fill(MIDDLE_DAY_START, self.hotel, self.rules.day_end, self._home)
        if here is not self.hotel:
            self.move(end, here, self.hotel)

    def last_day(self):
        """Morning fill, check-out, then the return leg."""
        leg = self.inbound
        latest = leg.depart - self.rules.buffer_for(leg.mode)
        end, here = self.fill(
            MIDDLE_DAY_START, self.hotel, latest - HOTEL_DESK_MINUTES, self._home
        )
        if here is not self.hotel:
            checkout = self.move(end, here, self.hotel)
        else:
            checkout = latest - HOTEL_DESK_MINUTES
        self.add(
            checkout,
            checkout + HOTEL_DESK_MINUTES,
            STEP_CHECK_OUT,
            self.hotel.name,
            "Settle the bill.",
        )
        self._depart(checkout + HOTEL_DESK_MINUTES, leg)

    def _depart(self, cur, leg):
        self.add(
            cur,
            cur + STATION_TRANSFER,
            STEP_LOCAL_TRANSFER,
            f"Transfer to the {leg.mode} {leg.id}",
            f"Reach the station well before {format_clock(leg.depart)}.",
        )
        self.add(
            leg.depart,
            leg.arrive,
            STEP_TRANSPORTATION,
            leg.id,
            f"{leg.mode.capitalize()} from {leg.origin_city} to {leg.dest_city}.",
        )

    def single_day(self):
        """Arrival, a day in town and the return leg."""
        out, back = self.outbound, self.inbound
        self.add(
            out.depart,
            out.arrive,
            STEP_TRANSPORTATION,
            out.id,
            f"{out.mode.capitalize()} from {out.origin_city} to {out.dest_city}.",
        )
        cur = out.arrive + STATION_TRANSFER
        self.add(
            out.arrive,
            cur,
            STEP_LOCAL_TRANSFER,
            f"Transfer into {self.dest}",
            "From the station to the city center.",
        )
        latest = back.depart - self.rules.buffer_for(back.mode)
        start = self.base
        end, here = self.fill(cur, start, latest, lambda place: 0)
        if here is start:
            self.add(
                back.depart,
                back.arrive,
                STEP_TRANSPORTATION,
                back.id,
                f"{back.mode.capitalize()} from {back.origin_city} to {back.dest_city}.",
            )
        else:
            self._depart(end, back)

    def build(self, agent_id=BASE_AGENT_ID):
        """Return the day plan as a Proposal."""
        self.steps, self.used = [], set()
        {
            ROLE_FIRST: self.first_day,
            ROLE_MIDDLE: self.middle_day,
            ROLE_LAST: self.last_day,
            ROLE_SINGLE: self.single_day,
        }[self.role]()
        proposal = Proposal(agent_id, self.label, steps=tuple(self.steps))
        report = check_day(
            proposal, self.sandbox, self.origin, self.dest, self.role, rules=self.rules
        )
        if not report.passed:
            _LOGGER.debug("%s plan for %s breaks %s", self.focus, self.label, report.reason())
        last = self.role in (ROLE_LAST, ROLE_SINGLE)
        cost = day_cost(proposal, self.sandbox, self.origin, self.dest, self.hotel, last)
        return Proposal(agent_id, self.label, cost, proposal.steps)


class OfflineResponder:
    """Answers every planner template from the sandbox."""

    def __init__(self, sandbox, rules=None):
        """Initialize a new OfflineResponder."""
        self.sandbox = sandbox
        self.rules = rules or ScheduleRules()

    def responders(self):
        """Return the template to responder mapping for a mock provider."""
        return {
            TEMPLATE_EXTRACT_DEMANDS: self.extract_demands,
            TEMPLATE_INFER_PREFERENCES: self.infer_preferences,
            TEMPLATE_SUGGEST_ATTRACTIONS: self.suggest_attractions,
            TEMPLATE_BUILD_AGENTS: self.build_agents,
            TEMPLATE_DAY_PLAN: self.day_plan,
            TEMPLATE_PEER_REVIEW: self.peer_review,
            TEMPLATE_ARBITRATE: self.arbitrate,
            TEMPLATE_REPAIR: self.repair,
        }

    def extract_demands(self, request, rng):
        """Reply with the bracketed fields of the rule-based parse."""
        try:
            return format_demand_fields(parse_query(request.context["query"]))
        except TourPlannerError as ex:
            _LOGGER.debug("Query not in the templated phrasing: %s", ex)
            return ""

    def infer_preferences(self, request, rng):
        """Reply with the hotel category and meal range lines."""
        context = request.context
        prefs = infer_preferences(
            ExplicitDemands.from_dict(context["demands"]),
            CityPriceStats.from_dict(context["stats"]),
        )
        low, high = prefs.meal_range
        return f"Hotel Cost: [{prefs.hotel_category}]\nMeal Cost Range: [{low}, {high}]"

    def suggest_attractions(self, request, rng):
        """Reply with city attractions sharing words with the requirements."""
        context = request.context
        wanted = tuple(
            token[:5]
            for phrase in context.get("requirements", ())
            for token in _tokens(phrase)
            if len(token) > 3
        )
        if not wanted:
            return "[]"
        scored = []
        for attraction in self.sandbox.in_city(KIND_ATTRACTION, context["city"]):
            hits = keyword_hits(f"{attraction.name} {attraction.feature_text}", wanted)
            if hits:
                scored.append((-hits, -attraction.popularity, attraction.id, attraction.name))
        scored.sort()
        return as_json([item[3] for item in scored[: context.get("limit") or len(scored)]])

    def build_agents(self, request, rng):
        """Reply with the core agents plus the specialists the query calls for."""
        context = request.context
        query = context.get("query", "")
        team = [dict(agent) for agent in CORE_AGENTS]
        spare = []
        for agent, words in SPECIALIST_AGENTS:
            (team if keyword_hits(query, words) else spare).append(dict(agent))
        minimum, maximum = context.get("min_agents", 4), context.get("max_agents", 6)
        while len(team) < minimum and spare:
            team.append(spare.pop(0))
        return _fenced(team[:maximum])

    def day_plan(self, request, rng):
        """Reply with the plan the requesting agent's focus leads to."""
        context = request.context
        agent = context.get("agent") or {}
        builder = DayBuilder(self.sandbox, context, agent_focus(agent), self.rules)
        return _fenced(builder.build(agent.get("agent_id", BASE_AGENT_ID)).to_dict())

    def _metric(self, focus, proposal, context):
        resolved = [
            resolve_step(step, self.sandbox, context["origin"], context["dest"])
            for step in proposal.steps
        ]
        visits = [
            (step, item[1])
            for step, item in zip(proposal.steps, resolved)
            if item is not None and step.activity_type in (STEP_SIGHTSEEING, STEP_MEAL)
        ]
        if focus == FOCUS_ROUTE:
            points = [point_of(entity) for _, entity in visits]
            return -sum(haversine(a, b) for a, b in zip(points, points[1:]))
        if focus == FOCUS_BUDGET:
            return -sum(
                entity.avg_price if entity.kind == KIND_RESTAURANT else entity.entrance_fee
                for _, entity in visits
            )
        if focus == FOCUS_SCHEDULE:
            steps = proposal.steps
            if steps and steps[-1].activity_type == STEP_TRANSPORTATION:
                steps = steps[:-1]
            return -sum(max(0, b.start - a.end) for a, b in zip(steps, steps[1:]))
        if focus in (FOCUS_CULTURAL, FOCUS_NATURE):
            words = CULTURAL_WORDS if focus == FOCUS_CULTURAL else NATURE_WORDS
            return sum(
                keyword_hits(f"{entity.name} {entity.feature_text}", words)
                for _, entity in visits
                if entity.kind == KIND_ATTRACTION
            )
        if focus == FOCUS_FOODIE:
            cuisines = set(context.get("cuisines", ()))
            return sum(
                (2.0 if entity.cuisine in cuisines else 0.0) + entity.rating
                for _, entity in visits
                if entity.kind == KIND_RESTAURANT
            ) + sum(2.0 for _, entity in visits if getattr(entity, "food_district", False))
        return len(visits)

    def peer_review(self, request, rng):
        """Reply with rank-stretched scores from the reviewer's focus."""
        context = request.context
        focus = agent_focus(context.get("reviewer"))
        metrics = {}
        for document in context["plans"]:
            try:
                proposal = Proposal.from_dict(document)
                metrics[proposal.agent_id] = self._metric(focus, proposal, context)
            except TourPlannerError as ex:
                _LOGGER.debug("Unreadable plan under review: %s", ex)
                metrics[str(document.get("agent_id"))] = float("-inf")
        levels = sorted(set(metrics.values()), reverse=True)
        span = max(len(levels) - 1, 1)
        review = {}
        for agent_id, value in metrics.items():
            rank = levels.index(value)
            score = round(BEST_REVIEW - (BEST_REVIEW - WORST_REVIEW) * rank / span)
            review[agent_id] = {
                "score": score,
                "critique": f"Ranked {rank + 1} of {len(levels)} on {focus} merit.",
            }
        return _fenced(review)

    def arbitrate(self, request, rng):
        """Reply with the best rated winner as the committee plan."""
        winner = dict(request.context["plans"][0])
        winner["agent_id"] = COMMITTEE_AGENT_ID
        return _fenced(winner)

    def repair(self, request, rng):
        """Reply with a freshly built base plan for the day."""
        builder = DayBuilder(self.sandbox, request.context, FOCUS_BASE, self.rules)
        return _fenced(builder.build(COMMITTEE_AGENT_ID).to_dict())


def responders_for(sandbox, rules=None):
    """Return the offline responders for a sandbox."""
    return OfflineResponder(sandbox, rules).responders()

