"""User profile: explicit demands from the query and inferred preferences."""
import logging
import math
import re
from dataclasses import dataclass

import numpy as np

from .common import PreconditionError, TourPlannerError, normalize_name
from .const import (
    CATEGORIES,
    CUISINES,
    DAY_SLOTS,
    HOTEL_SHARE,
    KIND_HOTEL,
    KIND_RESTAURANT,
    MEAL_HIGH_FRACTION,
    MEAL_LOW_FRACTION,
    MEAL_SHARE,
    SLOT_EARLY_MORNING,
    WEEKDAYS,
)
from .prompts import (
    TEMPLATE_EXTRACT_DEMANDS,
    TEMPLATE_INFER_PREFERENCES,
    request_for,
)
from .providers import SchemaError
from .sandbox import UnknownCity

_LOGGER = logging.getLogger(__name__)

SLOT_PATTERN = r"(early morning|late morning|morning|afternoon|evening)"
DURATION_RE = re.compile(r"(\d+)[- ]day", re.I)
CITIES_RE = re.compile(
    r"\bfrom\s+(.+?)\s+to\s+(.+?)(?=,|\.|\s+departing|\s+with|\s+for|$)", re.I
)
DEPART_RE = re.compile(r"departing on\s+(\w+)\s+" + SLOT_PATTERN, re.I)
RETURN_RE = re.compile(r"returning on\s+(\w+)\s+" + SLOT_PATTERN, re.I)
BUDGET_RE = re.compile(r"budget of\s*(?:¥|\$|CNY|RMB)?\s*([\d,]+(?:\.\d+)?)", re.I)
INTERESTS_RE = re.compile(r"interested in\s+(.+?)(?:,\s*along with|\.(?:\s|$))", re.I)
CUISINES_RE = re.compile(r"cuisines like\s+(.+?)(?:\s+dishes)?\.", re.I)
FIELD_RE = re.compile(r"^\s*(?:\d+\.\s*)?([A-Za-z ]+?)\s*:\s*\[(.*?)\]\s*$", re.M)

CUISINE_INDEX = {normalize_name(name): name for name in CUISINES}

FIELD_KEYS = {
    "departure day": "departure_day",
    "return day": "return_day",
    "departure time": "departure_slot",
    "return time": "return_slot",
    "duration": "duration_days",
    "departure city": "origin_city",
    "destination city": "dest_city",
    "other requirements": "other_requirements",
    "budget": "budget",
    "restaurant type": "cuisine_prefs",
    # seen in model replies copying a misspelled field name
    "reastaurant type": "cuisine_prefs",
}


@dataclass(frozen=True)
class ExplicitDemands:
    """Demands stated in the query."""

    departure_day: str
    return_day: str
    departure_slot: str
    return_slot: str
    duration_days: int
    origin_city: str
    dest_city: str
    other_requirements: tuple = ()
    budget: float = 0.0
    cuisine_prefs: tuple = ()

    def __post_init__(self):
        """Check field domains."""
        if self.duration_days < 1:
            raise PreconditionError("duration_days must be >= 1")
        if not self.budget > 0:
            raise PreconditionError("budget must be > 0")
        for day in (self.departure_day, self.return_day):
            if day is not None and day not in WEEKDAYS:
                raise PreconditionError(f"unknown weekday {day!r}")
        for slot in (self.departure_slot, self.return_slot):
            if slot is not None and slot not in DAY_SLOTS:
                raise PreconditionError(f"unknown day slot {slot!r}")
        for cuisine in self.cuisine_prefs:
            if cuisine not in CUISINES:
                raise PreconditionError(f"unknown cuisine {cuisine!r}")

    @property
    def nights(self):
        """Return the budget divisor N (at least 1)."""
        return max(self.duration_days - 1, 1)

    def to_dict(self):
        """Return the JSON form."""
        return {
            "departure_day": self.departure_day,
            "return_day": self.return_day,
            "departure_slot": self.departure_slot,
            "return_slot": self.return_slot,
            "duration_days": self.duration_days,
            "origin_city": self.origin_city,
            "dest_city": self.dest_city,
            "other_requirements": list(self.other_requirements),
            "budget": self.budget,
            "cuisine_prefs": list(self.cuisine_prefs),
        }

    @classmethod
    def from_dict(cls, data):
        """Create from the JSON form."""
        return cls(
            departure_day=data.get("departure_day"),
            return_day=data.get("return_day"),
            departure_slot=data.get("departure_slot"),
            return_slot=data.get("return_slot"),
            duration_days=int(data["duration_days"]),
            origin_city=data["origin_city"],
            dest_city=data["dest_city"],
            other_requirements=tuple(data.get("other_requirements", ())),
            budget=float(data["budget"]),
            cuisine_prefs=tuple(data.get("cuisine_prefs", ())),
        )


@dataclass(frozen=True)
class InferredPrefs:
    """Preferences inferred from budget and city prices."""

    hotel_category: str
    meal_range: tuple

    def __post_init__(self):
        """Check the category and range."""
        if self.hotel_category not in CATEGORIES:
            raise PreconditionError(f"unknown hotel category {self.hotel_category!r}")
        low, high = self.meal_range
        if not 0 < low < high:
            raise PreconditionError(f"meal range needs 0 < min < max, got {self.meal_range}")

    def to_dict(self):
        """Return the JSON form."""
        return {"hotel_category": self.hotel_category, "meal_range": list(self.meal_range)}

    @classmethod
    def from_dict(cls, data):
        """Create from the JSON form."""
        return cls(data["hotel_category"], tuple(data["meal_range"]))


@dataclass(frozen=True)
class CityPriceStats:
    """Price aggregates of one city."""

    city: str
    hotel_min_price: dict
    meal_quartiles: tuple
    transport_range: tuple = None

    @property
    def ordered(self):
        """Return True if category minimum prices rise with the category."""
        prices = [
            self.hotel_min_price[category]
            for category in CATEGORIES
            if category in self.hotel_min_price
        ]
        return all(a <= b for a, b in zip(prices, prices[1:]))

    def to_dict(self):
        """Return the JSON form."""
        return {
            "city": self.city,
            "hotel_min_price": dict(self.hotel_min_price),
            "meal_quartiles": list(self.meal_quartiles),
            "transport_range": (
                None if self.transport_range is None else list(self.transport_range)
            ),
            "ordered": self.ordered,
        }

    @classmethod
    def from_dict(cls, data):
        """Create from the JSON form."""
        transport = data.get("transport_range")
        return cls(
            data["city"],
            dict(data["hotel_min_price"]),
            tuple(data["meal_quartiles"]),
            None if transport is None else tuple(transport),
        )


@dataclass(frozen=True)
class UserProfile:
    """Explicit demands, inferred preferences and the query they came from."""

    explicit: ExplicitDemands
    inferred: InferredPrefs
    raw_query: str

    def requirement_texts(self):
        """Return the phrases used to match attractions, joined text first."""
        phrases = list(self.explicit.other_requirements)
        joined = ", ".join(phrases + list(self.explicit.cuisine_prefs))
        texts = [joined or self.raw_query]
        for phrase in phrases:
            if phrase not in texts:
                texts.append(phrase)
        return texts

    def to_dict(self):
        """Return the JSON form."""
        return {
            "explicit": self.explicit.to_dict(),
            "inferred": self.inferred.to_dict(),
            "raw_query": self.raw_query,
        }

    @classmethod
    def from_dict(cls, data):
        """Create from the JSON form."""
        return cls(
            ExplicitDemands.from_dict(data["explicit"]),
            InferredPrefs.from_dict(data["inferred"]),
            data.get("raw_query", ""),
        )


def _weekday(value):
    if value is None:
        return None
    name = value.strip().capitalize()
    return name if name in WEEKDAYS else None


def _slot(value):
    if value is None:
        return None
    slot = " ".join(value.lower().split())
    if slot == "morning":
        return SLOT_EARLY_MORNING
    return slot if slot in DAY_SLOTS else None


def _split_list(text):
    """Split "a, b, and c" or "a and b" into items."""
    pieces = [piece.strip() for piece in text.split(",")]
    pieces = [re.sub(r"^and\s+", "", piece, flags=re.I) for piece in pieces]
    return [piece for piece in pieces if piece]


def _cuisine(token):
    key = normalize_name(token)
    for candidate in (key, f"{key} cuisine"):
        if candidate in CUISINE_INDEX:
            return CUISINE_INDEX[candidate]
    return None


def _cuisines(pieces):
    """Map free-text pieces onto the cuisine vocabulary, keeping order."""
    found = []
    for piece in pieces:
        if _cuisine(piece):
            parts = [piece]
        else:
            parts = piece.split(" and ")
        index = 0
        while index < len(parts):
            # longest run of " and "-joined parts that names a cuisine
            for stop in range(len(parts), index, -1):
                name = _cuisine(" and ".join(parts[index:stop]))
                if name:
                    break
            else:
                _LOGGER.debug("Dropping unknown cuisine %r", parts[index])
                stop = index + 1
            if name and name not in found:
                found.append(name)
            index = stop
    return tuple(found)


def _requirements(text):
    pieces = _split_list(text)
    if len(pieces) == 1:
        pieces = [part.strip() for part in pieces[0].split(" and ") if part.strip()]
    return tuple(pieces)


def _number(text):
    return float(text.replace(",", ""))


def _return_day(departure_day, duration):
    if departure_day is None:
        return None
    return WEEKDAYS[(WEEKDAYS.index(departure_day) + duration - 1) % len(WEEKDAYS)]


def _demands(fields, source):
    missing = [
        name
        for name, key in (
            ("cities", "origin_city"),
            ("cities", "dest_city"),
            ("duration", "duration_days"),
            ("budget", "budget"),
        )
        if fields.get(key) in (None, "")
    ]
    if missing:
        raise ExtractionError(
            f"{source}: cannot recover {', '.join(sorted(set(missing)))}"
        )
    if fields.get("return_day") is None:
        fields["return_day"] = _return_day(fields.get("departure_day"), fields["duration_days"])
    try:
        return ExplicitDemands(**fields)
    except PreconditionError as ex:
        raise ExtractionError(f"{source}: {ex}") from ex


def parse_query(query):
    """Parse the templated benchmark phrasing of a travel query."""
    if not str(query).strip():
        raise PreconditionError("query must be non-empty")
    fields = {}
    match = DURATION_RE.search(query)
    fields["duration_days"] = int(match.group(1)) if match else None
    match = CITIES_RE.search(query)
    if match:
        fields["origin_city"] = match.group(1).strip()
        fields["dest_city"] = match.group(2).strip()
    match = DEPART_RE.search(query)
    fields["departure_day"] = _weekday(match.group(1)) if match else None
    fields["departure_slot"] = _slot(match.group(2)) if match else None
    match = RETURN_RE.search(query)
    fields["return_day"] = _weekday(match.group(1)) if match else None
    fields["return_slot"] = _slot(match.group(2)) if match else None
    match = BUDGET_RE.search(query)
    fields["budget"] = _number(match.group(1)) if match else None
    match = INTERESTS_RE.search(query)
    fields["other_requirements"] = _requirements(match.group(1)) if match else ()
    match = CUISINES_RE.search(query)
    fields["cuisine_prefs"] = _cuisines(_split_list(match.group(1))) if match else ()
    return _demands(fields, "query")


def _money(value):
    value = float(value)
    return str(int(value)) if value.is_integer() else f"{value:.2f}".rstrip("0")


def _join(items):
    items = list(items)
    if len(items) <= 2:
        return " and ".join(items)
    return ", ".join(items[:-1]) + ", and " + items[-1]


def render_query(demands):
    """Return the templated query phrasing of demands; parse_query inverts it."""
    parts = [
        f"I am looking for a {demands.duration_days}-day trip from "
        f"{demands.origin_city} to {demands.dest_city}"
    ]
    if demands.departure_day and demands.departure_slot:
        parts.append(
            f", departing on {demands.departure_day} {demands.departure_slot}"
        )
    if demands.return_day and demands.return_slot:
        parts.append(f" and returning on {demands.return_day} {demands.return_slot}")
    parts.append(f", with a budget of ¥{_money(demands.budget)}.")
    cuisines = _join(demands.cuisine_prefs)
    if demands.other_requirements:
        parts.append(f" I'm interested in {_join(demands.other_requirements)}")
        if cuisines:
            parts.append(f", along with enjoying diverse cuisines like {cuisines} dishes")
        parts.append(".")
    elif cuisines:
        parts.append(f" I'd like to enjoy diverse cuisines like {cuisines} dishes.")
    return "".join(parts)


def parse_demand_fields(text):
    """Parse the bracketed field block of a demand extraction reply."""
    raw = {}
    for name, value in FIELD_RE.findall(text or ""):
        key = FIELD_KEYS.get(normalize_name(name))
        if key is not None:
            raw[key] = value.strip()
    if not raw:
        raise SchemaError("no bracketed fields in reply")
    fields = {
        "departure_day": _weekday(raw.get("departure_day")),
        "return_day": _weekday(raw.get("return_day")),
        "departure_slot": _slot(raw.get("departure_slot")),
        "return_slot": _slot(raw.get("return_slot")),
        "origin_city": raw.get("origin_city") or None,
        "dest_city": raw.get("dest_city") or None,
        "other_requirements": tuple(_split_list(raw.get("other_requirements", ""))),
        "cuisine_prefs": _cuisines(_split_list(raw.get("cuisine_prefs", ""))),
    }
    try:
        duration = raw.get("duration_days")
        fields["duration_days"] = int(re.sub(r"\D", "", duration)) if duration else None
        budget = raw.get("budget")
        fields["budget"] = (
            _number(re.sub(r"[^\d.,]", "", budget)) if budget else None
        )
    except ValueError as ex:
        raise SchemaError(f"unreadable number: {ex}") from ex
    try:
        return _demands(fields, "reply")
    except ExtractionError as ex:
        raise SchemaError(str(ex)) from ex


def format_demand_fields(demands):
    """Return demands in the bracketed field block layout."""
    return "\n".join(
        [
            f"Departure Day: [{demands.departure_day or ''}]",
            f"Return Day: [{demands.return_day or ''}]",
            f"Departure Time: [{demands.departure_slot or ''}]",
            f"Return Time: [{demands.return_slot or ''}]",
            f"Duration: [{demands.duration_days}]",
            f"Departure City: [{demands.origin_city}]",
            f"Destination City: [{demands.dest_city}]",
            f"Other Requirements: [{', '.join(demands.other_requirements)}]",
            f"Budget: [{_money(demands.budget)}]",
            f"Restaurant Type: [{', '.join(demands.cuisine_prefs)}]",
        ]
    )


async def extract_demands(query, provider=None):
    """Return the ExplicitDemands of a query.

    With a provider the extraction prompt is used; an unparseable reply falls
    back to the rule-based parser.
    """
    if not str(query).strip():
        raise PreconditionError("query must be non-empty")
    if provider is None:
        return parse_query(query)
    request = request_for(
        TEMPLATE_EXTRACT_DEMANDS,
        {"query": query},
        query=query,
        cuisines="/".join(CUISINES),
    )
    try:
        return await provider.chat_structured(request, parse_demand_fields)
    except SchemaError as ex:
        _LOGGER.warning("Demand extraction reply unusable (%s), parsing rules", ex)
        return parse_query(query)


def city_stats(sandbox, city):
    """Return the price aggregates of a city."""
    name = sandbox.city(city).name
    hotels = sandbox.in_city(KIND_HOTEL, name)
    restaurants = sandbox.in_city(KIND_RESTAURANT, name)
    if not hotels:
        raise EmptyCategorySet(f"{name} has no hotels")
    if not restaurants:
        raise EmptyCategorySet(f"{name} has no restaurants")
    hotel_min_price = {}
    for category in CATEGORIES:
        prices = [hotel.price_per_night for hotel in hotels if hotel.category == category]
        if prices:
            hotel_min_price[category] = float(min(prices))
    prices = np.asarray([restaurant.avg_price for restaurant in restaurants], dtype=float)
    quartiles = tuple(float(value) for value in np.percentile(prices, [25, 50, 75]))
    legs = [
        leg.price
        for leg in sandbox.transport
        if normalize_name(name) in (normalize_name(leg.origin_city), normalize_name(leg.dest_city))
    ]
    stats = CityPriceStats(
        name,
        hotel_min_price,
        quartiles,
        (float(min(legs)), float(max(legs))) if legs else None,
    )
    if not stats.ordered:
        _LOGGER.debug("Hotel category prices of %s are not ordered", name)
    return stats


def infer_preferences(demands, stats):
    """Return the hotel category and per-meal price range for a budget."""
    if not stats.hotel_min_price:
        raise StatsMissing(f"no hotel category of {stats.city} has a price")
    nights = demands.nights
    per_night = demands.budget * HOTEL_SHARE / nights
    category = next(
        (
            category
            for category in reversed(CATEGORIES)
            if category in stats.hotel_min_price
            and stats.hotel_min_price[category] <= per_night
        ),
        None,
    )
    if category is None:
        category = next(c for c in CATEGORIES if c in stats.hotel_min_price)
    per_day = demands.budget * MEAL_SHARE / nights
    low = max(1, math.floor(per_day * MEAL_LOW_FRACTION))
    high = max(low + 1, math.ceil(per_day * MEAL_HIGH_FRACTION))
    return InferredPrefs(category, (low, high))


def parse_preference_lines(text, stats):
    """Parse "Hotel Cost: [..]" and "Meal Cost Range: [a, b]" lines."""
    fields = {normalize_name(name): value for name, value in FIELD_RE.findall(text or "")}
    category = fields.get("hotel cost", "").strip().capitalize()
    if category not in CATEGORIES:
        raise SchemaError(f"unknown hotel category {category!r}")
    if category not in stats.hotel_min_price:
        raise SchemaError(f"{stats.city} has no {category} hotel")
    try:
        low, high = (int(float(part)) for part in fields["meal cost range"].split(","))
    except (KeyError, ValueError) as ex:
        raise SchemaError(f"meal cost range unreadable: {ex}") from ex
    if not 0 < low < high:
        raise SchemaError(f"meal cost range [{low}, {high}] is empty")
    return InferredPrefs(category, (low, high))


async def request_preferences(demands, stats, query, provider):
    """Infer preferences through the provider, falling back to the rules."""
    transport = (
        "unknown"
        if stats.transport_range is None
        else f"{_money(stats.transport_range[0])}-{_money(stats.transport_range[1])}"
    )
    request = request_for(
        TEMPLATE_INFER_PREFERENCES,
        {"demands": demands.to_dict(), "stats": stats.to_dict()},
        query=query,
        transport_prices=transport,
        hotel_prices=", ".join(
            f"{category} min {_money(price)}"
            for category, price in stats.hotel_min_price.items()
        ),
        meal_prices="quartiles " + "/".join(_money(q) for q in stats.meal_quartiles),
        budget=_money(demands.budget),
    )
    try:
        return await provider.chat_structured(
            request, lambda text: parse_preference_lines(text, stats)
        )
    except SchemaError as ex:
        _LOGGER.warning("Preference reply unusable (%s), applying rules", ex)
        return infer_preferences(demands, stats)


async def build_profile(query, sandbox, provider=None):
    """Return the UserProfile of a query against a sandbox."""
    demands = await extract_demands(query, provider)
    for city in (demands.origin_city, demands.dest_city):
        if not sandbox.has_city(city):
            raise UnknownCity(f"query names unknown city {city!r}")
    stats = city_stats(sandbox, demands.dest_city)
    if provider is None:
        inferred = infer_preferences(demands, stats)
    else:
        inferred = await request_preferences(demands, stats, query, provider)
    _LOGGER.info(
        "Profile %s -> %s, %d days, budget %s, %s hotel, meals %s",
        demands.origin_city,
        demands.dest_city,
        demands.duration_days,
        _money(demands.budget),
        inferred.hotel_category,
        inferred.meal_range,
    )
    return UserProfile(demands, inferred, query)


class ExtractionError(TourPlannerError):
    """Error to indicate required demand fields cannot be recovered."""


class StatsMissing(TourPlannerError):
    """Error to indicate no hotel category has a price."""


class EmptyCategorySet(TourPlannerError):
    """Error to indicate a city without hotels or restaurants."""
