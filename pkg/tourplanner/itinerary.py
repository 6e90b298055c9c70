"""Day plan and itinerary documents, step resolution and the Markdown emitter."""
import logging
from dataclasses import dataclass, field, replace

from .common import (
    ParseError,
    canonical_json,
    format_window,
    load_json,
    normalize_name,
    parse_window,
)
from .const import (
    KIND_ATTRACTION,
    KIND_HOTEL,
    KIND_RESTAURANT,
    KIND_TRANSPORT,
    ROLE_FIRST,
    ROLE_LAST,
    ROLE_MIDDLE,
    ROLE_SINGLE,
    SCHEMA_VERSION,
    STEP_CHECK_IN,
    STEP_CHECK_OUT,
    STEP_LOCAL_TRANSFER,
    STEP_MEAL,
    STEP_SIGHTSEEING,
    STEP_TRANSPORTATION,
    STEP_TYPES,
)
from .providers import SchemaError, extract_document

_LOGGER = logging.getLogger(__name__)

TYPE_KEYS = ("activity type", "activity_type", "type")


def _activity(value):
    # "local transfer" is a common spelling in model replies
    return "_".join(str(value or "").strip().lower().split()) if value else ""


@dataclass(frozen=True)
class Step:
    """One timed activity of a day plan."""

    start: int
    end: int
    activity_type: str
    name: str
    description: str = ""
    price: float = None
    mode: str = None

    def __post_init__(self):
        """Check the window and the activity type."""
        if self.activity_type not in STEP_TYPES:
            raise ParseError(f"unknown activity type {self.activity_type!r}")
        if not 0 <= self.start < self.end <= 24 * 60:
            raise ParseError(
                f"step {self.name!r}: window {format_window((self.start, self.end))} "
                "must start before it ends"
            )

    @property
    def minutes(self):
        """Return the step length in minutes."""
        return self.end - self.start

    @property
    def window(self):
        """Return (start, end)."""
        return self.start, self.end

    @classmethod
    def from_dict(cls, data):
        """Create a step from its document form."""
        if not isinstance(data, dict):
            raise ParseError(f"step must be an object, got {type(data).__name__}")
        try:
            if "time" in data:
                start, end = parse_window(data["time"])
            else:
                start, end = parse_window((data["start"], data["end"]))
        except (KeyError, ValueError) as ex:
            raise ParseError(f"step {data.get('name')!r}: bad time: {ex}") from ex
        activity = next((data[key] for key in TYPE_KEYS if key in data), None)
        name = str(data.get("name") or "").strip()
        if not name:
            raise ParseError("step without a name")
        price = data.get("price")
        try:
            price = None if price is None else float(price)
        except (TypeError, ValueError) as ex:
            raise ParseError(f"step {name!r}: price {price!r} is not a number") from ex
        return cls(
            start=start,
            end=end,
            activity_type=_activity(activity),
            name=name,
            description=str(data.get("description") or ""),
            price=price,
            mode=data.get("mode"),
        )

    def to_dict(self):
        """Return the document form."""
        data = {
            "time": format_window(self.window),
            "activity type": self.activity_type,
            "name": self.name,
            "description": self.description,
        }
        if self.price is not None:
            data["price"] = self.price
        if self.mode is not None:
            data["mode"] = self.mode
        return data


@dataclass(frozen=True)
class Proposal:
    """A plan for one day, as proposed by one agent."""

    agent_id: str
    day_label: str
    daily_cost: float = None
    steps: tuple = ()

    @classmethod
    def from_dict(cls, data, agent_id=None, day_label=None):
        """Create a proposal from its document form."""
        if isinstance(data, list):
            data = {"plan": data}
        if not isinstance(data, dict):
            raise ParseError("day plan must be an object")
        raw_steps = data.get("plan", data.get("steps"))
        if not isinstance(raw_steps, list):
            raise ParseError("day plan has no step list")
        cost = data.get("daily_cost")
        try:
            cost = None if cost is None else float(cost)
        except (TypeError, ValueError) as ex:
            raise ParseError(f"daily_cost {cost!r} is not a number") from ex
        return cls(
            agent_id=agent_id or str(data.get("agent_id") or ""),
            day_label=day_label or str(data.get("day_label") or ""),
            daily_cost=cost,
            steps=tuple(Step.from_dict(step) for step in raw_steps),
        )

    def to_dict(self):
        """Return the document form."""
        return {
            "agent_id": self.agent_id,
            "day_label": self.day_label,
            "daily_cost": self.daily_cost,
            "plan": [step.to_dict() for step in self.steps],
        }

    def with_agent(self, agent_id):
        """Return a copy attributed to another agent."""
        return replace(self, agent_id=agent_id)


@dataclass(frozen=True)
class Itinerary:
    """A whole trip: hotel, transport legs and one plan per day."""

    query: str
    origin_city: str
    dest_city: str
    duration_days: int
    hotel: str
    outbound: str
    inbound: str
    days: tuple = ()
    total_cost: float = None
    config_hash: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        """Return the document form."""
        return {
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.config_hash,
            "query": self.query,
            "origin_city": self.origin_city,
            "dest_city": self.dest_city,
            "duration_days": self.duration_days,
            "hotel": self.hotel,
            "outbound": self.outbound,
            "inbound": self.inbound,
            "total_cost": self.total_cost,
            "days": [day.to_dict() for day in self.days],
            **self.extra,
        }

    @classmethod
    def from_dict(cls, data):
        """Create an itinerary from its document form."""
        if not isinstance(data, dict):
            raise ParseError("itinerary must be an object")
        try:
            days = tuple(
                Proposal.from_dict(day, day_label=day.get("day_label") or f"Day {index}")
                for index, day in enumerate(data["days"], 1)
            )
            return cls(
                query=str(data.get("query", "")),
                origin_city=data["origin_city"],
                dest_city=data["dest_city"],
                duration_days=int(data.get("duration_days", len(days))),
                hotel=data.get("hotel"),
                outbound=data.get("outbound"),
                inbound=data.get("inbound"),
                days=days,
                total_cost=data.get("total_cost"),
                config_hash=data.get("config_hash", ""),
            )
        except (KeyError, TypeError, AttributeError) as ex:
            raise ParseError(f"itinerary field missing or malformed: {ex}") from ex


def load_itinerary(path):
    """Read an itinerary document."""
    return Itinerary.from_dict(load_json(path))


def dump_itinerary(itinerary):
    """Return the canonical text of an itinerary."""
    return canonical_json(itinerary.to_dict())


def parse_proposal(text, agent_id, day_label):
    """Parse a model reply into a Proposal owned by agent_id."""
    document = extract_document(text)
    try:
        return Proposal.from_dict(document, agent_id=agent_id, day_label=day_label)
    except ParseError as ex:
        raise SchemaError(str(ex)) from ex


def resolve_step(step, sandbox, origin, dest):
    """Return the (kind, entity) a step refers to, or None.

    Transportation steps name a leg code connecting the trip cities, hotel
    steps a hotel of the destination, meals a restaurant or a food district.
    """
    if step.activity_type == STEP_TRANSPORTATION:
        leg = sandbox.resolve(None, step.name, KIND_TRANSPORT)
        if leg is None:
            return None
        cities = {normalize_name(leg.origin_city), normalize_name(leg.dest_city)}
        wanted = {normalize_name(origin), normalize_name(dest)}
        return (KIND_TRANSPORT, leg) if cities == wanted else None
    if step.activity_type in (STEP_CHECK_IN, STEP_CHECK_OUT):
        hotel = sandbox.resolve(dest, step.name, KIND_HOTEL)
        return None if hotel is None else (KIND_HOTEL, hotel)
    if step.activity_type == STEP_SIGHTSEEING:
        attraction = sandbox.resolve(dest, step.name, KIND_ATTRACTION)
        return None if attraction is None else (KIND_ATTRACTION, attraction)
    if step.activity_type == STEP_MEAL:
        restaurant = sandbox.resolve(dest, step.name, KIND_RESTAURANT)
        if restaurant is not None:
            return KIND_RESTAURANT, restaurant
        attraction = sandbox.resolve(dest, step.name, KIND_ATTRACTION)
        if attraction is not None and attraction.food_district:
            return KIND_ATTRACTION, attraction
    return None


def entity_key(entity):
    """Return the (kind, id) key of an entity."""
    return entity.kind, entity.id


def visited_keys(proposal, sandbox, origin, dest):
    """Return the keys of attractions and restaurants a day plan visits."""
    keys = []
    for step in proposal.steps:
        if step.activity_type not in (STEP_SIGHTSEEING, STEP_MEAL):
            continue
        resolved = resolve_step(step, sandbox, origin, dest)
        if resolved is not None:
            keys.append(entity_key(resolved[1]))
    return keys


def step_price(step, entity):
    """Return the sandbox price of a resolved step."""
    if step.activity_type == STEP_LOCAL_TRANSFER or step.activity_type == STEP_CHECK_OUT:
        return 0.0
    if entity.kind == KIND_TRANSPORT:
        return entity.price
    if entity.kind == KIND_HOTEL:
        return entity.price_per_night
    if entity.kind == KIND_RESTAURANT:
        return entity.avg_price
    return entity.entrance_fee


def enrich(proposal, sandbox, origin, dest):
    """Return the proposal with sandbox prices and transport modes filled in."""
    steps = []
    for step in proposal.steps:
        if step.activity_type == STEP_LOCAL_TRANSFER:
            steps.append(replace(step, price=0.0))
            continue
        resolved = resolve_step(step, sandbox, origin, dest)
        if resolved is None:
            steps.append(step)
            continue
        entity = resolved[1]
        mode = entity.mode if entity.kind == KIND_TRANSPORT else step.mode
        steps.append(replace(step, price=step_price(step, entity), mode=mode))
    return replace(proposal, steps=tuple(steps))


def canonical_steps_text(proposal):
    """Return the times and names of a plan, one step per line."""
    return "\n".join(
        f"{format_window(step.window)} {step.activity_type} {step.name}"
        for step in proposal.steps
    )


def _money(value):
    value = float(value)
    return f"{value:.1f}".rstrip("0").rstrip(".") if not value.is_integer() else str(int(value))


def _title(step):
    if step.activity_type == STEP_TRANSPORTATION:
        return f"Travel by {step.mode or 'transport'} {step.name}"
    if step.activity_type == STEP_CHECK_IN:
        return f"Check-in at {step.name}"
    if step.activity_type == STEP_CHECK_OUT:
        return f"Check-out from {step.name}"
    if step.activity_type == STEP_MEAL:
        return f"{'Lunch' if step.start < 15 * 60 else 'Dinner'} at {step.name}"
    if step.activity_type == STEP_LOCAL_TRANSFER:
        return step.name
    return f"Visit {step.name}"


def render_markdown(itinerary):
    """Return the itinerary in the day-by-day Markdown style."""
    blocks = []
    for index, day in enumerate(itinerary.days, 1):
        heading = f"**Day {index} Itinerary**"
        if index == 1:
            heading = f"**Day 1 Itinerary: {itinerary.origin_city} to {itinerary.dest_city}**"
        lines = [heading, ""]
        for step in day.steps:
            lines.append(f"### {format_window(step.window)} | {_title(step)}")
            if step.description:
                lines.append(step.description)
            if step.price:
                lines.append(f"- **Price**: ¥{_money(step.price)}")
            lines.append("")
            lines.append("---")
            lines.append("")
        if day.daily_cost is not None:
            lines.append(f"**Total Daily Cost**: ¥{_money(day.daily_cost)}")
        blocks.append("\n".join(lines))
    if itinerary.total_cost is not None:
        blocks.append(f"**Total Trip Cost**: ¥{_money(itinerary.total_cost)}")
    return "\n\n".join(blocks) + "\n"


def day_roles(duration):
    """Return the role of every day of a trip."""
    if duration == 1:
        return [ROLE_SINGLE]
    return [ROLE_FIRST] + [ROLE_MIDDLE] * (duration - 2) + [ROLE_LAST]

