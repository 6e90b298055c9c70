"""Hard constraints: schedule rules for day plans and the trip indicators."""
import logging
from collections import namedtuple
from dataclasses import dataclass

from .common import TourPlannerError, format_clock, format_window, normalize_name, parse_clock
from .const import (
    AFTERNOON_WINDOW,
    CONF_DAY_END,
    CONF_FLIGHT_BUFFER,
    CONF_IMPLICIT_TRANSFER,
    CONF_MAX_IDLE,
    CONF_MIN_TRANSFER,
    CONF_TRAIN_BUFFER,
    DAY_END,
    DINNER_WINDOW,
    FLIGHT_BUFFER,
    IMPLICIT_TRANSFER,
    KIND_ATTRACTION,
    KIND_HOTEL,
    KIND_RESTAURANT,
    KIND_TRANSPORT,
    LUNCH_WINDOW,
    MAX_IDLE,
    MIN_MEAL_SPACING,
    MIN_TRANSFER,
    MODE_TRAIN,
    MORNING_WINDOW,
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
    TRAIN_BUFFER,
)
from .itinerary import day_roles, entity_key, resolve_step, step_price

_LOGGER = logging.getLogger(__name__)

Violation = namedtuple("Violation", "rule entity detail")

RULE_SEQUENCING = "sequencing"
RULE_TRANSFER = "transfer"
RULE_IDLE = "idle"
RULE_END_TIME = "end_time"
RULE_LUNCH = "lunch_window"
RULE_DINNER = "dinner_window"
RULE_MEAL_SPACING = "meal_spacing"
RULE_HALF_DAY = "half_day"
RULE_DIVERSITY = "diversity"
RULE_BUFFER = "departure_buffer"
RULE_STRUCTURE = "day_structure"
RULE_RESOLVABLE = "resolvable"
RULE_VISIT_DURATION = "visit_duration"
RULE_VISIT_TIME = "visit_time"
RULE_CLUSTER = "cluster_locality"

HARD_RULES = [
    RULE_SEQUENCING,
    RULE_TRANSFER,
    RULE_IDLE,
    RULE_END_TIME,
    RULE_LUNCH,
    RULE_DINNER,
    RULE_MEAL_SPACING,
    RULE_HALF_DAY,
    RULE_DIVERSITY,
    RULE_BUFFER,
    RULE_STRUCTURE,
    RULE_RESOLVABLE,
    RULE_VISIT_DURATION,
    RULE_VISIT_TIME,
]

I_SANDBOX = "i_sandbox"
I_COMP = "i_comp"
I_REST = "i_rest"
I_ATTR = "i_attr"
I_DUR = "i_dur"
I_TIME = "i_time"
INDICATORS = [I_SANDBOX, I_COMP, I_REST, I_ATTR, I_DUR, I_TIME]

VISITS = (STEP_SIGHTSEEING, STEP_MEAL)
EXPECTED_COUNTS = {
    # role: (transportation, check-in, check-out)
    ROLE_FIRST: (1, 1, 0),
    ROLE_MIDDLE: (0, 0, 0),
    ROLE_LAST: (1, 0, 1),
    ROLE_SINGLE: (2, 0, 0),
}


@dataclass(frozen=True)
class ScheduleRules:
    """Timing limits of the schedule rules, in minutes."""

    min_transfer: int = MIN_TRANSFER
    implicit_transfer: int = IMPLICIT_TRANSFER
    max_idle: int = MAX_IDLE
    day_end: int = DAY_END
    flight_buffer: int = FLIGHT_BUFFER
    train_buffer: int = TRAIN_BUFFER
    lunch_window: tuple = LUNCH_WINDOW
    dinner_window: tuple = DINNER_WINDOW
    meal_spacing: int = MIN_MEAL_SPACING

    @classmethod
    def from_config(cls, conf):
        """Create from a validated schedule config section."""
        return cls(
            min_transfer=conf[CONF_MIN_TRANSFER],
            implicit_transfer=conf[CONF_IMPLICIT_TRANSFER],
            max_idle=conf[CONF_MAX_IDLE],
            day_end=parse_clock(conf[CONF_DAY_END]),
            flight_buffer=conf[CONF_FLIGHT_BUFFER],
            train_buffer=conf[CONF_TRAIN_BUFFER],
        )

    def buffer_for(self, mode):
        """Return the free time required before a departure."""
        return self.train_buffer if mode == MODE_TRAIN else self.flight_buffer


@dataclass
class RuleReport:
    """Per-rule outcome of validating one day plan."""

    role: str
    flags: dict
    violations: list
    advisories: list

    @property
    def passed(self):
        """Return True if every hard rule holds."""
        return all(self.flags.values())

    def failed_rules(self):
        """Return the names of the failing rules."""
        return [rule for rule, ok in self.flags.items() if not ok]

    def reason(self):
        """Return a short summary of the failures."""
        return "; ".join(
            f"{violation.rule}: {violation.entity}: {violation.detail}"
            for violation in self.violations
        )

    def to_dict(self):
        """Return the JSON form."""
        return {
            "role": self.role,
            "passed": self.passed,
            "flags": dict(self.flags),
            "violations": [list(violation) for violation in self.violations],
            "advisories": [list(advisory) for advisory in self.advisories],
        }


def _pairs(steps):
    return zip(steps, steps[1:])


def _overlaps(step, window):
    return step.start < window[1] and step.end > window[0]


def _is_food_district(item):
    return item is not None and item[0] == KIND_ATTRACTION and item[1].food_district


def _meal_times(steps, resolved, window):
    """Return the times at which meals fall inside a window.

    A food district visited during the window counts as the meal.
    """
    low, high = window
    times = []
    for step, item in zip(steps, resolved):
        if step.activity_type == STEP_MEAL and low <= step.start <= high:
            times.append(step.start)
        elif step.activity_type in VISITS and _is_food_district(item):
            if step.start <= high and step.end > low:
                times.append(max(step.start, low))
    return times


class _DayCheck:
    """Collects the rule outcomes of one day plan."""

    def __init__(self, proposal, resolved, role, rules):
        self.proposal = proposal
        self.steps = proposal.steps
        self.resolved = resolved
        self.role = role
        self.rules = rules
        self.flags = dict.fromkeys(HARD_RULES, True)
        self.violations = []
        self.advisories = []

    def fail(self, rule, entity, detail):
        self.flags[rule] = False
        self.violations.append(Violation(rule, entity, detail))

    def sequencing(self):
        for before, after in _pairs(self.steps):
            if after.start < before.end:
                self.fail(
                    RULE_SEQUENCING,
                    after.name,
                    f"starts {format_clock(after.start)} before {before.name} "
                    f"ends {format_clock(before.end)}",
                )

    def transfers(self):
        for step in self.steps:
            if (
                step.activity_type == STEP_LOCAL_TRANSFER
                and step.minutes < self.rules.min_transfer
            ):
                self.fail(RULE_TRANSFER, step.name, f"transfer lasts {step.minutes} min")
        for before, after in _pairs(self.steps):
            if STEP_LOCAL_TRANSFER in (before.activity_type, after.activity_type):
                continue
            gap = after.start - before.end
            if 0 <= gap < self.rules.implicit_transfer:
                self.fail(
                    RULE_TRANSFER,
                    after.name,
                    f"only {gap} min to get there from {before.name}",
                )

    def idle(self):
        last = len(self.steps) - 1
        for index, (before, after) in enumerate(_pairs(self.steps), 1):
            gap = after.start - before.end
            if gap <= self.rules.max_idle:
                continue
            if index == last and after.activity_type == STEP_TRANSPORTATION:
                continue
            self.fail(RULE_IDLE, after.name, f"{gap} idle minutes before it")

    def end_time(self):
        for step in self.steps:
            if step.activity_type != STEP_TRANSPORTATION and step.end > self.rules.day_end:
                self.fail(RULE_END_TIME, step.name, f"ends {format_clock(step.end)}")

    def meals(self):
        lunches = _meal_times(self.steps, self.resolved, self.rules.lunch_window)
        dinners = _meal_times(self.steps, self.resolved, self.rules.dinner_window)
        label = self.proposal.day_label
        if not lunches:
            self.fail(
                RULE_LUNCH, label, f"no lunch in {format_window(self.rules.lunch_window)}"
            )
        if not dinners:
            self.fail(
                RULE_DINNER, label, f"no dinner in {format_window(self.rules.dinner_window)}"
            )
        if lunches and dinners and max(dinners) - min(lunches) < self.rules.meal_spacing:
            self.fail(
                RULE_MEAL_SPACING,
                label,
                f"lunch {format_clock(min(lunches))} and dinner "
                f"{format_clock(max(dinners))} are too close",
            )

    def half_day(self):
        visits = [step for step in self.steps if step.activity_type in VISITS]
        for window, part in ((MORNING_WINDOW, "morning"), (AFTERNOON_WINDOW, "afternoon")):
            if not any(_overlaps(step, window) for step in visits):
                self.fail(RULE_HALF_DAY, self.proposal.day_label, f"empty {part}")

    def diversity(self, used_ids):
        seen = set()
        for step, item in zip(self.steps, self.resolved):
            if step.activity_type not in VISITS or item is None:
                continue
            key = entity_key(item[1])
            if key in seen:
                self.fail(RULE_DIVERSITY, step.name, "repeats within the day")
            elif key in used_ids:
                self.fail(RULE_DIVERSITY, step.name, "already visited on an earlier day")
            seen.add(key)

    def departure_buffer(self):
        for index, step in enumerate(self.steps):
            if index == 0 or step.activity_type != STEP_TRANSPORTATION:
                continue
            item = self.resolved[index]
            mode = item[1].mode if item is not None else step.mode
            deadline = step.start - self.rules.buffer_for(mode)
            for prior in self.steps[:index]:
                if prior.activity_type in (STEP_TRANSPORTATION, STEP_LOCAL_TRANSFER):
                    continue
                if prior.end > deadline:
                    self.fail(
                        RULE_BUFFER,
                        prior.name,
                        f"ends {format_clock(prior.end)}, after {format_clock(deadline)} "
                        f"for the {format_clock(step.start)} departure",
                    )

    def _direction(self, index, origin, dest):
        item = self.resolved[index]
        if item is None:
            return
        leg = item[1]
        if normalize_name(leg.origin_city) != normalize_name(origin):
            self.fail(
                RULE_STRUCTURE,
                leg.id,
                f"runs {leg.origin_city} to {leg.dest_city}, expected {origin} to {dest}",
            )

    def structure(self, origin, dest):
        core = [
            index
            for index, step in enumerate(self.steps)
            if step.activity_type != STEP_LOCAL_TRANSFER
        ]
        kinds = [self.steps[index].activity_type for index in core]
        label = self.proposal.day_label
        expected = EXPECTED_COUNTS[self.role]
        actual = (
            kinds.count(STEP_TRANSPORTATION),
            kinds.count(STEP_CHECK_IN),
            kinds.count(STEP_CHECK_OUT),
        )
        for name, want, have in zip(
            (STEP_TRANSPORTATION, STEP_CHECK_IN, STEP_CHECK_OUT), expected, actual
        ):
            if want != have:
                self.fail(RULE_STRUCTURE, label, f"{have} {name} steps, expected {want}")
        if self.role in (ROLE_FIRST, ROLE_SINGLE):
            if not kinds or kinds[0] != STEP_TRANSPORTATION:
                self.fail(RULE_STRUCTURE, label, "must begin with the arrival transportation")
            else:
                self._direction(core[0], origin, dest)
        if self.role == ROLE_FIRST and (len(kinds) < 2 or kinds[1] != STEP_CHECK_IN):
            self.fail(RULE_STRUCTURE, label, "check-in must follow the arrival")
        if self.role in (ROLE_LAST, ROLE_SINGLE):
            if not kinds or kinds[-1] != STEP_TRANSPORTATION:
                self.fail(RULE_STRUCTURE, label, "must end with the return transportation")
            else:
                self._direction(core[-1], dest, origin)
        if self.role == ROLE_LAST and (len(kinds) < 2 or kinds[-2] != STEP_CHECK_OUT):
            self.fail(RULE_STRUCTURE, label, "check-out must precede the departure")

    def resolvable(self):
        for step, item in zip(self.steps, self.resolved):
            if step.activity_type != STEP_LOCAL_TRANSFER and item is None:
                self.fail(
                    RULE_RESOLVABLE,
                    step.name,
                    f"{step.activity_type} target not in the sandbox",
                )

    def visits(self):
        for step, item in zip(self.steps, self.resolved):
            if item is None or item[0] != KIND_ATTRACTION or step.activity_type not in VISITS:
                continue
            for rule, detail in visit_problems(step, item[1]):
                self.fail(rule, step.name, detail)

    def locality(self, anchors):
        labels = set()
        for step, item in zip(self.steps, self.resolved):
            if step.activity_type in VISITS and item is not None:
                label = anchors.label_of(item[1])
                if label is not None and label >= 0:
                    labels.add(label)
        if len(labels) > 1:
            self.advisories.append(
                Violation(
                    RULE_CLUSTER,
                    self.proposal.day_label,
                    f"visits clusters {sorted(labels)}",
                )
            )


def visit_problems(step, attraction):
    """Return every (rule, detail) a visit breaks; duration and timing are independent."""
    problems = []
    if step.activity_type == STEP_SIGHTSEEING:
        low, high = (hours * 60 for hours in attraction.duration_bounds)
        if not low - 1e-9 <= step.minutes <= high + 1e-9:
            problems.append(
                (RULE_VISIT_DURATION, f"{step.minutes} min outside {low:g}-{high:g} min")
            )
    opening = attraction.opening_window
    if step.start < opening[0] or step.end > opening[1]:
        problems.append(
            (
                RULE_VISIT_TIME,
                f"{format_window(step.window)} outside opening {format_window(opening)}",
            )
        )
    elif attraction.last_admission is not None and step.start > attraction.last_admission:
        problems.append(
            (
                RULE_VISIT_TIME,
                f"starts after last admission {format_clock(attraction.last_admission)}",
            )
        )
    return problems


def resolve_all(proposal, sandbox, origin, dest):
    """Return the resolution of every step; transfers resolve to None."""
    return [
        None
        if step.activity_type == STEP_LOCAL_TRANSFER
        else resolve_step(step, sandbox, origin, dest)
        for step in proposal.steps
    ]


def check_day(
    proposal,
    sandbox,
    origin,
    dest,
    role,
    used_ids=frozenset(),
    rules=None,
    anchors=None,
):
    """Check a day plan against every schedule rule."""
    check = _DayCheck(
        proposal, resolve_all(proposal, sandbox, origin, dest), role, rules or ScheduleRules()
    )
    check.sequencing()
    check.transfers()
    check.idle()
    check.end_time()
    if role == ROLE_MIDDLE:
        check.meals()
        check.half_day()
    check.diversity(used_ids)
    check.departure_buffer()
    check.structure(origin, dest)
    check.resolvable()
    check.visits()
    if anchors is not None:
        check.locality(anchors)
    return RuleReport(role, check.flags, check.violations, check.advisories)


def validate_proposal(
    proposal,
    sandbox,
    profile,
    day_role,
    used_ids=frozenset(),
    rules=None,
    anchors=None,
):
    """Return the RuleReport of a day plan for a traveller's profile."""
    origin = sandbox.city(profile.explicit.origin_city).name
    dest = sandbox.city(profile.explicit.dest_city).name
    return check_day(proposal, sandbox, origin, dest, day_role, used_ids, rules, anchors)


@dataclass(frozen=True)
class HardScore:
    """The six binary indicators and what they add up to."""

    i_sandbox: int
    i_comp: int
    i_rest: int
    i_attr: int
    i_dur: int
    i_time: int
    violations: tuple = ()

    @property
    def s_feas(self):
        """Return the feasibility score."""
        return (self.i_sandbox + self.i_comp) / 2

    @property
    def s_rat(self):
        """Return the rationality score."""
        return (self.i_rest + self.i_attr + self.i_dur + self.i_time) / 4

    @property
    def eta(self):
        """Return the constraint satisfaction rate."""
        return (self.s_feas + self.s_rat) / 2

    @property
    def r_hard(self):
        """Return the hard reward."""
        return self.s_feas + self.s_rat

    def to_dict(self):
        """Return the JSON form."""
        return {
            **{name: getattr(self, name) for name in INDICATORS},
            "s_feas": self.s_feas,
            "s_rat": self.s_rat,
            "eta": self.eta,
            "r_hard": self.r_hard,
            "violations": [list(violation) for violation in self.violations],
        }


def hard_score(itinerary, sandbox, profile=None):
    """Return the hard indicators of a whole itinerary."""
    origin, dest = itinerary.origin_city, itinerary.dest_city
    flags = dict.fromkeys(INDICATORS, 1)
    violations = []

    def fail(indicator, entity, detail):
        flags[indicator] = 0
        violations.append(Violation(indicator, entity, detail))

    expected_days = (
        profile.explicit.duration_days if profile is not None else itinerary.duration_days
    )
    if len(itinerary.days) != expected_days:
        fail(I_COMP, "itinerary", f"{len(itinerary.days)} days, expected {expected_days}")
    if itinerary.hotel is None:
        if expected_days > 1:
            fail(I_COMP, "itinerary", "no hotel")
    elif sandbox.resolve(dest, itinerary.hotel, KIND_HOTEL) is None:
        fail(I_SANDBOX, itinerary.hotel, "hotel not in the sandbox")
    for label, code in (("outbound", itinerary.outbound), ("inbound", itinerary.inbound)):
        if code is None:
            fail(I_COMP, "itinerary", f"no {label} leg")
            continue
        leg = sandbox.resolve(None, code, KIND_TRANSPORT)
        cities = (
            None
            if leg is None
            else {normalize_name(leg.origin_city), normalize_name(leg.dest_city)}
        )
        if cities != {normalize_name(origin), normalize_name(dest)}:
            fail(I_SANDBOX, code, f"{label} leg not in the sandbox")

    seen = {KIND_ATTRACTION: set(), KIND_RESTAURANT: set()}
    for day in itinerary.days:
        for step, item in zip(day.steps, resolve_all(day, sandbox, origin, dest)):
            if step.price is None:
                fail(I_COMP, step.name, "no price")
            if step.activity_type == STEP_TRANSPORTATION and not step.mode:
                fail(I_COMP, step.name, "no transport mode")
            if step.activity_type == STEP_LOCAL_TRANSFER:
                continue
            if item is None:
                fail(I_SANDBOX, step.name, f"{step.activity_type} target not in the sandbox")
                continue
            kind, entity = item
            if step.activity_type not in VISITS:
                continue
            if entity.id in seen[kind]:
                fail(I_REST if kind == KIND_RESTAURANT else I_ATTR, step.name, "repeated")
            seen[kind].add(entity.id)
            if kind == KIND_ATTRACTION:
                for rule, detail in visit_problems(step, entity):
                    fail(I_DUR if rule == RULE_VISIT_DURATION else I_TIME, step.name, detail)
    return HardScore(**flags, violations=tuple(violations))


def _item_cost(step, sandbox, origin, dest):
    if step.activity_type in (STEP_LOCAL_TRANSFER, STEP_CHECK_IN, STEP_CHECK_OUT):
        return 0.0
    item = resolve_step(step, sandbox, origin, dest)
    if item is None:
        raise UnresolvedEntity(f"{step.activity_type} {step.name!r} not in the sandbox")
    return step_price(step, item[1])


def day_cost(proposal, sandbox, origin, dest, hotel=None, last_day=False):
    """Return the cost of one day, with a hotel night unless it is the last."""
    cost = sum(_item_cost(step, sandbox, origin, dest) for step in proposal.steps)
    if hotel is not None and not last_day:
        cost += hotel.price_per_night
    return round(cost, 2)


def _hotel(itinerary, sandbox):
    if itinerary.duration_days <= 1:
        return None
    hotel = sandbox.resolve(itinerary.dest_city, itinerary.hotel, KIND_HOTEL)
    if hotel is None:
        raise UnresolvedEntity(f"hotel {itinerary.hotel!r} not in the sandbox")
    return hotel


def total_cost(itinerary, sandbox):
    """Return transport, fees, meals and every night but the last."""
    hotel = _hotel(itinerary, sandbox)
    cost = sum(
        _item_cost(step, sandbox, itinerary.origin_city, itinerary.dest_city)
        for day in itinerary.days
        for step in day.steps
    )
    if hotel is not None:
        cost += hotel.price_per_night * (itinerary.duration_days - 1)
    return round(cost, 2)


def daily_costs(itinerary, sandbox):
    """Return the cost of every day of an itinerary."""
    hotel = _hotel(itinerary, sandbox)
    last = len(itinerary.days) - 1
    return [
        day_cost(
            day,
            sandbox,
            itinerary.origin_city,
            itinerary.dest_city,
            hotel,
            last_day=index == last,
        )
        for index, day in enumerate(itinerary.days)
    ]


def check_itinerary(itinerary, sandbox, rules=None, anchors=None):
    """Return one RuleReport per day, threading visited ids through the days."""
    used = set()
    reports = []
    for day, role in zip(itinerary.days, day_roles(len(itinerary.days))):
        report = check_day(
            day,
            sandbox,
            itinerary.origin_city,
            itinerary.dest_city,
            role,
            frozenset(used),
            rules,
            anchors,
        )
        reports.append(report)
        for item in resolve_all(day, sandbox, itinerary.origin_city, itinerary.dest_city):
            if item is not None and item[0] in (KIND_ATTRACTION, KIND_RESTAURANT):
                used.add(entity_key(item[1]))
    return reports


class UnresolvedEntity(TourPlannerError):
    """Error to indicate a cost item missing from the sandbox."""
