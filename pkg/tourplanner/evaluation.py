"""Benchmark harness: pass rates, route ratio, final pass and the judge protocol."""
import asyncio
import logging
import os
from dataclasses import dataclass, field

from .common import PreconditionError, TourPlannerError, load_json, normalize_name
from .const import (
    CONF_MEAL_TOLERANCE,
    CONF_ROUTE_RATIO,
    DEFAULT_MEAL_TOLERANCE,
    DEFAULT_ROUTE_RATIO,
    KIND_RESTAURANT,
    KIND_TRANSPORT,
    STEP_MEAL,
    STEP_TRANSPORTATION,
)
from .constraints import UnresolvedEntity, hard_score, resolve_all, total_cost
from .itinerary import Itinerary, render_markdown
from .profile import UserProfile, build_profile
from .providers import ProviderError
from .reward import NoLocatedDays, route_stats

_LOGGER = logging.getLogger(__name__)

FEASIBILITY_FLAGS = ["sandbox", "completeness", "departure", "return"]
RATIONALITY_FLAGS = [
    "diverse_restaurants",
    "reasonable_meal_prices",
    "diverse_attractions",
    "visit_duration",
    "visit_time",
    "budget_limit",
]
DEFINITIONS = (
    "micro = passed flags / all flags; macro = share of cases passing every flag"
)


@dataclass(frozen=True)
class PlanCase:
    """A generated itinerary and the reference it is measured against."""

    case_id: str
    query: str
    generated: Itinerary
    reference: Itinerary
    profile: UserProfile = None

    def __post_init__(self):
        """Check both plans visit the same city."""
        if normalize_name(self.generated.dest_city) != normalize_name(
            self.reference.dest_city
        ):
            raise PreconditionError(
                f"case {self.case_id}: generated plan goes to {self.generated.dest_city}, "
                f"reference to {self.reference.dest_city}"
            )


def _leg_matches(itinerary, sandbox, code, origin, dest, slot, day_index, position):
    if code is None:
        return False
    leg = sandbox.resolve(None, code, KIND_TRANSPORT)
    if leg is None:
        return False
    if normalize_name(leg.origin_city) != normalize_name(origin):
        return False
    if normalize_name(leg.dest_city) != normalize_name(dest):
        return False
    if slot is not None and leg.day_slot != slot:
        return False
    if not itinerary.days:
        return False
    legs = [
        step.name
        for step in itinerary.days[day_index].steps
        if step.activity_type == STEP_TRANSPORTATION
    ]
    return bool(legs) and normalize_name(legs[position]) == normalize_name(leg.id)


def feasibility(case, sandbox, profile, hard=None):
    """Return the feasibility flags of a case's generated plan.

    Departure and return are correct when the legs run between the profile's
    cities in the requested day slots and open and close the trip.
    """
    plan = case.generated
    hard = hard or hard_score(plan, sandbox, profile)
    demands = profile.explicit
    return {
        "sandbox": bool(hard.i_sandbox),
        "completeness": bool(hard.i_comp),
        "departure": _leg_matches(
            plan,
            sandbox,
            plan.outbound,
            demands.origin_city,
            demands.dest_city,
            demands.departure_slot,
            0,
            0,
        ),
        "return": _leg_matches(
            plan,
            sandbox,
            plan.inbound,
            demands.dest_city,
            demands.origin_city,
            demands.return_slot,
            -1,
            -1,
        ),
    }


def meal_prices_reasonable(itinerary, sandbox, meal_range, tolerance=DEFAULT_MEAL_TOLERANCE):
    """Return True if every restaurant meal is within the widened range."""
    low, high = meal_range
    low, high = low * (1.0 - tolerance), high * (1.0 + tolerance)
    for day in itinerary.days:
        resolved = resolve_all(day, sandbox, itinerary.origin_city, itinerary.dest_city)
        for step, item in zip(day.steps, resolved):
            if step.activity_type != STEP_MEAL or item is None:
                continue
            kind, entity = item
            if kind == KIND_RESTAURANT and not low <= entity.avg_price <= high:
                _LOGGER.debug(
                    "Meal at %s costs %.1f, outside %.1f-%.1f",
                    entity.name,
                    entity.avg_price,
                    low,
                    high,
                )
                return False
    return True


def rationality(case, sandbox, profile, hard=None, tolerance=DEFAULT_MEAL_TOLERANCE):
    """Return the rationality flags of a case's generated plan."""
    plan = case.generated
    hard = hard or hard_score(plan, sandbox, profile)
    try:
        within_budget = total_cost(plan, sandbox) <= profile.explicit.budget
    except UnresolvedEntity as ex:
        _LOGGER.debug("Case %s has no total cost: %s", case.case_id, ex)
        within_budget = False
    return {
        "diverse_restaurants": bool(hard.i_rest),
        "reasonable_meal_prices": meal_prices_reasonable(
            plan, sandbox, profile.inferred.meal_range, tolerance
        ),
        "diverse_attractions": bool(hard.i_attr),
        "visit_duration": bool(hard.i_dur),
        "visit_time": bool(hard.i_time),
        "budget_limit": within_budget,
    }


def micro_macro(rows):
    """Return (micro, macro) pass rates over rows of boolean flags."""
    rows = [list(row.values()) if isinstance(row, dict) else list(row) for row in rows]
    total = sum(len(row) for row in rows)
    if not rows or total == 0:
        raise EmptyInput("no flags to aggregate")
    micro = sum(bool(flag) for row in rows for flag in row) / total
    macro = sum(all(row) for row in rows) / len(rows)
    return micro, macro


def _stats(itinerary, sandbox):
    try:
        return route_stats(itinerary, sandbox)
    except NoLocatedDays:
        return None


def distance_ratio(case, sandbox):
    """Return D_avg(generated) / D_avg(reference)."""
    generated = route_stats(case.generated, sandbox).d_avg
    reference = route_stats(case.reference, sandbox).d_avg
    if reference == 0:
        raise NoLocatedDays(f"case {case.case_id}: reference route has zero length")
    return generated / reference


def final_pass(feasible, rational, generated_km, reference_km, ratio=DEFAULT_ROUTE_RATIO):
    """Return True if every flag holds and the route is not overlong."""
    feasible = feasible.values() if isinstance(feasible, dict) else feasible
    rational = rational.values() if isinstance(rational, dict) else rational
    return all(feasible) and all(rational) and generated_km <= ratio * reference_km


async def _judge_case(case, judge):
    try:
        return await judge.judge_pair(
            case.query, render_markdown(case.generated), render_markdown(case.reference)
        )
    except ProviderError as ex:
        _LOGGER.warning("Skipping case %s in the judge protocol: %s", case.case_id, ex)
        return None


async def judge_cases(cases, judge):
    """Return the judge verdict of every case, None where the judge failed."""
    return await asyncio.gather(*(_judge_case(case, judge) for case in cases))


def surpassing(verdicts):
    """Return the share of scored cases where the generated plan scored >=."""
    scored = [verdict for verdict in verdicts if verdict is not None]
    if not scored:
        return None
    return sum(verdict.score_a >= verdict.score_b for verdict in scored) / len(scored)


async def surpass_rate(cases, judge):
    """Return the surpassing rate of the cases, or None if none was judged."""
    return surpassing(await judge_cases(cases, judge))


@dataclass
class MetricsReport:
    """Aggregate metrics and per-case rows."""

    feasibility: tuple
    rationality: tuple
    avg_route_distance_ratio: float
    final_pass_rate: float
    final_surpassing_rate: float = None
    rows: list = field(default_factory=list)

    def to_dict(self):
        """Return the JSON form."""
        return {
            "definitions": DEFINITIONS,
            "feasibility_pass_rate": {
                "micro": self.feasibility[0],
                "macro": self.feasibility[1],
            },
            "rationality_pass_rate": {
                "micro": self.rationality[0],
                "macro": self.rationality[1],
            },
            "avg_route_distance_ratio": self.avg_route_distance_ratio,
            "final_pass_rate": self.final_pass_rate,
            "final_surpassing_rate": self.final_surpassing_rate,
            "cases": self.rows,
        }


async def _case_row(case, sandbox, tolerance, route_ratio):
    profile = case.profile or await build_profile(case.query, sandbox)
    hard = hard_score(case.generated, sandbox, profile)
    feasible = feasibility(case, sandbox, profile, hard)
    rational = rationality(case, sandbox, profile, hard, tolerance)
    generated, reference = _stats(case.generated, sandbox), _stats(case.reference, sandbox)
    ratio = None
    if generated is not None and reference is not None and reference.d_avg > 0:
        ratio = generated.d_avg / reference.d_avg
    generated_km = generated.total_km if generated is not None else 0.0
    reference_km = reference.total_km if reference is not None else 0.0
    return {
        "id": case.case_id,
        "feasibility": feasible,
        "rationality": rational,
        "eta": hard.eta,
        "distance_ratio": ratio,
        "route_km": {"generated": generated_km, "reference": reference_km},
        "final_pass": final_pass(feasible, rational, generated_km, reference_km, route_ratio),
    }


async def evaluate_cases(cases, sandbox, eval_conf=None, judge=None):
    """Return the MetricsReport of a case set."""
    cases = list(cases)
    if not cases:
        raise EmptyInput("no cases to evaluate")
    eval_conf = eval_conf or {}
    tolerance = eval_conf.get(CONF_MEAL_TOLERANCE, DEFAULT_MEAL_TOLERANCE)
    route_ratio = eval_conf.get(CONF_ROUTE_RATIO, DEFAULT_ROUTE_RATIO)
    rows = await asyncio.gather(
        *(_case_row(case, sandbox, tolerance, route_ratio) for case in cases)
    )
    surpass = None
    if judge is not None:
        verdicts = await judge_cases(cases, judge)
        for row, verdict in zip(rows, verdicts):
            row["judge"] = None if verdict is None else [verdict.score_a, verdict.score_b]
        surpass = surpassing(verdicts)
    ratios = [row["distance_ratio"] for row in rows if row["distance_ratio"] is not None]
    report = MetricsReport(
        feasibility=micro_macro(row["feasibility"] for row in rows),
        rationality=micro_macro(row["rationality"] for row in rows),
        avg_route_distance_ratio=sum(ratios) / len(ratios) if ratios else None,
        final_pass_rate=sum(row["final_pass"] for row in rows) / len(rows),
        final_surpassing_rate=surpass,
        rows=list(rows),
    )
    _LOGGER.info(
        "Evaluated %d cases: feasibility %.3f/%.3f, rationality %.3f/%.3f, final %.3f",
        len(rows),
        *report.feasibility,
        *report.rationality,
        report.final_pass_rate,
    )
    return report


def case_from_dict(data, fallback_id=""):
    """Create a PlanCase from {id, query, generated, reference, profile?}."""
    try:
        profile = data.get("profile")
        return PlanCase(
            case_id=str(data.get("id") or fallback_id),
            query=data["query"],
            generated=Itinerary.from_dict(data["generated"]),
            reference=Itinerary.from_dict(data["reference"]),
            profile=None if profile is None else UserProfile.from_dict(profile),
        )
    except (KeyError, AttributeError) as ex:
        raise PreconditionError(f"case {fallback_id}: missing field {ex}") from ex


def load_cases(directory):
    """Read every *.json case document of a directory, in name order."""
    names = sorted(name for name in os.listdir(directory) if name.endswith(".json"))
    if not names:
        raise EmptyInput(f"no case documents in {directory}")
    return [
        case_from_dict(load_json(os.path.join(directory, name)), name[: -len(".json")])
        for name in names
    ]


class EmptyInput(TourPlannerError):
    """Error to indicate nothing to aggregate."""
