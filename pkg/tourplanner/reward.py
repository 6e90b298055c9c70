"""Constraint-gated reward and group sequence policy optimization math."""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .common import DimensionMismatch, PreconditionError, TourPlannerError, canonical_json
from .const import (
    CONF_EPS_HIGH,
    CONF_EPS_LOW,
    CONF_K,
    CONF_TAU,
    DEFAULT_EPS_HIGH,
    DEFAULT_EPS_LOW,
    DEFAULT_K,
    DEFAULT_REFERENCE_KM,
    DEFAULT_TAU,
    STEP_MEAL,
    STEP_SIGHTSEEING,
)
from .constraints import UnresolvedEntity, hard_score, resolve_all, total_cost
from .geo import haversine, point_of

_LOGGER = logging.getLogger(__name__)

ROUTE_SLACK = 0.8
PREFERENCE_SCALE = 6.0
DEGENERATE_STD = 1e-12


@dataclass(frozen=True)
class GateConfig:
    """Sigmoid gate parameters."""

    tau: float = DEFAULT_TAU
    k: float = DEFAULT_K

    def __post_init__(self):
        """Check the parameters."""
        if not self.k > 0:
            raise PreconditionError("gate k must be > 0")
        if not 0 < self.tau < 1:
            raise PreconditionError("gate tau must be in (0, 1)")

    @classmethod
    def from_config(cls, conf):
        """Create from a validated gate config section."""
        return cls(tau=conf[CONF_TAU], k=conf[CONF_K])


def budget_score(cost, budget):
    """Return the budget fit: C/B up to the budget, linear penalty above."""
    if not budget > 0:
        raise PreconditionError("budget must be > 0")
    if cost < 0:
        raise PreconditionError("cost must be >= 0")
    if cost <= budget:
        return cost / budget
    return max(0.0, 1.0 - (cost - budget) / budget)


def route_score(d_gen, d_ref):
    """Return exp(-max(0, d_gen/d_ref - 0.8))."""
    if not d_ref > 0:
        raise PreconditionError("reference distance must be > 0")
    if d_gen < 0:
        raise PreconditionError("route distance must be >= 0")
    return math.exp(-max(0.0, d_gen / d_ref - ROUTE_SLACK))


def preference_score(raw):
    """Return the reward model score squashed to (-1, 1)."""
    if not math.isfinite(raw):
        raise PreconditionError(f"raw preference score {raw!r} is not finite")
    return float(np.tanh(raw / PREFERENCE_SCALE))


def gate(eta, cfg=None):
    """Return the soft reward gate for a constraint satisfaction rate."""
    cfg = cfg or GateConfig()
    return float(expit(cfg.k * (eta - cfg.tau)))


@dataclass(frozen=True)
class SoftScore:
    """Budget, route and preference scores."""

    s_budget: float
    s_route: float
    s_model: float

    @property
    def r_soft(self):
        """Return the soft reward."""
        return self.s_budget + self.s_route + self.s_model

    def to_dict(self):
        """Return the JSON form."""
        return {
            "s_budget": self.s_budget,
            "s_route": self.s_route,
            "s_model": self.s_model,
            "r_soft": self.r_soft,
        }


@dataclass(frozen=True)
class RewardBreakdown:
    """Every intermediate of the total reward."""

    hard: object
    soft: SoftScore
    alpha: float
    total: float

    def to_dict(self):
        """Return the JSON form."""
        return {
            "hard": self.hard.to_dict(),
            "soft": self.soft.to_dict(),
            "alpha": self.alpha,
            "total": self.total,
        }


def total_reward(hard, soft, cfg=None):
    """Return R_hard plus the gated soft reward."""
    alpha = gate(hard.eta, cfg)
    return RewardBreakdown(hard, soft, alpha, hard.r_hard + alpha * soft.r_soft)


@dataclass(frozen=True)
class RouteStats:
    """Consecutive POI distances per day and their average."""

    daily_segments: tuple
    poi_counts: tuple

    @classmethod
    def from_segments(cls, daily_segments):
        """Create from per-day segment lengths in km."""
        segments = tuple(tuple(float(km) for km in day) for day in daily_segments)
        return cls(segments, tuple(len(day) + 1 if day else 0 for day in segments))

    @property
    def day_count(self):
        """Return the number of days."""
        return len(self.daily_segments)

    @property
    def daily_averages(self):
        """Return the mean segment of each day that has one."""
        return [sum(day) / len(day) for day in self.daily_segments if day]

    @property
    def d_avg(self):
        """Return the mean over contributing days of the daily mean segment."""
        averages = self.daily_averages
        if not averages:
            raise NoLocatedDays("no day visits two located places")
        return sum(averages) / len(averages)

    @property
    def total_km(self):
        """Return the summed length of every day's route."""
        return sum(sum(day) for day in self.daily_segments)

    def to_dict(self):
        """Return the JSON form."""
        averages = self.daily_averages
        return {
            "daily_segments": [list(day) for day in self.daily_segments],
            "poi_counts": list(self.poi_counts),
            "d_avg": sum(averages) / len(averages) if averages else None,
            "total_km": self.total_km,
        }


def route_stats(itinerary, sandbox):
    """Return the route statistics over sightseeing and meal venues."""
    daily = []
    counts = []
    for day in itinerary.days:
        points = [
            point_of(item[1])
            for step, item in zip(
                day.steps,
                resolve_all(day, sandbox, itinerary.origin_city, itinerary.dest_city),
            )
            if step.activity_type in (STEP_SIGHTSEEING, STEP_MEAL) and item is not None
        ]
        counts.append(len(points))
        daily.append(tuple(haversine(a, b) for a, b in zip(points, points[1:])))
    stats = RouteStats(tuple(daily), tuple(counts))
    if not stats.daily_averages:
        raise NoLocatedDays("no day visits two located places")
    return stats


async def score_itinerary(
    itinerary,
    sandbox,
    profile,
    scorer,
    gate_cfg=None,
    reference=None,
    reference_km=DEFAULT_REFERENCE_KM,
):
    """Return the full RewardBreakdown of an itinerary.

    The route reference is the average daily segment of `reference` when it
    is given and located, else `reference_km`.
    """
    hard = hard_score(itinerary, sandbox, profile)
    try:
        cost = total_cost(itinerary, sandbox)
        s_budget = budget_score(cost, profile.explicit.budget)
    except UnresolvedEntity as ex:
        _LOGGER.warning("Budget score is 0: %s", ex)
        s_budget = 0.0
    d_ref = reference_km
    if reference is not None:
        try:
            d_ref = route_stats(reference, sandbox).d_avg or reference_km
        except NoLocatedDays:
            _LOGGER.debug("Reference has no located day, using %.2f km", reference_km)
    try:
        s_route = route_score(route_stats(itinerary, sandbox).d_avg, d_ref)
    except NoLocatedDays:
        s_route = 0.0
    raw = await scorer.score_preference(
        itinerary.query or profile.raw_query, canonical_json(itinerary.to_dict())
    )
    soft = SoftScore(s_budget, s_route, preference_score(raw))
    breakdown = total_reward(hard, soft, gate_cfg)
    _LOGGER.debug(
        "Reward %.4f (eta %.3f, alpha %.5f, soft %.4f)",
        breakdown.total,
        hard.eta,
        breakdown.alpha,
        soft.r_soft,
    )
    return breakdown


def group_advantages(rewards):
    """Return group-normalized advantages with population std."""
    rewards = np.asarray(rewards, dtype=float)
    if rewards.ndim != 1 or rewards.size < 2:
        raise PreconditionError("need a group of at least 2 rewards")
    std = rewards.std()
    if std < DEGENERATE_STD:
        return np.zeros_like(rewards)
    return (rewards - rewards.mean()) / std


def seq_importance_ratio(logp_new, logp_old, length=None):
    """Return the length-normalized sequence importance ratio."""
    logp_new = np.asarray(logp_new, dtype=float)
    logp_old = np.asarray(logp_old, dtype=float)
    if logp_new.shape != logp_old.shape or logp_new.ndim != 1:
        raise LengthMismatch(
            f"log-prob sequences differ: {logp_new.shape} vs {logp_old.shape}"
        )
    length = logp_new.size if length is None else length
    if length != logp_new.size or length < 1:
        raise LengthMismatch(f"length {length} does not match {logp_new.size} tokens")
    return float(np.exp(np.sum(logp_new - logp_old) / length))


def gspo_objective(ratios, advantages, eps_low=DEFAULT_EPS_LOW, eps_high=DEFAULT_EPS_HIGH):
    """Return the mean clipped surrogate over a group."""
    ratios = np.asarray(ratios, dtype=float)
    advantages = np.asarray(advantages, dtype=float)
    if ratios.shape != advantages.shape:
        raise DimensionMismatch(
            f"{ratios.size} ratios for {advantages.size} advantages"
        )
    if np.any(ratios <= 0):
        raise PreconditionError("ratios must be > 0")
    clipped = np.clip(ratios, 1.0 - eps_low, 1.0 + eps_high)
    return float(np.mean(np.minimum(ratios * advantages, clipped * advantages)))


@dataclass(frozen=True)
class GspoBatch:
    """Rewards and token log-probs of one rollout group."""

    rewards: tuple
    rollouts: tuple
    eps_low: float = DEFAULT_EPS_LOW
    eps_high: float = DEFAULT_EPS_HIGH

    @classmethod
    def from_dict(cls, data, gspo_conf=None):
        """Create from {rewards, rollouts: [{logp_new, logp_old}], eps_low, eps_high}."""
        gspo_conf = gspo_conf or {}
        try:
            rollouts = tuple(
                (tuple(item["logp_new"]), tuple(item["logp_old"]))
                for item in data["rollouts"]
            )
            rewards = tuple(float(value) for value in data["rewards"])
        except (KeyError, TypeError) as ex:
            raise PreconditionError(f"malformed batch: {ex}") from ex
        if len(rewards) != len(rollouts):
            raise DimensionMismatch(f"{len(rewards)} rewards for {len(rollouts)} rollouts")
        return cls(
            rewards,
            rollouts,
            float(data.get("eps_low", gspo_conf.get(CONF_EPS_LOW, DEFAULT_EPS_LOW))),
            float(data.get("eps_high", gspo_conf.get(CONF_EPS_HIGH, DEFAULT_EPS_HIGH))),
        )

    def evaluate(self):
        """Return advantages, ratios and the objective value."""
        advantages = group_advantages(self.rewards)
        ratios = np.asarray(
            [seq_importance_ratio(new, old) for new, old in self.rollouts], dtype=float
        )
        return {
            "advantages": advantages.tolist(),
            "ratios": ratios.tolist(),
            "lengths": [len(new) for new, _ in self.rollouts],
            "eps_low": self.eps_low,
            "eps_high": self.eps_high,
            "objective": gspo_objective(ratios, advantages, self.eps_low, self.eps_high),
        }


def evaluate_batch(document, gspo_conf=None):
    """Return the evaluation of a batch document."""
    return GspoBatch.from_dict(document, gspo_conf).evaluate()


class NoLocatedDays(TourPlannerError):
    """Error to indicate no day has two located places."""


class LengthMismatch(TourPlannerError):
    """Error to indicate log-prob sequences of different lengths."""
