"""Tests for the gated reward and the policy optimization math."""
import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from tourplanner.common import DimensionMismatch, PreconditionError
from tourplanner.constraints import HardScore
from tourplanner.providers.mock import MockProvider
from tourplanner.reward import (
    GateConfig,
    GspoBatch,
    LengthMismatch,
    NoLocatedDays,
    RouteStats,
    SoftScore,
    budget_score,
    evaluate_batch,
    gate,
    group_advantages,
    gspo_objective,
    preference_score,
    route_score,
    route_stats,
    score_itinerary,
    seq_importance_ratio,
    total_reward,
)

PERFECT = HardScore(1, 1, 1, 1, 1, 1)
HALF = HardScore(1, 0, 1, 1, 0, 0)


def test_gate_values():
    assert gate(0.75) == pytest.approx(0.5)
    assert gate(1.0) == pytest.approx(0.99909, abs=1e-5)
    assert gate(0.5) == pytest.approx(0.000911, abs=1e-6)


@given(st.floats(0, 1), st.floats(0, 1))
def test_gate_is_monotone(low, high):
    low, high = sorted((low, high))
    assert 0 <= gate(low) <= gate(high) <= 1


@pytest.mark.parametrize("tau, k", [(0, 28), (1, 28), (0.75, 0), (0.75, -1)])
def test_gate_config_rejects(tau, k):
    with pytest.raises(PreconditionError):
        GateConfig(tau, k)


def test_total_reward_examples():
    soft = SoftScore(1.0, 1.0, 1.0)
    assert total_reward(PERFECT, soft).total == pytest.approx(4.9973, abs=1e-4)
    assert HALF.eta == 0.5
    assert total_reward(HALF, soft).total == pytest.approx(1.0027, abs=1e-4)


def test_budget_score():
    assert budget_score(2050, 4100) == pytest.approx(0.5)
    assert budget_score(4100, 4100) == pytest.approx(1.0)
    assert budget_score(6150, 4100) == pytest.approx(0.5)
    assert budget_score(9000, 4100) == 0.0
    with pytest.raises(PreconditionError):
        budget_score(100, 0)


@given(st.floats(0.01, 1e5))
def test_budget_score_is_continuous_at_budget(budget):
    assert budget_score(budget * 1.000001, budget) == pytest.approx(1.0, abs=1e-5)


def test_route_score():
    assert route_score(1.8 * 2.0, 2.0) == pytest.approx(math.exp(-1))
    assert route_score(1.0, 2.0) == 1.0
    with pytest.raises(PreconditionError):
        route_score(1.0, 0)


def test_preference_score():
    assert preference_score(10) == pytest.approx(0.9311, abs=1e-4)
    assert preference_score(0) == 0.0
    with pytest.raises(PreconditionError):
        preference_score(float("nan"))


def test_d_avg_skips_empty_days():
    stats = RouteStats.from_segments([(2, 4), (6,), ()])
    assert stats.d_avg == pytest.approx(4.5)
    assert stats.total_km == pytest.approx(12)
    assert stats.poi_counts == (3, 2, 0)
    with pytest.raises(NoLocatedDays):
        RouteStats.from_segments([(), ()]).d_avg  # pylint: disable=expression-not-assigned


def test_route_stats_of_itinerary(sandbox, itinerary):
    stats = route_stats(itinerary, sandbox)
    assert stats.poi_counts == (3, 2)
    assert [len(day) for day in stats.daily_segments] == [2, 1]
    assert all(km > 0 for day in stats.daily_segments for km in day)


@pytest.mark.asyncio
async def test_score_itinerary(sandbox, itinerary, profile):
    breakdown = await score_itinerary(itinerary, sandbox, profile, MockProvider(preference=10.0))
    assert breakdown.hard.eta == 1.0
    assert breakdown.soft.s_budget == pytest.approx(1599 / 4100)
    assert breakdown.soft.s_model == pytest.approx(0.9311, abs=1e-4)
    assert 0 < breakdown.soft.s_route <= 1
    assert breakdown.total == pytest.approx(2 + breakdown.alpha * breakdown.soft.r_soft)
    assert breakdown.to_dict()["hard"]["eta"] == 1.0


@pytest.mark.asyncio
async def test_score_against_itself_as_reference(sandbox, itinerary, profile):
    breakdown = await score_itinerary(
        itinerary, sandbox, profile, MockProvider(preference=0.0), reference=itinerary
    )
    assert breakdown.soft.s_route == pytest.approx(math.exp(-0.2))


def test_group_advantages():
    assert group_advantages([1, 2, 3]).tolist() == pytest.approx([-1.2247, 0, 1.2247], abs=1e-4)
    assert list(group_advantages([5, 5, 5])) == [0, 0, 0]
    with pytest.raises(PreconditionError):
        group_advantages([1])


@settings(deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=20))
def test_group_advantages_are_standardized(rewards):
    advantages = group_advantages(rewards)
    if np.std(rewards) < 1e-6:
        return
    assert advantages.mean() == pytest.approx(0, abs=1e-6)
    assert advantages.std() == pytest.approx(1, abs=1e-6)


def test_seq_importance_ratio():
    assert seq_importance_ratio([-1.0, -2.0], [-1.0, -2.0]) == 1.0
    assert seq_importance_ratio([0.0, 0.0, 0.0], [-1.0, -1.0, -1.0]) == pytest.approx(math.e)
    with pytest.raises(LengthMismatch):
        seq_importance_ratio([0.0], [0.0, 0.0])
    with pytest.raises(LengthMismatch):
        seq_importance_ratio([0.0, 0.0], [0.0, 0.0], length=3)


@given(st.floats(-3, 3), st.integers(1, 50))
def test_seq_ratio_is_length_normalized(delta, length):
    ratio = seq_importance_ratio([delta] * length, [0.0] * length)
    assert ratio == pytest.approx(math.exp(delta))


def test_gspo_clipping():
    assert gspo_objective([1.5], [1.0]) == pytest.approx(1.0004)
    assert gspo_objective([0.5], [-1.0]) == pytest.approx(-0.9997)
    assert gspo_objective([1.0, 1.0], [1.0, -1.0]) == pytest.approx(0.0)
    with pytest.raises(DimensionMismatch):
        gspo_objective([1.0], [1.0, 2.0])
    with pytest.raises(PreconditionError):
        gspo_objective([0.0], [1.0])


@given(
    st.lists(
        st.tuples(st.floats(0.5, 1.5), st.floats(-2, 2)),
        min_size=1,
        max_size=8,
    )
)
def test_gspo_objective_matches_scalar_form(pairs):
    ratios, advantages = zip(*pairs)
    expected = sum(
        min(ratio * adv, min(max(ratio, 1 - 0.0003), 1 + 0.0004) * adv)
        for ratio, adv in pairs
    ) / len(pairs)
    assert gspo_objective(ratios, advantages) == pytest.approx(expected)


def test_evaluate_batch():
    result = evaluate_batch(
        {
            "rewards": [1.0, 2.0, 3.0],
            "rollouts": [
                {"logp_new": [-1.0, -1.0], "logp_old": [-1.0, -1.0]},
                {"logp_new": [-0.5], "logp_old": [-0.5]},
                {"logp_new": [-2.0, -2.0, -2.0], "logp_old": [-2.0, -2.0, -2.0]},
            ],
        }
    )
    assert result["ratios"] == [1.0, 1.0, 1.0]
    assert result["lengths"] == [2, 1, 3]
    assert result["objective"] == pytest.approx(0.0, abs=1e-9)
    assert result["eps_low"] == 0.0003


def test_batch_rejects_mismatched_rewards():
    with pytest.raises(DimensionMismatch):
        GspoBatch.from_dict({"rewards": [1.0], "rollouts": []})
    with pytest.raises(PreconditionError):
        GspoBatch.from_dict({"rewards": [1.0]})
