"""Tests for the provider boundary, the mock and transcript replay."""
import asyncio

import numpy as np
import pytest

from tourplanner import common
from tourplanner.common import PreconditionError, TourPlannerError
from tourplanner.providers import (
    AuthError,
    ChatRequest,
    DimensionMismatch,
    JudgeVerdict,
    ProviderConfig,
    ProviderError,
    ReplayMiss,
    SchemaError,
    Transcript,
    TransportError,
    create_provider,
    extract_document,
    parse_verdict,
)
from tourplanner.providers.mock import MockProvider
from tourplanner.providers.replay import ReplayProvider

REQUEST = ChatRequest("You are a planner.", "Plan a day.", True, template="plan")


def parse_ok(text):
    """Accept replies that are the JSON document {"ok": true}."""
    document = extract_document(text)
    if document != {"ok": True}:
        raise SchemaError(f"unexpected document {document!r}")
    return document


class SlowProvider(MockProvider):
    """Mock whose completions never arrive in time."""

    async def _complete(self, request):
        await asyncio.sleep(5)
        return "late"


class GrowingProvider(MockProvider):
    """Mock whose embedding dimension changes between calls."""

    async def _embed(self, texts):
        self.dimension += 1
        return await super()._embed(texts)


@pytest.mark.asyncio
async def test_mock_is_deterministic():
    first, second = MockProvider(seed=1), MockProvider(seed=1)
    assert await first.chat(REQUEST) == await second.chat(REQUEST)
    assert await first.chat(REQUEST) != await MockProvider(seed=2).chat(REQUEST)
    vectors = await first.embed(["Bell Tower", "Muslim Quarter"])
    again = await second.embed(["Bell Tower", "Muslim Quarter"])
    assert all(np.array_equal(a, b) for a, b in zip(vectors, again))


@pytest.mark.asyncio
async def test_mock_embeddings_are_positive_unit_vectors():
    vectors = await MockProvider(dimension=16).embed(["Xi'an Museum", "Bell Tower"])
    for vector in vectors:
        assert vector.shape == (16,)
        assert np.linalg.norm(vector) == pytest.approx(1.0)
        assert np.all(vector > 0)


@pytest.mark.asyncio
async def test_call_log_records_each_call():
    provider = MockProvider()
    await provider.chat(REQUEST)
    await provider.score_preference("query", "plan")
    assert [record.op for record in provider.call_log] == ["chat", "score"]
    assert all(len(record.request_hash) == 64 for record in provider.call_log)


@pytest.mark.asyncio
async def test_structured_chat_repairs_reply():
    def responder(request, rng):
        if "repair_error" in request.context:
            return '```json\n{"ok": true}\n```'
        return "Sure! Here is the plan."

    provider = MockProvider(responders={"plan": responder})
    assert await provider.chat_structured(REQUEST, parse_ok) == {"ok": True}
    assert len(provider.call_log) == 2


@pytest.mark.asyncio
async def test_structured_chat_gives_up():
    provider = MockProvider(responders={"*": lambda request, rng: "no json here"})
    with pytest.raises(SchemaError, match="unparseable after 3 attempts"):
        await provider.chat_structured(REQUEST, parse_ok)
    assert len(provider.call_log) == 3


@pytest.mark.asyncio
async def test_timeout_is_transport_error():
    provider = SlowProvider(ProviderConfig(timeout=0.05))
    with pytest.raises(TransportError):
        await provider.chat(REQUEST)
    assert provider.call_log == []


@pytest.mark.asyncio
async def test_embedding_dimension_is_fixed_per_session():
    provider = GrowingProvider(dimension=8)
    await provider.embed(["Bell Tower"])
    with pytest.raises(DimensionMismatch):
        await provider.embed(["Bell Tower"])
    with pytest.raises(PreconditionError):
        await provider.embed([])


@pytest.mark.asyncio
async def test_score_preference():
    assert await MockProvider(preference=2.5).score_preference("q", "plan") == 2.5
    raw = await MockProvider(seed=3).score_preference("q", "plan")
    assert -10.0 <= raw <= 10.0
    with pytest.raises(PreconditionError):
        await MockProvider().score_preference(" ", "plan")


@pytest.mark.asyncio
async def test_judge_pair():
    verdict = await MockProvider(judge=(4, 2)).judge_pair("query", "plan a", "plan b")
    assert (verdict.score_a, verdict.score_b) == (4, 2)
    default = await MockProvider().judge_pair("query", "plan a", "plan b")
    assert 1 <= default.score_a <= 5 and 1 <= default.score_b <= 5


@pytest.mark.asyncio
async def test_transcript_replays_identically(tmp_path):
    path = tmp_path / "calls.jsonl"
    recorder = MockProvider(seed=5, transcript=Transcript(str(path)))
    chat = await recorder.chat(REQUEST)
    vectors = await recorder.embed(["Bell Tower"])
    score = await recorder.score_preference("q", "plan")
    assert len(Transcript.read(path)) == 3

    replay = ReplayProvider(ProviderConfig(), path)
    assert await replay.chat(REQUEST) == chat
    assert np.allclose((await replay.embed(["Bell Tower"]))[0], vectors[0])
    assert await replay.score_preference("q", "plan") == score
    with pytest.raises(ReplayMiss):
        await replay.chat(REQUEST)


@pytest.mark.asyncio
async def test_replay_from_records():
    replay = ReplayProvider(ProviderConfig(), [])
    with pytest.raises(ReplayMiss):
        await replay.chat(REQUEST)


def test_transcript_rejects_bad_line(tmp_path):
    path = tmp_path / "calls.jsonl"
    path.write_text('{"request_hash": "a"}\n{broken\n', encoding="utf-8")
    with pytest.raises(SchemaError, match=":2:"):
        Transcript.read(path)


def test_provider_errors_share_the_planner_base():
    assert issubclass(ProviderError, TourPlannerError)
    assert issubclass(ReplayMiss, ProviderError)
    assert DimensionMismatch is common.DimensionMismatch


@pytest.mark.asyncio
async def test_transcript_keeps_concurrent_records(tmp_path):
    path = tmp_path / "calls.jsonl"
    transcript = Transcript(str(path))
    await asyncio.gather(
        *(transcript.record(f"hash-{n}", {"n": n}, {"text": "ok"}, n) for n in range(20))
    )
    records = Transcript.read(path)
    assert sorted(record["request_hash"] for record in records) == sorted(
        f"hash-{n}" for n in range(20)
    )
    assert all(record["response"] == {"text": "ok"} for record in records)


def test_create_provider_selects_client(monkeypatch):
    assert isinstance(create_provider(ProviderConfig()), MockProvider)
    assert isinstance(create_provider(ProviderConfig(), replay=[]), ReplayProvider)
    monkeypatch.delenv("TOURPLANNER_TEST_KEY", raising=False)
    with pytest.raises(AuthError):
        create_provider(ProviderConfig(mock=False, api_key_ref="TOURPLANNER_TEST_KEY"))


@pytest.mark.parametrize(
    "changes", [{"timeout": 0}, {"max_retries": -1}, {"parallelism_limit": 0}]
)
def test_provider_config_limits(changes):
    with pytest.raises(PreconditionError):
        ProviderConfig(**changes)


def test_chat_request_needs_prompts():
    with pytest.raises(PreconditionError):
        ChatRequest(" ", "user")
    with pytest.raises(PreconditionError):
        ChatRequest("system", "")


def test_extract_document():
    assert extract_document('Here:\n```json\n{"a": 1}\n```\nDone.') == {"a": 1}
    assert extract_document('{"a": 2}') == {"a": 2}
    with pytest.raises(SchemaError, match="empty reply"):
        extract_document("  ")
    with pytest.raises(SchemaError):
        extract_document("```json\n{a: 1}\n```")


def test_parse_verdict():
    text = (
        "Plan A is closer to the interests.\n"
        '```json\n{"Personalization Evaluation": {"Scores": {"Plan A": 5, "Plan B": 3}}}\n```'
    )
    assert parse_verdict(text) == JudgeVerdict(5, 3, "Plan A is closer to the interests.")
    bare = 'Fine. {"Personalization Evaluation": {"Scores": {"Plan A": 2, "Plan B": 2}}}'
    assert parse_verdict(bare)[:2] == (2, 2)


@pytest.mark.parametrize("score", [0, 6, 2.5, "4", True])
def test_parse_verdict_rejects_scores(score):
    text = (
        '{"Personalization Evaluation": {"Scores": {"Plan A": %s, "Plan B": 3}}}'
        % ('"4"' if score == "4" else str(score).lower())
    )
    with pytest.raises(SchemaError):
        parse_verdict(text)
