# Provider boundary
# -*- coding: utf-8 -*-
"""
Python module to talk to the model services the planner depends on.

Every stochastic service goes through one client class so it can be bounded,
timed out, logged to a transcript and swapped for a deterministic mock.

Classes
   ProviderClient(config, transcript=None)
       config (ProviderConfig): endpoint, credentials reference, model name,
           timeout, retry and parallelism limits.
       transcript (Transcript, optional): JSON-lines call log. Defaults to None.

   RemoteProvider   OpenAI-compatible chat/embeddings, HTTP reward model
   MockProvider     pure function of (request bytes, seed)
   ReplayProvider   serves responses recorded in a transcript

Functions
   text = await chat(request)                     # plain completion
   obj = await chat_structured(request, parse)    # parse with re-prompting
   vectors = await embed(texts)                   # one vector per text
   raw = await score_preference(query, text)      # reward model output
   verdict = await judge_pair(query, a, b)        # pairwise 1..5 scores

Transcript records are one JSON object per line:
   {"request_hash": ..., "request": ..., "response": ..., "latency_ms": ...}
"""

import asyncio
import json
import logging
import math
import re
import time
from abc import ABC, abstractmethod
from collections import namedtuple
from dataclasses import dataclass, field, replace

import numpy as np

from ..common import (
    ContextualLogger,
    DimensionMismatch,
    PreconditionError,
    TourPlannerError,
    canonical_bytes,
    sha256_hex,
)
from ..const import (
    CONF_API_KEY_ENV,
    CONF_ENDPOINT_URL,
    CONF_MAX_RETRIES,
    CONF_MOCK,
    CONF_MODEL,
    CONF_PARALLELISM,
    CONF_TIMEOUT,
)

version_tuple = (1, 0, 0)
version = version_string = __version__ = "%d.%d.%d" % version_tuple

_LOGGER = logging.getLogger(__name__)

JudgeVerdict = namedtuple("JudgeVerdict", "score_a score_b analysis")
CallRecord = namedtuple("CallRecord", "op request_hash latency_ms")
Providers = namedtuple("Providers", "chat embed reward judge")

OP_CHAT = "chat"
OP_EMBED = "embed"
OP_SCORE = "score"

FENCE_RE = re.compile(r"```(?:json|JSON)?\s*\n?(.*?)```", re.DOTALL)

REPAIR_NOTE = (
    "\n\nYour previous reply could not be parsed: {error}\n"
    "Reply again with exactly one fenced ```json``` document and nothing else."
)

JUDGE_SYSTEM = "You are an expert in travel planning."
JUDGE_TEMPLATE = """Evaluate how well each plan fulfills the user's individual \
interests and preferences.

User query:
{query}

Plan A:
{plan_a}

Plan B:
{plan_b}

Scoring Scale (Out of 5):
5 - Fully addresses the user's stated preferences and goes beyond to \
anticipate implicit interests.
4 - Addresses nearly all stated preferences with minor gaps.
3 - Covers the core preferences but misses several specifics.
2 - Only partially reflects the user's preferences.
1 - Largely ignores the user's preferences.

First write a short analysis comparing the plans, then output:
```json
{{"Personalization Evaluation": {{"Scores": {{"Plan A": X, "Plan B": Y}}}}}}
```
where X and Y are integers from 1 to 5."""


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for one provider role."""

    role: str = "chat"
    endpoint_url: str = ""
    api_key_ref: str = ""
    model_name: str = "mock"
    timeout: float = 60.0
    max_retries: int = 2
    parallelism_limit: int = 4
    mock: bool = True

    def __post_init__(self):
        """Check the numeric limits."""
        if not self.timeout > 0:
            raise PreconditionError(f"timeout must be > 0, got {self.timeout}")
        if self.max_retries < 0:
            raise PreconditionError("max_retries must be >= 0")
        if self.parallelism_limit < 1:
            raise PreconditionError("parallelism_limit must be >= 1")

    @classmethod
    def from_dict(cls, role, conf):
        """Create a config from a validated provider config section."""
        return cls(
            role=role,
            endpoint_url=conf.get(CONF_ENDPOINT_URL, ""),
            api_key_ref=conf.get(CONF_API_KEY_ENV, ""),
            model_name=conf.get(CONF_MODEL, "mock"),
            timeout=conf.get(CONF_TIMEOUT, 60.0),
            max_retries=conf.get(CONF_MAX_RETRIES, 2),
            parallelism_limit=conf.get(CONF_PARALLELISM, 4),
            mock=conf.get(CONF_MOCK, True),
        )


@dataclass(frozen=True)
class ChatRequest:
    """A chat completion request.

    `template` names the prompt the request was rendered from and `context`
    holds the structured inputs substituted into it. Remote providers send
    only the prompts; offline responders read the context.
    """

    system_prompt: str
    user_prompt: str
    expects_structured: bool = False
    template: str = ""
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        """Reject empty prompts."""
        if not str(self.system_prompt).strip():
            raise PreconditionError("system_prompt must be non-empty")
        if not str(self.user_prompt).strip():
            raise PreconditionError("user_prompt must be non-empty")

    def payload(self, model_name):
        """Return the JSON form that identifies this request."""
        return {
            "model": model_name,
            "system": self.system_prompt,
            "user": self.user_prompt,
            "structured": self.expects_structured,
            "template": self.template,
            "context": self.context,
        }

    def with_repair(self, error):
        """Return a copy asking the model to fix an unparseable reply."""
        return replace(
            self,
            user_prompt=self.user_prompt + REPAIR_NOTE.format(error=error),
            context={**self.context, "repair_error": str(error)},
        )


def request_hash(op, payload):
    """Return the stable hash identifying a provider call."""
    return sha256_hex(canonical_bytes({"op": op, **payload}))


def extract_document(text):
    """Return the single JSON document in a reply.

    A fenced block wins; otherwise the whole reply must be JSON.
    """
    if text is None or not str(text).strip():
        raise SchemaError("empty reply")
    match = FENCE_RE.search(text)
    body = match.group(1) if match else text
    try:
        return json.loads(body.strip())
    except json.JSONDecodeError as ex:
        raise SchemaError(f"invalid JSON ({ex.msg} at char {ex.pos})") from ex


def parse_verdict(text):
    """Parse a judge reply into a JudgeVerdict."""
    try:
        document = extract_document(text)
        analysis = FENCE_RE.split(text)[0].strip()
    except SchemaError:
        start, end = text.find("{"), text.rfind("}")
        if start < 0 or end < start:
            raise
        try:
            document = json.loads(text[start : end + 1])
        except json.JSONDecodeError as ex:
            raise SchemaError(f"invalid verdict JSON: {ex.msg}") from ex
        analysis = text[:start].strip()
    try:
        scores = document["Personalization Evaluation"]["Scores"]
        raw = (scores["Plan A"], scores["Plan B"])
    except (KeyError, TypeError) as ex:
        raise SchemaError(f"verdict scores missing: {ex}") from ex
    values = []
    for value in raw:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"verdict score {value!r} is not a number")
        if value != int(value) or not 1 <= value <= 5:
            raise SchemaError(f"verdict score {value!r} outside 1..5")
        values.append(int(value))
    return JudgeVerdict(values[0], values[1], analysis)


class Transcript:
    """Append-only JSON-lines record of provider calls."""

    def __init__(self, path):
        """Initialize a new Transcript writing to path."""
        self.path = path
        self._lock = asyncio.Lock()

    async def record(self, key, request, response, latency_ms):
        """Append one call record."""
        line = json.dumps(
            {
                "request_hash": key,
                "request": request,
                "response": response,
                "latency_ms": latency_ms,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        async with self._lock:
            await asyncio.get_running_loop().run_in_executor(None, self._append, line)

    def _append(self, line):
        with open(self.path, "a", encoding="utf-8") as out:
            out.write(line + "\n")

    @staticmethod
    def read(path):
        """Return all records of a transcript file."""
        records = []
        with open(path, encoding="utf-8") as source:
            for number, line in enumerate(source, 1):
                if not line.strip():
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as ex:
                    raise SchemaError(f"{path}:{number}: {ex.msg}") from ex
        return records


class ProviderClient(ABC, ContextualLogger):
    """Base client: bounds, times, logs and checks every provider call."""

    def __init__(self, config, transcript=None):
        """Initialize a new ProviderClient."""
        super().__init__()
        self.config = config
        self.set_logger(_LOGGER, config.role)
        self.transcript = transcript
        self.call_log = []
        self._semaphore = asyncio.Semaphore(config.parallelism_limit)
        self._dimension = None

    @abstractmethod
    async def _complete(self, request):
        """Return the completion text for a ChatRequest."""

    @abstractmethod
    async def _embed(self, texts):
        """Return one list of floats per text."""

    @abstractmethod
    async def _score(self, query, itinerary_text):
        """Return the raw reward model output."""

    async def _call(self, op, payload, func):
        """Run one provider call under the parallelism and timeout limits."""
        key = request_hash(op, payload)
        async with self._semaphore:
            started = time.monotonic()
            try:
                response = await asyncio.wait_for(func(), timeout=self.config.timeout)
            except asyncio.TimeoutError as ex:
                raise TransportError(
                    f"{op} timed out after {self.config.timeout}s"
                ) from ex
            latency_ms = round((time.monotonic() - started) * 1000.0, 3)
        self.call_log.append(CallRecord(op, key, latency_ms))
        self.debug("%s %s done in %.1f ms", op, key[:12], latency_ms)
        if self.transcript is not None:
            await self.transcript.record(key, {"op": op, **payload}, response, latency_ms)
        return response

    async def chat(self, request):
        """Return the model text for a request."""
        return await self._call(
            OP_CHAT,
            request.payload(self.config.model_name),
            lambda: self._complete(request),
        )

    async def chat_structured(self, request, parse):
        """Return parse(reply), re-requesting up to max_retries times."""
        current = request
        attempts = self.config.max_retries + 1
        for attempt in range(1, attempts + 1):
            text = await self.chat(current)
            try:
                return parse(text)
            except SchemaError as ex:
                self.debug(
                    "Reply for %s rejected on attempt %d/%d: %s",
                    request.template or "request",
                    attempt,
                    attempts,
                    ex,
                )
                error = ex
                current = request.with_repair(ex)
        raise SchemaError(
            f"{request.template or 'request'} unparseable after {attempts} "
            f"attempts: {error}"
        ) from error

    async def embed(self, texts):
        """Return one EmbeddingVector (numpy array) per text."""
        texts = list(texts)
        if not texts:
            raise PreconditionError("embed needs at least one text")
        raw = await self._call(
            OP_EMBED,
            {"model": self.config.model_name, "texts": texts},
            lambda: self._embed(texts),
        )
        if len(raw) != len(texts):
            raise DimensionMismatch(
                f"asked for {len(texts)} vectors, provider returned {len(raw)}"
            )
        vectors = [np.asarray(values, dtype=float) for values in raw]
        for vector in vectors:
            if vector.ndim != 1 or not np.all(np.isfinite(vector)):
                raise DimensionMismatch("provider returned a malformed vector")
            if self._dimension is None:
                self._dimension = vector.shape[0]
            elif vector.shape[0] != self._dimension:
                raise DimensionMismatch(
                    f"vector dimension {vector.shape[0]} differs from "
                    f"session dimension {self._dimension}"
                )
        return vectors

    async def score_preference(self, query, itinerary_text):
        """Return the raw reward model score RM(query, itinerary)."""
        if not str(query).strip() or not str(itinerary_text).strip():
            raise PreconditionError("score_preference needs non-empty texts")
        raw = await self._call(
            OP_SCORE,
            {"model": self.config.model_name, "query": query, "response": itinerary_text},
            lambda: self._score(query, itinerary_text),
        )
        score = float(raw)
        if not math.isfinite(score):
            raise SchemaError(f"reward model returned {raw!r}")
        return score

    async def judge_pair(self, query, plan_a, plan_b):
        """Return the judge's 1..5 personalization scores for two plans."""
        for text in (query, plan_a, plan_b):
            if not str(text).strip():
                raise PreconditionError("judge_pair needs non-empty texts")
        request = ChatRequest(
            JUDGE_SYSTEM,
            JUDGE_TEMPLATE.format(query=query, plan_a=plan_a, plan_b=plan_b),
            expects_structured=True,
            template="judge",
            context={"query": query, "plan_a": plan_a, "plan_b": plan_b},
        )
        return await self.chat_structured(request, parse_verdict)

    async def close(self):
        """Release network resources."""

    def __repr__(self):
        """Return internal string representation of object."""
        return f"{type(self).__name__}({self.config.role}, {self.config.model_name})"


def create_provider(
    config, transcript=None, seed=0, responders=None, replay=None, **mock_options
):
    """Return the client for a ProviderConfig.

    A replay source wins over everything, then the mock flag decides.
    """
    # pylint: disable=import-outside-toplevel
    if replay is not None:
        from .replay import ReplayProvider

        return ReplayProvider(config, replay)
    if config.mock:
        from .mock import MockProvider

        return MockProvider(
            config,
            seed=seed,
            responders=responders,
            transcript=transcript,
            **mock_options,
        )
    from .remote import RemoteProvider

    return RemoteProvider(config, transcript=transcript)


class ProviderError(TourPlannerError):
    """Error to indicate a provider failure."""


class TransportError(ProviderError):
    """Error to indicate the provider could not be reached."""


class AuthError(ProviderError):
    """Error to indicate missing or rejected credentials."""


class SchemaError(ProviderError):
    """Error to indicate an unparseable provider reply."""


class ReplayMiss(ProviderError):
    """Error to indicate a request absent from the replayed transcript."""
