"""Deterministic provider used for tests and offline runs."""
import json
import logging
import unicodedata

import numpy as np
from cryptography.hazmat.primitives import hashes, hmac

from ..common import canonical_bytes
from ..const import MOCK_EMBEDDING_DIM
from . import ProviderClient, ProviderConfig

_LOGGER = logging.getLogger(__name__)


class MockProvider(ProviderClient):
    """Provider whose every answer is a pure function of request and seed.

    Chat replies come from `responders`, a mapping of template name (or "*")
    to a callable `(request, rng) -> text`. Requests without a responder get
    a short keyed digest. Embeddings are non-negative unit vectors expanded
    from a keyed hash of the NFC-normalized text.
    """

    def __init__(
        self,
        config=None,
        seed=0,
        responders=None,
        preference=None,
        judge=None,
        dimension=MOCK_EMBEDDING_DIM,
        transcript=None,
    ):
        """Initialize a new MockProvider."""
        super().__init__(config or ProviderConfig(), transcript=transcript)
        self.seed = seed
        self.responders = dict(responders or {})
        self.preference = preference
        self.judge = judge
        self.dimension = dimension
        self.responders.setdefault("judge", self._judge_reply)

    def keyed_digest(self, data):
        """Return HMAC-SHA256 of data keyed by the seed."""
        mac = hmac.HMAC(str(self.seed).encode("utf-8"), hashes.SHA256())
        mac.update(data)
        return mac.finalize()

    def rng_for(self, document):
        """Return a generator seeded from a JSON-able document."""
        digest = self.keyed_digest(canonical_bytes(document))
        return np.random.default_rng(int.from_bytes(digest, "big"))

    def vector_for(self, text):
        """Return the mock embedding of text."""
        data = unicodedata.normalize("NFC", text).encode("utf-8")
        rng = np.random.default_rng(int.from_bytes(self.keyed_digest(data), "big"))
        values = rng.random(self.dimension) + 1e-6
        return values / np.linalg.norm(values)

    async def _complete(self, request):
        responder = self.responders.get(request.template) or self.responders.get("*")
        if responder is None:
            digest = self.keyed_digest(canonical_bytes(request.payload("mock")))
            return f"mock-{digest.hex()[:16]}"
        return responder(request, self.rng_for(request.payload("mock")))

    async def _embed(self, texts):
        return [self.vector_for(text).tolist() for text in texts]

    async def _score(self, query, itinerary_text):
        if callable(self.preference):
            return float(self.preference(query, itinerary_text))
        if self.preference is not None:
            return float(self.preference)
        digest = self.keyed_digest(canonical_bytes([query, itinerary_text]))
        return round(int.from_bytes(digest[:8], "big") / 2 ** 64 * 20.0 - 10.0, 6)

    def _plan_score(self, plan):
        digest = self.keyed_digest(plan.encode("utf-8"))
        return 1 + digest[0] % 5

    def _judge_reply(self, request, rng):
        context = request.context
        if callable(self.judge):
            score_a, score_b = self.judge(
                context["query"], context["plan_a"], context["plan_b"]
            )
        elif self.judge is not None:
            score_a, score_b = self.judge
        else:
            score_a = self._plan_score(context["plan_a"])
            score_b = self._plan_score(context["plan_b"])
        verdict = {
            "Personalization Evaluation": {
                "Scores": {"Plan A": score_a, "Plan B": score_b}
            }
        }
        return (
            "Both plans were compared against the stated interests.\n"
            f"```json\n{json.dumps(verdict)}\n```"
        )
