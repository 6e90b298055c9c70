"""Provider replaying a recorded transcript."""
import logging
import os
from collections import defaultdict, deque

from . import CallRecord, ProviderClient, ReplayMiss, Transcript, request_hash

_LOGGER = logging.getLogger(__name__)


class ReplayProvider(ProviderClient):
    """Serve responses recorded by an earlier run, matched by request hash.

    Identical requests are answered in their recorded order.
    """

    def __init__(self, config, source):
        """Initialize from a transcript path or a list of records."""
        super().__init__(config)
        records = (
            Transcript.read(source) if isinstance(source, (str, os.PathLike)) else source
        )
        self._records = defaultdict(deque)
        for record in records:
            self._records[record["request_hash"]].append(record["response"])
        self.debug("Loaded %d recorded responses", len(records))

    async def _call(self, op, payload, func):
        key = request_hash(op, payload)
        queue = self._records.get(key)
        if not queue:
            raise ReplayMiss(f"no recorded {op} response for request {key[:12]}")
        self.call_log.append(CallRecord(op, key, 0.0))
        return queue.popleft()

    async def _complete(self, request):
        raise ReplayMiss("replay provider never completes live")

    async def _embed(self, texts):
        raise ReplayMiss("replay provider never embeds live")

    async def _score(self, query, itinerary_text):
        raise ReplayMiss("replay provider never scores live")
