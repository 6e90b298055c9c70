"""OpenAI-compatible provider client."""
import logging
import os

import httpx
import openai
from openai import AsyncOpenAI

from . import AuthError, ProviderClient, SchemaError, TransportError

_LOGGER = logging.getLogger(__name__)


class RemoteProvider(ProviderClient):
    """Provider talking to OpenAI-compatible HTTP endpoints.

    Chat and embeddings use the standard request shapes. The reward model is
    a plain JSON endpoint: POST {endpoint_url}/reward with
    {"model", "query", "response"} answering {"score": number}.
    """

    def __init__(self, config, transcript=None):
        """Initialize a new RemoteProvider."""
        super().__init__(config, transcript=transcript)
        api_key = os.environ.get(config.api_key_ref) if config.api_key_ref else None
        if config.api_key_ref and not api_key:
            raise AuthError(f"environment variable {config.api_key_ref} is not set")
        self._api_key = api_key
        self._client = AsyncOpenAI(
            base_url=config.endpoint_url or None,
            api_key=api_key or "unused",
            timeout=config.timeout,
            max_retries=config.max_retries,
        )
        self._http = None

    async def _complete(self, request):
        try:
            completion = await self._client.chat.completions.create(
                model=self.config.model_name,
                messages=[
                    {"role": "system", "content": request.system_prompt},
                    {"role": "user", "content": request.user_prompt},
                ],
                temperature=0,
            )
        except openai.AuthenticationError as ex:
            raise AuthError(str(ex)) from ex
        except openai.APIError as ex:
            raise TransportError(str(ex)) from ex
        if not completion.choices:
            raise SchemaError("completion without choices")
        return completion.choices[0].message.content or ""

    async def _embed(self, texts):
        try:
            response = await self._client.embeddings.create(
                model=self.config.model_name, input=texts
            )
        except openai.AuthenticationError as ex:
            raise AuthError(str(ex)) from ex
        except openai.APIError as ex:
            raise TransportError(str(ex)) from ex
        ordered = sorted(response.data, key=lambda item: item.index)
        return [list(item.embedding) for item in ordered]

    async def _score(self, query, itinerary_text):
        if self._http is None:
            headers = {}
            if self._api_key:
                headers["Authorization"] = f"Bearer {self._api_key}"
            self._http = httpx.AsyncClient(
                base_url=self.config.endpoint_url,
                timeout=self.config.timeout,
                headers=headers,
            )
        try:
            response = await self._http.post(
                "/reward",
                json={
                    "model": self.config.model_name,
                    "query": query,
                    "response": itinerary_text,
                },
            )
            response.raise_for_status()
        except httpx.HTTPStatusError as ex:
            if ex.response.status_code in (401, 403):
                raise AuthError(str(ex)) from ex
            raise TransportError(str(ex)) from ex
        except httpx.HTTPError as ex:
            raise TransportError(str(ex)) from ex
        try:
            return float(response.json()["score"])
        except (ValueError, KeyError, TypeError) as ex:
            raise SchemaError(f"reward endpoint reply malformed: {ex}") from ex

    async def close(self):
        """Close HTTP clients."""
        await self._client.close()
        if self._http is not None:
            await self._http.aclose()
            self._http = None
