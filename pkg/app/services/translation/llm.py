"""
LLM backend: batches sent as numbered documents via OpenRouter (OpenAI-compatible API)
"""
import asyncio
import logging
import re
from typing import Dict, List, Optional

import openai
from openai import AsyncOpenAI

from app.core.config import Settings
from app.core.errors import AlignmentError, AuthFailure, BackendUnavailable
from app.schemas.translation import EngineDescriptor, TranslationFailure
from app.services.translation.base import BatchResult, TranslationBackend

logger = logging.getLogger(__name__)

NUMBERED_LINE = re.compile(r"^\s*(\d+)[.)]\s*(.*?)\s*$")

LANGUAGE_NAMES = {"hu": "Hungarian", "en": "English", "de": "German", "fr": "French", "es": "Spanish"}


class LLMBackend(TranslationBackend):
    """Chat-completions adapter behind the batch contract"""

    def __init__(
        self,
        descriptor: EngineDescriptor,
        settings: Settings,
        model: str,
        *,
        max_batch_size: int = 100,
        max_retries: Optional[int] = None,
        backoff_seconds: Optional[float] = None,
        client: Optional[AsyncOpenAI] = None,
    ):
        super().__init__(descriptor, max_batch_size)
        self.settings = settings
        self.model = model
        self.max_retries = settings.HTTP_MAX_RETRIES if max_retries is None else max_retries
        self.backoff_seconds = settings.HTTP_BACKOFF_SECONDS if backoff_seconds is None else backoff_seconds

        if client is None:
            if not settings.OPENROUTER_API_KEY:
                raise AuthFailure("OPENROUTER_API_KEY is not set", engine=descriptor.engine_id)
            client = AsyncOpenAI(
                api_key=settings.OPENROUTER_API_KEY,
                base_url=settings.OPENROUTER_BASE_URL,
                timeout=settings.HTTP_TIMEOUT_SECONDS,
                max_retries=0,
            )
        self.client = client

    def _build_messages(self, lines: List[str]) -> List[Dict[str, str]]:
        source = LANGUAGE_NAMES.get(self.descriptor.source_lang, self.descriptor.source_lang)
        target = LANGUAGE_NAMES.get(self.descriptor.target_lang, self.descriptor.target_lang)
        system = (
            f"You translate {source} documents into {target}. "
            "The user sends numbered lines. Reply with exactly one translated line per input line, "
            "keeping the same numbers and order, and nothing else."
        )
        document = "\n".join(f"{i}. {line}" for i, line in enumerate(lines, start=1))
        return [
            {"role": "system", "content": system},
            {"role": "user", "content": document},
        ]

    def _parse(self, lines: List[str], content: str) -> BatchResult:
        numbered = {}
        for raw in content.splitlines():
            match = NUMBERED_LINE.match(raw)
            if match:
                numbered[int(match.group(1))] = match.group(2)

        if sorted(numbered) != list(range(1, len(lines) + 1)):
            raise AlignmentError(
                f"sent {len(lines)} numbered lines, received {len(numbered)}",
                engine=self.descriptor.engine_id,
            )
        return [
            numbered[i] if numbered[i] else TranslationFailure(code="EmptyTranslation", message=line)
            for i, line in enumerate(lines, start=1)
        ]

    async def translate_batch(self, lines: List[str]) -> BatchResult:
        messages = self._build_messages(lines)
        last_error = ""

        for attempt in range(self.max_retries + 1):
            self.query_count += 1
            try:
                response = await self.client.chat.completions.create(
                    model=self.model,
                    messages=messages,
                    temperature=0.0,
                )
            except (openai.AuthenticationError, openai.PermissionDeniedError) as e:
                raise AuthFailure(f"engine rejected credentials: {e}", engine=self.descriptor.engine_id)
            except (openai.RateLimitError, openai.APIConnectionError, openai.InternalServerError) as e:
                last_error = f"{type(e).__name__}: {e}"
            except openai.APIStatusError as e:
                raise BackendUnavailable(f"HTTP {e.status_code}: {e}", engine=self.descriptor.engine_id)
            else:
                content = response.choices[0].message.content or ""
                return self._parse(lines, content)

            if attempt < self.max_retries:
                delay = self.backoff_seconds * (2 ** attempt)
                logger.warning(f"[Translate] {last_error}, retry {attempt + 1}/{self.max_retries} in {delay:.2f}s")
                await asyncio.sleep(delay)

        raise BackendUnavailable(
            f"gave up after {self.max_retries + 1} attempts: {last_error}",
            engine=self.descriptor.engine_id,
        )

    async def aclose(self) -> None:
        await self.client.close()


def llm_backend(descriptor: EngineDescriptor, settings: Settings, model: str, **options) -> LLMBackend:
    return LLMBackend(descriptor, settings, model, **options)
