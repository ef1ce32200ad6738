"""
HTTP backend: document-mode batches against a line-aligned translation endpoint
"""
import asyncio
import logging
import time
from typing import List, Optional, Set

import httpx

from app.core.errors import AlignmentError, AuthFailure, BackendUnavailable, MissingFixture
from app.schemas.translation import EngineDescriptor, TranslationFailure
from app.services.translation.base import BatchResult, TranslationBackend

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class RateLimiter:
    """Spaces request starts at least 1/rate seconds apart"""

    def __init__(self, max_requests_per_second: float):
        self.interval = 1.0 / max_requests_per_second
        self._next = 0.0
        self._lock = asyncio.Lock()

    async def acquire(self) -> None:
        async with self._lock:
            now = time.monotonic()
            wait = self._next - now
            if wait > 0:
                await asyncio.sleep(wait)
                now = time.monotonic()
            self._next = max(now, self._next) + self.interval


def _retry_after(response: httpx.Response) -> Optional[float]:
    value = response.headers.get("Retry-After")
    if value is None:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        return None


class HttpBackend(TranslationBackend):
    """
    POST {"source_lang", "target_lang", "lines"} -> {"lines"}.

    Throttling (429), server errors and transport errors are retried with
    exponential backoff; the final failure raises BackendUnavailable.
    """

    def __init__(
        self,
        descriptor: EngineDescriptor,
        api_key: Optional[str] = None,
        *,
        max_batch_size: int = 100,
        max_requests_per_second: float = 5.0,
        max_retries: int = 5,
        backoff_seconds: float = 1.0,
        timeout: float = 30.0,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        if not descriptor.endpoint:
            raise BackendUnavailable("http backend needs an endpoint", engine=descriptor.engine_id)
        super().__init__(descriptor, max_batch_size)
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self.limiter = RateLimiter(max_requests_per_second)

        headers = {"Accept": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self.client = httpx.AsyncClient(timeout=timeout, headers=headers, transport=transport)

    def _delay(self, attempt: int, response: Optional[httpx.Response] = None) -> float:
        if response is not None:
            retry_after = _retry_after(response)
            if retry_after is not None:
                return retry_after
        return self.backoff_seconds * (2 ** attempt)

    def _parse(self, lines: List[str], response: httpx.Response) -> BatchResult:
        try:
            payload = response.json()
        except ValueError:
            raise AlignmentError("response is not JSON", engine=self.descriptor.engine_id)

        targets = payload.get("lines") if isinstance(payload, dict) else None
        if not isinstance(targets, list) or not all(isinstance(t, str) for t in targets):
            raise AlignmentError("response has no list of lines", engine=self.descriptor.engine_id)
        if len(targets) != len(lines):
            raise AlignmentError(
                f"sent {len(lines)} lines, received {len(targets)}",
                engine=self.descriptor.engine_id, sent=len(lines), received=len(targets),
            )

        return [
            target.strip() if target.strip() else TranslationFailure(code="EmptyTranslation", message=line)
            for line, target in zip(lines, targets)
        ]

    def _missing_lines(self, response: httpx.Response) -> Optional[Set[str]]:
        """Lines a replay endpoint reported as absent, or None for any other 422"""
        try:
            body = response.json()
        except ValueError:
            return None
        detail = body.get("detail", body) if isinstance(body, dict) else None
        if not isinstance(detail, dict) or detail.get("error") != MissingFixture.code:
            return None
        missing = detail.get("missing")
        return set(missing) if isinstance(missing, list) else None

    async def _translate_known(self, lines: List[str], missing: Set[str]) -> BatchResult:
        """Re-send the known lines; the missing ones become per-line failures"""
        known = [line for line in lines if line not in missing]
        if len(known) == len(lines):
            raise BackendUnavailable(
                "endpoint reported missing lines that were not sent",
                engine=self.descriptor.engine_id,
            )
        logger.info(f"[Translate] {len(lines) - len(known)} of {len(lines)} lines missing at the endpoint")
        translated = iter(await self.translate_batch(known) if known else [])
        return [
            TranslationFailure(code=MissingFixture.code, message=f"no fixture translation for {line!r}")
            if line in missing else next(translated)
            for line in lines
        ]

    async def translate_batch(self, lines: List[str]) -> BatchResult:
        payload = {
            "source_lang": self.descriptor.source_lang,
            "target_lang": self.descriptor.target_lang,
            "lines": lines,
        }
        last_error = ""

        for attempt in range(self.max_retries + 1):
            await self.limiter.acquire()
            self.query_count += 1
            response = None
            try:
                response = await self.client.post(self.descriptor.endpoint, json=payload)
            except httpx.TransportError as e:
                last_error = f"{type(e).__name__}: {e}"
            else:
                status = response.status_code
                if status in (401, 403):
                    raise AuthFailure(f"engine rejected credentials (HTTP {status})", engine=self.descriptor.engine_id)
                if status < 400:
                    return self._parse(lines, response)
                missing = self._missing_lines(response) if status == 422 else None
                if missing is not None:
                    return await self._translate_known(lines, missing)
                if status not in RETRYABLE_STATUS:
                    raise BackendUnavailable(
                        f"HTTP {status}: {response.text[:200]}",
                        engine=self.descriptor.engine_id, status=status,
                    )
                last_error = f"HTTP {status}"

            if attempt < self.max_retries:
                delay = self._delay(attempt, response)
                logger.warning(f"[Translate] {last_error}, retry {attempt + 1}/{self.max_retries} in {delay:.2f}s")
                await asyncio.sleep(delay)

        raise BackendUnavailable(
            f"gave up after {self.max_retries + 1} attempts: {last_error}",
            engine=self.descriptor.engine_id,
        )

    async def aclose(self) -> None:
        await self.client.aclose()


def http_backend(
    descriptor: EngineDescriptor,
    credentials: Optional[str] = None,
    **options,
) -> HttpBackend:
    return HttpBackend(descriptor, credentials, **options)
