"""
Corpus translation: cache lookups, batching, bounded parallelism, ordered assembly
"""
import asyncio
import logging
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Union

from app.core.errors import AlignmentError, BackendUnavailable
from app.schemas.sentences import SentenceUnit
from app.schemas.translation import CacheEntry, TranslationFailure, TranslationRecord
from app.services.translation.base import TranslationBackend
from app.services.translation.cache import TranslationCache, cache_key

logger = logging.getLogger(__name__)

Outcome = Union[CacheEntry, TranslationFailure]


async def translate_corpus(
    units: Sequence[SentenceUnit],
    backend: TranslationBackend,
    cache: TranslationCache,
    *,
    batch_size: Optional[int] = None,
    jobs: int = 4,
) -> List[TranslationRecord]:
    """
    Translate every unit, serving cached lines without touching the backend.

    Identical source lines are queried once. Output order follows input order.
    """
    descriptor = backend.descriptor
    outcomes: Dict[str, Outcome] = {}
    pending: List[str] = []
    seen = set()

    for unit in units:
        text = unit.source_text
        if text in seen:
            continue
        seen.add(text)
        key = cache_key(descriptor.engine_id, descriptor.source_lang, descriptor.target_lang, text)
        entry = cache.get(key)
        if entry is not None:
            outcomes[text] = entry
        else:
            pending.append(text)

    size = min(batch_size or backend.max_batch_size, backend.max_batch_size)
    batches = [pending[i:i + size] for i in range(0, len(pending), size)]
    semaphore = asyncio.Semaphore(max(1, jobs))

    logger.info(
        f"[Translate] {len(units)} units: {len(outcomes)} cached, "
        f"{len(pending)} to query in {len(batches)} batch(es)"
    )

    async def run(batch: List[str]) -> Dict[str, Outcome]:
        async with semaphore:
            try:
                outputs = await backend.translate_batch(batch)
            except (BackendUnavailable, AlignmentError) as e:
                logger.warning(f"[Translate] Batch of {len(batch)} failed: {e.code}: {e.message}")
                failure = TranslationFailure(code=e.code, message=e.message)
                return {text: failure for text in batch}

            retrieved_at = datetime.now(timezone.utc)
            result: Dict[str, Outcome] = {}
            fresh: List[CacheEntry] = []
            for text, output in zip(batch, outputs):
                if isinstance(output, TranslationFailure):
                    result[text] = output
                    continue
                entry = CacheEntry(
                    key=cache_key(descriptor.engine_id, descriptor.source_lang, descriptor.target_lang, text),
                    engine=descriptor.engine_id,
                    source_lang=descriptor.source_lang,
                    target_lang=descriptor.target_lang,
                    src=text,
                    tgt=output,
                    retrieved_at=retrieved_at,
                )
                fresh.append(entry)
                result[text] = entry
            await cache.append(fresh)
            return result

    tasks = [asyncio.create_task(run(batch)) for batch in batches]
    try:
        batch_outcomes = await asyncio.gather(*tasks)
    except BaseException:
        # first fatal error (AuthFailure, cancellation) stops the sibling batches
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        raise
    for batch_outcome in batch_outcomes:
        outcomes.update(batch_outcome)

    if pending and all(
        isinstance(outcomes[text], TranslationFailure) and outcomes[text].code == BackendUnavailable.code
        for text in pending
    ):
        raise BackendUnavailable(
            f"every one of {len(pending)} pending lines failed",
            engine=descriptor.engine_id,
        )

    records: List[TranslationRecord] = []
    for unit in units:
        outcome = outcomes[unit.source_text]
        if isinstance(outcome, TranslationFailure):
            records.append(TranslationRecord(
                sentence_ref=unit.ref,
                source_text=unit.source_text,
                engine=descriptor,
                failure=outcome,
            ))
        else:
            records.append(TranslationRecord(
                sentence_ref=unit.ref,
                source_text=unit.source_text,
                target_text=outcome.tgt,
                engine=descriptor.model_copy(update={"retrieved_at": outcome.retrieved_at}),
            ))

    failed = sum(1 for r in records if not r.ok)
    if failed:
        logger.warning(f"[Translate] {failed} of {len(records)} units failed")
    return records
