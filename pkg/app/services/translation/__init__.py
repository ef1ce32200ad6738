"""
Translation backends, replay cache and corpus translation
"""
from app.core.config import AuditConfig, Settings
from app.schemas.translation import EngineKind
from app.services.translation.base import TranslationBackend
from app.services.translation.cache import TranslationCache, cache_key
from app.services.translation.corpus import translate_corpus
from app.services.translation.fixture import FixtureBackend, fixture_backend, load_fixture
from app.services.translation.http import HttpBackend, http_backend
from app.services.translation.llm import LLMBackend, llm_backend


def build_backend(config: AuditConfig, settings: Settings) -> TranslationBackend:
    """Backend selected by engine.kind"""
    engine = config.engine
    descriptor = engine.descriptor()
    batch_size = config.translation.batch_size

    if engine.kind == EngineKind.FIXTURE:
        return fixture_backend(engine.fixture, descriptor, max_batch_size=batch_size)
    if engine.kind == EngineKind.HTTP:
        return http_backend(
            descriptor,
            settings.TRANSLATION_API_KEY,
            max_batch_size=batch_size,
            max_requests_per_second=config.translation.max_requests_per_second,
            max_retries=config.max_retries(settings),
            backoff_seconds=config.backoff_seconds(settings),
            timeout=settings.HTTP_TIMEOUT_SECONDS,
        )
    return llm_backend(
        descriptor,
        settings,
        engine.model,
        max_batch_size=batch_size,
        max_retries=config.max_retries(settings),
        backoff_seconds=config.backoff_seconds(settings),
    )


__all__ = [
    "FixtureBackend",
    "HttpBackend",
    "LLMBackend",
    "TranslationBackend",
    "TranslationCache",
    "build_backend",
    "cache_key",
    "fixture_backend",
    "http_backend",
    "llm_backend",
    "load_fixture",
    "translate_corpus",
]
