"""
Translation backend, replay cache and corpus translation tests
"""
import asyncio
import json
from types import SimpleNamespace

import httpx
import pytest

from app.core.errors import AlignmentError, AuthFailure, BackendUnavailable, CacheCorrupt, MalformedFixture, MissingFixture
from app.schemas.sentences import SentenceUnit
from app.schemas.translation import EngineDescriptor, TranslationFailure
from app.services.translation import (
    FixtureBackend,
    HttpBackend,
    LLMBackend,
    TranslationBackend,
    TranslationCache,
    build_backend,
    cache_key,
    load_fixture,
    translate_corpus,
)

DESCRIPTOR = EngineDescriptor(engine_id="test-engine", endpoint="http://engine.test/translate")


def unit(occupation_id, text, template_id="base", adjective_id=None):
    return SentenceUnit(
        occupation_id=occupation_id, template_id=template_id, adjective_id=adjective_id, source_text=text,
    )


def http_backend(transport, **options):
    options.setdefault("backoff_seconds", 0.0)
    options.setdefault("max_requests_per_second", 1000.0)
    return HttpBackend(DESCRIPTOR, "secret", transport=transport, **options)


class TestFixtureBackend:
    def test_lookup(self):
        backend = FixtureBackend(DESCRIPTOR, {"ő egy statisztikus": "he is a statistician"})
        assert backend.lookup("ő egy statisztikus") == "he is a statistician"

    def test_empty_fixture(self):
        with pytest.raises(MissingFixture):
            FixtureBackend(DESCRIPTOR, {}).lookup("ő egy orvos")

    async def test_missing_line_is_per_unit_failure(self):
        backend = FixtureBackend(DESCRIPTOR, {"ő egy orvos": "he is a doctor"})
        result = await backend.translate_batch(["ő egy orvos", "ő egy ápoló"])
        assert result[0] == "he is a doctor"
        assert isinstance(result[1], TranslationFailure)
        assert result[1].code == "MissingFixture"
        assert backend.query_count == 1

    def test_load_demo_fixture(self, demo_dir):
        table = load_fixture(demo_dir / "translations.tsv")
        assert len(table) == 130
        assert table["ő egy statisztikus"] == "He is a statistician."

    def test_conflicting_duplicate(self, write_csv):
        path = write_csv("t.tsv", "ő egy orvos\the is a doctor\nő egy orvos\tshe is a doctor\n")
        with pytest.raises(MalformedFixture):
            load_fixture(path)

    def test_identical_duplicate_allowed(self, write_csv):
        path = write_csv("t.tsv", "ő egy orvos\the is a doctor\nő egy orvos\the is a doctor\n")
        assert load_fixture(path) == {"ő egy orvos": "he is a doctor"}

    def test_wrong_field_count(self, write_csv):
        path = write_csv("t.tsv", "ő egy orvos\n")
        with pytest.raises(MalformedFixture):
            load_fixture(path)


class TestCache:
    def test_key_depends_on_engine(self):
        assert cache_key("a", "hu", "en", "x") != cache_key("b", "hu", "en", "x")
        assert cache_key("a", "hu", "en", "x") == cache_key("a", "hu", "en", "x")

    async def test_persisted_entries_reload(self, tmp_path):
        cache = TranslationCache(tmp_path / "cache.jsonl")
        backend = FixtureBackend(DESCRIPTOR, {"ő egy orvos": "he is a doctor"})
        await translate_corpus([unit("o26", "ő egy orvos")], backend, cache)

        reloaded = TranslationCache(tmp_path / "cache.jsonl")
        key = cache_key("test-engine", "hu", "en", "ő egy orvos")
        assert len(reloaded) == 1
        assert reloaded.get(key).tgt == "he is a doctor"

    async def test_tampered_line(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        backend = FixtureBackend(DESCRIPTOR, {"ő egy orvos": "he is a doctor"})
        await translate_corpus([unit("o26", "ő egy orvos")], backend, TranslationCache(path))

        raw = json.loads(path.read_text(encoding="utf-8"))
        raw["tgt"] = "she is a doctor"
        path.write_text(json.dumps(raw) + "\n", encoding="utf-8")
        with pytest.raises(CacheCorrupt):
            TranslationCache(path)

    def test_garbage_line(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text("not json\n", encoding="utf-8")
        with pytest.raises(CacheCorrupt):
            TranslationCache(path)


class GatedBackend(TranslationBackend):
    """First batch fails authentication; the others wait until cancelled"""

    def __init__(self):
        super().__init__(DESCRIPTOR, max_batch_size=1)
        self.cancelled = 0

    async def translate_batch(self, lines):
        self.query_count += 1
        if lines == ["first"]:
            await asyncio.sleep(0)
            raise AuthFailure("rejected", engine=DESCRIPTOR.engine_id)
        try:
            await asyncio.sleep(30)
        except asyncio.CancelledError:
            self.cancelled += 1
            raise
        return [line.upper() for line in lines]


class TestTranslateCorpus:
    async def test_doctor_via_fixture(self, tmp_path):
        backend = FixtureBackend(DESCRIPTOR, {"ő egy orvos": "he is a doctor"})
        records = await translate_corpus([unit("o26", "ő egy orvos")], backend, TranslationCache(tmp_path / "c.jsonl"))
        assert records[0].target_text == "he is a doctor"
        assert records[0].engine.retrieved_at is not None

    async def test_warm_cache_makes_no_queries(self, tmp_path):
        cache = TranslationCache(tmp_path / "c.jsonl")
        units = [unit("o26", "ő egy orvos")]
        first = await translate_corpus(units, FixtureBackend(DESCRIPTOR, {"ő egy orvos": "he is a doctor"}), cache)

        backend = FixtureBackend(DESCRIPTOR, {"ő egy orvos": "he is a doctor"})
        second = await translate_corpus(units, backend, cache)
        assert backend.query_count == 0
        assert second == first

    async def test_hole_in_fixture(self, tmp_path):
        backend = FixtureBackend(DESCRIPTOR, {"ő egy orvos": "he is a doctor"})
        cache = TranslationCache(tmp_path / "c.jsonl")
        records = await translate_corpus(
            [unit("o04", "ő egy ápoló"), unit("o26", "ő egy orvos")], backend, cache,
        )
        assert not records[0].ok and records[0].failure.code == "MissingFixture"
        assert records[1].ok
        assert len(cache) == 1

    async def test_duplicate_sources_queried_once(self, tmp_path, echo_transport):
        transport = echo_transport()
        backend = http_backend(transport)
        units = [unit("a", "ő egy orvos"), unit("b", "ő egy orvos", template_id="other")]
        records = await translate_corpus(units, backend, TranslationCache(tmp_path / "c.jsonl"))
        await backend.aclose()
        assert transport.calls[0]["lines"] == ["ő egy orvos"]
        assert [r.sentence_ref.occupation_id for r in records] == ["a", "b"]

    async def test_batches_preserve_order(self, tmp_path, echo_transport):
        transport = echo_transport()
        backend = http_backend(transport, max_batch_size=100)
        units = [unit(f"o{i:03d}", f"mondat {i}") for i in range(250)]
        records = await translate_corpus(units, backend, TranslationCache(tmp_path / "c.jsonl"), batch_size=100, jobs=3)
        await backend.aclose()
        assert sorted(len(c["lines"]) for c in transport.calls) == [50, 100, 100]
        assert [r.target_text for r in records] == [f"MONDAT {i}" for i in range(250)]

    async def test_alignment_failure_marks_batch(self, tmp_path, echo_transport):
        backend = http_backend(echo_transport(drop_last=True))
        cache = TranslationCache(tmp_path / "c.jsonl")
        records = await translate_corpus([unit("a", "x"), unit("b", "y")], backend, cache)
        await backend.aclose()
        assert all(r.failure.code == "AlignmentError" for r in records)
        assert len(cache) == 0

    async def test_auth_failure_cancels_sibling_batches(self, tmp_path):
        backend = GatedBackend()
        cache = TranslationCache(tmp_path / "c.jsonl")
        units = [unit("a", "first"), unit("b", "second"), unit("c", "third")]
        with pytest.raises(AuthFailure):
            await translate_corpus(units, backend, cache, batch_size=1, jobs=3)
        assert backend.cancelled == 2
        assert len(cache) == 0

    async def test_every_line_unavailable_raises(self, tmp_path, echo_transport):
        backend = http_backend(echo_transport(script=[503, 503]), max_retries=1)
        try:
            with pytest.raises(BackendUnavailable):
                await translate_corpus([unit("a", "x")], backend, TranslationCache(tmp_path / "c.jsonl"))
        finally:
            await backend.aclose()


class TestHttpBackend:
    async def test_aligned_batch(self, echo_transport):
        backend = http_backend(echo_transport())
        lines = [f"line {i}" for i in range(100)]
        result = await backend.translate_batch(lines)
        await backend.aclose()
        assert result == [line.upper() for line in lines]

    async def test_short_reply(self, echo_transport):
        backend = http_backend(echo_transport(drop_last=True))
        with pytest.raises(AlignmentError):
            await backend.translate_batch([f"line {i}" for i in range(100)])
        await backend.aclose()

    async def test_throttle_retried(self, echo_transport):
        transport = echo_transport(script=[429])
        backend = http_backend(transport)
        result = await backend.translate_batch(["ő egy orvos"])
        await backend.aclose()
        assert result == ["Ő EGY ORVOS"]
        assert backend.query_count == 2
        assert len(transport.calls) == 2

    async def test_auth_failure_not_retried(self, echo_transport):
        transport = echo_transport(script=[401])
        backend = http_backend(transport)
        with pytest.raises(AuthFailure):
            await backend.translate_batch(["x"])
        await backend.aclose()
        assert len(transport.calls) == 1

    async def test_client_error_unavailable(self, echo_transport):
        backend = http_backend(echo_transport(script=[400]))
        with pytest.raises(BackendUnavailable):
            await backend.translate_batch(["x"])
        await backend.aclose()

    async def test_retries_exhausted(self, echo_transport):
        transport = echo_transport(script=[500, 502, 503])
        backend = http_backend(transport, max_retries=2)
        with pytest.raises(BackendUnavailable):
            await backend.translate_batch(["x"])
        await backend.aclose()
        assert len(transport.calls) == 3

    async def test_empty_target_is_failure(self):
        transport = httpx.MockTransport(lambda request: httpx.Response(200, json={"lines": ["ok", "  "]}))
        backend = http_backend(transport)
        result = await backend.translate_batch(["a", "b"])
        await backend.aclose()
        assert result[0] == "ok"
        assert result[1].code == "EmptyTranslation"

    async def test_sends_bearer_and_languages(self):
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("Authorization")
            seen["body"] = json.loads(request.content)
            return httpx.Response(200, json={"lines": ["x"]})

        backend = http_backend(httpx.MockTransport(handler))
        await backend.translate_batch(["y"])
        await backend.aclose()
        assert seen["auth"] == "Bearer secret"
        assert seen["body"]["source_lang"] == "hu"
        assert seen["body"]["target_lang"] == "en"


class FakeCompletions:
    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = []

    async def create(self, **kwargs):
        self.calls.append(kwargs)
        reply = self.replies.pop(0)
        if isinstance(reply, Exception):
            raise reply
        message = SimpleNamespace(content=reply)
        return SimpleNamespace(choices=[SimpleNamespace(message=message)])


class FakeClient:
    def __init__(self, replies):
        self.chat = SimpleNamespace(completions=FakeCompletions(replies))

    async def close(self):
        return None


class TestLLMBackend:
    def make(self, test_settings, replies):
        client = FakeClient(replies)
        backend = LLMBackend(DESCRIPTOR, test_settings, "test/model", client=client)
        return backend, client.chat.completions

    async def test_numbered_document(self, test_settings):
        backend, completions = self.make(test_settings, ["1. he is a doctor\n2. she is a nurse"])
        result = await backend.translate_batch(["ő egy orvos", "ő egy ápoló"])
        assert result == ["he is a doctor", "she is a nurse"]
        document = completions.calls[0]["messages"][1]["content"]
        assert document == "1. ő egy orvos\n2. ő egy ápoló"

    async def test_missing_number(self, test_settings):
        backend, _ = self.make(test_settings, ["1. he is a doctor"])
        with pytest.raises(AlignmentError):
            await backend.translate_batch(["ő egy orvos", "ő egy ápoló"])

    def test_missing_key(self, test_settings):
        no_key = test_settings.model_copy(update={"OPENROUTER_API_KEY": None})
        with pytest.raises(AuthFailure):
            LLMBackend(DESCRIPTOR, no_key, "test/model")


class TestBuildBackend:
    def test_fixture_kind(self, demo_config, test_settings):
        backend = build_backend(demo_config, test_settings)
        assert isinstance(backend, FixtureBackend)
        assert backend.descriptor.engine_id == "demo-replay"
        assert backend.max_batch_size == 40
