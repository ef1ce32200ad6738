"""
Pytest configuration and fixtures
"""
import json
import shutil
from pathlib import Path
from typing import Callable

import httpx
import pytest

from app.core.config import AuditConfig, Settings, load_audit_config
from app.schemas.lexicon import Registry
from app.services.lexicon import load_registry

DEMO_DIR = Path(__file__).resolve().parent.parent / "data" / "demo"


@pytest.fixture(scope="session")
def demo_dir() -> Path:
    return DEMO_DIR


@pytest.fixture(scope="session")
def registry() -> Registry:
    """Registry loaded from the bundled demo fixture"""
    return load_registry(
        DEMO_DIR / "occupations.csv",
        (DEMO_DIR / "categories_feor.csv", DEMO_DIR / "categories_soc.csv"),
        DEMO_DIR / "crosswalk.csv",
        DEMO_DIR / "sectors.csv",
    )


@pytest.fixture
def demo_copy(tmp_path) -> Path:
    """Writable copy of the demo inputs"""
    target = tmp_path / "demo"
    shutil.copytree(DEMO_DIR, target, ignore=shutil.ignore_patterns("out"))
    return target


@pytest.fixture
def demo_config_path(demo_copy) -> Path:
    return demo_copy / "demo.json"


@pytest.fixture
def demo_config(demo_config_path, tmp_path) -> AuditConfig:
    return load_audit_config(demo_config_path, output_dir=tmp_path / "out")


@pytest.fixture
def test_settings() -> Settings:
    return Settings(
        _env_file=None,
        TRANSLATION_API_KEY="test-key",
        OPENROUTER_API_KEY="test-key",
        HTTP_MAX_RETRIES=3,
        HTTP_BACKOFF_SECONDS=0.0,
    )


@pytest.fixture
def write_csv(tmp_path) -> Callable[[str, str], Path]:
    """Write a small CSV (or any text) into tmp_path"""

    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def echo_transport() -> Callable[..., httpx.MockTransport]:
    """
    Mock translation endpoint.

    `table` maps source lines to targets (unknown lines are upper-cased);
    `script` is a list of status codes returned before answering normally.
    """

    def _make(table=None, script=None, drop_last=False):
        table = table or {}
        script = list(script or [])
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            payload = json.loads(request.content)
            calls.append(payload)
            if script:
                status = script.pop(0)
                return httpx.Response(status, json={"error": "scripted"})
            lines = [table.get(line, line.upper()) for line in payload["lines"]]
            if drop_last:
                lines = lines[:-1]
            return httpx.Response(200, json={"lines": lines})

        transport = httpx.MockTransport(handler)
        transport.calls = calls
        return transport

    return _make
