"""
Append-only replay cache of translations (JSON lines with per-line checksums)
"""
import asyncio
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import aiofiles

from app.core.errors import CacheCorrupt
from app.core.storage import canonical_json, sha256_bytes
from app.schemas.translation import CacheEntry

logger = logging.getLogger(__name__)


def cache_key(engine_id: str, source_lang: str, target_lang: str, source_text: str) -> str:
    payload = json.dumps([engine_id, source_lang, target_lang, source_text], ensure_ascii=False)
    return sha256_bytes(payload.encode("utf-8"))


def _checksum(fields: dict) -> str:
    return sha256_bytes(canonical_json(fields).encode("utf-8"))


def serialize_entry(entry: CacheEntry) -> str:
    fields = entry.model_dump(mode="json", exclude={"checksum"})
    return canonical_json({**fields, "checksum": _checksum(fields)})


class TranslationCache:
    """Keyed by sha256(engine_id, source_lang, target_lang, source_text); appends go through one lock"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._entries: Dict[str, CacheEntry] = {}
        self._lock = asyncio.Lock()
        self.load()

    def load(self) -> None:
        self._entries = {}
        if not self.path.exists():
            return

        with open(self.path, encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    checksum = raw.pop("checksum")
                except (ValueError, KeyError, AttributeError, TypeError):
                    raise CacheCorrupt(f"{self.path}:{number}: unreadable cache line", path=self.path, line=number)
                if checksum != _checksum(raw):
                    raise CacheCorrupt(f"{self.path}:{number}: checksum mismatch", path=self.path, line=number)
                try:
                    entry = CacheEntry(**raw, checksum=checksum)
                except ValueError:
                    raise CacheCorrupt(f"{self.path}:{number}: invalid cache record", path=self.path, line=number)
                # first occurrence wins; the file is never rewritten
                self._entries.setdefault(entry.key, entry)

        logger.debug(f"[Cache] Loaded {len(self._entries)} entries from {self.path}")

    def get(self, key: str) -> Optional[CacheEntry]:
        return self._entries.get(key)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    async def append(self, entries: Iterable[CacheEntry]) -> int:
        """Append new entries; keys already present are skipped"""
        async with self._lock:
            fresh = [e for e in entries if e.key not in self._entries]
            if not fresh:
                return 0
            self.path.parent.mkdir(parents=True, exist_ok=True)
            async with aiofiles.open(self.path, "a", encoding="utf-8", newline="\n") as f:
                await f.write("".join(serialize_entry(e) + "\n" for e in fresh))
            for entry in fresh:
                self._entries[entry.key] = entry
            return len(fresh)
