"""
Fixture backend: answers from a canned TSV of translations
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

from app.core.errors import MalformedFixture, MissingFixture
from app.schemas.translation import EngineDescriptor, TranslationFailure
from app.services.translation.base import BatchResult, TranslationBackend

logger = logging.getLogger(__name__)


def load_fixture(path: Union[str, Path]) -> Dict[str, str]:
    """Parse `source_text<TAB>target_text` lines; blank lines are skipped"""
    table: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().split("\n")
    except (OSError, UnicodeDecodeError) as e:
        raise MalformedFixture(f"cannot read fixture {path}: {e}", path=path)

    for number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise MalformedFixture(f"{path}:{number}: expected 2 tab-separated fields, got {len(fields)}", path=path, line=number)
        source, target = fields[0].strip(), fields[1].strip()
        if not source or not target:
            raise MalformedFixture(f"{path}:{number}: empty source or target", path=path, line=number)
        if source in table and table[source] != target:
            raise MalformedFixture(
                f"{path}:{number}: duplicate source {source!r} with a different target",
                path=path, line=number,
            )
        table[source] = target

    return table


class FixtureBackend(TranslationBackend):
    """Backend answering exactly from an in-memory table"""

    def __init__(self, descriptor: EngineDescriptor, table: Dict[str, str], max_batch_size: int = 100):
        super().__init__(descriptor, max_batch_size)
        self.table = table

    def lookup(self, line: str) -> str:
        try:
            return self.table[line]
        except KeyError:
            raise MissingFixture(f"no fixture translation for {line!r}", line=line)

    def missing(self, lines: List[str]) -> List[str]:
        return [line for line in lines if line not in self.table]

    async def translate_batch(self, lines: List[str]) -> BatchResult:
        self.query_count += 1
        result: BatchResult = []
        for line in lines:
            try:
                result.append(self.lookup(line))
            except MissingFixture as e:
                result.append(TranslationFailure(code=e.code, message=e.message))
        return result


def fixture_backend(
    corpus_file: Union[str, Path],
    descriptor: Optional[EngineDescriptor] = None,
    max_batch_size: int = 100,
) -> FixtureBackend:
    table = load_fixture(corpus_file)
    descriptor = descriptor or EngineDescriptor(engine_id=f"fixture:{Path(corpus_file).name}")
    logger.info(f"[Translate] Fixture {corpus_file}: {len(table)} entries")
    return FixtureBackend(descriptor, table, max_batch_size)
