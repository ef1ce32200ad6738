"""
Artifact storage helpers: atomic writes and content hashes
"""
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence, Tuple, Union

import pandas as pd

from app.core.errors import MalformedRow


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    """Stream a file through sha256"""
    hasher = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def canonical_json(payload: Any) -> str:
    """Compact, key-sorted JSON used for hashing"""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_text_atomic(path: Union[str, Path], text: str) -> Path:
    """Write to a sibling temp file, then rename over the target"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)
    return path


def write_json_atomic(path: Union[str, Path], payload: Any) -> Path:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    return write_text_atomic(path, text)


def write_jsonl_atomic(path: Union[str, Path], lines: Iterable[str]) -> Path:
    """Lines must already be serialized JSON documents"""
    return write_text_atomic(path, "".join(f"{line}\n" for line in lines))


def write_csv_atomic(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    return write_text_atomic(path, frame.to_csv(index=False, lineterminator="\n"))


def read_jsonl(path: Union[str, Path]) -> list:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def read_csv_table(path: Union[str, Path], columns: Sequence[str]) -> pd.DataFrame:
    """
    Read a UTF-8 CSV as strings.

    Blank cells stay empty strings. An empty file yields an empty frame with
    the expected columns. Missing header columns raise MalformedRow on line 1.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=list(columns))
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise MalformedRow(path, 1, f"unparseable CSV: {e}")

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise MalformedRow(path, 1, f"missing columns: {', '.join(missing)}")
    return frame.apply(lambda col: col.str.strip())


def iter_rows(frame: pd.DataFrame) -> Iterator[Tuple[int, dict]]:
    """Yield (file line number, row) pairs; line 1 is the header"""
    for index, row in enumerate(frame.to_dict(orient="records")):
        yield index + 2, row
