"""File helpers: deterministic JSON/NDJSON serialization and atomic writes.

All artifact bytes must be reproducible, so every JSON object is written
with sorted keys and a fixed separator style; writers go through a
temp-file-plus-rename so partial outputs never land at the final path.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError


def canonical_json(obj) -> str:
    """Compact, key-sorted JSON; the input to config hashing."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def pretty_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return path


def write_json(path: str | Path, obj) -> Path:
    return atomic_write_text(path, pretty_json(obj))


def read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def write_ndjson(path: str | Path, rows: Iterable[dict]) -> Path:
    lines = [canonical_json(row) for row in rows]
    body = "\n".join(lines) + ("\n" if lines else "")
    return atomic_write_text(path, body)


def read_ndjson(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, object) pairs; blank lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def require_fields(obj: dict, fields: Iterable[str], where: str) -> None:
    missing = [f for f in fields if f not in obj]
    if missing:
        raise DataError(f"{where}: missing fields {missing}")
