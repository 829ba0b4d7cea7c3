"""Monolingual corpus handling: script classification, filtering, chunking,
and summary statistics.

Per-document operations are pure functions; the corpus-level drivers accept
a ``jobs`` argument and always finish with a stable sort by document id, so
output bytes never depend on scheduling or worker count.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Iterator

from .errors import ConfigError, DataError
from .io import read_ndjson, require_fields, write_ndjson

SCRIPT_CLASSES = ("latin", "han", "hangul", "tibetan", "mongolian", "common", "other")
FILTERABLE_CLASSES = ("latin", "han", "hangul", "tibetan", "mongolian")

DEFAULT_MAX_CHARS = 5000

DROP_EMPTY = "empty_after_filter"
DROP_NO_ALLOWED = "no_allowed_script"

# Inclusive code-point ranges per script class. latin covers Basic Latin
# letters, Latin-1 letters (excluding multiplication/division signs), and
# Latin Extended-A/B; han covers CJK Unified Ideographs plus Extension A;
# hangul covers Syllables, Jamo, and Compatibility Jamo.
_SCRIPT_RANGES = {
    "latin": (
        (0x41, 0x5A),
        (0x61, 0x7A),
        (0xC0, 0xD6),
        (0xD8, 0xF6),
        (0xF8, 0xFF),
        (0x100, 0x24F),
    ),
    "han": ((0x3400, 0x4DBF), (0x4E00, 0x9FFF)),
    "hangul": ((0x1100, 0x11FF), (0x3130, 0x318F), (0xAC00, 0xD7A3)),
    "tibetan": ((0x0F00, 0x0FFF),),
    "mongolian": ((0x1800, 0x18AF),),
}

_class_cache: dict[str, str] = {}


def _classify_char(ch: str) -> str:
    cp = ord(ch)
    # common: whitespace, ASCII digits, ASCII punctuation, General Punctuation
    if (
        ch.isspace()
        or 0x30 <= cp <= 0x39
        or 0x21 <= cp <= 0x2F
        or 0x3A <= cp <= 0x40
        or 0x5B <= cp <= 0x60
        or 0x7B <= cp <= 0x7E
        or 0x2000 <= cp <= 0x206F
    ):
        return "common"
    for name, ranges in _SCRIPT_RANGES.items():
        for lo, hi in ranges:
            if lo <= cp <= hi:
                return name
    return "other"


def script_class(ch: str) -> str:
    """Script class of a single code point."""
    cls = _class_cache.get(ch)
    if cls is None:
        cls = _classify_char(ch)
        _class_cache[ch] = cls
    return cls


@dataclass(frozen=True)
class ScriptProfile:
    """Per-class code-point counts; classes partition the text exactly."""

    latin: int = 0
    han: int = 0
    hangul: int = 0
    tibetan: int = 0
    mongolian: int = 0
    common: int = 0
    other: int = 0

    def total(self) -> int:
        return sum(getattr(self, c) for c in SCRIPT_CLASSES)

    def count(self, cls: str) -> int:
        if cls not in SCRIPT_CLASSES:
            raise ConfigError(f"unknown script class {cls!r}")
        return getattr(self, cls)

    def merged(self, other: "ScriptProfile") -> "ScriptProfile":
        return ScriptProfile(**{c: getattr(self, c) + getattr(other, c) for c in SCRIPT_CLASSES})

    def to_dict(self) -> dict:
        return {c: getattr(self, c) for c in SCRIPT_CLASSES}

    @classmethod
    def from_dict(cls, d: dict) -> "ScriptProfile":
        return cls(**{c: int(d.get(c, 0)) for c in SCRIPT_CLASSES})


@dataclass(frozen=True)
class Document:
    id: str
    lang: str
    text: str
    source: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "lang": self.lang, "text": self.text, "source": self.source}

    @classmethod
    def from_dict(cls, d: dict, where: str = "document") -> "Document":
        require_fields(d, ("id", "lang", "text"), where)
        return cls(id=str(d["id"]), lang=str(d["lang"]), text=str(d["text"]), source=str(d.get("source", "")))


@dataclass(frozen=True)
class Dropped:
    """Filtering outcome for a document that produced no usable text."""

    doc_id: str
    reason: str


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    text: str
    char_len: int

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "text": self.text,
            "char_len": self.char_len,
        }

    @classmethod
    def from_dict(cls, d: dict, where: str = "chunk") -> "Chunk":
        require_fields(d, ("chunk_id", "doc_id", "text"), where)
        text = str(d["text"])
        return cls(
            chunk_id=str(d["chunk_id"]),
            doc_id=str(d["doc_id"]),
            text=text,
            char_len=int(d.get("char_len", len(text))),
        )


@dataclass
class CorpusManifest:
    label: str
    doc_count: int
    chunk_count: int
    total_codepoints: int
    profile: ScriptProfile
    dropped: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "doc_count": self.doc_count,
            "chunk_count": self.chunk_count,
            "total_codepoints": self.total_codepoints,
            "profile": self.profile.to_dict(),
            "dropped": dict(sorted(self.dropped.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusManifest":
        require_fields(d, ("label", "doc_count", "chunk_count", "total_codepoints", "profile"), "manifest")
        return cls(
            label=str(d["label"]),
            doc_count=int(d["doc_count"]),
            chunk_count=int(d["chunk_count"]),
            total_codepoints=int(d["total_codepoints"]),
            profile=ScriptProfile.from_dict(d["profile"]),
            dropped={str(k): int(v) for k, v in d.get("dropped", {}).items()},
        )


def classify_script(text: str) -> ScriptProfile:
    """Count code points of ``text`` per script class."""
    counts = Counter(map(script_class, text))
    return ScriptProfile(**{c: counts.get(c, 0) for c in SCRIPT_CLASSES})


def _check_allowed(allowed: Iterable[str]) -> frozenset[str]:
    allowed = frozenset(allowed)
    unknown = allowed - set(FILTERABLE_CLASSES)
    if unknown:
        raise ConfigError(f"unknown or non-filterable script classes: {sorted(unknown)}")
    if not allowed:
        raise ConfigError("allowed script set must not be empty")
    return allowed


def filter_document(doc: Document, allowed: Iterable[str]) -> Document | Dropped:
    """Keep only code points of ``allowed`` scripts plus the common class.

    Returns Dropped when the survivors contain no code point from an allowed
    script itself (only common characters, or nothing at all).
    """
    allowed = _check_allowed(allowed)
    kept: list[str] = []
    has_allowed = False
    for ch in doc.text:
        cls = script_class(ch)
        if cls in allowed:
            kept.append(ch)
            has_allowed = True
        elif cls == "common":
            kept.append(ch)
    if not kept:
        return Dropped(doc_id=doc.id, reason=DROP_EMPTY)
    if not has_allowed:
        return Dropped(doc_id=doc.id, reason=DROP_NO_ALLOWED)
    return Document(id=doc.id, lang=doc.lang, text="".join(kept), source=doc.source)


def chunk_document(doc: Document, max_chars: int = DEFAULT_MAX_CHARS) -> list[Chunk]:
    """Split a document into chunks of at most ``max_chars`` code points.

    Split points prefer the last newline inside the window, then the last
    whitespace, then a hard cut; concatenating the chunks reproduces the
    document text exactly.
    """
    if max_chars < 1:
        raise ConfigError("max_chars must be >= 1")
    text = doc.text
    chunks: list[Chunk] = []
    pos = 0
    n = len(text)
    while pos < n:
        remaining = n - pos
        if remaining <= max_chars:
            cut = remaining
        else:
            window = text[pos : pos + max_chars]
            nl = window.rfind("\n")
            if nl >= 0:
                cut = nl + 1
            else:
                cut = 0
                for i in range(max_chars - 1, -1, -1):
                    if window[i].isspace():
                        cut = i + 1
                        break
                if cut == 0:
                    cut = max_chars
        piece = text[pos : pos + cut]
        chunks.append(
            Chunk(
                chunk_id=f"{doc.id}#{len(chunks):06d}",
                doc_id=doc.id,
                text=piece,
                char_len=len(piece),
            )
        )
        pos += cut
    return chunks


def _doc_stats(doc: Document, max_chars: int) -> tuple[ScriptProfile, int, int]:
    return classify_script(doc.text), len(doc.text), len(chunk_document(doc, max_chars))


def _check_unique_ids(docs: list[Document]) -> None:
    seen: set[str] = set()
    for d in docs:
        if d.id in seen:
            raise DataError(f"duplicate document id {d.id!r}")
        seen.add(d.id)


def corpus_stats(
    corpus: Iterable[Document],
    label: str = "corpus",
    max_chars: int = DEFAULT_MAX_CHARS,
    jobs: int = 1,
    dropped: dict | None = None,
) -> CorpusManifest:
    """Exact corpus summary; independent of document processing order."""
    docs = list(corpus)
    _check_unique_ids(docs)
    if jobs > 1 and len(docs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            stats = list(pool.map(partial(_doc_stats, max_chars=max_chars), docs, chunksize=64))
    else:
        stats = [_doc_stats(d, max_chars) for d in docs]
    profile = ScriptProfile()
    total = 0
    chunk_count = 0
    for prof, length, n_chunks in stats:
        profile = profile.merged(prof)
        total += length
        chunk_count += n_chunks
    return CorpusManifest(
        label=label,
        doc_count=len(docs),
        chunk_count=chunk_count,
        total_codepoints=total,
        profile=profile,
        dropped=dict(dropped or {}),
    )


def filter_corpus(
    corpus: Iterable[Document],
    allowed: Iterable[str],
    jobs: int = 1,
) -> tuple[list[Document], list[Dropped]]:
    """Filter every document; outputs are sorted by id for run-to-run
    stability regardless of parallelism."""
    allowed = _check_allowed(allowed)
    docs = list(corpus)
    _check_unique_ids(docs)
    if jobs > 1 and len(docs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(partial(filter_document, allowed=allowed), docs, chunksize=64))
    else:
        results = [filter_document(d, allowed) for d in docs]
    kept = sorted((r for r in results if isinstance(r, Document)), key=lambda d: d.id)
    drops = sorted((r for r in results if isinstance(r, Dropped)), key=lambda d: d.doc_id)
    return kept, drops


def chunk_corpus(
    corpus: Iterable[Document], max_chars: int = DEFAULT_MAX_CHARS
) -> list[Chunk]:
    docs = sorted(corpus, key=lambda d: d.id)
    _check_unique_ids(docs)
    out: list[Chunk] = []
    for doc in docs:
        out.extend(chunk_document(doc, max_chars))
    return out


def read_documents(path) -> Iterator[Document]:
    for lineno, obj in read_ndjson(path):
        yield Document.from_dict(obj, where=f"{path}:{lineno}")


def write_documents(path, docs: Iterable[Document]):
    return write_ndjson(path, (d.to_dict() for d in docs))


def read_chunks(path) -> Iterator[Chunk]:
    for lineno, obj in read_ndjson(path):
        yield Chunk.from_dict(obj, where=f"{path}:{lineno}")


def write_chunks(path, chunks: Iterable[Chunk]):
    return write_ndjson(path, (c.to_dict() for c in chunks))
