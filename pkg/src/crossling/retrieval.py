"""BM25 retrieval over corpus chunks and entailment judging.

Okapi BM25 with k1 = 1.2, b = 0.75 and the non-negative +1-inside-log IDF:
    IDF(t) = ln((N - df + 0.5) / (df + 0.5) + 1)
    score(c) = sum over query terms of IDF * tf * (k1 + 1)
               / (tf + k1 * (1 - b + b * len / avglen))
Query terms are treated as a bag, so repeated terms count twice. Chunks
with score 0 are never returned; ties break by ascending chunk_id.

Judging goes through a pluggable contract: the shipped baseline is a
deterministic lexical-overlap judge so the pipeline is testable without a
neural model; real judges speak the ``judge/1`` wire protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .corpus import Chunk, script_class
from .errors import ConfigError, DataError, TransportError
from .io import read_json, require_fields, write_json
from .probing import ClozeQuestion, instantiate
from .wire import DEFAULT_TIMEOUT, http_exchange, stdio_exchange

JUDGE_PROTOCOL = "judge/1"
TOKENIZER_VERSION = "tok/1"
INDEX_FORMAT = "crossling-index/1"

BM25_K1 = 1.2
BM25_B = 0.75

TSHEG = "་"


def _is_delimiter(ch: str) -> bool:
    return script_class(ch) == "common" and not ("0" <= ch <= "9")


def _word_tokens(text: str) -> list[str]:
    terms: list[str] = []
    current: list[str] = []
    for ch in text:
        if _is_delimiter(ch):
            if current:
                terms.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        terms.append("".join(current))
    return terms


def tokenize_for_index(text: str, lang: str) -> list[str]:
    """Deterministic per-language terms.

    zh: one term per non-delimiter code point; bo: tsheg- and
    whitespace-delimited syllables; mn: whitespace-delimited words;
    everything else (en, ko, ...): lowercased words split on whitespace
    and punctuation.
    """
    if lang == "zh":
        return [ch for ch in text if not _is_delimiter(ch) and not ch.isspace()]
    if lang == "bo":
        pieces = text.replace(TSHEG, " ").split()
        return [p for p in pieces if p]
    if lang == "mn":
        return [w.lower() for w in text.split()]
    return [t.lower() for t in _word_tokens(text)]


@dataclass(frozen=True)
class RetrievalHit:
    chunk_id: str
    doc_id: str
    score: float
    rank: int

    def to_dict(self) -> dict:
        return {"chunk_id": self.chunk_id, "doc_id": self.doc_id, "score": self.score, "rank": self.rank}


class InvertedIndex:
    """Term postings over chunks, deterministic regardless of ingest order."""

    def __init__(self, lang: str, postings: dict, lengths: dict, doc_ids: dict,
                 tokenizer: str = TOKENIZER_VERSION):
        self.lang = lang
        self.tokenizer = tokenizer
        self._postings = postings      # term -> {chunk_id: tf}
        self._lengths = lengths        # chunk_id -> token count
        self._doc_ids = doc_ids        # chunk_id -> doc_id
        self.n_chunks = len(lengths)
        total = sum(lengths.values())
        self.avg_len = total / self.n_chunks if self.n_chunks else 0.0

    def doc_id(self, chunk_id: str) -> str:
        return self._doc_ids[chunk_id]

    def term_postings(self, term: str) -> dict:
        return self._postings.get(term, {})

    def has_term(self, term: str) -> bool:
        return term in self._postings

    def save(self, path, extra: dict | None = None) -> None:
        chunk_ids = sorted(self._lengths)
        idx_of = {cid: i for i, cid in enumerate(chunk_ids)}
        postings = {
            term: sorted([idx_of[cid], tf] for cid, tf in entry.items())
            for term, entry in self._postings.items()
        }
        write_json(
            path,
            {
                **(extra or {}),
                "format": INDEX_FORMAT,
                "tokenizer": self.tokenizer,
                "lang": self.lang,
                "chunk_ids": chunk_ids,
                "doc_ids": [self._doc_ids[cid] for cid in chunk_ids],
                "lengths": [self._lengths[cid] for cid in chunk_ids],
                "postings": postings,
            },
        )

    @classmethod
    def load(cls, path) -> "InvertedIndex":
        obj = read_json(path)
        if obj.get("format") != INDEX_FORMAT:
            raise DataError(f"{path}: not a {INDEX_FORMAT} file")
        if obj.get("tokenizer") != TOKENIZER_VERSION:
            raise DataError(
                f"{path}: tokenizer {obj.get('tokenizer')!r} does not match "
                f"this build's {TOKENIZER_VERSION!r}; rebuild the index"
            )
        chunk_ids = obj["chunk_ids"]
        postings = {
            term: {chunk_ids[i]: tf for i, tf in entry}
            for term, entry in obj["postings"].items()
        }
        return cls(
            lang=str(obj["lang"]),
            postings=postings,
            lengths=dict(zip(chunk_ids, obj["lengths"])),
            doc_ids=dict(zip(chunk_ids, obj["doc_ids"])),
            tokenizer=str(obj["tokenizer"]),
        )


def build_index(chunks: Iterable[Chunk], lang: str) -> InvertedIndex:
    """Exact postings over the chunk stream; duplicate chunk ids are a
    data error, an empty stream too."""
    postings: dict[str, dict[str, int]] = {}
    lengths: dict[str, int] = {}
    doc_ids: dict[str, str] = {}
    for chunk in chunks:
        if chunk.chunk_id in lengths:
            raise DataError(f"duplicate chunk_id {chunk.chunk_id!r}")
        terms = tokenize_for_index(chunk.text, lang)
        lengths[chunk.chunk_id] = len(terms)
        doc_ids[chunk.chunk_id] = chunk.doc_id
        for term in terms:
            entry = postings.setdefault(term, {})
            entry[chunk.chunk_id] = entry.get(chunk.chunk_id, 0) + 1
    if not lengths:
        raise DataError("cannot index an empty chunk stream")
    return InvertedIndex(lang=lang, postings=postings, lengths=lengths, doc_ids=doc_ids)


def bm25_idf(n_chunks: int, df: int) -> float:
    return math.log((n_chunks - df + 0.5) / (df + 0.5) + 1.0)


def search(index: InvertedIndex, query: str, k: int = 50) -> list[RetrievalHit]:
    """Top-k chunks by BM25; zero-score chunks are never returned."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    scores: dict[str, float] = {}
    for term in tokenize_for_index(query, index.lang):
        entry = index.term_postings(term)
        if not entry:
            continue
        idf = bm25_idf(index.n_chunks, len(entry))
        for chunk_id in sorted(entry):
            tf = entry[chunk_id]
            length = index._lengths[chunk_id]
            denom = tf + BM25_K1 * (1 - BM25_B + BM25_B * length / index.avg_len)
            scores[chunk_id] = scores.get(chunk_id, 0.0) + idf * tf * (BM25_K1 + 1) / denom
    ranked = sorted(
        ((cid, s) for cid, s in scores.items() if s > 0.0),
        key=lambda item: (-item[1], item[0]),
    )[:k]
    return [
        RetrievalHit(chunk_id=cid, doc_id=index.doc_id(cid), score=s, rank=rank)
        for rank, (cid, s) in enumerate(ranked, 1)
    ]


def load_stopwords(lang: str) -> frozenset[str]:
    """Fixed per-language stopword list shipped as package data; unknown
    languages get an empty list."""
    try:
        text = resources.files("crossling.data").joinpath(f"stopwords_{lang}.txt").read_text("utf-8")
    except FileNotFoundError:
        return frozenset()
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


@dataclass(frozen=True)
class Judgment:
    question_id: str
    chunk_id: str
    entails: bool
    judge: str

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "chunk_id": self.chunk_id,
            "entails": self.entails,
            "judge": self.judge,
        }

    @classmethod
    def from_dict(cls, d: dict, where: str = "judgment") -> "Judgment":
        require_fields(d, ("question_id", "chunk_id", "entails", "judge"), where)
        return cls(
            question_id=str(d["question_id"]),
            chunk_id=str(d["chunk_id"]),
            entails=bool(d["entails"]),
            judge=str(d["judge"]),
        )


class BaselineLexicalJudge:
    """entails iff at least ``threshold`` of the claim's distinct content
    terms (tokens minus stopwords) occur in the chunk."""

    def __init__(self, lang: str, threshold: float = 0.5):
        if not 0 < threshold <= 1:
            raise ConfigError("threshold must be in (0, 1]")
        self.lang = lang
        self.threshold = threshold
        self._stopwords = load_stopwords(lang)

    @property
    def identity(self) -> str:
        return f"baseline-lexical/1(lang={self.lang},threshold={self.threshold})"

    def judge(self, claim: str, document: str) -> bool:
        content = set(tokenize_for_index(claim, self.lang)) - self._stopwords
        if not content:
            return False
        present = set(tokenize_for_index(document, self.lang))
        return len(content & present) / len(content) >= self.threshold

    def judge_batch(self, items: Sequence[tuple[str, str, str]]) -> list:
        return [self.judge(claim, document) for _, claim, document in items]


class JudgeFailure(Exception):
    """Per-item judging failure inside a batch."""

    def __init__(self, request_id: str, reason: str):
        super().__init__(f"{request_id}: {reason}")
        self.request_id = request_id
        self.reason = reason


class ExternalJudge:
    """Client for a ``judge/1`` server; retries the batch once on transport
    failure, then degrades to per-item errors."""

    def __init__(
        self,
        command: list[str] | None = None,
        url: str | None = None,
        identity: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        if bool(command) == bool(url):
            raise ConfigError("external judge needs exactly one of command or url")
        self.command = list(command) if command else None
        self.url = url
        self.timeout = timeout
        self.identity = identity or f"external:{' '.join(self.command) if self.command else self.url}"

    def _exchange(self, requests: list[dict]) -> dict[str, dict]:
        if self.command:
            return stdio_exchange(self.command, JUDGE_PROTOCOL, requests, self.timeout)
        return http_exchange(self.url, JUDGE_PROTOCOL, requests, self.timeout)

    def judge_batch(self, items: Sequence[tuple[str, str, str]]) -> list:
        requests = [
            {"id": rid, "claim": claim, "document": document} for rid, claim, document in items
        ]
        try:
            responses = self._exchange(requests)
        except TransportError:
            try:
                responses = self._exchange(requests)
            except TransportError as exc:
                return [JudgeFailure(r["id"], f"transport failed twice: {exc}") for r in requests]
        out = []
        for req in requests:
            resp = responses.get(req["id"])
            if resp is None:
                out.append(JudgeFailure(req["id"], "no response before timeout"))
            elif "error" in resp:
                out.append(JudgeFailure(req["id"], f"server error: {resp['error']}"))
            elif not isinstance(resp.get("entails"), bool):
                out.append(JudgeFailure(req["id"], f"invalid entails value: {resp.get('entails')!r}"))
            else:
                out.append(resp["entails"])
        return out


class JudgmentCache:
    """Judgments keyed by (judge identity, question id, chunk id)."""

    def __init__(self):
        self._store: dict[tuple[str, str, str], Judgment] = {}

    def get(self, judge_id: str, question_id: str, chunk_id: str) -> Judgment | None:
        return self._store.get((judge_id, question_id, chunk_id))

    def put(self, judgment: Judgment) -> None:
        self._store[(judgment.judge, judgment.question_id, judgment.chunk_id)] = judgment

    def add_all(self, judgments: Iterable[Judgment]) -> None:
        for j in judgments:
            self.put(j)

    def __len__(self) -> int:
        return len(self._store)


def judge_entailment(
    judge,
    question: ClozeQuestion,
    chunk: Chunk,
    cache: JudgmentCache | None = None,
) -> Judgment:
    """Judge whether the chunk entails the gold-completed claim of the
    question; results are cached by (judge, question, chunk)."""
    if cache is not None:
        hit = cache.get(judge.identity, question.id, chunk.chunk_id)
        if hit is not None:
            return hit
    claim = instantiate(question, question.gold_index)
    outcome = judge.judge_batch([(f"{question.id}|{chunk.chunk_id}", claim, chunk.text)])[0]
    if isinstance(outcome, JudgeFailure):
        raise outcome
    judgment = Judgment(
        question_id=question.id, chunk_id=chunk.chunk_id, entails=outcome, judge=judge.identity
    )
    if cache is not None:
        cache.put(judgment)
    return judgment
