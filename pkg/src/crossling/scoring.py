"""Text scorers behind one interface: a built-in character n-gram language
model (the desk-scale oracle) and a client for external scorers speaking
the ``scorer/1`` wire protocol.

Conventions, fixed once: natural log everywhere; every document and every
scored text contributes one terminating end-of-text event; perplexity
normalizes by the scored-event count (code points + 1). Perplexities are
only ever compared within a single scorer.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigError, DataError
from .io import read_json, write_json
from .wire import DEFAULT_TIMEOUT, http_exchange, stdio_exchange

SCORER_PROTOCOL = "scorer/1"
MAX_TEXT_CODEPOINTS = 32768
NGRAM_FORMAT = "crossling-ngram/1"

# Sentinels are multi-character strings; real symbols are single code
# points, so collisions are impossible.
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"


@dataclass(frozen=True)
class ScoreResult:
    logprob_sum: float
    token_count: int
    perplexity: float

    @classmethod
    def from_logprob(cls, logprob_sum: float, token_count: int) -> "ScoreResult":
        if token_count < 1:
            raise DataError(f"token_count must be >= 1, got {token_count}")
        if not math.isfinite(logprob_sum):
            raise DataError(f"logprob must be finite, got {logprob_sum!r}")
        try:
            perplexity = math.exp(-logprob_sum / token_count)
        except OverflowError:
            raise DataError(
                f"perplexity overflows for logprob {logprob_sum} over {token_count} tokens"
            ) from None
        return cls(logprob_sum=logprob_sum, token_count=token_count, perplexity=perplexity)

    def to_dict(self) -> dict:
        return {
            "logprob_sum": self.logprob_sum,
            "token_count": self.token_count,
            "perplexity": self.perplexity,
        }


class ScoreFailure(Exception):
    """Per-item scoring failure inside a batch; carried as a value so one
    bad item never aborts the batch."""

    def __init__(self, request_id: str, reason: str):
        super().__init__(f"{request_id}: {reason}")
        self.request_id = request_id
        self.reason = reason


def _padded(text_symbols: list[str], n: int) -> list[str]:
    return [BOS] * (n - 1) + text_symbols + [EOS]


class CharNGramModel:
    """Code-point n-gram model with add-k smoothing, immutable once built.

    The vocabulary is every symbol observed in the padded training streams
    plus UNK; the smoothed distribution for any context sums to one over
    that vocabulary.
    """

    def __init__(self, n: int, k: float, counts: dict, context_totals: dict, vocab: frozenset):
        self.n = n
        self.k = k
        self._counts = counts
        self._context_totals = context_totals
        self._vocab = vocab

    @property
    def vocab(self) -> frozenset:
        return self._vocab

    @property
    def identity(self) -> str:
        return f"builtin-ngram(n={self.n},k={self.k},vocab={len(self._vocab)})"

    def prob(self, context: tuple, symbol: str) -> float:
        ctx_counts = self._counts.get(context)
        count = ctx_counts.get(symbol, 0) if ctx_counts else 0
        total = self._context_totals.get(context, 0)
        return (count + self.k) / (total + self.k * len(self._vocab))

    def score(self, text: str) -> ScoreResult:
        symbols = [s if s in self._vocab else UNK for s in text]
        stream = _padded(symbols, self.n)
        logprob = 0.0
        for i in range(self.n - 1, len(stream)):
            context = tuple(stream[i - self.n + 1 : i])
            logprob += math.log(self.prob(context, stream[i]))
        return ScoreResult.from_logprob(logprob, len(text) + 1)

    def score_batch(self, texts: Sequence[str]) -> list[ScoreResult | ScoreFailure]:
        return [self.score(t) for t in texts]

    def save(self, path) -> None:
        entries = sorted(
            (list(ctx), dict(sorted(ctr.items()))) for ctx, ctr in self._counts.items()
        )
        write_json(
            path,
            {
                "format": NGRAM_FORMAT,
                "n": self.n,
                "k": self.k,
                "vocab": sorted(self._vocab),
                "counts": entries,
            },
        )

    @classmethod
    def load(cls, path) -> "CharNGramModel":
        obj = read_json(path)
        if obj.get("format") != NGRAM_FORMAT:
            raise DataError(f"{path}: not a {NGRAM_FORMAT} file")
        counts = {tuple(ctx): Counter(ctr) for ctx, ctr in obj["counts"]}
        totals = {ctx: sum(ctr.values()) for ctx, ctr in counts.items()}
        return cls(
            n=int(obj["n"]),
            k=float(obj["k"]),
            counts=counts,
            context_totals=totals,
            vocab=frozenset(obj["vocab"]),
        )


def train_ngram(corpus: Iterable, n: int, k: float) -> CharNGramModel:
    """Count code-point n-grams over the corpus (Documents or raw strings);
    each text ends with one EOS event and is padded with BOS contexts."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    if k <= 0:
        raise ConfigError("k must be > 0")
    counts: dict[tuple, Counter] = {}
    totals: dict[tuple, int] = {}
    vocab: set[str] = {EOS, UNK}
    n_texts = 0
    for item in corpus:
        text = item.text if hasattr(item, "text") else item
        n_texts += 1
        stream = _padded(list(text), n)
        vocab.update(stream)
        for i in range(n - 1, len(stream)):
            context = tuple(stream[i - n + 1 : i])
            ctr = counts.get(context)
            if ctr is None:
                ctr = counts[context] = Counter()
            ctr[stream[i]] += 1
            totals[context] = totals.get(context, 0) + 1
    if n_texts == 0:
        raise DataError("cannot train an n-gram model on an empty corpus")
    return CharNGramModel(n=n, k=k, counts=counts, context_totals=totals, vocab=frozenset(vocab))


def ngram_score(model: CharNGramModel, text: str) -> ScoreResult:
    return model.score(text)


class ExternalScorer:
    """Client for a ``scorer/1`` server over stdio or HTTP.

    score_batch returns one entry per input text, input-ordered regardless
    of response arrival order; failed items come back as ScoreFailure
    values rather than aborting the batch.
    """

    def __init__(
        self,
        command: list[str] | None = None,
        url: str | None = None,
        identity: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        if bool(command) == bool(url):
            raise ConfigError("external scorer needs exactly one of command or url")
        self.command = list(command) if command else None
        self.url = url
        self.timeout = timeout
        self.identity = identity or f"external:{' '.join(self.command) if self.command else self.url}"

    def score_batch(self, texts: Sequence[str]) -> list[ScoreResult | ScoreFailure]:
        for t in texts:
            if len(t) > MAX_TEXT_CODEPOINTS:
                raise DataError(
                    f"text of {len(t)} code points exceeds the protocol cap of {MAX_TEXT_CODEPOINTS}"
                )
        requests = [{"id": f"q{i:06d}", "text": t} for i, t in enumerate(texts)]
        if self.command:
            responses = stdio_exchange(self.command, SCORER_PROTOCOL, requests, self.timeout)
        else:
            responses = http_exchange(self.url, SCORER_PROTOCOL, requests, self.timeout)
        out: list[ScoreResult | ScoreFailure] = []
        for req in requests:
            rid = req["id"]
            resp = responses.get(rid)
            if resp is None:
                out.append(ScoreFailure(rid, "no response before timeout"))
                continue
            if "error" in resp:
                out.append(ScoreFailure(rid, f"server error: {resp['error']}"))
                continue
            logprob = resp.get("logprob")
            tokens = resp.get("tokens")
            if not isinstance(logprob, (int, float)) or not math.isfinite(logprob):
                out.append(ScoreFailure(rid, f"non-finite or missing logprob: {logprob!r}"))
                continue
            if not isinstance(tokens, int) or tokens < 1:
                out.append(ScoreFailure(rid, f"invalid token count: {tokens!r}"))
                continue
            try:
                out.append(ScoreResult.from_logprob(float(logprob), tokens))
            except DataError as exc:
                out.append(ScoreFailure(rid, str(exc)))
        return out

    def score(self, text: str) -> ScoreResult:
        result = self.score_batch([text])[0]
        if isinstance(result, ScoreFailure):
            raise result
        return result


def external_score(scorer: ExternalScorer, texts: Sequence[str]) -> list[ScoreResult | ScoreFailure]:
    return scorer.score_batch(texts)
