"""Shared fixture generators and independent oracles.

Oracles here are deliberately naive re-implementations (dict counting,
direct probability products, score-every-chunk search) kept separate from
the package so the two sides of each check stay independent. Generators
use stdlib random.Random, not the package PRNG, for the same reason.
"""

from __future__ import annotations

import math
import random
from collections import Counter

from crossling.corpus import Chunk, Document

# ---- text generators ------------------------------------------------------

LATIN_SYLLABLES = [
    "ba", "den", "for", "gul", "han", "kit", "lom", "mer", "nor", "pel",
    "qua", "rin", "sol", "tam", "ul", "ver", "wex", "yor", "zan", "eth",
]
HAN_BANK = [chr(cp) for cp in range(0x4E00, 0x4E00 + 400)]
HANGUL_BANK = [chr(cp) for cp in range(0xAC00, 0xAC00 + 400)]
TIBETAN_BANK = [chr(cp) for cp in range(0x0F40, 0x0F68)]
MONGOLIAN_BANK = [chr(cp) for cp in range(0x1820, 0x1843)]


def latin_word(rng: random.Random) -> str:
    return "".join(rng.choice(LATIN_SYLLABLES) for _ in range(rng.randint(1, 3)))


def latin_sentence(rng: random.Random, words: int = 6) -> str:
    return " ".join(latin_word(rng) for _ in range(words)).capitalize() + "."


def han_sentence(rng: random.Random, length: int = 12) -> str:
    return "".join(rng.choice(HAN_BANK) for _ in range(length)) + "。"


def hangul_sentence(rng: random.Random, words: int = 4) -> str:
    return " ".join(
        "".join(rng.choice(HANGUL_BANK) for _ in range(rng.randint(2, 4))) for _ in range(words)
    ) + "."


def tibetan_sentence(rng: random.Random, syllables: int = 6) -> str:
    return "་".join(
        "".join(rng.choice(TIBETAN_BANK) for _ in range(rng.randint(1, 3)))
        for _ in range(syllables)
    )


def mongolian_sentence(rng: random.Random, words: int = 4) -> str:
    return " ".join(
        "".join(rng.choice(MONGOLIAN_BANK) for _ in range(rng.randint(2, 5))) for _ in range(words)
    )


_SCRIPT_SENTENCES = {
    "latin": latin_sentence,
    "han": han_sentence,
    "hangul": hangul_sentence,
    "tibetan": tibetan_sentence,
    "mongolian": mongolian_sentence,
}


def mixed_corpus(n_docs: int, seed: int = 11) -> list[Document]:
    """Documents mixing all five studied scripts plus common characters."""
    rng = random.Random(seed)
    scripts = list(_SCRIPT_SENTENCES)
    docs = []
    for i in range(n_docs):
        chosen = rng.sample(scripts, rng.randint(1, 3))
        text = " ".join(_SCRIPT_SENTENCES[s](rng) for s in chosen)
        if rng.random() < 0.3:
            text += f" {rng.randint(0, 999)}"
        docs.append(Document(id=f"doc{i:05d}", lang="mul", text=text, source="fixture"))
    return docs


def mono_corpus(n_docs: int, script: str, seed: int = 7, sentences: int = 2) -> list[Document]:
    rng = random.Random(seed)
    gen = _SCRIPT_SENTENCES[script]
    return [
        Document(
            id=f"mono{i:05d}",
            lang={"latin": "en", "han": "zh"}.get(script, script),
            text=" ".join(gen(rng) for _ in range(sentences)),
            source="fixture",
        )
        for i in range(n_docs)
    ]


# ---- brute-force chunker oracle -------------------------------------------


def oracle_chunks(text: str, max_chars: int) -> list[str]:
    """Independent splitter honoring the same preference order: last
    newline in the window, else last whitespace, else hard cut."""
    if not text:
        return []
    if len(text) <= max_chars:
        return [text]
    window = text[:max_chars]
    newline_cuts = [i + 1 for i, ch in enumerate(window) if ch == "\n"]
    space_cuts = [i + 1 for i, ch in enumerate(window) if ch.isspace()]
    if newline_cuts:
        cut = newline_cuts[-1]
    elif space_cuts:
        cut = space_cuts[-1]
    else:
        cut = max_chars
    return [text[:cut]] + oracle_chunks(text[cut:], max_chars)


# ---- brute-force n-gram oracle --------------------------------------------

O_BOS, O_EOS, O_UNK = "<bos>", "<eos>", "<unk>"


class OracleNgram:
    """Naive dictionary-counting model mirroring the documented semantics."""

    def __init__(self, texts: list[str], n: int, k: float):
        self.n, self.k = n, k
        self.counts: Counter = Counter()
        self.ctx_counts: Counter = Counter()
        vocab = {O_EOS, O_UNK}
        for text in texts:
            stream = [O_BOS] * (n - 1) + list(text) + [O_EOS]
            vocab.update(stream)
            for i in range(n - 1, len(stream)):
                gram = tuple(stream[i - n + 1 : i + 1])
                self.counts[gram] += 1
                self.ctx_counts[gram[:-1]] += 1
        self.vocab = vocab

    def logprob(self, text: str) -> float:
        symbols = [c if c in self.vocab else O_UNK for c in text]
        stream = [O_BOS] * (self.n - 1) + symbols + [O_EOS]
        total = 0.0
        for i in range(self.n - 1, len(stream)):
            gram = tuple(stream[i - self.n + 1 : i + 1])
            p = (self.counts[gram] + self.k) / (
                self.ctx_counts[gram[:-1]] + self.k * len(self.vocab)
            )
            total += math.log(p)
        return total


# ---- brute-force BM25 oracle ----------------------------------------------


def oracle_bm25(
    chunks: list[Chunk], tokenize, query_terms: list[str], k: int, k1: float = 1.2, b: float = 0.75
) -> list[tuple[str, float]]:
    """Score every chunk directly, sort, truncate; zero scores excluded."""
    tokenized = {c.chunk_id: tokenize(c.text) for c in chunks}
    n = len(chunks)
    avglen = sum(len(t) for t in tokenized.values()) / n
    df = Counter()
    for terms in tokenized.values():
        for t in set(terms):
            df[t] += 1
    results = []
    for c in chunks:
        terms = tokenized[c.chunk_id]
        tf = Counter(terms)
        score = 0.0
        for q in query_terms:
            if tf[q] == 0:
                continue
            idf = math.log((n - df[q] + 0.5) / (df[q] + 0.5) + 1.0)
            score += idf * tf[q] * (k1 + 1) / (tf[q] + k1 * (1 - b + b * len(terms) / avglen))
        if score > 0.0:
            results.append((c.chunk_id, score))
    results.sort(key=lambda item: (-item[1], item[0]))
    return results[:k]


# ---- stub scorers for probing tests ----------------------------------------


class UniformStubScorer:
    """Identical result for every text: all candidates tie."""

    identity = "stub-uniform"

    def score_batch(self, texts):
        from crossling.scoring import ScoreResult

        return [ScoreResult.from_logprob(-1.0, 1) for _ in texts]


class TableStubScorer:
    """Fixed perplexity per exact text via logprob = -ln(ppl), tokens=1."""

    identity = "stub-table"

    def __init__(self, table: dict[str, float]):
        self.table = table

    def score_batch(self, texts):
        from crossling.scoring import ScoreResult

        return [ScoreResult.from_logprob(-math.log(self.table[t]), 1) for t in texts]


# ---- end-to-end experiment fixture -----------------------------------------

HAN_CLAIM_BANK = [chr(cp) for cp in range(0x5000, 0x5000 + 1200)]   # question/claim chars
HAN_FILLER_BANK = [chr(cp) for cp in range(0x6800, 0x6800 + 400)]   # disjoint filler chars
LATIN_CLAIM_SYLLABLES = ["vak", "zur", "qem", "tol", "hib", "ryn", "wex", "juf", "pol", "gam"]


def _claim_word(rng: random.Random, i: int) -> str:
    return "".join(rng.choice(LATIN_CLAIM_SYLLABLES) for _ in range(2)) + str(i)


def make_planted_questions(n_questions: int, seed: int = 101):
    """Bilingual question pairs with unique vocabularies so retrieval and
    the lexical judge behave predictably; returns (questions_en,
    questions_xx, claims) with claims[pair_id] = {"en": ..., "xx": ...}."""
    from crossling.probing import ClozeQuestion, instantiate

    rng = random.Random(seed)
    han_iter = iter(HAN_CLAIM_BANK)
    questions_en, questions_xx, claims = [], [], {}
    for i in range(n_questions):
        pair_id = f"pair{i:04d}"
        w1, w2 = _claim_word(rng, i), _claim_word(rng, i + 1000)
        gold_en = f"gold{_claim_word(rng, i)}"
        distractors_en = [f"alt{j}{_claim_word(rng, i)}" for j in range(3)]
        gold_index = i % 4
        cands_en = distractors_en[:]
        cands_en.insert(gold_index, gold_en)
        q_en = ClozeQuestion(
            id=f"q{i:04d}:en", pair_id=pair_id, culture="demo", lang="en",
            text=f"The {w1} rite of {w2} honors ____.",
            candidates=tuple(cands_en), gold_index=gold_index,
        )
        h = [next(han_iter) for _ in range(8)]
        gold_xx = h[4] + h[5]
        cands_xx = [h[5] + h[6], h[6] + h[7], h[7] + h[4]]
        cands_xx.insert(gold_index, gold_xx)
        q_xx = ClozeQuestion(
            id=f"q{i:04d}:zh", pair_id=pair_id, culture="demo", lang="zh",
            text=f"{h[0]}{h[1]}{h[2]}{h[3]}____。",
            candidates=tuple(cands_xx), gold_index=gold_index,
        )
        questions_en.append(q_en)
        questions_xx.append(q_xx)
        claims[pair_id] = {
            "en": instantiate(q_en, gold_index),
            "xx": instantiate(q_xx, gold_index),
        }
    return questions_en, questions_xx, claims


def plant_corpora(
    claims: dict,
    en_reps: int,
    xx_reps: int,
    transferred: set,
    transfer_boost: int = 2,
    n_filler_en: int = 460,
    n_filler_xx: int = 100,
    seed: int = 33,
):
    """Corpora where each claim's entailing passage is planted en_reps /
    xx_reps times (transferred pairs boosted); filler documents use
    disjoint vocabularies so they never entail a claim."""
    rng = random.Random(seed)
    en_docs, xx_docs = [], []
    for pair_id in sorted(claims):
        boost = transfer_boost if pair_id in transferred else 1
        for r in range(en_reps * boost):
            filler = latin_sentence(rng, words=4)
            en_docs.append(
                Document(id=f"en:plant:{pair_id}:{r}", lang="en",
                         text=f"{filler} {claims[pair_id]['en']}", source="plant")
            )
        for r in range(xx_reps * boost):
            filler = "".join(rng.choice(HAN_FILLER_BANK) for _ in range(6))
            xx_docs.append(
                Document(id=f"xx:plant:{pair_id}:{r}", lang="zh",
                         text=f"{filler}{claims[pair_id]['xx']}", source="plant")
            )
    for i in range(n_filler_en):
        en_docs.append(
            Document(id=f"en:fill:{i:05d}", lang="en",
                     text=latin_sentence(rng, words=10), source="fill")
        )
    for i in range(n_filler_xx):
        xx_docs.append(
            Document(id=f"xx:fill:{i:05d}", lang="zh",
                     text="".join(rng.choice(HAN_FILLER_BANK) for _ in range(30)) + "。",
                     source="fill")
        )
    return sorted(en_docs, key=lambda d: d.id), sorted(xx_docs, key=lambda d: d.id)


def build_experiment(root, n_questions=8, n_pairs=60, steps=(500, 1000, 1500), seed=7):
    """Write a full experiment fixture under ``root``: corpora, pairs,
    questions, trained scorer models, and a config file. Returns the
    config path."""
    import json
    from pathlib import Path

    from crossling.bridging import ParallelPair
    from crossling.probing import instantiate
    from crossling.scoring import train_ngram

    root = Path(root)
    inputs = root / "inputs"
    models = root / "models"
    inputs.mkdir(parents=True, exist_ok=True)
    models.mkdir(parents=True, exist_ok=True)

    rng = random.Random(seed)
    questions_en, questions_xx, claims = make_planted_questions(n_questions, seed=seed + 1)
    transferred = set(sorted(claims)[: max(1, n_questions // 4)])
    en_docs, xx_docs = plant_corpora(
        claims, en_reps=1, xx_reps=3, transferred=transferred,
        n_filler_en=60, n_filler_xx=90, seed=seed + 2,
    )
    pairs = [
        ParallelPair(
            id=f"p{i:05d}",
            en_text=latin_sentence(rng, words=rng.randint(3, 6)),
            xx_text=han_sentence(rng, length=rng.randint(8, 16)),
            lang="zh",
        )
        for i in range(n_pairs)
    ]

    def dump(path, rows):
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    dump(inputs / "en.ndjson", [d.to_dict() for d in en_docs])
    dump(inputs / "zh.ndjson", [d.to_dict() for d in xx_docs])
    dump(inputs / "pairs.ndjson", [p.to_dict() for p in pairs])
    dump(inputs / "q_en.ndjson", [q.to_dict() for q in questions_en])
    dump(inputs / "q_zh.ndjson", [q.to_dict() for q in questions_xx])

    # scorer checkpoints: base model shared at step 0; bridge models learn
    # all gold claims, no-bridge models only the xx claims
    base_texts = [d.text for d in en_docs[:30]]
    train_ngram(base_texts, n=2, k=1.0).save(models / "base.json")
    all_claims = [c["en"] for c in claims.values()] + [c["xx"] for c in claims.values()]
    xx_claims = [c["xx"] for c in claims.values()]
    handles = {"bridge": {"0": {"kind": "builtin-ngram", "model": "models/base.json"}},
               "no_bridge": {"0": {"kind": "builtin-ngram", "model": "models/base.json"}}}
    for idx, step in enumerate(steps, 1):
        bridge_model = train_ngram(base_texts[:10] + all_claims * idx, n=2, k=1.0)
        bridge_model.save(models / f"bridge{step}.json")
        handles["bridge"][str(step)] = {"kind": "builtin-ngram", "model": f"models/bridge{step}.json"}
        nb_model = train_ngram(base_texts[:10] + xx_claims * idx, n=2, k=1.0)
        nb_model.save(models / f"no_bridge{step}.json")
        handles["no_bridge"][str(step)] = {"kind": "builtin-ngram", "model": f"models/no_bridge{step}.json"}

    unbridged_total = sum(len(p.en_text) + len(p.xx_text) for p in pairs)
    # budget >> max doc length keeps the realized mix inside the 2% ratio band
    budget = max(2000, int(unbridged_total * 0.6))
    config = {
        "version": 1,
        "seed": seed,
        "lang": "zh",
        "culture": "demo",
        "script_policy": {"en_allowed": ["latin"], "xx_allowed": ["han"]},
        "corpora": {"en": "inputs/en.ndjson", "xx": "inputs/zh.ndjson"},
        "pairs": "inputs/pairs.ndjson",
        "mix_plan": {"mono_char_budget": budget, "parallel_char_budget": budget, "ratio": "1:1"},
        "questions": {"en": "inputs/q_en.ndjson", "xx": "inputs/q_zh.ndjson"},
        "scorers": handles,
        "retrieval": {"k": 50, "max_chars": 400},
        "judge": {"kind": "baseline-lexical", "threshold": 0.5},
        "output_dir": "out",
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, ensure_ascii=False, sort_keys=True, indent=2))
    return config_path
