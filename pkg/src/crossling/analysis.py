"""Occurrence counting, cultural-density reports, and transfer-instance
classification.

The headline density normalizes total entailed occurrences by question
count times corpus document count, so cultures with different question
counts stay comparable; the raw per-document and per-chunk variants are
kept alongside so any normalization can be recomputed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Iterable, Sequence

from .corpus import CorpusManifest
from .errors import DataError
from .io import require_fields
from .retrieval import Judgment, RetrievalHit

DIRECTION_XX_TO_EN = "xx_to_en"
DIRECTION_EN_TO_XX = "en_to_xx"


def fmt_sci(x: float, digits: int = 3) -> str:
    """Scientific notation with ``digits`` significant digits and no
    zero-padded exponent: 9.19e-6, 3.00e-6, 0."""
    if x == 0:
        return "0"
    mantissa, exponent = f"{x:.{digits - 1}e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def fmt_mean(value: Fraction | None) -> str | None:
    """Exact rational mean rendered to one decimal (banker's rounding)."""
    if value is None:
        return None
    dec = Decimal(value.numerator) / Decimal(value.denominator)
    return str(dec.quantize(Decimal("0.1"), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class OccurrenceRecord:
    question_id: str
    corpus_label: str
    entailed_count: int
    k: int

    def __post_init__(self):
        if not 0 <= self.entailed_count <= self.k:
            raise DataError(
                f"{self.question_id}: entailed_count {self.entailed_count} outside [0, {self.k}]"
            )

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "corpus_label": self.corpus_label,
            "entailed_count": self.entailed_count,
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, d: dict, where: str = "occurrence") -> "OccurrenceRecord":
        require_fields(d, ("question_id", "corpus_label", "entailed_count", "k"), where)
        return cls(
            question_id=str(d["question_id"]),
            corpus_label=str(d["corpus_label"]),
            entailed_count=int(d["entailed_count"]),
            k=int(d["k"]),
        )


def occurrence_count(
    question_id: str,
    hits: Sequence[RetrievalHit],
    judgments: Iterable[Judgment],
    corpus_label: str,
    k: int = 50,
) -> OccurrenceRecord:
    """Count entailing chunks among the top-k hits; every hit must have a
    judgment."""
    if len(hits) > k:
        raise DataError(f"{question_id}: {len(hits)} hits exceed retrieval depth {k}")
    by_chunk = {j.chunk_id: j for j in judgments if j.question_id == question_id}
    missing = [h.chunk_id for h in hits if h.chunk_id not in by_chunk]
    if missing:
        raise DataError(f"{question_id}: missing judgments for chunks {missing}")
    count = sum(1 for h in hits if by_chunk[h.chunk_id].entails)
    return OccurrenceRecord(question_id=question_id, corpus_label=corpus_label, entailed_count=count, k=k)


@dataclass
class DensityReport:
    culture: str
    corpus_label: str
    question_count: int
    total_entailed: int
    doc_count: int
    chunk_count: int
    density: float               # total / (questions * docs)
    density_per_doc_raw: float   # total / docs
    density_per_chunk: float | None  # total / (questions * chunks)

    def to_dict(self) -> dict:
        return {
            "culture": self.culture,
            "corpus_label": self.corpus_label,
            "question_count": self.question_count,
            "total_entailed": self.total_entailed,
            "doc_count": self.doc_count,
            "chunk_count": self.chunk_count,
            "density": self.density,
            "density_rendered": fmt_sci(self.density),
            "density_per_doc_raw": self.density_per_doc_raw,
            "density_per_chunk": self.density_per_chunk,
        }


def density_report(
    culture: str, records: Sequence[OccurrenceRecord], manifest: CorpusManifest
) -> DensityReport:
    if not records:
        raise DataError("density needs at least one occurrence record")
    labels = {r.corpus_label for r in records}
    if len(labels) != 1:
        raise DataError(f"records span multiple corpora: {sorted(labels)}")
    if labels != {manifest.label}:
        raise DataError(f"records are for {labels.pop()!r}, manifest is {manifest.label!r}")
    if manifest.doc_count < 1:
        raise DataError("corpus manifest reports zero documents")
    total = sum(r.entailed_count for r in records)
    n_q = len(records)
    return DensityReport(
        culture=culture,
        corpus_label=manifest.label,
        question_count=n_q,
        total_entailed=total,
        doc_count=manifest.doc_count,
        chunk_count=manifest.chunk_count,
        density=total / (n_q * manifest.doc_count),
        density_per_doc_raw=total / manifest.doc_count,
        density_per_chunk=(total / (n_q * manifest.chunk_count)) if manifest.chunk_count else None,
    )


@dataclass(frozen=True)
class CheckpointHistory:
    """Per-pair correctness over the checkpoint grid, step 0 included.

    Series are (step, correct) sequences for the four (setting, lang)
    combinations. Step 0 is the shared base model, so the en series of
    both settings must agree there.
    """

    pair_id: str
    bridge_en: tuple
    bridge_xx: tuple
    no_bridge_en: tuple
    no_bridge_xx: tuple

    def _series(self, setting: str, lang_is_en: bool) -> tuple:
        if setting == "bridge":
            return self.bridge_en if lang_is_en else self.bridge_xx
        return self.no_bridge_en if lang_is_en else self.no_bridge_xx

    def validate(self) -> None:
        for name in ("bridge_en", "bridge_xx", "no_bridge_en", "no_bridge_xx"):
            series = getattr(self, name)
            steps = [s for s, _ in series]
            if any(b <= a for a, b in zip(steps, steps[1:])):
                raise DataError(f"{self.pair_id}: {name} steps must be strictly increasing")
        be0 = dict(self.bridge_en).get(0)
        ne0 = dict(self.no_bridge_en).get(0)
        if be0 is None or ne0 is None:
            raise DataError(f"{self.pair_id}: both settings need a step-0 en checkpoint")
        if be0 != ne0:
            raise DataError(
                f"{self.pair_id}: step-0 en correctness differs between settings; "
                "step 0 is the shared base model"
            )


def _last_ct(series: tuple, count: int, pair_id: str, name: str) -> list[bool]:
    ct = [(s, v) for s, v in series if s > 0]
    if len(ct) < count:
        raise DataError(f"{pair_id}: {name} has {len(ct)} CT checkpoints, needs {count}")
    return [v for _, v in sorted(ct)[-count:]]


@dataclass(frozen=True)
class TransferRecord:
    pair_id: str
    direction: str
    conditions: tuple  # the three predicate values, all true by construction

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "direction": self.direction,
            "conditions": list(self.conditions),
        }


def classify_transfer(history: CheckpointHistory) -> TransferRecord | None:
    """Strict three-condition classification of a transferred instance.

    xx_to_en: en wrong at step 0, xx correct at all of the last three
    no-bridge CT checkpoints, en correct at all of the last three bridge
    CT checkpoints. en_to_xx mirrors with en correct at step 0, xx wrong
    under no-bridge, xx correct under bridge. The step-0 clauses are
    contradictory, so no pair can earn both directions.
    """
    history.validate()
    en_step0 = dict(history.bridge_en)[0]

    nb_xx_last3 = _last_ct(history.no_bridge_xx, 3, history.pair_id, "no_bridge_xx")
    b_en_last3 = _last_ct(history.bridge_en, 3, history.pair_id, "bridge_en")
    b_xx_last3 = _last_ct(history.bridge_xx, 3, history.pair_id, "bridge_xx")

    to_en = (not en_step0, all(nb_xx_last3), all(b_en_last3))
    to_xx = (en_step0, all(not v for v in nb_xx_last3), all(b_xx_last3))
    assert not (all(to_en) and all(to_xx)), "step-0 clauses cannot both hold"
    if all(to_en):
        return TransferRecord(history.pair_id, DIRECTION_XX_TO_EN, to_en)
    if all(to_xx):
        return TransferRecord(history.pair_id, DIRECTION_EN_TO_XX, to_xx)
    return None


def occurrence_contrast(transferred: set, records: Sequence[OccurrenceRecord]) -> dict:
    """Mean entailed counts over the transferred subset versus all records,
    per corpus; means are exact rationals rendered to one decimal, absent
    (not zero) when the subset is empty."""
    known = {r.question_id for r in records}
    unknown = transferred - known
    if unknown:
        raise DataError(f"transferred ids not present in records: {sorted(unknown)[:5]}")
    out: dict[str, dict] = {}
    for label in sorted({r.corpus_label for r in records}):
        rows = [r for r in records if r.corpus_label == label]
        sub = [r for r in rows if r.question_id in transferred]
        overall = Fraction(sum(r.entailed_count for r in rows), len(rows))
        transferred_mean = (
            Fraction(sum(r.entailed_count for r in sub), len(sub)) if sub else None
        )
        out[label] = {
            "record_count": len(rows),
            "transferred_count": len(sub),
            "overall_mean": fmt_mean(overall),
            "overall_mean_exact": [overall.numerator, overall.denominator],
            "transferred_mean": fmt_mean(transferred_mean),
            "transferred_mean_exact": (
                [transferred_mean.numerator, transferred_mean.denominator]
                if transferred_mean is not None
                else None
            ),
        }
    return out
