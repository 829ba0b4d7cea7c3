"""Cloze-question evaluation and curve post-processing.

A prediction is the candidate whose filled-in statement has the lowest
perplexity under the scorer, ties going to the lowest candidate index.
Accuracy curves over checkpoints are smoothed for display only; the
transfer gap is always computed on unsmoothed values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import ConfigError, DataError
from .io import canonical_json, read_ndjson, require_fields
from .rng import SplitMix64, sample
from .scoring import ScoreFailure

BLANK = "____"

ENTITY_ATTRIBUTES = ("nationality", "date_of_birth", "place_of_birth", "occupation", "education")

DEFAULT_ENTITY_TEMPLATES = {
    "en": {
        "nationality": "The nationality of {person} is ____.",
        "date_of_birth": "{person} was born on ____.",
        "place_of_birth": "{person} was born in ____.",
        "occupation": "{person} worked as ____.",
        "education": "{person} was educated at ____.",
    },
    "zh": {
        "nationality": "{person}的国籍是____。",
        "date_of_birth": "{person}出生于____。",
        "place_of_birth": "{person}出生在____。",
        "occupation": "{person}的职业是____。",
        "education": "{person}毕业于____。",
    },
}


@dataclass(frozen=True)
class ClozeQuestion:
    id: str
    pair_id: str
    culture: str
    lang: str
    text: str
    candidates: tuple[str, str, str, str]
    gold_index: int

    def validate(self) -> None:
        if self.text.count(BLANK) != 1:
            raise DataError(f"question {self.id!r}: expected exactly one {BLANK!r} marker")
        if len(self.candidates) != 4 or any(not c for c in self.candidates):
            raise DataError(f"question {self.id!r}: needs 4 non-empty candidates")
        if self.gold_index not in (0, 1, 2, 3):
            raise DataError(f"question {self.id!r}: gold_index out of range")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "pair_id": self.pair_id,
            "culture": self.culture,
            "lang": self.lang,
            "text": self.text,
            "candidates": list(self.candidates),
            "gold_index": self.gold_index,
        }

    @classmethod
    def from_dict(cls, d: dict, where: str = "question") -> "ClozeQuestion":
        require_fields(d, ("id", "pair_id", "lang", "text", "candidates", "gold_index"), where)
        q = cls(
            id=str(d["id"]),
            pair_id=str(d["pair_id"]),
            culture=str(d.get("culture", "")),
            lang=str(d["lang"]),
            text=str(d["text"]),
            candidates=tuple(str(c) for c in d["candidates"]),
            gold_index=int(d["gold_index"]),
        )
        q.validate()
        return q


def instantiate(question: ClozeQuestion, candidate_index: int) -> str:
    """Replace the blank with the candidate, verbatim, single pass."""
    if question.text.count(BLANK) != 1:
        raise DataError(f"question {question.id!r}: expected exactly one {BLANK!r} marker")
    if not 0 <= candidate_index < len(question.candidates):
        raise DataError(f"question {question.id!r}: candidate index {candidate_index} out of range")
    return question.text.replace(BLANK, question.candidates[candidate_index], 1)


class Unevaluable(Exception):
    """A question whose candidates could not all be scored."""


def _score_candidates(question: ClozeQuestion, scorer) -> tuple[float, float, float, float]:
    results = scorer.score_batch([instantiate(question, i) for i in range(4)])
    perplexities = []
    for res in results:
        if isinstance(res, ScoreFailure):
            raise Unevaluable(f"question {question.id!r}: {res.reason}")
        perplexities.append(res.perplexity)
    return tuple(perplexities)


def _argmin(values: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] < values[best]:
            best = i
    return best


def predict(question: ClozeQuestion, scorer) -> int:
    """Index of the lowest-perplexity candidate (lowest index wins ties)."""
    return _argmin(_score_candidates(question, scorer))


@dataclass(frozen=True)
class QuestionResult:
    question_id: str
    pair_id: str
    gold_index: int
    predicted: int | None
    correct: bool | None
    perplexities: tuple | None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "pair_id": self.pair_id,
            "gold_index": self.gold_index,
            "predicted": self.predicted,
            "correct": self.correct,
            "perplexities": list(self.perplexities) if self.perplexities else None,
            "error": self.error,
        }


@dataclass
class EvalRun:
    setting: str
    lang: str
    step: int
    scorer_identity: str
    total: int
    evaluated: int
    unevaluable: int
    correct_count: int
    accuracy: float
    results: tuple

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "lang": self.lang,
            "step": self.step,
            "scorer": self.scorer_identity,
            "total": self.total,
            "evaluated": self.evaluated,
            "unevaluable": self.unevaluable,
            "correct_count": self.correct_count,
            "accuracy": self.accuracy,
            "results": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRun":
        require_fields(d, ("setting", "lang", "step", "results"), "eval run")
        results = tuple(
            QuestionResult(
                question_id=str(r["question_id"]),
                pair_id=str(r["pair_id"]),
                gold_index=int(r["gold_index"]),
                predicted=r.get("predicted"),
                correct=r.get("correct"),
                perplexities=tuple(r["perplexities"]) if r.get("perplexities") else None,
                error=r.get("error"),
            )
            for r in d["results"]
        )
        return cls(
            setting=str(d["setting"]),
            lang=str(d["lang"]),
            step=int(d["step"]),
            scorer_identity=str(d.get("scorer", "")),
            total=int(d["total"]),
            evaluated=int(d["evaluated"]),
            unevaluable=int(d["unevaluable"]),
            correct_count=int(d["correct_count"]),
            accuracy=float(d["accuracy"]),
            results=results,
        )


def evaluate(questions: Sequence[ClozeQuestion], scorer, setting: str, step: int) -> EvalRun:
    """Score every question; unevaluable ones are excluded from both the
    numerator and denominator but reported in the run."""
    if not questions:
        raise DataError("cannot evaluate an empty question set")
    langs = {q.lang for q in questions}
    if len(langs) != 1:
        raise DataError(f"questions must share one lang, got {sorted(langs)}")
    ordered = sorted(questions, key=lambda q: q.id)
    results: list[QuestionResult] = []
    correct_count = 0
    unevaluable = 0
    for q in ordered:
        q.validate()
        try:
            ppl = _score_candidates(q, scorer)
        except Unevaluable as exc:
            unevaluable += 1
            results.append(
                QuestionResult(q.id, q.pair_id, q.gold_index, None, None, None, str(exc))
            )
            continue
        predicted = _argmin(ppl)
        correct = predicted == q.gold_index
        correct_count += int(correct)
        results.append(QuestionResult(q.id, q.pair_id, q.gold_index, predicted, correct, ppl))
    evaluated = len(ordered) - unevaluable
    if evaluated == 0:
        raise DataError("all questions were unevaluable")
    return EvalRun(
        setting=setting,
        lang=langs.pop(),
        step=step,
        scorer_identity=getattr(scorer, "identity", "unknown"),
        total=len(ordered),
        evaluated=evaluated,
        unevaluable=unevaluable,
        correct_count=correct_count,
        accuracy=correct_count / evaluated,
        results=tuple(results),
    )


@dataclass(frozen=True)
class CurveSeries:
    steps: tuple
    values: tuple

    def __post_init__(self):
        if len(self.steps) != len(self.values):
            raise DataError("steps and values must have equal length")
        if any(b <= a for a, b in zip(self.steps, self.steps[1:])):
            raise DataError("steps must be strictly increasing")

    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.steps, self.values))


def accuracy_curve(runs: Iterable[EvalRun]) -> CurveSeries:
    """Accuracy-vs-step series from runs sharing (setting, lang)."""
    runs = list(runs)
    if not runs:
        raise DataError("no runs given")
    keys = {(r.setting, r.lang) for r in runs}
    if len(keys) != 1:
        raise DataError(f"runs must share setting and lang, got {sorted(keys)}")
    by_step: dict[int, float] = {}
    for r in runs:
        if r.step in by_step:
            raise DataError(f"duplicate step {r.step} for {keys}")
        by_step[r.step] = r.accuracy
    steps = tuple(sorted(by_step))
    return CurveSeries(steps=steps, values=tuple(by_step[s] for s in steps))


def ema_smooth(series: CurveSeries, weight: float = 0.8) -> CurveSeries:
    """s_0 = x_0; s_t = weight * s_{t-1} + (1 - weight) * x_t."""
    if not 0 <= weight < 1:
        raise ConfigError(f"EMA weight must be in [0, 1), got {weight}")
    if not series.steps:
        raise DataError("cannot smooth an empty series")
    smoothed = [series.values[0]]
    for x in series.values[1:]:
        smoothed.append(weight * smoothed[-1] + (1 - weight) * x)
    return CurveSeries(steps=series.steps, values=tuple(smoothed))


def transfer_gap(bridge: CurveSeries, no_bridge: CurveSeries) -> CurveSeries:
    """Pointwise bridge minus no_bridge on the common step grid, unsmoothed."""
    common = sorted(set(bridge.steps) & set(no_bridge.steps))
    if not common:
        raise DataError("series share no checkpoint steps")
    if len(common) != len(bridge.steps) or len(common) != len(no_bridge.steps):
        warnings.warn(
            f"step grids differ; gap computed on {len(common)} common steps",
            stacklevel=2,
        )
    b = dict(zip(bridge.steps, bridge.values))
    n = dict(zip(no_bridge.steps, no_bridge.values))
    return CurveSeries(steps=tuple(common), values=tuple(b[s] - n[s] for s in common))


@dataclass(frozen=True)
class EntityRecord:
    name: str
    attributes: dict

    def validate(self) -> None:
        if not self.name:
            raise DataError("entity record needs a non-empty name")
        known = {k: v for k, v in self.attributes.items() if k in ENTITY_ATTRIBUTES and v}
        if not known:
            raise DataError(f"entity {self.name!r}: needs at least one known attribute")

    @classmethod
    def from_dict(cls, d: dict, where: str = "entity") -> "EntityRecord":
        require_fields(d, ("name", "attributes"), where)
        rec = cls(name=str(d["name"]), attributes=dict(d["attributes"]))
        rec.validate()
        return rec


def _validate_entity_template(lang: str, attr: str, pattern: str) -> None:
    if pattern.count("{person}") != 1 or pattern.count(BLANK) != 1:
        raise ConfigError(
            f"entity template ({lang}, {attr}) must contain one {{person}} and one {BLANK!r}"
        )


def render_entity_questions(
    records: Sequence[EntityRecord],
    templates: dict,
    pool: dict,
    seed: int,
    culture: str = "anglo",
) -> list[ClozeQuestion]:
    """One question per (record, attribute) and language; the gold value
    plus three seeded distractors drawn without replacement from the
    same-attribute pool. Names and values keep their original forms.

    Attributes whose pool has fewer than three usable distractors are
    skipped with a warning.
    """
    rng = SplitMix64(seed)
    questions: list[ClozeQuestion] = []
    langs = sorted(templates)
    for lang in langs:
        for attr, pattern in templates[lang].items():
            _validate_entity_template(lang, attr, pattern)
    usable: dict[str, list[str]] = {}
    for attr in ENTITY_ATTRIBUTES:
        values = sorted(set(pool.get(attr, ())))
        if values and len(values) < 4:
            warnings.warn(
                f"attribute {attr!r}: pool of {len(values)} values is too small, skipping",
                stacklevel=2,
            )
        elif values:
            usable[attr] = values
    for record in sorted(records, key=lambda r: r.name):
        record.validate()
        for attr in ENTITY_ATTRIBUTES:
            gold = record.attributes.get(attr)
            if not gold or attr not in usable:
                continue
            distractor_pool = [v for v in usable[attr] if v != gold]
            if len(distractor_pool) < 3:
                warnings.warn(
                    f"attribute {attr!r}: only {len(distractor_pool)} distractors for "
                    f"{record.name!r}, skipping",
                    stacklevel=2,
                )
                continue
            distractors = sample(distractor_pool, 3, rng)
            candidates = [gold] + distractors
            # in-place Fisher-Yates so gold position is seeded too
            for i in range(len(candidates) - 1, 0, -1):
                j = rng.below(i + 1)
                candidates[i], candidates[j] = candidates[j], candidates[i]
            gold_index = candidates.index(gold)
            for lang in langs:
                pattern = templates[lang].get(attr)
                if pattern is None:
                    continue
                questions.append(
                    ClozeQuestion(
                        id=f"{culture}:{record.name}:{attr}:{lang}",
                        pair_id=f"{record.name}:{attr}",
                        culture=culture,
                        lang=lang,
                        text=pattern.replace("{person}", record.name),
                        candidates=tuple(candidates),
                        gold_index=gold_index,
                    )
                )
    return questions


def read_questions(path) -> Iterator[ClozeQuestion]:
    for lineno, obj in read_ndjson(path):
        yield ClozeQuestion.from_dict(obj, where=f"{path}:{lineno}")


def read_entity_records(path) -> Iterator[EntityRecord]:
    for lineno, obj in read_ndjson(path):
        yield EntityRecord.from_dict(obj, where=f"{path}:{lineno}")
