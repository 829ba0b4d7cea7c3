"""Continual-pretraining dataset construction.

Two settings over the same parallel data: ``bridged`` concatenates each
aligned pair through a template into one document, ``unbridged`` explodes
the halves into independent documents. Either stream is then mixed with
monolingual data under a character-budget plan and a seeded permutation,
so (inputs, seed, mode) fully determine the output bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .corpus import Document, classify_script
from .errors import ConfigError, DataError
from .io import read_ndjson, require_fields
from .rng import SHUFFLE_ALGORITHM, shuffled

MODE_BRIDGED = "bridged"
MODE_UNBRIDGED = "unbridged"

_EN_SLOT = "{en}"
_XX_SLOT = "{xx}"


@dataclass(frozen=True)
class ParallelPair:
    id: str
    en_text: str
    xx_text: str
    lang: str

    def to_dict(self) -> dict:
        return {"id": self.id, "en_text": self.en_text, "xx_text": self.xx_text, "lang": self.lang}

    @classmethod
    def from_dict(cls, d: dict, where: str = "pair") -> "ParallelPair":
        require_fields(d, ("id", "en_text", "xx_text", "lang"), where)
        return cls(
            id=str(d["id"]),
            en_text=str(d["en_text"]),
            xx_text=str(d["xx_text"]),
            lang=str(d["lang"]),
        )


@dataclass(frozen=True)
class BridgeTemplate:
    """Concatenation pattern with an {en} slot followed by an {xx} slot."""

    lang: str
    pattern: str
    display_name: str = ""

    def validate(self) -> None:
        for slot in (_EN_SLOT, _XX_SLOT):
            if self.pattern.count(slot) != 1:
                raise ConfigError(f"template for {self.lang!r} must contain {slot} exactly once")
        if self.pattern.index(_EN_SLOT) > self.pattern.index(_XX_SLOT):
            raise ConfigError(f"template for {self.lang!r} must place {_EN_SLOT} before {_XX_SLOT}")

    def parts(self) -> tuple[str, str, str]:
        """Literal (prefix, infix, suffix) around the two slots."""
        self.validate()
        i = self.pattern.index(_EN_SLOT)
        j = self.pattern.index(_XX_SLOT)
        return self.pattern[:i], self.pattern[i + len(_EN_SLOT) : j], self.pattern[j + len(_XX_SLOT) :]


# The zh pattern is the reference instance; the other languages extend the
# same family with English display names.
DEFAULT_TEMPLATES = {
    "zh": BridgeTemplate("zh", "English: {en} Chinese: {xx}", "Chinese"),
    "ko": BridgeTemplate("ko", "English: {en} Korean: {xx}", "Korean"),
    "bo": BridgeTemplate("bo", "English: {en} Tibetan: {xx}", "Tibetan"),
    "mn": BridgeTemplate("mn", "English: {en} Mongolian: {xx}", "Mongolian"),
}


@dataclass(frozen=True)
class MixPlan:
    mono_char_budget: int
    parallel_char_budget: int
    ratio: tuple[int, int] = (1, 1)
    seed: int = 0

    def validate(self) -> None:
        if self.mono_char_budget <= 0 or self.parallel_char_budget <= 0:
            raise ConfigError("mix budgets must be positive")
        if len(self.ratio) != 2 or min(self.ratio) <= 0:
            raise ConfigError("ratio must be a pair of positive integers")

    def ratio_str(self) -> str:
        return f"{self.ratio[0]}:{self.ratio[1]}"


def validate_pairs(pairs: Iterable[ParallelPair]) -> list[ParallelPair]:
    """Enforce pair invariants: non-empty halves, en side free of non-Latin
    scripts, xx side free of Latin script."""
    out = []
    bad: list[str] = []
    for p in pairs:
        if not p.en_text or not p.xx_text:
            bad.append(f"{p.id} (empty half)")
            continue
        en_prof = classify_script(p.en_text)
        if en_prof.total() - en_prof.latin - en_prof.common > 0:
            bad.append(f"{p.id} (non-Latin in en_text)")
            continue
        if classify_script(p.xx_text).latin > 0:
            bad.append(f"{p.id} (Latin in xx_text)")
            continue
        out.append(p)
    if bad:
        shown = ", ".join(bad[:5])
        raise DataError(f"{len(bad)} invalid parallel pairs, e.g. {shown}")
    return out


def render_bridge(pair: ParallelPair, template: BridgeTemplate) -> Document:
    """One bridge document per pair, slots substituted verbatim."""
    template.validate()
    if template.lang != pair.lang:
        raise ConfigError(f"template lang {template.lang!r} != pair lang {pair.lang!r}")
    if not pair.en_text or not pair.xx_text:
        raise DataError(f"pair {pair.id!r} has an empty half")
    prefix, infix, suffix = template.parts()
    text = prefix + pair.en_text + infix + pair.xx_text + suffix
    return Document(id=f"bridge:{pair.id}", lang=pair.lang, text=text, source="bridge")


def strip_bridge(text: str, template: BridgeTemplate) -> tuple[str, str]:
    """Recover (en_text, xx_text) from a rendered bridge document.

    The infix contains Latin letters and the xx half contains none, so the
    rightmost infix occurrence is the true boundary.
    """
    prefix, infix, suffix = template.parts()
    if not text.startswith(prefix) or (suffix and not text.endswith(suffix)):
        raise DataError("text does not match bridge template")
    body = text[len(prefix) : len(text) - len(suffix) if suffix else len(text)]
    k = body.rfind(infix)
    if k < 0:
        raise DataError("text does not match bridge template")
    return body[:k], body[k + len(infix) :]


def bridge_pattern_regex(template: BridgeTemplate) -> re.Pattern:
    prefix, infix, suffix = template.parts()
    return re.compile(re.escape(prefix) + ".*" + re.escape(infix) + ".*" + re.escape(suffix), re.S)


def explode_pairs(pairs: Iterable[ParallelPair]) -> list[Document]:
    """Emit each half as its own document, no template text added."""
    out: list[Document] = []
    for p in pairs:
        out.append(Document(id=f"half:en:{p.id}", lang="en", text=p.en_text, source="parallel"))
        out.append(Document(id=f"half:xx:{p.id}", lang=p.lang, text=p.xx_text, source="parallel"))
    return out


def _select_by_budget(docs: list[Document], budget: int, side: str) -> tuple[list[Document], int]:
    ordered = sorted(docs, key=lambda d: d.id)
    picked: list[Document] = []
    total = 0
    for d in ordered:
        if total >= budget:
            break
        picked.append(d)
        total += len(d.text)
    if total < budget:
        raise DataError(f"insufficient {side} data: {total} chars available, budget {budget}")
    return picked, total


def mix_datasets(
    mono: list[Document], parallel_docs: list[Document], plan: MixPlan
) -> list[Document]:
    """Budgeted selection in canonical id order per side, then one seeded
    Fisher-Yates permutation over the union."""
    plan.validate()
    if not mono or not parallel_docs:
        raise DataError("both mono and parallel inputs must be non-empty")
    mono_sel, mono_chars = _select_by_budget(mono, plan.mono_char_budget, "mono")
    par_sel, par_chars = _select_by_budget(parallel_docs, plan.parallel_char_budget, "parallel")
    target = plan.ratio[0] / (plan.ratio[0] + plan.ratio[1])
    realized = mono_chars / (mono_chars + par_chars)
    if abs(realized - target) > 0.02:
        raise DataError(
            f"realized mono:parallel character split {realized:.4f} deviates from "
            f"ratio {plan.ratio_str()} by more than 2%"
        )
    return shuffled(mono_sel + par_sel, plan.seed)


def build_setting(
    pairs: list[ParallelPair],
    mono: list[Document],
    mode: str,
    template: BridgeTemplate | None,
    plan: MixPlan,
) -> tuple[list[Document], dict]:
    """Assemble one continual-pretraining dataset and its manifest."""
    if mode == MODE_BRIDGED:
        if template is None:
            raise ConfigError("bridged mode requires a template")
        parallel_docs = [render_bridge(p, template) for p in pairs]
    elif mode == MODE_UNBRIDGED:
        parallel_docs = explode_pairs(pairs)
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    docs = mix_datasets(mono, parallel_docs, plan)
    par_ids = {d.id for d in parallel_docs}
    par_chars = sum(len(d.text) for d in docs if d.id in par_ids)
    mono_chars = sum(len(d.text) for d in docs if d.id not in par_ids)
    manifest = {
        "mode": mode,
        "seed": plan.seed,
        "ratio": plan.ratio_str(),
        "mono_char_budget": plan.mono_char_budget,
        "parallel_char_budget": plan.parallel_char_budget,
        "doc_count": len(docs),
        "mono_docs": sum(1 for d in docs if d.id not in par_ids),
        "parallel_docs": sum(1 for d in docs if d.id in par_ids),
        "mono_chars": mono_chars,
        "parallel_chars": par_chars,
        "shuffle": SHUFFLE_ALGORITHM,
        "template": template.pattern if (template and mode == MODE_BRIDGED) else None,
    }
    return docs, manifest


def read_pairs(path) -> Iterator[ParallelPair]:
    for lineno, obj in read_ndjson(path):
        yield ParallelPair.from_dict(obj, where=f"{path}:{lineno}")
