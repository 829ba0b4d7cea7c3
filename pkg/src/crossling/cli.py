"""Command-line pipeline orchestration.

Subcommands: filter, chunk, bridge, eval, index, search, judge, density,
transfer, report. Each run writes its artifacts atomically plus a
``*.run.json`` manifest (config hash, tool version, timestamps); artifact
bytes are fully determined by the experiment config, so run manifests are
the only files that differ between identical reruns.

Exit codes: 0 success, 1 data error, 2 config error, 3 transport error.
"""

from __future__ import annotations

import argparse
import csv as _csv
import io as _io
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import (
    CheckpointHistory,
    DensityReport,
    OccurrenceRecord,
    classify_transfer,
    density_report,
    occurrence_contrast,
    occurrence_count,
)
from .bridging import (
    DEFAULT_TEMPLATES,
    BridgeTemplate,
    MixPlan,
    build_setting,
    read_pairs,
    validate_pairs,
)
from .config import ExperimentConfig, load_config
from .corpus import (
    CorpusManifest,
    chunk_corpus,
    corpus_stats,
    filter_corpus,
    read_chunks,
    read_documents,
    write_chunks,
    write_documents,
)
from .errors import ConfigError, CrosslingError, DataError, TransportError
from .io import atomic_write_text, read_json, read_ndjson, write_json, write_ndjson
from .probing import (
    EvalRun,
    accuracy_curve,
    evaluate,
    instantiate,
    read_questions,
    transfer_gap,
)
from .report import curves_csv, density_table_csv, line_chart_svg, write_text
from .retrieval import (
    InvertedIndex,
    Judgment,
    JudgmentCache,
    RetrievalHit,
    build_index,
    judge_entailment,
    search,
)

SIDES = ("en", "xx")
SETTINGS = ("bridge", "no_bridge")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class Runner:
    """Holds the loaded config and the output directory for one invocation."""

    def __init__(self, args):
        self.args = args
        self.cfg: ExperimentConfig = load_config(args.config)
        overrides = self._flag_overrides(args)
        if overrides:
            self.cfg = self.cfg.with_updates(overrides)
        out = args.out or self.cfg.raw.get("output_dir")
        if not out:
            raise ConfigError("no output directory: set output_dir in config or pass --out")
        self.out = (Path(out) if os.path.isabs(out) else Path.cwd() / out).resolve()
        self.started = _now()
        self.t0 = time.perf_counter()
        self.jobs = args.jobs or int(os.environ.get("CROSSLING_JOBS", "1"))

    @staticmethod
    def _flag_overrides(args) -> list:
        """Semantic flag overrides are folded into the config (and its
        hash); pure I/O flags like --input/--output/--out are not."""
        updates = []
        if getattr(args, "allowed", None):
            updates.append(
                (("script_policy", f"{args.side}_allowed"), args.allowed.split(","))
            )
        if getattr(args, "max_chars", None):
            updates.append((("retrieval", "max_chars"), args.max_chars))
        if getattr(args, "k", None):
            updates.append((("retrieval", "k"), args.k))
        if getattr(args, "seed", None) is not None:
            updates.append((("seed",), args.seed))
        if getattr(args, "ratio", None):
            updates.append((("mix_plan", "ratio"), args.ratio))
        if getattr(args, "template_file", None):
            template = read_json(args.template_file)
            updates.append((("bridge_template",), template))
        return updates

    def side_lang(self, side: str) -> str:
        return "en" if side == "en" else self.cfg.lang

    def write_run_manifest(self, name: str, outputs: list[Path]) -> None:
        write_json(
            self.out / f"{name}.run.json",
            {
                "tool": "crossling",
                "tool_version": __version__,
                "config_hash": self.cfg.config_hash,
                "subcommand": name.split(".")[0],
                "started": self.started,
                "finished": _now(),
                "elapsed_seconds": round(time.perf_counter() - self.t0, 3),
                "outputs": [str(p.relative_to(self.out)) for p in outputs],
            },
        )

    # ---- artifact paths ------------------------------------------------

    def filtered_path(self, side: str) -> Path:
        return self.out / "corpora" / f"{side}.filtered.ndjson"

    def corpus_manifest_path(self, side: str) -> Path:
        return self.out / "corpora" / f"{side}.manifest.json"

    def chunks_path(self, side: str) -> Path:
        return self.out / "corpora" / f"{side}.chunks.ndjson"

    def dataset_path(self, mode: str) -> Path:
        return self.out / "datasets" / f"{mode}.ndjson"

    def eval_path(self, setting: str, side: str, step: int) -> Path:
        return self.out / "eval" / f"{setting}.{side}.step{step:06d}.json"

    def index_path(self, side: str) -> Path:
        return self.out / "retrieval" / f"{side}.index.json"

    def hits_path(self, side: str) -> Path:
        return self.out / "retrieval" / f"{side}.hits.ndjson"

    def judgments_path(self, side: str) -> Path:
        return self.out / "retrieval" / f"{side}.judgments.ndjson"

    def occurrences_path(self, side: str) -> Path:
        return self.out / "analysis" / f"{side}.occurrences.ndjson"

    def write_ndjson_artifact(self, path: Path, rows) -> None:
        rows = list(rows)
        write_ndjson(path, rows)
        meta = path.with_name(path.name.removesuffix(".ndjson") + ".meta.json")
        write_json(
            meta,
            {"artifact": path.name, "config_hash": self.cfg.config_hash, "rows": len(rows)},
        )

    def load_corpus_manifest(self, side: str) -> CorpusManifest:
        path = self.corpus_manifest_path(side)
        if not path.exists():
            raise DataError(f"missing corpus manifest {path}; run `filter` first")
        return CorpusManifest.from_dict(read_json(path))

    def load_questions(self, side: str):
        questions = list(read_questions(self.cfg.path("questions", side)))
        if not questions:
            raise DataError(f"question file for side {side!r} is empty")
        expect = self.side_lang(side)
        langs = {q.lang for q in questions}
        if langs != {expect}:
            raise DataError(f"questions for side {side!r} must all have lang {expect!r}, got {sorted(langs)}")
        return questions


# ---- subcommand implementations -----------------------------------------


def cmd_filter(run: Runner) -> None:
    side = run.args.side
    source = Path(run.args.input) if run.args.input else run.cfg.path("corpora", side)
    if not source.exists():
        raise ConfigError(f"input corpus does not exist: {source}")
    allowed = run.cfg.allowed_scripts(side)
    docs = list(read_documents(source))
    kept, drops = filter_corpus(docs, allowed, jobs=run.jobs)
    drop_counts: dict[str, int] = {}
    for d in drops:
        drop_counts[d.reason] = drop_counts.get(d.reason, 0) + 1
    manifest = corpus_stats(
        kept, label=side, max_chars=run.cfg.max_chars, jobs=run.jobs, dropped=drop_counts
    )
    out_docs = Path(run.args.output) if run.args.output else run.filtered_path(side)
    out_drops = out_docs.with_name(f"{side}.drops.ndjson")
    out_manifest = run.corpus_manifest_path(side)
    write_documents(out_docs, kept)
    write_ndjson(out_drops, ({"id": d.doc_id, "reason": d.reason} for d in drops))
    write_json(out_manifest, {"config_hash": run.cfg.config_hash, **manifest.to_dict()})
    run.write_run_manifest(f"filter.{side}", [out_docs, out_drops, out_manifest])
    print(f"filter[{side}]: kept {len(kept)}, dropped {len(drops)} -> {out_docs}")


def cmd_chunk(run: Runner) -> None:
    side = run.args.side
    source = Path(run.args.input) if run.args.input else run.filtered_path(side)
    if not source.exists():
        raise DataError(f"missing filtered corpus {source}; run `filter` first")
    max_chars = run.cfg.max_chars
    chunks = chunk_corpus(read_documents(source), max_chars=max_chars)
    out_chunks = run.chunks_path(side)
    out_manifest = out_chunks.with_name(f"{side}.chunks.manifest.json")
    write_chunks(out_chunks, chunks)
    write_json(
        out_manifest,
        {
            "config_hash": run.cfg.config_hash,
            "side": side,
            "max_chars": max_chars,
            "chunk_count": len(chunks),
            "doc_count": len({c.doc_id for c in chunks}),
        },
    )
    run.write_run_manifest(f"chunk.{side}", [out_chunks, out_manifest])
    print(f"chunk[{side}]: {len(chunks)} chunks (max {max_chars} chars) -> {out_chunks}")


def _bridge_template(cfg: ExperimentConfig) -> BridgeTemplate:
    raw = cfg.raw.get("bridge_template")
    if raw:
        return BridgeTemplate(raw["lang"], raw["pattern"], raw.get("display_name", ""))
    template = DEFAULT_TEMPLATES.get(cfg.lang)
    if template is None:
        raise ConfigError(f"no default bridge template for lang {cfg.lang!r}; set bridge_template")
    return template


def cmd_bridge(run: Runner) -> None:
    mode = run.args.mode
    pairs = validate_pairs(read_pairs(run.cfg.path("pairs")))
    mono_path = run.filtered_path("xx")
    if not mono_path.exists():
        raise DataError(f"missing filtered corpus {mono_path}; run `filter --side xx` first")
    mono = list(read_documents(mono_path))
    plan_cfg = run.cfg.raw.get("mix_plan")
    if not plan_cfg:
        raise ConfigError("config is missing mix_plan")
    ratio = tuple(int(x) for x in plan_cfg.get("ratio", "1:1").split(":"))
    plan = MixPlan(
        mono_char_budget=plan_cfg["mono_char_budget"],
        parallel_char_budget=plan_cfg["parallel_char_budget"],
        ratio=ratio,
        seed=run.cfg.seed,
    )
    template = _bridge_template(run.cfg)
    docs, manifest = build_setting(pairs, mono, mode, template, plan)
    out_data = run.dataset_path(mode)
    out_manifest = out_data.with_name(f"{mode}.manifest.json")
    write_documents(out_data, docs)
    write_json(out_manifest, {"config_hash": run.cfg.config_hash, **manifest})
    run.write_run_manifest(f"bridge.{mode}", [out_data, out_manifest])
    print(f"bridge[{mode}]: {len(docs)} documents -> {out_data}")


def cmd_eval(run: Runner) -> None:
    setting, side, step = run.args.setting, run.args.side, run.args.step
    questions = run.load_questions(side)
    scorer = run.cfg.resolve_scorer(setting, step)
    eval_run = evaluate(questions, scorer, setting=setting, step=step)
    out = run.eval_path(setting, side, step)
    payload = {"config_hash": run.cfg.config_hash, "seed": run.cfg.seed, **eval_run.to_dict()}
    atomic_write_text(out, json.dumps(payload, ensure_ascii=False, sort_keys=True) + "\n")
    run.write_run_manifest(f"eval.{setting}.{side}.{step:06d}", [out])
    print(
        f"eval[{setting}/{side}@{step}]: accuracy {eval_run.accuracy:.4f} "
        f"({eval_run.correct_count}/{eval_run.evaluated}, {eval_run.unevaluable} unevaluable)"
    )


def cmd_index(run: Runner) -> None:
    side = run.args.side
    chunks_path = run.chunks_path(side)
    if not chunks_path.exists():
        raise DataError(f"missing chunks {chunks_path}; run `chunk` first")
    index = build_index(read_chunks(chunks_path), lang=run.side_lang(side))
    out = run.index_path(side)
    index.save(out, extra={"config_hash": run.cfg.config_hash})
    run.write_run_manifest(f"index.{side}", [out])
    print(f"index[{side}]: {index.n_chunks} chunks, avg len {index.avg_len:.1f} -> {out}")


def cmd_search(run: Runner) -> None:
    side = run.args.side
    k = run.cfg.retrieval_k
    index = InvertedIndex.load(run.index_path(side))
    questions = run.load_questions(side)
    rows = []
    for q in sorted(questions, key=lambda q: q.id):
        claim = instantiate(q, q.gold_index)
        for hit in search(index, claim, k=k):
            rows.append({"question_id": q.id, **hit.to_dict()})
    out = run.hits_path(side)
    run.write_ndjson_artifact(out, rows)
    run.write_run_manifest(f"search.{side}", [out])
    print(f"search[{side}]: {len(rows)} hits for {len(questions)} questions (k={k}) -> {out}")


def _load_hits(path) -> dict[str, list[RetrievalHit]]:
    hits: dict[str, list[RetrievalHit]] = {}
    for _, obj in read_ndjson(path):
        qid = str(obj["question_id"])
        hits.setdefault(qid, []).append(
            RetrievalHit(
                chunk_id=str(obj["chunk_id"]),
                doc_id=str(obj["doc_id"]),
                score=float(obj["score"]),
                rank=int(obj["rank"]),
            )
        )
    return hits


def cmd_judge(run: Runner) -> None:
    side = run.args.side
    hits_path = run.hits_path(side)
    if not hits_path.exists():
        raise DataError(f"missing hits {hits_path}; run `search` first")
    questions = {q.id: q for q in run.load_questions(side)}
    chunks = {c.chunk_id: c for c in read_chunks(run.chunks_path(side))}
    hits = _load_hits(hits_path)

    judge = run.cfg.resolve_judge() or run.cfg.baseline_judge(run.side_lang(side))
    out = run.judgments_path(side)
    cache = JudgmentCache()
    if out.exists():
        cache.add_all(Judgment.from_dict(obj) for _, obj in read_ndjson(out))

    judgments: list[Judgment] = []
    for qid in sorted(hits):
        question = questions.get(qid)
        if question is None:
            raise DataError(f"hits reference unknown question {qid!r}")
        for hit in hits[qid]:
            chunk = chunks.get(hit.chunk_id)
            if chunk is None:
                raise DataError(f"hits reference unknown chunk {hit.chunk_id!r}")
            judgments.append(judge_entailment(judge, question, chunk, cache))
    run.write_ndjson_artifact(out, (j.to_dict() for j in judgments))
    run.write_run_manifest(f"judge.{side}", [out])
    entailed = sum(1 for j in judgments if j.entails)
    print(f"judge[{side}]: {entailed}/{len(judgments)} entailments -> {out}")


def cmd_density(run: Runner) -> None:
    side = run.args.side
    k = run.cfg.retrieval_k
    hits = _load_hits(run.hits_path(side))
    judgments: list[Judgment] = [
        Judgment.from_dict(obj) for _, obj in read_ndjson(run.judgments_path(side))
    ]
    questions = run.load_questions(side)
    manifest = run.load_corpus_manifest(side)
    records = [
        occurrence_count(q.id, hits.get(q.id, []), judgments, corpus_label=side, k=k)
        for q in sorted(questions, key=lambda q: q.id)
    ]
    report = density_report(run.cfg.culture, records, manifest)
    out_occ = run.occurrences_path(side)
    out_json = run.out / "analysis" / f"{side}.density.json"
    run.write_ndjson_artifact(out_occ, (r.to_dict() for r in records))
    write_json(out_json, {"config_hash": run.cfg.config_hash, **report.to_dict()})

    # regenerate the cross-corpus table from every density json present
    reports = []
    for path in sorted((run.out / "analysis").glob("*.density.json")):
        obj = read_json(path)
        reports.append(
            DensityReport(
                culture=obj["culture"],
                corpus_label=obj["corpus_label"],
                question_count=obj["question_count"],
                total_entailed=obj["total_entailed"],
                doc_count=obj["doc_count"],
                chunk_count=obj["chunk_count"],
                density=obj["density"],
                density_per_doc_raw=obj["density_per_doc_raw"],
                density_per_chunk=obj.get("density_per_chunk"),
            )
        )
    out_csv = run.out / "analysis" / "density.csv"
    write_text(out_csv, density_table_csv(reports))
    run.write_run_manifest(f"density.{side}", [out_occ, out_json, out_csv])
    print(f"density[{side}]: {report.total_entailed} entailed, density {report.to_dict()['density_rendered']}")


def _load_eval_runs(run: Runner, require_hash: bool) -> list[tuple[EvalRun, str]]:
    eval_dir = run.out / "eval"
    if not eval_dir.exists():
        raise DataError(f"no eval runs under {eval_dir}")
    loaded = []
    for path in sorted(eval_dir.glob("*.json")):
        obj = read_json(path)
        run_hash = obj.get("config_hash", "")
        if require_hash and run_hash != run.cfg.config_hash:
            raise DataError(
                f"{path.name} was produced by config {run_hash[:12]}, current is "
                f"{run.cfg.config_hash[:12]}; rerun eval or pass --force"
            )
        loaded.append((EvalRun.from_dict(obj), run_hash))
    if not loaded:
        raise DataError(f"no eval runs under {eval_dir}")
    return loaded


def cmd_transfer(run: Runner) -> None:
    runs = [r for r, _ in _load_eval_runs(run, require_hash=not run.args.force)]
    by_key: dict[tuple[str, str], list[EvalRun]] = {}
    for r in runs:
        by_key.setdefault((r.setting, r.lang), []).append(r)

    q_en = run.load_questions("en")
    q_xx = run.load_questions("xx")
    xx_lang = run.side_lang("xx")
    en_by_pair = {q.pair_id: q.id for q in q_en}
    xx_by_pair = {q.pair_id: q.id for q in q_xx}

    def series(setting: str, lang: str, qid: str):
        points = []
        for r in sorted(by_key.get((setting, lang), []), key=lambda r: r.step):
            entry = next((res for res in r.results if res.question_id == qid), None)
            if entry is None or entry.correct is None:
                return None
            points.append((r.step, entry.correct))
        return tuple(points)

    records = []
    skipped = []
    for pair_id in sorted(set(en_by_pair) & set(xx_by_pair)):
        parts = {
            "bridge_en": series("bridge", "en", en_by_pair[pair_id]),
            "bridge_xx": series("bridge", xx_lang, xx_by_pair[pair_id]),
            "no_bridge_en": series("no_bridge", "en", en_by_pair[pair_id]),
            "no_bridge_xx": series("no_bridge", xx_lang, xx_by_pair[pair_id]),
        }
        if any(v is None or not v for v in parts.values()):
            skipped.append(pair_id)
            continue
        record = classify_transfer(CheckpointHistory(pair_id=pair_id, **parts))
        if record is not None:
            records.append(record)

    payload = {
        "config_hash": run.cfg.config_hash,
        "records": [r.to_dict() for r in records],
        "skipped_pairs": skipped,
        "counts": {
            "xx_to_en": sum(1 for r in records if r.direction == "xx_to_en"),
            "en_to_xx": sum(1 for r in records if r.direction == "en_to_xx"),
        },
    }

    # occurrence contrast per corpus when occurrence records are available
    contrast = {}
    for side, q_by_pair in (("en", en_by_pair), ("xx", xx_by_pair)):
        occ_path = run.occurrences_path(side)
        if not occ_path.exists():
            continue
        occ = [OccurrenceRecord.from_dict(obj) for _, obj in read_ndjson(occ_path)]
        direction = "xx_to_en" if side == "en" else "en_to_xx"
        transferred_qids = {
            q_by_pair[r.pair_id] for r in records if r.direction == direction and r.pair_id in q_by_pair
        }
        contrast[side] = occurrence_contrast(transferred_qids, occ)
    if contrast:
        payload["occurrence_contrast"] = contrast

    out_json = run.out / "analysis" / "transfer.json"
    write_json(out_json, payload)
    buf = _io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(["pair_id", "direction"])
    for r in records:
        writer.writerow([r.pair_id, r.direction])
    out_csv = run.out / "analysis" / "transfer.csv"
    write_text(out_csv, buf.getvalue())
    run.write_run_manifest("transfer", [out_json, out_csv])
    print(
        f"transfer: {payload['counts']['xx_to_en']} xx->en, "
        f"{payload['counts']['en_to_xx']} en->xx, {len(skipped)} skipped"
    )


def cmd_report(run: Runner) -> None:
    side = run.args.side
    lang = run.side_lang(side)
    runs = [r for r, _ in _load_eval_runs(run, require_hash=not run.args.force)]
    bridge_runs = [r for r in runs if r.setting == "bridge" and r.lang == lang]
    no_bridge_runs = [r for r in runs if r.setting == "no_bridge" and r.lang == lang]
    if not bridge_runs or not no_bridge_runs:
        raise DataError(f"need eval runs for both settings with lang {lang!r}")
    bridge = accuracy_curve(bridge_runs)
    no_bridge = accuracy_curve(no_bridge_runs)
    gap = transfer_gap(bridge, no_bridge)

    weight = run.cfg.ema_weight
    out_dir = run.out / "report"
    out_csv = out_dir / f"curves.{side}.csv"
    out_acc = out_dir / f"accuracy.{side}.svg"
    out_gap = out_dir / f"gap.{side}.svg"
    write_text(out_csv, curves_csv(bridge, no_bridge, gap))
    write_text(
        out_acc,
        line_chart_svg(
            {"bridge": bridge, "no_bridge": no_bridge},
            title=f"Cloze accuracy ({lang}), raw + EMA({weight})",
            y_label="accuracy",
            smooth_weight=weight,
        ),
    )
    write_text(
        out_gap,
        line_chart_svg(
            {"gap": gap},
            title=f"Transfer gap ({lang}): bridge - no_bridge",
            y_label="accuracy gap",
        ),
    )
    run.write_run_manifest(f"report.{side}", [out_csv, out_acc, out_gap])
    print(f"report[{side}]: {len(gap.steps)} steps -> {out_csv}")


# ---- argument parsing ----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossling",
        description="Deterministic pipeline for cross-lingual culture-transfer experiments.",
    )
    parser.add_argument("--version", action="version", version=f"crossling {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", help="output directory (overrides config output_dir)")
        p.add_argument("--jobs", type=int, help="worker count (default $CROSSLING_JOBS or 1)")

    p = sub.add_parser("filter", help="script-filter a corpus side")
    common(p)
    p.add_argument("--side", choices=SIDES, required=True)
    p.add_argument("--input", help="override input corpus path")
    p.add_argument("--output", help="override output NDJSON path")
    p.add_argument("--allowed", help="comma-separated script classes override")
    p.add_argument("--max-chars", type=int, dest="max_chars", help="chunking cap override")

    p = sub.add_parser("chunk", help="chunk a filtered corpus")
    common(p)
    p.add_argument("--side", choices=SIDES, required=True)
    p.add_argument("--input", help="override input corpus path")
    p.add_argument("--max-chars", type=int, dest="max_chars")

    p = sub.add_parser("bridge", help="build a continual-pretraining dataset")
    common(p)
    p.add_argument("--mode", choices=("bridged", "unbridged"), required=True)
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--ratio", help="override mix ratio, e.g. 1:1")
    p.add_argument("--template-file", dest="template_file",
                   help="JSON file with {lang, pattern, display_name}")

    p = sub.add_parser("eval", help="evaluate cloze questions at one checkpoint")
    common(p)
    p.add_argument("--setting", choices=SETTINGS, required=True)
    p.add_argument("--side", choices=SIDES, required=True)
    p.add_argument("--step", type=int, required=True)

    p = sub.add_parser("index", help="build the BM25 index over chunks")
    common(p)
    p.add_argument("--side", choices=SIDES, required=True)

    p = sub.add_parser("search", help="retrieve top-k chunks per question claim")
    common(p)
    p.add_argument("--side", choices=SIDES, required=True)
    p.add_argument("--k", type=int)

    p = sub.add_parser("judge", help="judge entailment for retrieved chunks")
    common(p)
    p.add_argument("--side", choices=SIDES, required=True)

    p = sub.add_parser("density", help="occurrence counts and density report")
    common(p)
    p.add_argument("--side", choices=SIDES, required=True)
    p.add_argument("--k", type=int)

    p = sub.add_parser("transfer", help="classify transferred instances")
    common(p)
    p.add_argument("--force", action="store_true", help="combine runs from mismatched configs")

    p = sub.add_parser("report", help="curves CSV and SVG charts")
    common(p)
    p.add_argument("--side", choices=SIDES, required=True)
    p.add_argument("--force", action="store_true", help="combine runs from mismatched configs")

    return parser


_HANDLERS = {
    "filter": cmd_filter,
    "chunk": cmd_chunk,
    "bridge": cmd_bridge,
    "eval": cmd_eval,
    "index": cmd_index,
    "search": cmd_search,
    "judge": cmd_judge,
    "density": cmd_density,
    "transfer": cmd_transfer,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        runner = Runner(args)
        _HANDLERS[args.command](runner)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 3
    except (DataError, CrosslingError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
