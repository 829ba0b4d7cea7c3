"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Quantitative checks ride on planted fixtures whose expected values
are computed by construction or by the independent oracles in helpers.py.
"""

import math
import random
import time
from collections import Counter
from contextlib import contextmanager

from crossling.analysis import (
    classify_transfer,
    density_report,
    occurrence_contrast,
    occurrence_count,
)
from crossling.bridging import (
    DEFAULT_TEMPLATES,
    MixPlan,
    bridge_pattern_regex,
    build_setting,
    render_bridge,
    strip_bridge,
)
from crossling.cli import main
from crossling.corpus import chunk_corpus, classify_script, corpus_stats, filter_corpus
from crossling.probing import ClozeQuestion, CurveSeries, ema_smooth, evaluate, instantiate, transfer_gap
from crossling.retrieval import BaselineLexicalJudge, build_index, search, tokenize_for_index
from crossling.scoring import train_ngram

import helpers
from helpers import (
    OracleNgram,
    TableStubScorer,
    UniformStubScorer,
    build_experiment,
    make_planted_questions,
    mixed_corpus,
    oracle_bm25,
    plant_corpora,
)
from test_analysis import history


@contextmanager
def criterion(name: str, budget_seconds: float | None = None):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL ({time.perf_counter() - started:.1f}s)")
        raise
    elapsed = time.perf_counter() - started
    print(f"[ACCEPTANCE] {name}: PASS ({elapsed:.1f}s)")
    if budget_seconds is not None:
        assert elapsed < budget_seconds, f"{name} took {elapsed:.1f}s, budget {budget_seconds}s"


def test_script_isolation():
    """Filtering the 10k-document mixed fixture leaves zero foreign-script
    code points, for every studied script."""
    with criterion("script isolation (10k docs, 5 scripts)", budget_seconds=10):
        docs = mixed_corpus(10_000, seed=42)
        for allowed in ("latin", "han", "hangul", "tibetan", "mongolian"):
            kept, _ = filter_corpus(docs, {allowed})
            assert kept, f"nothing survived {allowed} filtering"
            leaked = 0
            for doc in kept:
                profile = classify_script(doc.text)
                leaked += profile.total() - profile.count(allowed) - profile.common
            assert leaked == 0, f"{leaked} foreign code points after {allowed} filter"


def test_bridged_unbridged_conservation():
    """Sentence multisets recovered from the two settings are equal over
    1,000 pairs; the unbridged output never matches the template pattern."""
    with criterion("bridged/unbridged conservation (1,000 pairs)", budget_seconds=5):
        rng = random.Random(314)
        template = DEFAULT_TEMPLATES["zh"]
        from crossling.bridging import ParallelPair

        pairs = [
            ParallelPair(
                id=f"p{i:05d}",
                en_text=helpers.latin_sentence(rng, words=rng.randint(3, 9)),
                xx_text=helpers.han_sentence(rng, length=rng.randint(6, 20)),
                lang="zh",
            )
            for i in range(1000)
        ]
        bridged_total = sum(len(render_bridge(p, template).text) for p in pairs)
        unbridged_total = sum(len(p.en_text) + len(p.xx_text) for p in pairs)
        from crossling.corpus import Document

        mono, total = [], 0
        while total <= bridged_total + 200:
            text = helpers.han_sentence(rng, length=48)
            mono.append(Document(id=f"m{len(mono):05d}", lang="zh", text=text))
            total += len(text)
        bridged, _ = build_setting(
            pairs, mono, "bridged", template,
            MixPlan(bridged_total, bridged_total, seed=5),
        )
        unbridged, _ = build_setting(
            pairs, mono, "unbridged", template,
            MixPlan(unbridged_total, unbridged_total, seed=5),
        )
        recovered_bridged = Counter()
        for doc in bridged:
            if doc.id.startswith("bridge:"):
                en, xx = strip_bridge(doc.text, template)
                recovered_bridged[en] += 1
                recovered_bridged[xx] += 1
        recovered_unbridged = Counter(d.text for d in unbridged if d.id.startswith("half:"))
        assert recovered_bridged == recovered_unbridged
        assert sum(recovered_bridged.values()) == 2000
        pattern = bridge_pattern_regex(template)
        assert not any(pattern.search(d.text) for d in unbridged)


def test_ngram_oracle_equivalence():
    """200 randomized train/score cases agree with the brute-force scorer
    to 1e-9 relative logprob error."""
    with criterion("n-gram oracle equivalence (200 cases)", budget_seconds=10):
        rng = random.Random(777)
        alphabet = "abc你好 가각x"
        for case in range(200):
            n = rng.choice([1, 2, 3])
            k = rng.choice([0.5, 1.0])
            total = rng.randint(2, 200)
            texts = []
            while total > 0:
                size = rng.randint(1, min(60, total))
                texts.append("".join(rng.choice(alphabet) for _ in range(size)))
                total -= size
            model = train_ngram(texts, n=n, k=k)
            oracle = OracleNgram(texts, n=n, k=k)
            for _ in range(3):
                probe = "".join(rng.choice(alphabet + "zQ") for _ in range(rng.randint(0, 40)))
                mine = model.score(probe).logprob_sum
                expected = oracle.logprob(probe)
                assert abs(mine - expected) <= 1e-9 * max(1.0, abs(expected)), (case, probe)


def test_bm25_exactness():
    """Top-k equals brute force over a 1,000-chunk fixture for 100 random
    queries (1e-9); the pinned worked example evaluates to ln 2 * 1.375."""
    with criterion("BM25 exactness (1,000 chunks, 100 queries)", budget_seconds=10):
        from crossling.corpus import Chunk

        rng = random.Random(2718)
        vocab = [f"w{i:02d}" for i in range(80)]
        chunks = [
            Chunk(
                chunk_id=f"c{i:04d}",
                doc_id=f"d{i:04d}",
                text=" ".join(rng.choice(vocab) for _ in range(rng.randint(4, 30))),
                char_len=0,
            )
            for i in range(1000)
        ]
        index = build_index(chunks, lang="en")
        tokenize = lambda text: tokenize_for_index(text, "en")
        for _ in range(100):
            terms = [rng.choice(vocab + ["missing"]) for _ in range(rng.randint(1, 4))]
            expected = oracle_bm25(chunks, tokenize, terms, k=50)
            got = search(index, " ".join(terms), k=50)
            assert [h.chunk_id for h in got] == [cid for cid, _ in expected]
            for hit, (_, score) in zip(got, expected):
                assert abs(hit.score - score) <= 1e-9 * max(1.0, abs(score))

        # pinned hand-computed value: tf=2, df=1, len=avglen -> ln 2 * 1.375
        two = [Chunk("c1", "d1", "a a b", 5), Chunk("c2", "d2", "c d e", 5)]
        hits = search(build_index(two, lang="en"), "a", k=5)
        assert len(hits) == 1
        assert abs(hits[0].score - math.log(2) * 1.375) < 1e-4
        assert abs(hits[0].score - 0.9530) < 1e-4


def _fixture_questions(n=16):
    questions = []
    for i in range(n):
        questions.append(
            ClozeQuestion(
                id=f"q{i:03d}", pair_id=f"pr{i:03d}", culture="t", lang="en",
                text=f"Statement number {i} says ____.",
                candidates=(f"a{i}", f"b{i}", f"c{i}", f"d{i}"),
                gold_index=i % 4,
            )
        )
    return questions


def test_cloze_evaluation_exact():
    """Uniform scorer accuracy equals the gold_index==0 fraction exactly;
    a fixed-perplexity stub reproduces argmin with index tie-break."""
    with criterion("cloze evaluation exactness"):
        questions = _fixture_questions(16)
        run = evaluate(questions, UniformStubScorer(), setting="bridge", step=0)
        gold_zero_fraction = sum(1 for q in questions if q.gold_index == 0) / len(questions)
        assert run.accuracy == gold_zero_fraction == 0.25

        tables = {}
        expected = {}
        ppl_patterns = [
            ([3.2, 1.1, 5.0, 2.0], 1),
            ([2.0, 2.0, 2.0, 2.0], 0),   # full tie -> index 0
            ([9.0, 4.0, 4.0, 8.0], 1),   # partial tie -> lower index
            ([1.0, 2.0, 3.0, 0.5], 3),
        ]
        for q in questions:
            ppls, want = ppl_patterns[int(q.id[1:]) % len(ppl_patterns)]
            expected[q.id] = want
            for i in range(4):
                tables[instantiate(q, i)] = ppls[i]
        run = evaluate(questions, TableStubScorer(tables), setting="bridge", step=0)
        for result in run.results:
            assert result.predicted == expected[result.question_id], result.question_id


def test_ema_and_gap():
    """EMA formula value on [0,1] with weight 0.8, and pointwise gap
    antisymmetry on randomized series."""
    with criterion("EMA formula and gap antisymmetry"):
        out = ema_smooth(CurveSeries((0, 1), (0.0, 1.0)), weight=0.8)
        assert out.values[0] == 0.0
        # 0.2 exactly, up to the one-ULP difference between the float
        # literal and the formula's own evaluation (1 - 0.8)
        assert out.values[1] == (1 - 0.8)
        assert abs(out.values[1] - 0.2) < 1e-15

        rng = random.Random(99)
        for _ in range(100):
            steps = tuple(sorted(rng.sample(range(2000), 8)))
            a = CurveSeries(steps, tuple(rng.random() for _ in steps))
            b = CurveSeries(steps, tuple(rng.random() for _ in steps))
            assert all(
                x == -y for x, y in zip(transfer_gap(a, b).values, transfer_gap(b, a).values)
            )


def test_transfer_classifier_table():
    """The 12-case condition table classifies exactly per the predicates,
    including the [T,F,T] consistency case."""
    with criterion("transfer classifier 12-case table"):
        cases = [
            ((False, (1, 1, 1), (1, 1, 1), (0, 0, 0)), "xx_to_en"),
            ((True, (1, 1, 1), (1, 1, 1), (0, 0, 0)), None),
            ((False, (0, 0, 0), (1, 1, 1), (0, 0, 0)), None),
            ((False, (1, 1, 1), (0, 0, 0), (0, 0, 0)), None),
            ((False, (1, 0, 1), (1, 1, 1), (0, 0, 0)), None),
            ((False, (1, 1, 1), (1, 0, 1), (0, 0, 0)), None),
            ((True, (0, 0, 0), (1, 1, 1), (1, 1, 1)), "en_to_xx"),
            ((False, (0, 0, 0), (1, 1, 1), (1, 1, 1)), None),
            ((True, (1, 1, 1), (1, 1, 1), (1, 1, 1)), None),
            ((True, (0, 0, 0), (1, 1, 1), (0, 0, 0)), None),
            ((True, (0, 0, 0), (1, 1, 1), (1, 0, 1)), None),   # [T,F,T] consistency
            ((True, (0, 1, 0), (1, 1, 1), (1, 1, 1)), None),
        ]
        for (en0, nb_xx, b_en, b_xx), want in cases:
            record = classify_transfer(
                history(en0=en0, nb_xx_last3=nb_xx, b_en_last3=b_en, b_xx_last3=b_xx)
            )
            got = record.direction if record else None
            assert got == want, (en0, nb_xx, b_en, b_xx, got, want)


def test_planted_density_end_to_end():
    """Passages planted at a 10:1 non-EN:EN frequency reproduce a 10:1
    headline-density ratio within 20%, and planted transferred instances
    sit strictly above the global occurrence mean."""
    with criterion("planted-density end to end (10:1)", budget_seconds=60):
        n_q = 40
        questions_en, questions_xx, claims = make_planted_questions(n_q, seed=11)
        transferred_pairs = set(sorted(claims)[:8])
        en_docs, xx_docs = plant_corpora(
            claims,
            en_reps=1,
            xx_reps=10,
            transferred=transferred_pairs,
            transfer_boost=2,
            n_filler_en=460,
            n_filler_xx=28,
            seed=17,
        )
        assert len(en_docs) == len(xx_docs)  # equal denominators by construction

        results = {}
        for label, docs, questions, lang in (
            ("en", en_docs, questions_en, "en"),
            ("xx", xx_docs, questions_xx, "zh"),
        ):
            manifest = corpus_stats(docs, label=label)
            chunks = chunk_corpus(docs, max_chars=5000)
            index = build_index(chunks, lang=lang)
            judge = BaselineLexicalJudge(lang, threshold=0.5)
            chunk_by_id = {c.chunk_id: c for c in chunks}
            records = []
            for q in questions:
                claim = instantiate(q, q.gold_index)
                hits = search(index, claim, k=50)
                from crossling.retrieval import Judgment

                judgments = [
                    Judgment(
                        question_id=q.id,
                        chunk_id=h.chunk_id,
                        entails=judge.judge(claim, chunk_by_id[h.chunk_id].text),
                        judge=judge.identity,
                    )
                    for h in hits
                ]
                records.append(occurrence_count(q.id, hits, judgments, corpus_label=label, k=50))
            results[label] = {
                "records": records,
                "report": density_report("demo", records, manifest),
                "questions": questions,
            }

        density_en = results["en"]["report"].density
        density_xx = results["xx"]["report"].density
        ratio = density_xx / density_en
        assert 8.0 <= ratio <= 12.0, f"density ratio {ratio:.2f} outside 10 +/- 20%"

        # instance-level contrast: planted transferred > global mean
        for label in ("en", "xx"):
            transferred_qids = {
                q.id for q in results[label]["questions"] if q.pair_id in transferred_pairs
            }
            summary = occurrence_contrast(transferred_qids, results[label]["records"])[label]
            t_num, t_den = summary["transferred_mean_exact"]
            o_num, o_den = summary["overall_mean_exact"]
            assert t_num * o_den > o_num * t_den, f"{label}: transferred mean not above global"


def test_subcommand_determinism(tmp_path):
    """Every subcommand rerun with an identical config produces
    byte-identical artifacts (run manifests excluded)."""
    with criterion("subcommand determinism (full pipeline twice)", budget_seconds=120):
        steps = (500, 1000, 1500)  # transfer needs three CT checkpoints
        config = build_experiment(tmp_path, n_questions=6, steps=steps)

        def pipeline(out):
            for side in ("en", "xx"):
                assert main(["filter", "--config", str(config), "--side", side, "--out", str(out)]) == 0
                assert main(["chunk", "--config", str(config), "--side", side, "--out", str(out)]) == 0
            for mode in ("bridged", "unbridged"):
                assert main(["bridge", "--config", str(config), "--mode", mode, "--out", str(out)]) == 0
            for setting in ("bridge", "no_bridge"):
                for side in ("en", "xx"):
                    for step in (0, *steps):
                        assert main([
                            "eval", "--config", str(config), "--setting", setting,
                            "--side", side, "--step", str(step), "--out", str(out),
                        ]) == 0
            for side in ("en", "xx"):
                assert main(["index", "--config", str(config), "--side", side, "--out", str(out)]) == 0
                assert main(["search", "--config", str(config), "--side", side, "--out", str(out)]) == 0
                assert main(["judge", "--config", str(config), "--side", side, "--out", str(out)]) == 0
                assert main(["density", "--config", str(config), "--side", side, "--out", str(out)]) == 0
            assert main(["transfer", "--config", str(config), "--out", str(out)]) == 0
            for side in ("en", "xx"):
                assert main(["report", "--config", str(config), "--side", side, "--out", str(out)]) == 0

        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        pipeline(out1)
        pipeline(out2)

        def snapshot(out):
            return {
                str(p.relative_to(out)): p.read_bytes()
                for p in sorted(out.rglob("*"))
                if p.is_file() and not p.name.endswith(".run.json")
            }

        first, second = snapshot(out1), snapshot(out2)
        assert first.keys() == second.keys()
        differing = [name for name in first if first[name] != second[name]]
        assert differing == [], f"non-deterministic artifacts: {differing}"
