"""crossling: deterministic toolkit for cross-lingual culture-transfer
experiments.

Pipeline stages: script-isolated corpus preparation, bridged/unbridged
continual-pretraining dataset construction, perplexity-based bilingual
cloze probing, BM25 retrieval with pluggable entailment judging, and
cultural-density / transfer-instance analysis.
"""

__version__ = "0.1.0"

from .analysis import (
    CheckpointHistory,
    DensityReport,
    OccurrenceRecord,
    TransferRecord,
    classify_transfer,
    density_report,
    occurrence_contrast,
    occurrence_count,
)
from .bridging import (
    BridgeTemplate,
    MixPlan,
    ParallelPair,
    build_setting,
    explode_pairs,
    mix_datasets,
    render_bridge,
)
from .corpus import (
    Chunk,
    CorpusManifest,
    Document,
    Dropped,
    ScriptProfile,
    chunk_document,
    classify_script,
    corpus_stats,
    filter_document,
)
from .errors import ConfigError, CrosslingError, DataError, TransportError
from .probing import (
    ClozeQuestion,
    CurveSeries,
    EntityRecord,
    EvalRun,
    ema_smooth,
    evaluate,
    instantiate,
    predict,
    render_entity_questions,
    transfer_gap,
)
from .retrieval import (
    BaselineLexicalJudge,
    InvertedIndex,
    Judgment,
    RetrievalHit,
    build_index,
    judge_entailment,
    search,
    tokenize_for_index,
)
from .scoring import (
    CharNGramModel,
    ExternalScorer,
    ScoreFailure,
    ScoreResult,
    external_score,
    ngram_score,
    train_ngram,
)
