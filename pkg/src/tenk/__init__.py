"""Form 10-K itemization: parse SEC filings, locate the 22 canonical items,
and emit one key-value record per item section.

High-level use goes through Form10KItemizer (estimator API) or the HTTP
service; the submodules expose each pipeline stage for direct use.
"""

from .dictionary import KeywordDictionary, default_dictionary, load_dictionary
from .docmodel import DocumentFormat, DocumentModel, detect_format, parse_filing
from .errors import (
    CandidateMismatch,
    ConfigError,
    DegenerateData,
    DictError,
    EmptyCorpus,
    EmptyInput,
    ExternalUnavailable,
    MalformedRef,
    ModelMissing,
    NetworkError,
    NoStructureError,
    ParseError,
    SpanError,
    TenkError,
    UnknownSerial,
    UnknownTask,
    VerdictConflict,
)
from .evaluation import (
    AblationReport,
    DocumentJudgment,
    EvalReport,
    WindowReport,
    ablation,
    evaluate_corpus,
    judge_document,
    retrieval_rate,
    scorer_window_report,
)
from .features import FEATURE_NAMES, extract_features
from .ingest import FilingFetcher, FilingRef, RawFiling, fetch_filing, serial_from_ref
from .matcher import (
    CandidateBoundary,
    FormatSignature,
    MatchKind,
    attach_format_signature,
    keyword_match,
)
from .pipeline import (
    PIPELINE_VERSION,
    Form10KItemizer,
    ItemizedFiling,
    ScoringMode,
    run_pipeline,
    train_default_scorer,
)
from .reconstructor import (
    Assignment,
    ReconstructionResult,
    StructureHypothesis,
    TocRegion,
    detect_toc,
    reconstruct,
)
from .schema import ALL_ITEMS, CANONICAL_ITEMS, ItemId, item_from_number
from .scorer import (
    CandidateScorer,
    Decision,
    ExternalScorerConfig,
    LabeledCandidate,
    Provenance,
    ScoreResult,
    train_scorer,
)
from .segmenter import ItemSegment, clean_text, make_key, parse_key, segment
from .service import ItemizerService, ServiceConfig, create_app, load_config
from .store import ItemRecord, ReviewTask, Store
from .synth import GoldItem, GoldStructure, SynthConfig, SyntheticFiling, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "ALL_ITEMS",
    "AblationReport",
    "Assignment",
    "CANONICAL_ITEMS",
    "CandidateBoundary",
    "CandidateMismatch",
    "CandidateScorer",
    "ConfigError",
    "Decision",
    "DegenerateData",
    "DictError",
    "DocumentFormat",
    "DocumentJudgment",
    "DocumentModel",
    "EmptyCorpus",
    "EmptyInput",
    "EvalReport",
    "ExternalScorerConfig",
    "ExternalUnavailable",
    "FEATURE_NAMES",
    "FilingFetcher",
    "FilingRef",
    "Form10KItemizer",
    "FormatSignature",
    "GoldItem",
    "GoldStructure",
    "ItemId",
    "ItemRecord",
    "ItemSegment",
    "ItemizedFiling",
    "ItemizerService",
    "KeywordDictionary",
    "LabeledCandidate",
    "MalformedRef",
    "MatchKind",
    "ModelMissing",
    "NetworkError",
    "NoStructureError",
    "PIPELINE_VERSION",
    "ParseError",
    "Provenance",
    "RawFiling",
    "ReconstructionResult",
    "ReviewTask",
    "ScoreResult",
    "ScoringMode",
    "ServiceConfig",
    "SpanError",
    "Store",
    "StructureHypothesis",
    "SynthConfig",
    "SyntheticFiling",
    "TenkError",
    "TocRegion",
    "UnknownSerial",
    "UnknownTask",
    "VerdictConflict",
    "WindowReport",
    "ablation",
    "attach_format_signature",
    "clean_text",
    "create_app",
    "default_dictionary",
    "detect_format",
    "detect_toc",
    "evaluate_corpus",
    "extract_features",
    "fetch_filing",
    "generate_corpus",
    "item_from_number",
    "judge_document",
    "keyword_match",
    "load_config",
    "load_dictionary",
    "make_key",
    "parse_filing",
    "parse_key",
    "reconstruct",
    "retrieval_rate",
    "run_pipeline",
    "scorer_window_report",
    "segment",
    "serial_from_ref",
    "train_default_scorer",
    "train_scorer",
]
