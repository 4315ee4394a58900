"""End-to-end itemization: parse, match, score, reconstruct, segment.

Form10KItemizer is the high-level entry point with the estimator API: fit
on filings with known boundaries to train the candidate scorer, transform
raw filings into itemized records. run_pipeline is the underlying
per-document function used by the service and the evaluator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin

from .dictionary import KeywordDictionary, default_dictionary, load_dictionary
from .docmodel import DocumentModel, parse_filing
from .errors import EmptyCorpus, ModelMissing, NoStructureError
from .features import extract_features
from .ingest import RawFiling
from .matcher import CandidateBoundary, attach_format_signature, keyword_match
from .reconstructor import (
    DEFAULT_SKIP_PENALTY,
    ReconstructionResult,
    detect_toc,
    reconstruct,
)
from .scorer import (
    CandidateScorer,
    ExternalScorerConfig,
    LabeledCandidate,
    Provenance,
    TrainConfig,
    score_with_fallback,
    train_scorer,
)
from .segmenter import ItemSegment, segment
from .synth import GoldItem

PIPELINE_VERSION = "1.0.0"

# the lazy gap may cross a day number ("December 31, 2015"), so it must
# admit digits; the word boundaries keep it off partial digit runs
_FISCAL_YEAR_RE = re.compile(
    r"fiscal year end(?:ed|ing).{0,40}?\b(19|20)(\d{2})\b",
    re.IGNORECASE | re.DOTALL,
)
_FISCAL_YEAR_SCAN_CHARS = 4000


class ScoringMode(Enum):
    """How candidate probabilities are produced.

    FULL uses the trained scorer. RULE_ONLY gives every candidate the same
    neutral probability, which reduces selection to keyword matching plus
    the order constraints; it exists for ablation and as a fallback when no
    model is available.
    """

    FULL = "full"
    RULE_ONLY = "rule_only"


@dataclass(frozen=True)
class ItemizedFiling:
    serial: str
    pipeline_version: str
    structure_score: float
    segments: tuple[ItemSegment, ...]
    flagged: tuple[str, ...]
    needs_review: bool
    reconstruction: ReconstructionResult
    candidates: tuple[CandidateBoundary, ...] = ()


def detect_fiscal_year(doc: DocumentModel) -> int | None:
    """Fiscal year from the cover page, if stated near the document head."""
    m = _FISCAL_YEAR_RE.search(doc.plain_text[:_FISCAL_YEAR_SCAN_CHARS])
    if m is None:
        return None
    return int(m.group(1) + m.group(2))


def score_candidates(
    doc: DocumentModel,
    candidates: list[CandidateBoundary],
    scorer: CandidateScorer | None,
    mode: ScoringMode,
    external: ExternalScorerConfig | None = None,
) -> list[CandidateBoundary]:
    if mode is ScoringMode.RULE_ONLY or scorer is None:
        return [c.with_score(0.5) for c in candidates]
    scored = []
    for c in candidates:
        result = score_with_fallback(external, doc, c, scorer, candidates)
        scored.append(c.with_score(result.probability))
    return scored


def run_pipeline(
    doc: DocumentModel,
    dictionary: KeywordDictionary,
    scorer: CandidateScorer | None = None,
    mode: ScoringMode = ScoringMode.FULL,
    skip_penalty: float = DEFAULT_SKIP_PENALTY,
    threshold: float = 0.5,
    external: ExternalScorerConfig | None = None,
) -> ItemizedFiling:
    candidates = keyword_match(doc, dictionary)
    candidates = attach_format_signature(doc, candidates)
    candidates = score_candidates(doc, candidates, scorer, mode, external)
    toc = detect_toc(doc, candidates)
    result = reconstruct(
        candidates,
        toc=toc,
        skip_penalty=skip_penalty,
        threshold=threshold,
        fiscal_year=detect_fiscal_year(doc),
    )
    segments = segment(
        doc,
        result.structure,
        doc.source_serial,
        flagged_items=frozenset(item for item, _ in result.flagged),
    )
    flagged = tuple(f"{item.label}:{reason}" for item, reason in result.flagged)
    return ItemizedFiling(
        serial=doc.source_serial,
        pipeline_version=PIPELINE_VERSION,
        structure_score=result.structure.total_score,
        segments=tuple(segments),
        flagged=flagged,
        needs_review=bool(flagged) or result.is_empty,
        reconstruction=result,
        candidates=tuple(candidates),
    )


def label_candidates(
    doc: DocumentModel,
    gold: tuple[GoldItem, ...],
    dictionary: KeywordDictionary,
    provenance: Provenance = Provenance.SYNTHETIC,
) -> list[LabeledCandidate]:
    """Turn one document with known boundaries into scorer training rows.

    A candidate is a positive example only when it names the right item at
    exactly the known title offset; table-of-contents hits and in-body
    references for the same item land elsewhere and become negatives.
    """
    truth = {(g.item, g.offset) for g in gold}
    candidates = attach_format_signature(doc, keyword_match(doc, dictionary))
    return [
        LabeledCandidate(
            features=tuple(float(v) for v in extract_features(doc, c, candidates)),
            label=(c.item, c.offset) in truth,
            provenance=provenance,
        )
        for c in candidates
    ]


class Form10KItemizer(BaseEstimator, TransformerMixin):
    """Filing-to-records transformer wrapping the whole pipeline.

    fit(X, y) takes raw filings and their gold title boundaries and trains
    the internal candidate scorer. transform(X) itemizes raw filings. A
    prefit scorer can be supplied instead of calling fit.
    """

    def __init__(
        self,
        scorer: CandidateScorer | None = None,
        dictionary_path: str | None = None,
        skip_penalty: float = DEFAULT_SKIP_PENALTY,
        threshold: float = 0.5,
        learning_rate: float = 0.5,
        l2: float = 1e-4,
        epochs: int = 500,
        strict: bool = False,
    ):
        self.scorer = scorer
        self.dictionary_path = dictionary_path
        self.skip_penalty = skip_penalty
        self.threshold = threshold
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = epochs
        self.strict = strict

    def _dictionary(self) -> KeywordDictionary:
        if self.dictionary_path is not None:
            return load_dictionary(Path(self.dictionary_path))
        return default_dictionary()

    def fit(self, X: list[RawFiling], y: list[tuple[GoldItem, ...]] | None = None):
        if not X:
            raise EmptyCorpus("no filings to fit on")
        if y is None or len(y) != len(X):
            raise ValueError("fit requires one gold boundary tuple per filing")
        dictionary = self._dictionary()
        samples: list[LabeledCandidate] = []
        for raw, gold in zip(X, y):
            samples.extend(label_candidates(parse_filing(raw), gold, dictionary))
        config = TrainConfig(
            learning_rate=self.learning_rate,
            l2=self.l2,
            epochs=self.epochs,
            threshold=self.threshold,
        )
        self.scorer_ = train_scorer(samples, config)
        self.dictionary_ = dictionary
        self.n_samples_seen_ = len(samples)
        return self

    def _active_scorer(self) -> CandidateScorer:
        if hasattr(self, "scorer_"):
            return self.scorer_
        if self.scorer is not None:
            return self.scorer
        raise ModelMissing("no trained scorer: call fit or pass scorer=")

    def transform(self, X: list[RawFiling]) -> list[ItemizedFiling]:
        scorer = self._active_scorer()
        dictionary = getattr(self, "dictionary_", None) or self._dictionary()
        out = []
        for raw in X:
            result = run_pipeline(
                parse_filing(raw),
                dictionary,
                scorer=scorer,
                mode=ScoringMode.FULL,
                skip_penalty=self.skip_penalty,
                threshold=self.threshold,
            )
            if self.strict and result.reconstruction.is_empty:
                raise NoStructureError(raw.serial)
            out.append(result)
        return out

    def itemize(self, raw: RawFiling) -> ItemizedFiling:
        return self.transform([raw])[0]


def build_training_set(
    corpus: list, dictionary: KeywordDictionary
) -> list[LabeledCandidate]:
    """Labeled candidates from a corpus of filings with known boundaries."""
    samples: list[LabeledCandidate] = []
    for filing in corpus:
        doc = parse_filing(filing.as_raw())
        samples.extend(label_candidates(doc, filing.gold, dictionary))
    return samples


def train_default_scorer(
    dictionary: KeywordDictionary | None = None,
    extra_samples: list[LabeledCandidate] | None = None,
) -> CandidateScorer:
    """Scorer trained on the canonical training corpus.

    extra_samples lets accumulated expert-review labels join the synthetic
    ones, which is how the review loop feeds back into the model.
    """
    from .synth import TRAINING_CONFIG, generate_corpus

    dictionary = dictionary or default_dictionary()
    samples = build_training_set(
        generate_corpus(TRAINING_CONFIG, dictionary.entries), dictionary
    )
    if extra_samples:
        samples = samples + list(extra_samples)
    return train_scorer(samples, TrainConfig())
