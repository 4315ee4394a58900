"""Judging reconstructions against gold boundaries and running ablations.

A document passes only when every known item is found at its exact start
(within tolerance) and nothing extra is reported. Corpus evaluation runs the
pipeline in FULL or RULE_ONLY mode; the window ablation probes the scorer on
random document positions without the keyword gate, which is the regime
where a classifier alone overfires.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .dictionary import KeywordDictionary
from .docmodel import DocumentModel, parse_filing
from .errors import EmptyCorpus, ModelMissing
from .features import extract_features
from .matcher import (
    CandidateBoundary,
    MatchKind,
    attach_format_signature,
    keyword_match,
)
from .pipeline import ItemizedFiling, ScoringMode, run_pipeline
from .reconstructor import Assignment
from .scorer import CandidateScorer, Decision
from .schema import ItemId
from .synth import GoldStructure, SyntheticFiling

DEFAULT_TOLERANCE_CHARS = 0
WINDOW_CHARS = 150


@dataclass(frozen=True)
class DocumentJudgment:
    serial: str
    passed: bool
    reasons: tuple[str, ...]
    candidates_correct: int
    candidates_incorrect: int
    gold_total: int
    no_structure: bool


def judge_document(
    gold: GoldStructure,
    assignments: tuple[Assignment, ...],
    tolerance_chars: int = DEFAULT_TOLERANCE_CHARS,
) -> DocumentJudgment:
    """Strict pass/fail: miss an item, invent an item, or misplace a start
    by more than the tolerance, and the whole document fails."""
    gold_at = dict(gold.assignments)
    reasons: list[str] = []
    correct = 0
    incorrect = 0
    seen: set[ItemId] = set()
    for a in assignments:
        seen.add(a.item)
        if a.item not in gold_at:
            reasons.append(f"spurious:{a.item.label}@{a.offset}")
            incorrect += 1
        elif abs(a.offset - gold_at[a.item]) > tolerance_chars:
            reasons.append(
                f"offset:{a.item.label}@{a.offset}!={gold_at[a.item]}"
            )
            incorrect += 1
        else:
            correct += 1
    for item, offset in gold.assignments:
        if item not in seen:
            reasons.append(f"missing:{item.label}@{offset}")
    return DocumentJudgment(
        serial=gold.serial,
        passed=not reasons,
        reasons=tuple(reasons),
        candidates_correct=correct,
        candidates_incorrect=incorrect,
        gold_total=len(gold.assignments),
        no_structure=not assignments,
    )


@dataclass
class ItemStats:
    correct: int = 0
    gold: int = 0
    predicted: int = 0


@dataclass
class EvalReport:
    mode: str
    n_docs: int = 0
    docs_passed: int = 0
    docs_no_structure: int = 0
    candidates_correct: int = 0
    candidates_incorrect: int = 0
    gold_total: int = 0
    failures_missing: int = 0
    failures_spurious: int = 0
    failures_offset: int = 0
    runtime_seconds: float = 0.0
    per_item: dict[str, ItemStats] = field(default_factory=dict)
    judgments: list[DocumentJudgment] = field(default_factory=list)

    @property
    def docs_failed(self) -> int:
        return self.n_docs - self.docs_passed

    @property
    def retrieval_rate(self) -> float:
        if self.n_docs == 0:
            raise EmptyCorpus("no judgments to rate")
        return self.docs_passed / self.n_docs

    @property
    def precision(self) -> float:
        total = self.candidates_correct + self.candidates_incorrect
        return self.candidates_correct / total if total else 0.0

    @property
    def recall(self) -> float:
        return self.candidates_correct / self.gold_total if self.gold_total else 0.0


def retrieval_rate(judgments: list[DocumentJudgment]) -> float:
    if not judgments:
        raise EmptyCorpus("no judgments to rate")
    return sum(1 for j in judgments if j.passed) / len(judgments)


def evaluate_corpus(
    corpus: list[SyntheticFiling],
    dictionary: KeywordDictionary,
    scorer: CandidateScorer | None = None,
    mode: ScoringMode = ScoringMode.FULL,
    tolerance_chars: int = DEFAULT_TOLERANCE_CHARS,
    skip_penalty: float = 1.0,
    threshold: float = 0.5,
) -> EvalReport:
    if not corpus:
        raise EmptyCorpus("no documents to evaluate")
    if mode is ScoringMode.FULL and scorer is None:
        raise ModelMissing("full-pipeline evaluation needs a trained scorer")
    report = EvalReport(mode=mode.value, n_docs=len(corpus))
    started = time.perf_counter()
    for filing in corpus:
        result: ItemizedFiling = run_pipeline(
            parse_filing(filing.as_raw()),
            dictionary,
            scorer=scorer,
            mode=mode,
            skip_penalty=skip_penalty,
            threshold=threshold,
        )
        gold = filing.gold_structure()
        assignments = result.reconstruction.structure.assignments
        judgment = judge_document(gold, assignments, tolerance_chars)
        report.judgments.append(judgment)
        report.docs_passed += judgment.passed
        report.docs_no_structure += judgment.no_structure
        report.candidates_correct += judgment.candidates_correct
        report.candidates_incorrect += judgment.candidates_incorrect
        report.gold_total += judgment.gold_total
        kinds = {reason.split(":", 1)[0] for reason in judgment.reasons}
        report.failures_missing += "missing" in kinds
        report.failures_spurious += "spurious" in kinds
        report.failures_offset += "offset" in kinds
        gold_at = dict(gold.assignments)
        for item, _ in gold.assignments:
            report.per_item.setdefault(item.label, ItemStats()).gold += 1
        for a in assignments:
            stats = report.per_item.setdefault(a.item.label, ItemStats())
            stats.predicted += 1
            if (
                a.item in gold_at
                and abs(a.offset - gold_at[a.item]) <= tolerance_chars
            ):
                stats.correct += 1
    report.runtime_seconds = time.perf_counter() - started
    return report


@dataclass
class WindowReport:
    """Scorer-without-keyword-gate probe over random document positions."""

    n_windows: int
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int

    @property
    def precision(self) -> float:
        fired = self.true_positives + self.false_positives
        return self.true_positives / fired if fired else 0.0

    @property
    def recall(self) -> float:
        true = self.true_positives + self.false_negatives
        return self.true_positives / true if true else 0.0


def scorer_window_report(
    corpus: list[SyntheticFiling],
    dictionary: KeywordDictionary,
    scorer: CandidateScorer,
    n_windows: int = 1000,
    window_chars: int = WINDOW_CHARS,
    seed: int = 0,
) -> WindowReport:
    """Score random positions with no candidate pre-filter.

    The probe cannot consult the keyword matcher (that gate is exactly what
    is being removed), so the exactness feature is pinned at its passed
    value and everything else comes from the layout at the probe position.
    A probe is truly positive when a gold title starts within the window.
    """
    if not corpus:
        raise EmptyCorpus("no documents to probe")
    rng = random.Random(seed)
    docs: list[tuple[DocumentModel, list[CandidateBoundary], list[int]]] = []
    for filing in corpus:
        doc = parse_filing(filing.as_raw())
        candidates = attach_format_signature(doc, keyword_match(doc, dictionary))
        docs.append((doc, candidates, [g.offset for g in filing.gold]))

    tp = fp = fn = tn = 0
    for _ in range(n_windows):
        doc, candidates, gold_offsets = rng.choice(docs)
        run = rng.choice(doc.runs)
        offset = rng.randrange(run.start_offset, run.end_offset)
        probe = CandidateBoundary(
            item=ItemId("1"),
            offset=offset,
            matched_text=doc.plain_text[offset : offset + 16],
            match_kind=MatchKind.KEYWORD_EXACT,
        )
        features = extract_features(doc, probe, candidates)
        fired = scorer.score_candidate(features).decision is Decision.ACCEPT
        truth = any(abs(g - offset) <= window_chars for g in gold_offsets)
        if fired and truth:
            tp += 1
        elif fired:
            fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return WindowReport(
        n_windows=n_windows,
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        true_negatives=tn,
    )


@dataclass
class AblationReport:
    full: EvalReport
    rule_only: EvalReport
    scorer_only: WindowReport


def ablation(
    corpus: list[SyntheticFiling],
    dictionary: KeywordDictionary,
    scorer: CandidateScorer,
    tolerance_chars: int = DEFAULT_TOLERANCE_CHARS,
    n_windows: int = 1000,
    seed: int = 0,
) -> AblationReport:
    """Full pipeline vs. rules alone vs. scorer alone, on one corpus."""
    if scorer is None:
        raise ModelMissing("ablation needs a trained scorer")
    return AblationReport(
        full=evaluate_corpus(
            corpus, dictionary, scorer, ScoringMode.FULL, tolerance_chars
        ),
        rule_only=evaluate_corpus(
            corpus, dictionary, None, ScoringMode.RULE_ONLY, tolerance_chars
        ),
        scorer_only=scorer_window_report(
            corpus, dictionary, scorer, n_windows=n_windows, seed=seed
        ),
    )


def sweep_thresholds(
    corpus: list[SyntheticFiling],
    dictionary: KeywordDictionary,
    scorer: CandidateScorer,
    thresholds: tuple[float, ...] = (0.3, 0.4, 0.5, 0.6, 0.7),
    tolerance_chars: int = DEFAULT_TOLERANCE_CHARS,
) -> list[tuple[float, EvalReport]]:
    """Retrieval at several accept thresholds, for picking an operating point."""
    return [
        (
            t,
            evaluate_corpus(
                corpus,
                dictionary,
                scorer,
                ScoringMode.FULL,
                tolerance_chars,
                threshold=t,
            ),
        )
        for t in thresholds
    ]
