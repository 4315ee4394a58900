"""Structure reconstruction: pick one start per item, in order, or skip it.

Scored candidates go in; a single coherent hypothesis comes out. The
dynamic program maximizes the summed log-odds of the selected candidates
minus a penalty per skipped item, under strictly increasing item order and
document offsets. Log-odds make a 0.5-probability candidate score-neutral,
so the skip penalty means the same thing in every document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .docmodel import DocumentModel
from .matcher import CandidateBoundary
from .schema import ALL_ITEMS, ITEM_INTRODUCED, ItemId

DEFAULT_SKIP_PENALTY = 1.0
TOC_MAX_DOC_FRACTION = 0.30
TOC_MIN_DISTINCT_ITEMS = 6
TOC_MIN_LINK_FRACTION = 0.5
TOC_CLUSTER_GAP_CHARS = 500
PROB_EPS = 1e-6


@dataclass(frozen=True)
class TocRegion:
    start_offset: int
    end_offset: int

    def __post_init__(self):
        if self.start_offset >= self.end_offset:
            raise ValueError("TocRegion start must precede end")

    def contains(self, offset: int) -> bool:
        return self.start_offset <= offset < self.end_offset


@dataclass(frozen=True)
class Assignment:
    item: ItemId
    offset: int
    probability: float


@dataclass(frozen=True)
class StructureHypothesis:
    assignments: tuple[Assignment, ...]
    total_score: float
    skipped_items: tuple[ItemId, ...]


@dataclass(frozen=True)
class ReconstructionResult:
    structure: StructureHypothesis
    flagged: tuple[tuple[ItemId, str], ...]
    toc: TocRegion | None

    @property
    def is_empty(self) -> bool:
        return not self.structure.assignments


def detect_toc(
    doc: DocumentModel,
    candidates: list[CandidateBoundary],
    max_fraction: float = TOC_MAX_DOC_FRACTION,
    min_distinct_items: int = TOC_MIN_DISTINCT_ITEMS,
    min_link_fraction: float = TOC_MIN_LINK_FRACTION,
    cluster_gap: int = TOC_CLUSTER_GAP_CHARS,
) -> TocRegion | None:
    """Find the table-of-contents candidate cluster near the document head.

    A cluster is a maximal run of candidates with small inter-candidate gaps;
    it qualifies as the TOC when it names enough distinct items and most of
    its members sit near hyperlinks. Only the head of the document is
    considered; item lists deeper in the body are left alone.
    """
    limit = max_fraction * len(doc.plain_text)
    front = sorted(
        (c for c in candidates if c.offset < limit), key=lambda c: c.offset
    )
    if not front:
        return None
    clusters: list[list[CandidateBoundary]] = [[front[0]]]
    for cand in front[1:]:
        if cand.offset - clusters[-1][-1].offset <= cluster_gap:
            clusters[-1].append(cand)
        else:
            clusters.append([cand])
    for cluster in clusters:
        # A contents listing walks the items in order. When the order drops
        # (16 back to 1), the body has started, so the region must stop
        # before it even if the gap is small.
        trimmed = [cluster[0]]
        for cand in cluster[1:]:
            if cand.item.order > trimmed[-1].item.order:
                trimmed.append(cand)
            else:
                break
        distinct = {c.item for c in trimmed}
        if len(distinct) < min_distinct_items:
            continue
        linked = sum(
            1 for c in trimmed if c.signature is not None and c.signature.near_hyperlink
        )
        if linked >= min_link_fraction * len(trimmed):
            last = trimmed[-1]
            return TocRegion(trimmed[0].offset, last.offset + len(last.matched_text))
    return None


def log_odds(probability: float) -> float:
    p = min(max(probability, PROB_EPS), 1.0 - PROB_EPS)
    return math.log(p / (1.0 - p))


def skip_penalties(
    skip_penalty: float, fiscal_year: int | None = None
) -> dict[ItemId, float]:
    """Per-item skip cost; items postdating the filing's fiscal year are free."""
    penalties = {item: skip_penalty for item in ALL_ITEMS}
    if fiscal_year is not None:
        for label, introduced in ITEM_INTRODUCED.items():
            if fiscal_year < introduced:
                penalties[ItemId(label)] = 0.0
    return penalties


def structure_score(
    selected: list[CandidateBoundary], penalties: dict[ItemId, float]
) -> float:
    """Canonical objective value for a feasible selection.

    Walks items in canonical order so the float accumulation order is fixed;
    the DP and the brute-force oracle both report through this function.
    """
    by_item = {c.item: c for c in selected}
    total = 0.0
    for item in ALL_ITEMS:
        if item in by_item:
            total += log_odds(by_item[item].score)  # type: ignore[arg-type]
        else:
            total -= penalties[item]
    return total


def reconstruct(
    candidates: list[CandidateBoundary],
    toc: TocRegion | None = None,
    skip_penalty: float = DEFAULT_SKIP_PENALTY,
    threshold: float = 0.5,
    fiscal_year: int | None = None,
) -> ReconstructionResult:
    """Select the best monotone item/offset chain from scored candidates."""
    for c in candidates:
        if c.score is None:
            raise ValueError(f"candidate {c.item}@{c.offset} is unscored")
    pool = [c for c in candidates if toc is None or not toc.contains(c.offset)]
    pool.sort(key=lambda c: (c.offset, c.item.order))
    penalties = skip_penalties(skip_penalty, fiscal_year)

    # Chain weight: selecting a candidate earns its log-odds and avoids the
    # item's skip penalty, so its marginal value is the sum of the two.
    weights = [log_odds(c.score) + penalties[c.item] for c in pool]  # type: ignore[arg-type]

    # dp[i]: best (weight sum, offsets tuple for tie-breaks, chain indices)
    # over chains ending at pool[i]. Ties prefer lexicographically smaller
    # offset tuples, which keeps output deterministic.
    best_sum: list[float] = [0.0] * len(pool)
    best_chain: list[tuple[int, ...]] = [()] * len(pool)
    for i, cand in enumerate(pool):
        pick_sum, pick_chain = weights[i], (i,)
        for j in range(i):
            prev = pool[j]
            if prev.item.order < cand.item.order and prev.offset < cand.offset:
                cand_sum = best_sum[j] + weights[i]
                cand_chain = best_chain[j] + (i,)
                if cand_sum > pick_sum or (
                    cand_sum == pick_sum
                    and _offsets(pool, cand_chain) < _offsets(pool, pick_chain)
                ):
                    pick_sum, pick_chain = cand_sum, cand_chain
        best_sum[i] = pick_sum
        best_chain[i] = pick_chain

    winner_sum, winner_chain = 0.0, ()
    for i in range(len(pool)):
        if best_sum[i] > winner_sum or (
            best_sum[i] == winner_sum
            and _offsets(pool, best_chain[i]) < _offsets(pool, winner_chain)
        ):
            winner_sum, winner_chain = best_sum[i], best_chain[i]

    selected = [pool[i] for i in winner_chain]
    assignments = tuple(
        Assignment(item=c.item, offset=c.offset, probability=float(c.score))  # type: ignore[arg-type]
        for c in selected
    )
    assigned_items = {a.item for a in assignments}
    skipped = tuple(item for item in ALL_ITEMS if item not in assigned_items)
    structure = StructureHypothesis(
        assignments=assignments,
        total_score=structure_score(selected, penalties),
        skipped_items=skipped,
    )
    flagged = tuple(
        (a.item, "below_threshold") for a in assignments if a.probability < threshold
    )
    return ReconstructionResult(structure=structure, flagged=flagged, toc=toc)


def _offsets(pool: list[CandidateBoundary], chain: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(pool[i].offset for i in chain)


_SIGNATURE_HEADINGS = {"signature", "signatures"}


def end_boundaries(
    structure: StructureHypothesis, doc: DocumentModel
) -> list[tuple[ItemId, int, int]]:
    """Close each item at the next item's start; the last at the signature block."""
    assignments = structure.assignments
    if not assignments:
        return []
    last_start = assignments[-1].offset
    doc_end = len(doc.plain_text)
    for run in doc.runs:
        if run.start_offset <= last_start or not run.own_line:
            continue
        if run.text.strip().rstrip(".:").lower() in _SIGNATURE_HEADINGS:
            doc_end = run.start_offset
            break
    spans = []
    for i, a in enumerate(assignments):
        end = assignments[i + 1].offset if i + 1 < len(assignments) else doc_end
        spans.append((a.item, a.offset, end))
    return spans
