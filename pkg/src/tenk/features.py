"""Fixed-order numeric features describing one candidate boundary.

Every feature lands in [0, 1] by construction, so inference needs no
scaling state from training. The layout booleans come straight from the
format signature; the context features encode the classic false-positive
scenarios: contents tables, running headers, and in-paragraph references.
"""

from __future__ import annotations

import re

import numpy as np

from .docmodel import DocumentModel
from .errors import CandidateMismatch
from .matcher import CandidateBoundary, MatchKind, attach_format_signature

FEATURE_NAMES: tuple[str, ...] = (
    "match_exactness",
    "larger_size",
    "larger_weight",
    "centered",
    "italic",
    "short_line",
    "near_hyperlink",
    "doc_position",
    "in_table",
    "local_item_density",
    "reference_context",
    "follows_part_heading",
)
N_FEATURES = len(FEATURE_NAMES)

EXACTNESS = {
    MatchKind.KEYWORD_EXACT: 1.0,
    MatchKind.KEYWORD_ALIAS: 0.6,
    MatchKind.NUMBER_ONLY: 0.2,
}

DENSITY_RADIUS_CHARS = 600
DENSITY_CAP = 10
REFERENCE_LOOKBEHIND_CHARS = 40
PART_HEADING_LOOKBEHIND_CHARS = 500

# Cue words that introduce a cross-reference ("see Item 8", "discussed in
# Item 7A"). Only the token directly before the candidate counts: "in" or
# "under" deep in ordinary prose must not trip this.
_REFERENCE_CUES = frozenset({"see", "refer", "in", "under", "to", "pursuant", "within"})
_PART_HEADING_RE = re.compile(r"\bpart\s+(iv|i{1,3}|[1-4])\b", re.IGNORECASE)


def _reference_context(before: str) -> bool:
    tokens = before.split()
    if not tokens:
        return False
    return tokens[-1].lstrip("([\"'").lower() in _REFERENCE_CUES


def extract_features(
    doc: DocumentModel,
    candidate: CandidateBoundary,
    all_candidates: list[CandidateBoundary],
) -> np.ndarray:
    """12-dim feature vector for one candidate, all values in [0, 1]."""
    if not (0 <= candidate.offset < len(doc.plain_text)):
        raise CandidateMismatch(f"offset {candidate.offset} outside document")
    sig = candidate.signature
    if sig is None:
        sig = attach_format_signature(doc, [candidate])[0].signature
    run_idx = doc.run_index_at(candidate.offset)
    if run_idx is None:
        raise CandidateMismatch(f"offset {candidate.offset} not inside any run")
    run = doc.runs[run_idx]

    off = candidate.offset
    density = sum(
        1
        for c in all_candidates
        if c is not candidate
        and (c.item, c.offset) != (candidate.item, candidate.offset)
        and abs(c.offset - off) <= DENSITY_RADIUS_CHARS
    )
    before_short = doc.plain_text[max(0, off - REFERENCE_LOOKBEHIND_CHARS):off]
    before_long = doc.plain_text[max(0, off - PART_HEADING_LOOKBEHIND_CHARS):off]

    return np.array(
        [
            EXACTNESS[candidate.match_kind],
            float(sig.larger_size),
            float(sig.larger_weight),
            float(sig.centered),
            float(sig.italic),
            float(sig.short_line),
            float(sig.near_hyperlink),
            off / max(len(doc.plain_text), 1),
            float(run.in_table),
            min(density, DENSITY_CAP) / DENSITY_CAP,
            float(_reference_context(before_short)),
            float(bool(_PART_HEADING_RE.search(before_long))),
        ],
        dtype=np.float64,
    )


def features_matrix(
    doc: DocumentModel, candidates: list[CandidateBoundary]
) -> np.ndarray:
    """Feature rows for every candidate of one document."""
    if not candidates:
        return np.empty((0, N_FEATURES), dtype=np.float64)
    return np.stack([extract_features(doc, c, candidates) for c in candidates])
