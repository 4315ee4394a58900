"""Candidate generation: keyword matching plus layout-format signatures.

Deliberately over-generates: table-of-contents rows, running headers, and
in-paragraph references all become candidates. Scoring and structure
reconstruction are responsible for rejecting them, matching the division
of labor across pipeline stages.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from statistics import median

from .dictionary import KeywordDictionary
from .docmodel import DocumentFormat, DocumentModel
from .errors import CandidateMismatch
from .schema import ROMAN_NUMERALS, ItemId, item_from_number


class MatchKind(Enum):
    KEYWORD_EXACT = "keyword_exact"  # "Item N" plus a known alias
    KEYWORD_ALIAS = "keyword_alias"  # known alias without "Item N"
    NUMBER_ONLY = "number_only"      # "Item N" with no known alias after it


@dataclass(frozen=True)
class FormatSignature:
    larger_size: bool = False
    larger_weight: bool = False
    centered: bool = False
    italic: bool = False
    short_line: bool = False
    near_hyperlink: bool = False


@dataclass(frozen=True)
class CandidateBoundary:
    item: ItemId
    offset: int
    matched_text: str
    match_kind: MatchKind
    signature: FormatSignature | None = None
    score: float | None = None

    def with_signature(self, signature: FormatSignature) -> "CandidateBoundary":
        return replace(self, signature=signature)

    def with_score(self, score: float) -> "CandidateBoundary":
        return replace(self, score=score)


_DASHES = {"‐": "-", "‑": "-", "‒": "-", "–": "-", "—": "-", "―": "-"}
_QUOTES = {"‘": "'", "’": "'", "“": '"', "”": '"'}
_SOFT_HYPHEN = "­"


def normalize_for_match(text: str) -> tuple[str, list[int]]:
    """Case-fold, collapse whitespace, fold dashes/quotes, drop soft hyphens.

    Returns the normalized string and a map from each normalized index back
    to the originating index in `text`, so match positions survive the trip.
    """
    out: list[str] = []
    index_map: list[int] = []
    pending_ws = False
    for i, ch in enumerate(text):
        if ch == _SOFT_HYPHEN:
            continue
        if ch.isspace():
            pending_ws = True
            continue
        ch = _DASHES.get(ch, ch)
        ch = _QUOTES.get(ch, ch)
        if pending_ws and out:
            out.append(" ")
            index_map.append(i - 1)
            pending_ws = False
        pending_ws = False
        for low in ch.lower():
            out.append(low)
            index_map.append(i)
    return "".join(out), index_map


# "item" + arabic or roman number + optional A/B/C letter.
_ITEM_NUM_RE = re.compile(r"\bitem ?((?:[0-9]{1,2})|(?:[ivx]{1,4}))([a-c])?\b")
# Characters allowed between the item number and its title.
_SEPARATORS = " .:;,–-()[]'\""


def _normalized_aliases(dictionary: KeywordDictionary) -> dict[ItemId, list[str]]:
    norm: dict[ItemId, list[str]] = {}
    for item, aliases in dictionary.entries.items():
        seen = []
        for alias in aliases:
            text, _ = normalize_for_match(alias)
            if text and text not in seen:
                seen.append(text)
        # Longest first so the lookahead prefers the most specific title.
        norm[item] = sorted(seen, key=len, reverse=True)
    return norm


def _is_word_char(ch: str) -> bool:
    return ch.isalnum()


def keyword_match(doc: DocumentModel, dictionary: KeywordDictionary) -> list[CandidateBoundary]:
    """All places the item keywords appear, as unfiltered candidates."""
    norm, index_map = normalize_for_match(doc.plain_text)
    aliases = _normalized_aliases(dictionary)
    found: dict[tuple[ItemId, int], CandidateBoundary] = {}
    # Spans already consumed by an exact match, per item, so the alias pass
    # does not re-emit the title text inside them.
    exact_spans: dict[ItemId, list[tuple[int, int]]] = {}

    def original_span(norm_start: int, norm_end: int) -> tuple[int, int]:
        return index_map[norm_start], index_map[norm_end - 1] + 1

    def emit(item: ItemId, norm_start: int, norm_end: int, kind: MatchKind):
        start, end = original_span(norm_start, norm_end)
        candidate = CandidateBoundary(
            item=item,
            offset=start,
            matched_text=doc.plain_text[start:end],
            match_kind=kind,
        )
        key = (item, start)
        prior = found.get(key)
        if prior is None or _rank(candidate) > _rank(prior):
            found[key] = candidate

    for m in _ITEM_NUM_RE.finditer(norm):
        token = m.group(1)
        if token.isdigit():
            number = int(token)
        else:
            number = ROMAN_NUMERALS.get(token, 0)
        item = item_from_number(number, m.group(2) or "")
        if item is None:
            continue
        j = m.end()
        while j < len(norm) and norm[j] in _SEPARATORS:
            j += 1
        matched_alias = None
        for alias in aliases[item]:
            if norm.startswith(alias, j):
                end = j + len(alias)
                if end == len(norm) or not _is_word_char(norm[end]):
                    matched_alias = (j, end)
                    break
        if matched_alias:
            emit(item, m.start(), matched_alias[1], MatchKind.KEYWORD_EXACT)
            exact_spans.setdefault(item, []).append((m.start(), matched_alias[1]))
        else:
            emit(item, m.start(), m.end(), MatchKind.NUMBER_ONLY)

    for item, item_aliases in aliases.items():
        # Aliases come longest-first, and every accepted span is recorded, so
        # a shorter alias nested in a longer hit of the same item is skipped
        # ("Properties" inside "Description of Properties" is one heading).
        spans = list(exact_spans.get(item, []))
        for alias in item_aliases:
            pos = norm.find(alias)
            while pos != -1:
                end = pos + len(alias)
                boundary_ok = (pos == 0 or not _is_word_char(norm[pos - 1])) and (
                    end == len(norm) or not _is_word_char(norm[end])
                )
                inside_prior = any(s <= pos < e for s, e in spans)
                if boundary_ok and not inside_prior:
                    emit(item, pos, end, MatchKind.KEYWORD_ALIAS)
                    spans.append((pos, end))
                pos = norm.find(alias, pos + 1)

    return sorted(found.values(), key=lambda c: (c.offset, c.item.order))


def _rank(candidate: CandidateBoundary) -> tuple[int, int]:
    kind_rank = {MatchKind.KEYWORD_EXACT: 2, MatchKind.KEYWORD_ALIAS: 1, MatchKind.NUMBER_ONLY: 0}
    return kind_rank[candidate.match_kind], len(candidate.matched_text)


SIZE_RATIO = 1.15          # "relatively larger" threshold vs. window median
SIZE_WINDOW_RUNS = 20      # runs on each side forming the comparison window
SHORT_LINE_MAX_CHARS = 120
HYPERLINK_NEIGHBOR_RUNS = 2
DEFAULT_FONT_PT = 12.0


def attach_format_signature(
    doc: DocumentModel, candidates: list[CandidateBoundary]
) -> list[CandidateBoundary]:
    """Annotate each candidate with layout signals from its run and window."""
    out = []
    for candidate in candidates:
        idx = doc.run_index_at(candidate.offset)
        if idx is None:
            raise CandidateMismatch(
                f"candidate at offset {candidate.offset} not inside any run"
            )
        run = doc.runs[idx]
        short_line = run.own_line and len(run.text) <= SHORT_LINE_MAX_CHARS
        if doc.format is DocumentFormat.PLAIN_TEXT:
            out.append(candidate.with_signature(FormatSignature(short_line=short_line)))
            continue
        lo = max(0, idx - SIZE_WINDOW_RUNS)
        hi = min(len(doc.runs), idx + SIZE_WINDOW_RUNS + 1)
        window = [doc.runs[k] for k in range(lo, hi) if k != idx]
        sizes = [r.font_size if r.font_size is not None else DEFAULT_FONT_PT for r in window]
        run_size = run.font_size if run.font_size is not None else DEFAULT_FONT_PT
        larger_size = bool(sizes) and run_size > SIZE_RATIO * median(sizes)
        bold_neighbors = sum(1 for r in window if r.bold)
        larger_weight = run.bold and (not window or bold_neighbors * 2 <= len(window))
        # The neighbor window exists for table rows whose anchor wraps a
        # sibling cell, not the candidate's own cell. Outside a table it
        # would pick up unrelated links in adjacent paragraphs, so there
        # only the candidate's run counts.
        near = run.in_hyperlink
        if run.in_table and not near:
            near = any(
                doc.runs[k].in_hyperlink and doc.runs[k].in_table
                for k in range(max(0, idx - HYPERLINK_NEIGHBOR_RUNS),
                               min(len(doc.runs), idx + HYPERLINK_NEIGHBOR_RUNS + 1))
            )
        out.append(
            candidate.with_signature(
                FormatSignature(
                    larger_size=larger_size,
                    larger_weight=larger_weight,
                    centered=run.centered,
                    italic=run.italic,
                    short_line=short_line,
                    near_hyperlink=near,
                )
            )
        )
    return out
