"""Slice an itemized document into per-item text records.

Each record is keyed "{serial}#{part}#{item}" so a whole filing, one part,
or a single item can be fetched with a key prefix. Segment text is cleaned
of page furniture (repeated headers and footers, page numbers, form feeds)
before storage.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .docmodel import DocumentModel
from .errors import MalformedRef, SpanError
from .reconstructor import StructureHypothesis, end_boundaries
from .schema import CANONICAL_ITEMS, ItemId

REPEAT_LINE_MIN = 3
_PAGE_NUMBER_RE = re.compile(r"^(?:page\s+)?-?\s*\d{1,4}\s*-?$", re.IGNORECASE)
_LABELS = "|".join(label for label, _ in CANONICAL_ITEMS)
KEY_RE = re.compile(rf"^(?P<serial>[^#]+)#(?P<part>[1-4])#(?P<item>{_LABELS})$")


@dataclass(frozen=True)
class ItemSegment:
    key: str
    serial: str
    item: ItemId
    start_offset: int
    end_offset: int
    text: str
    flagged: bool = False


def make_key(serial: str, item: ItemId) -> str:
    if "#" in serial or not serial:
        raise MalformedRef(f"serial not usable in a key: {serial!r}")
    return f"{serial}#{item.part}#{item.label}"


def parse_key(key: str) -> tuple[str, int, ItemId]:
    m = KEY_RE.match(key)
    if m is None:
        raise MalformedRef(f"bad segment key: {key!r}")
    item = ItemId(m.group("item"))
    part = int(m.group("part"))
    if item.part != part:
        raise MalformedRef(f"item {item.label} is not in part {part}: {key!r}")
    return m.group("serial"), part, item


def clean_text(text: str, repeated_lines: set[str] | None = None) -> str:
    """Strip page furniture from a segment. Idempotent by construction.

    repeated_lines carries lines seen REPEAT_LINE_MIN or more times across
    the whole document (running headers and footers); page numbers and form
    feeds are recognized per line.
    """
    repeated = repeated_lines or set()
    out: list[str] = []
    for raw_line in text.split("\n"):
        line = raw_line.replace("\f", "").rstrip()
        stripped = line.strip()
        if stripped and stripped in repeated:
            continue
        if stripped and _PAGE_NUMBER_RE.match(stripped):
            continue
        if not stripped:
            line = ""
        out.append(line)
    collapsed: list[str] = []
    for line in out:
        if line == "" and collapsed and collapsed[-1] == "":
            continue
        collapsed.append(line)
    while collapsed and collapsed[0] == "":
        collapsed.pop(0)
    while collapsed and collapsed[-1] == "":
        collapsed.pop()
    return "\n".join(collapsed)


def repeated_lines(doc: DocumentModel) -> set[str]:
    return {
        line
        for line, count in doc.line_frequencies().items()
        if count >= REPEAT_LINE_MIN and line.strip()
    }


def segment(
    doc: DocumentModel,
    structure: StructureHypothesis,
    serial: str,
    flagged_items: frozenset[ItemId] = frozenset(),
) -> list[ItemSegment]:
    """Cut the document at item starts and emit one cleaned record per item."""
    spans = end_boundaries(structure, doc)
    repeats = repeated_lines(doc)
    segments = []
    for item, start, end in spans:
        if not 0 <= start < end <= len(doc.plain_text):
            raise SpanError(f"span [{start}, {end}) outside document for {item}")
        segments.append(
            ItemSegment(
                key=make_key(serial, item),
                serial=serial,
                item=item,
                start_offset=start,
                end_offset=end,
                text=clean_text(doc.plain_text[start:end], repeats),
                flagged=item in flagged_items,
            )
        )
    return segments
