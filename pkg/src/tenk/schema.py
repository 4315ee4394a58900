"""Canonical Form 10-K item schema: 4 parts, 22 items, and their total order.

The schema is the fixed vocabulary every other module works against. It is
kept parameterizable (other form types could ship their own table) but only
the 10-K table ships here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering

# (label, part) in filing order. Item 6 is "[Reserved]" in current guidance;
# 9C and 16 were added to the form over time and are often absent.
CANONICAL_ITEMS: tuple[tuple[str, int], ...] = (
    ("1", 1),
    ("1A", 1),
    ("1B", 1),
    ("2", 1),
    ("3", 1),
    ("4", 1),
    ("5", 2),
    ("6", 2),
    ("7", 2),
    ("7A", 2),
    ("8", 2),
    ("9", 2),
    ("9A", 2),
    ("9B", 2),
    ("9C", 2),
    ("10", 3),
    ("11", 3),
    ("12", 3),
    ("13", 3),
    ("14", 3),
    ("15", 4),
    ("16", 4),
)

PART_OF_LABEL: dict[str, int] = {label: part for label, part in CANONICAL_ITEMS}
ORDER_OF_LABEL: dict[str, int] = {
    label: i for i, (label, _) in enumerate(CANONICAL_ITEMS)
}

# First fiscal year each late-addition item applies to; used to zero the
# skip penalty for filings that predate an item.
ITEM_INTRODUCED: dict[str, int] = {"16": 2016, "9C": 2021}

ROMAN_NUMERALS: dict[str, int] = {
    "i": 1, "ii": 2, "iii": 3, "iv": 4, "v": 5, "vi": 6, "vii": 7,
    "viii": 8, "ix": 9, "x": 10, "xi": 11, "xii": 12, "xiii": 13,
    "xiv": 14, "xv": 15, "xvi": 16,
}


@total_ordering
@dataclass(frozen=True)
class ItemId:
    """One of the 22 canonical items, ordered by filing sequence."""

    label: str

    def __post_init__(self):
        if self.label not in PART_OF_LABEL:
            raise ValueError(f"not a canonical 10-K item label: {self.label!r}")

    @property
    def part(self) -> int:
        return PART_OF_LABEL[self.label]

    @property
    def order(self) -> int:
        return ORDER_OF_LABEL[self.label]

    @property
    def number(self) -> int:
        """Numeric component of the label (the 7 in 7A)."""
        return int(self.label.rstrip("ABC"))

    @property
    def letter(self) -> str:
        """Letter component of the label, empty when absent."""
        return self.label[len(str(self.number)):]

    def __lt__(self, other: "ItemId") -> bool:
        return self.order < other.order

    def __str__(self) -> str:
        return self.label


ALL_ITEMS: tuple[ItemId, ...] = tuple(ItemId(label) for label, _ in CANONICAL_ITEMS)


def item_from_number(number: int, letter: str = "") -> ItemId | None:
    """Map a matched number and optional letter to a canonical item, if any."""
    label = f"{number}{letter.upper()}"
    if label in PART_OF_LABEL:
        return ItemId(label)
    return None
