"""Keyword matching and layout signature annotation."""

from __future__ import annotations

import pytest

from tenk.dictionary import default_dictionary
from tenk.docmodel import parse_filing, parse_html, parse_plaintext
from tenk.errors import CandidateMismatch
from tenk.ingest import RawFiling
from tenk.matcher import (
    CandidateBoundary,
    MatchKind,
    attach_format_signature,
    keyword_match,
    normalize_for_match,
)
from tenk.schema import ItemId


def _doc(data: bytes):
    return parse_filing(RawFiling(serial="M-1", bytes=data, fetched_at=0.0))


@pytest.fixture(scope="module")
def d():
    return default_dictionary()


def test_normalize_collapses_and_maps_back():
    text = "ITEM  1A. – RISK\nFACTORS"
    norm, index_map = normalize_for_match(text)
    assert norm == "item 1a. - risk factors"
    assert len(index_map) == len(norm)
    # every mapped index points at or before the source character
    pos = norm.find("risk")
    assert text[index_map[pos]] == "R"


def test_normalize_drops_soft_hyphens():
    norm, _ = normalize_for_match("Busi­ness")
    assert norm == "business"


def test_number_plus_title_is_exact_match(d):
    doc = _doc(b"ANNUAL\n\nItem 1. Business\n\nWe make things.\n")
    candidates = keyword_match(doc, d)
    exact = [c for c in candidates if c.match_kind is MatchKind.KEYWORD_EXACT]
    assert len(exact) == 1
    c = exact[0]
    assert c.item == ItemId("1")
    assert doc.plain_text[c.offset :].startswith("Item 1. Business")
    assert c.matched_text == "Item 1. Business"


def test_bare_alias_matches_without_number(d):
    doc = _doc(b"REPORT\n\nRisk Factors\n\nplenty of them\n")
    candidates = keyword_match(doc, d)
    assert any(
        c.item == ItemId("1A") and c.match_kind is MatchKind.KEYWORD_ALIAS
        for c in candidates
    )


def test_number_without_known_title_is_number_only(d):
    doc = _doc(b"REPORT\n\nItem 3. Unusual Heading Nobody Uses\n")
    candidates = [c for c in keyword_match(doc, d) if c.item == ItemId("3")]
    assert len(candidates) == 1
    assert candidates[0].match_kind is MatchKind.NUMBER_ONLY


def test_roman_numerals_match(d):
    doc = _doc(b"REPORT\n\nITEM VII. Management's Discussion and Analysis of Financial Condition and Results of Operations\n")
    assert any(c.item == ItemId("7") for c in keyword_match(doc, d))


def test_title_split_across_styled_runs(d):
    html = b"<html><body><p><b>Item 1A.</b> <i>Risk</i> Factors</p></body></html>"
    doc = parse_html(RawFiling(serial="M-2", bytes=html, fetched_at=0.0))
    exact = [c for c in keyword_match(doc, d) if c.match_kind is MatchKind.KEYWORD_EXACT]
    assert [c.item for c in exact] == [ItemId("1A")]


def test_nested_alias_not_double_counted(d):
    # "Properties" inside "Item 2. Properties" is the same heading, not a
    # second candidate; a standalone mention elsewhere still counts.
    doc = _doc(b"X\n\nItem 2. Properties\n\ntext about our properties portfolio\n")
    twos = [c for c in keyword_match(doc, d) if c.item == ItemId("2")]
    offsets = {c.offset for c in twos}
    assert len(twos) == len(offsets)
    exact = [c for c in twos if c.match_kind is MatchKind.KEYWORD_EXACT]
    assert len(exact) == 1
    inside = [
        c
        for c in twos
        if exact[0].offset < c.offset < exact[0].offset + len(exact[0].matched_text)
    ]
    assert inside == []


def test_candidates_sorted_and_deduplicated(d, parsed_small):
    for _, doc in parsed_small:
        candidates = keyword_match(doc, d)
        keys = [(c.offset, c.item.order) for c in candidates]
        assert keys == sorted(keys)
        assert len({(c.item, c.offset) for c in candidates}) == len(candidates)


def test_matching_is_pure(d, parsed_small):
    _, doc = parsed_small[0]
    assert keyword_match(doc, d) == keyword_match(doc, d)


def test_dictionary_order_does_not_change_output(d, parsed_small):
    from tenk.dictionary import KeywordDictionary

    _, doc = parsed_small[0]
    reordered = KeywordDictionary(
        entries=dict(reversed(list(d.entries.items()))), version=d.version
    )
    assert {(c.item, c.offset) for c in keyword_match(doc, d)} == {
        (c.item, c.offset) for c in keyword_match(doc, reordered)
    }


def test_overgeneration_covers_gold(d, parsed_small):
    for filing, doc in parsed_small:
        candidates = keyword_match(doc, d)
        assert len(candidates) >= len(filing.gold)


def test_signature_requires_valid_offset(d):
    doc = _doc(b"REPORT\n\nItem 1. Business\n")
    bogus = CandidateBoundary(
        item=ItemId("1"), offset=10_000, matched_text="x", match_kind=MatchKind.NUMBER_ONLY
    )
    with pytest.raises(CandidateMismatch):
        attach_format_signature(doc, [bogus])


def test_plaintext_signature_has_layout_flags_off(d):
    doc = parse_plaintext(
        RawFiling(serial="M-3", bytes=b"REPORT\n\nItem 1. Business\n", fetched_at=0.0)
    )
    candidates = attach_format_signature(doc, keyword_match(doc, d))
    for c in candidates:
        assert c.signature.short_line
        assert not c.signature.larger_size
        assert not c.signature.near_hyperlink


def test_larger_size_and_weight_against_window(d):
    parts = [b"<html><body>"]
    for i in range(30):
        parts.append(b"<p>body paragraph %d with ordinary formatting</p>" % i)
    parts.append(b'<p style="font-size:18pt;font-weight:bold">Item 1. Business</p>')
    for i in range(30):
        parts.append(b"<p>more ordinary text %d</p>" % i)
    parts.append(b"</body></html>")
    doc = parse_html(RawFiling(serial="M-4", bytes=b"".join(parts), fetched_at=0.0))
    candidates = attach_format_signature(doc, keyword_match(doc, d))
    c = next(c for c in candidates if c.match_kind is MatchKind.KEYWORD_EXACT)
    assert c.signature.larger_size
    assert c.signature.larger_weight
    assert c.signature.short_line


def test_near_hyperlink_direct_and_table_sibling(d):
    html = (
        b"<html><body>"
        b'<p><a href="#i1">Item 1. Business</a></p>'
        b'<table><tr><td>Item 2. Properties</td><td><a href="#i2">24</a></td></tr></table>'
        b"<p>Item 3. Legal Proceedings</p>"
        b"</body></html>"
    )
    doc = parse_html(RawFiling(serial="M-5", bytes=html, fetched_at=0.0))
    candidates = attach_format_signature(doc, keyword_match(doc, d))
    sig = {c.item.label: c.signature for c in candidates if c.match_kind is MatchKind.KEYWORD_EXACT}
    assert sig["1"].near_hyperlink, "anchor around the text itself"
    assert sig["2"].near_hyperlink, "anchor on the sibling table cell"
    assert not sig["3"].near_hyperlink, "plain paragraph, no anchor nearby"
