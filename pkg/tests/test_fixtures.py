"""End-to-end checks against hand-labeled filings in three period styles.

The fixture documents replicate layout conventions seen on EDGAR across
two decades: a modern styled-HTML report, a sparse mid-2000s HTML report
built from font tags and centered blocks, and a hard-wrapped plain-text
report with a dotted-leader contents table. Labels live in sidecar JSON
files as context strings, so offsets are recomputed from the documents
rather than stored.
"""

from __future__ import annotations

import pytest

from tenk.docmodel import DocumentFormat, detect_format
from tenk.evaluation import judge_document
from tenk.pipeline import detect_fiscal_year, run_pipeline
from tenk.schema import ALL_ITEMS
from tenk.segmenter import parse_key

LABEL_TOLERANCE_CHARS = 200


@pytest.fixture(scope="module")
def itemized_filings(labeled_filings, dictionary, trained_scorer):
    return [
        (record, run_pipeline(record["doc"], dictionary, scorer=trained_scorer))
        for record in labeled_filings
    ]


def test_fixture_set_spans_formats_and_eras(labeled_filings):
    formats = {record["meta"]["format"] for record in labeled_filings}
    years = {record["meta"]["fiscal_year"] for record in labeled_filings}
    assert formats == {"html", "plain_text"}
    assert min(years) < 2010 < max(years)


def test_detected_format_matches_labels(labeled_filings):
    for record in labeled_filings:
        detected = detect_format(record["raw"])
        assert detected is DocumentFormat(record["meta"]["format"]), record["gold"].serial


def test_detected_fiscal_year_matches_labels(labeled_filings):
    for record in labeled_filings:
        year = detect_fiscal_year(record["doc"])
        assert year == record["meta"]["fiscal_year"], record["gold"].serial


def test_label_contexts_resolve_unambiguously(labeled_filings):
    # each context string appears exactly as often as its occurrence rank,
    # so the resolved boundary is the last occurrence and cannot drift
    for record in labeled_filings:
        text = record["doc"].plain_text
        for row in record["meta"]["items"]:
            assert text.count(row["context"]) == row["occurrence"], (
                record["gold"].serial,
                row["item"],
            )
        offsets = [offset for _, offset in record["gold"].assignments]
        assert offsets == sorted(offsets)
        assert len(set(offsets)) == len(offsets)


def test_itemization_matches_hand_labels(itemized_filings):
    for record, result in itemized_filings:
        judgment = judge_document(
            record["gold"],
            result.reconstruction.structure.assignments,
            tolerance_chars=LABEL_TOLERANCE_CHARS,
        )
        assert judgment.passed, (record["gold"].serial, judgment.reasons)
        assert judgment.candidates_correct == len(record["gold"].assignments)


def test_clean_filings_raise_no_review_flags(itemized_filings):
    for record, result in itemized_filings:
        assert result.flagged == (), record["gold"].serial
        assert result.needs_review is False, record["gold"].serial


def test_absent_items_are_skipped_in_canonical_order(itemized_filings):
    for record, result in itemized_filings:
        labeled = {item for item, _ in record["gold"].assignments}
        expected = tuple(i for i in ALL_ITEMS if i not in labeled)
        assert result.reconstruction.structure.skipped_items == expected


def test_segments_cover_labeled_items(itemized_filings):
    for record, result in itemized_filings:
        serial = record["gold"].serial
        labels = [item.label for item, _ in record["gold"].assignments]
        assert [seg.item.label for seg in result.segments] == labels
        for seg in result.segments:
            parsed_serial, part, item = parse_key(seg.key)
            assert parsed_serial == serial
            assert part == seg.item.part
            assert item == seg.item
            assert seg.text.strip()
            assert 0 <= seg.start_offset < seg.end_offset <= len(record["doc"].plain_text)


def test_page_furniture_stays_out_of_segments(itemized_filings):
    # every fixture carries a repeated page footer or header line; cleaned
    # segment text must not retain it
    furniture = {
        "0000950170-23-027948": "Meridian Instruments Corporation | 2022 Form 10-K",
        "0001144204-14-023456": "CALDERA FOOD BRANDS, INC. - 2013 FORM 10-K",
    }
    checked = 0
    for record, result in itemized_filings:
        line = furniture.get(record["gold"].serial)
        if line is None:
            continue
        assert record["doc"].plain_text.count(line) >= 3
        for seg in result.segments:
            assert line not in seg.text, seg.key
        checked += 1
    assert checked == len(furniture)
