"""Shared fixtures: corpora, a trained scorer, and parsed documents.

The expensive pieces (scorer training, the 200-document corpus) are session
scoped so the whole suite pays for them once.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from tenk.dictionary import default_dictionary
from tenk.docmodel import parse_filing
from tenk.ingest import RawFiling
from tenk.matcher import ItemId
from tenk.pipeline import train_default_scorer
from tenk.schema import ALL_ITEMS
from tenk.synth import EVALUATION_CONFIG, GoldStructure, SynthConfig, generate_corpus

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def dictionary():
    return default_dictionary()


@pytest.fixture(scope="session")
def trained_scorer(dictionary):
    return train_default_scorer(dictionary)


@pytest.fixture(scope="session")
def model_file(trained_scorer, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "scorer.json"
    trained_scorer.save(path)
    return path


@pytest.fixture(scope="session")
def eval_corpus(dictionary):
    return generate_corpus(EVALUATION_CONFIG, dictionary.entries)


@pytest.fixture(scope="session")
def small_corpus(dictionary):
    return generate_corpus(SynthConfig(n_docs=8, seed=4242), dictionary.entries)


@pytest.fixture(scope="session")
def parsed_small(small_corpus):
    return [(filing, parse_filing(filing.as_raw())) for filing in small_corpus]


def _nth_offset(text: str, needle: str, occurrence: int) -> int:
    pos = -1
    for _ in range(occurrence):
        pos = text.find(needle, pos + 1)
        if pos < 0:
            raise ValueError(f"label context {needle!r} (occurrence {occurrence}) not found")
    return pos


@pytest.fixture(scope="session")
def labeled_filings():
    """Hand-labeled filings stored under tests/fixtures.

    Each record pairs the parsed document with boundary offsets resolved
    from the context strings in the sidecar label file.
    """
    records = []
    for gold_path in sorted(FIXTURE_DIR.glob("*.gold.json")):
        meta = json.loads(gold_path.read_text(encoding="utf-8"))
        source = next(
            p
            for p in FIXTURE_DIR.glob(meta["serial"] + ".*")
            if not p.name.endswith(".gold.json")
        )
        raw = RawFiling(serial=meta["serial"], bytes=source.read_bytes(), fetched_at=0.0)
        doc = parse_filing(raw)
        assignments = tuple(
            (ItemId(row["item"]), _nth_offset(doc.plain_text, row["context"], row["occurrence"]))
            for row in meta["items"]
        )
        labeled = {item for item, _ in assignments}
        gold = GoldStructure(
            serial=meta["serial"],
            assignments=assignments,
            intentionally_missing=tuple(i for i in ALL_ITEMS if i not in labeled),
        )
        records.append({"meta": meta, "raw": raw, "doc": doc, "gold": gold})
    assert len(records) >= 3
    return records
