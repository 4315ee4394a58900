"""Scorer training, decision rule, persistence, and the external hook."""

from __future__ import annotations

import json
import logging

import httpx
import numpy as np
import pytest

from tenk.dictionary import default_dictionary
from tenk.docmodel import parse_filing
from tenk.errors import ConfigError, DegenerateData, ExternalUnavailable
from tenk.features import N_FEATURES
from tenk.ingest import RawFiling
from tenk.matcher import attach_format_signature, keyword_match
from tenk.scorer import (
    CandidateScorer,
    Decision,
    ExternalScorerConfig,
    LabeledCandidate,
    TrainConfig,
    logistic_gradient,
    logistic_loss,
    score_external,
    score_with_fallback,
    train_scorer,
)

from oracles import finite_difference_gradient, relative_error


def _random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 60))
    X = rng.normal(size=(n, N_FEATURES))
    y = rng.integers(0, 2, size=n).astype(np.float64)
    y[0], y[1] = 0.0, 1.0  # guarantee both classes
    weights = rng.normal(scale=0.8, size=N_FEATURES)
    bias = float(rng.normal())
    l2 = float(rng.uniform(0.0, 0.01))
    return X, y, weights, bias, l2


@pytest.mark.parametrize("seed", [11, 23, 37, 41, 59])
def test_analytic_gradient_matches_finite_difference(seed):
    X, y, weights, bias, l2 = _random_instance(seed)
    grad_w, grad_b = logistic_gradient(X, y, weights, bias, l2)
    fd_w, fd_b = finite_difference_gradient(logistic_loss, X, y, weights, bias, l2)
    analytic = np.append(grad_w, grad_b)
    numeric = np.append(fd_w, fd_b)
    assert relative_error(analytic, numeric) <= 1e-4


def test_training_is_bit_deterministic():
    X, y, *_ = _random_instance(7)
    a = CandidateScorer().fit(X, y)
    b = CandidateScorer().fit(X, y)
    assert a.weights_.tobytes() == b.weights_.tobytes()
    assert a.bias_ == b.bias_


def test_separable_data_learned_perfectly():
    rng = np.random.default_rng(3)
    X = rng.uniform(size=(80, N_FEATURES))
    y = (X[:, 0] > 0.5).astype(int)
    y[:2] = [0, 1]
    X[y == 1, 0] += 2.0  # widen the margin
    scorer = CandidateScorer(epochs=2000).fit(X, y)
    assert scorer.score(X, y) == 1.0


def test_probability_monotone_in_decision():
    scorer = CandidateScorer(threshold=0.5)
    grid = np.linspace(0.0, 1.0, 101)
    flags = [scorer.decide(p) is Decision.ACCEPT for p in grid]
    # once accepting, always accepting for any higher probability
    assert flags == sorted(flags)


def test_exact_threshold_is_accept():
    scorer = CandidateScorer(threshold=0.5)
    assert scorer.decide(0.5) is Decision.ACCEPT
    assert scorer.decide(np.nextafter(0.5, 0.0)) is Decision.REVIEW


def test_empty_training_set_rejected():
    with pytest.raises(DegenerateData):
        CandidateScorer().fit(np.empty((0, N_FEATURES)), np.empty(0))
    with pytest.raises(DegenerateData):
        train_scorer([])


def test_single_class_rejected():
    X = np.ones((5, N_FEATURES))
    with pytest.raises(DegenerateData):
        CandidateScorer().fit(X, np.ones(5))


def test_bad_threshold_rejected():
    X, y, *_ = _random_instance(5)
    with pytest.raises(ConfigError):
        CandidateScorer(threshold=1.5).fit(X, y)


def test_train_scorer_matches_direct_fit():
    X, y, *_ = _random_instance(13)
    data = [
        LabeledCandidate(features=tuple(row), label=bool(lab))
        for row, lab in zip(X, y)
    ]
    via_helper = train_scorer(data, TrainConfig(epochs=50))
    direct = CandidateScorer(epochs=50).fit(X, y)
    assert via_helper.weights_.tobytes() == direct.weights_.tobytes()


def test_save_load_round_trip(tmp_path):
    X, y, *_ = _random_instance(17)
    scorer = CandidateScorer(threshold=0.4).fit(X, y)
    path = tmp_path / "model.json"
    scorer.save(path)
    loaded = CandidateScorer.load(path)
    assert loaded.threshold == 0.4
    assert np.array_equal(loaded.weights_, scorer.weights_)
    assert np.array_equal(loaded.predict_proba(X), scorer.predict_proba(X))


def test_load_rejects_unknown_format(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"format": "something-else", "weights": []}))
    with pytest.raises(ConfigError):
        CandidateScorer.load(path)


def _doc_and_candidate():
    doc = parse_filing(
        RawFiling(serial="S-1", bytes=b"HEAD\n\nItem 1. Business\n", fetched_at=0.0)
    )
    cands = attach_format_signature(doc, keyword_match(doc, default_dictionary()))
    return doc, cands[0], cands


def _external(handler):
    return ExternalScorerConfig(
        url="http://scorer.test/verify", transport=httpx.MockTransport(handler)
    )


def test_external_scorer_probability_and_payload():
    seen = {}

    def handler(request):
        seen.update(json.loads(request.content))
        return httpx.Response(200, json={"probability": 0.91})

    doc, cand, _ = _doc_and_candidate()
    result = score_external(_external(handler), doc, cand, threshold=0.5)
    assert result.probability == 0.91
    assert result.decision is Decision.ACCEPT
    assert seen["item_label"] == "1"
    assert "Item 1. Business" in seen["context_text"]
    assert set(seen["style_flags"]) == {
        "larger_size", "larger_weight", "centered",
        "italic", "short_line", "near_hyperlink",
    }


def test_external_scorer_below_threshold_routes_to_review():
    def handler(request):
        return httpx.Response(200, json={"probability": 0.2})

    doc, cand, _ = _doc_and_candidate()
    result = score_external(_external(handler), doc, cand, threshold=0.5)
    assert result.decision is Decision.REVIEW


@pytest.mark.parametrize(
    "handler",
    [
        lambda request: httpx.Response(500, json={}),
        lambda request: httpx.Response(200, content=b"not json"),
        lambda request: httpx.Response(200, json={"wrong_key": 1}),
        lambda request: httpx.Response(200, json={"probability": 1.7}),
    ],
    ids=["http-500", "not-json", "missing-key", "out-of-range"],
)
def test_external_scorer_failures_raise(handler):
    doc, cand, _ = _doc_and_candidate()
    with pytest.raises(ExternalUnavailable):
        score_external(_external(handler), doc, cand)


def test_fallback_uses_builtin_when_external_down(caplog, trained_scorer):
    def handler(request):
        raise httpx.ConnectError("down")

    doc, cand, cands = _doc_and_candidate()
    builtin = score_with_fallback(None, doc, cand, trained_scorer, cands)
    with caplog.at_level(logging.WARNING, logger="tenk.scorer"):
        result = score_with_fallback(_external(handler), doc, cand, trained_scorer, cands)
    assert result == builtin
    assert any("falling back" in rec.message for rec in caplog.records)


def test_fallback_prefers_external_when_healthy(trained_scorer):
    def handler(request):
        return httpx.Response(200, json={"probability": 0.123})

    doc, cand, cands = _doc_and_candidate()
    result = score_with_fallback(_external(handler), doc, cand, trained_scorer, cands)
    assert result.probability == 0.123
