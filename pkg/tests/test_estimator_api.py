"""Estimator-style surface: params, cloning, fit/transform contracts."""

from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone

from tenk.errors import EmptyCorpus, ModelMissing, NoStructureError
from tenk.features import N_FEATURES
from tenk.ingest import RawFiling
from tenk.pipeline import Form10KItemizer, ItemizedFiling
from tenk.scorer import CandidateScorer


def _training_xy(corpus):
    X = [f.as_raw() for f in corpus]
    y = [f.gold for f in corpus]
    return X, y


def test_scorer_get_set_params():
    scorer = CandidateScorer()
    params = scorer.get_params()
    assert set(params) == {"learning_rate", "l2", "epochs", "seed", "threshold"}
    scorer.set_params(threshold=0.7, epochs=10)
    assert scorer.threshold == 0.7
    assert scorer.epochs == 10


def test_scorer_clone_is_unfitted_with_same_params(trained_scorer):
    copy = clone(trained_scorer)
    assert copy.get_params() == trained_scorer.get_params()
    assert not hasattr(copy, "weights_")
    assert hasattr(trained_scorer, "weights_")


def test_scorer_refit_overwrites_state():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, N_FEATURES))
    y = rng.integers(0, 2, size=30)
    y[:2] = [0, 1]
    scorer = CandidateScorer(epochs=20).fit(X, y)
    first = scorer.weights_.copy()
    scorer.fit(X[::-1].copy(), y[::-1].copy())
    assert scorer.weights_.shape == first.shape
    assert scorer.n_features_in_ == N_FEATURES
    assert list(scorer.classes_) == [0, 1]


def test_itemizer_get_set_params_and_clone():
    itemizer = Form10KItemizer(threshold=0.6, skip_penalty=2.0)
    params = itemizer.get_params()
    assert params["threshold"] == 0.6
    assert params["skip_penalty"] == 2.0
    assert "scorer" in params and "dictionary_path" in params
    copy = clone(itemizer)
    assert copy.get_params() == params
    itemizer.set_params(strict=True)
    assert itemizer.strict is True


def test_itemizer_fit_then_transform(small_corpus):
    X, y = _training_xy(small_corpus)
    itemizer = Form10KItemizer(epochs=120)
    assert itemizer.fit(X, y) is itemizer
    assert hasattr(itemizer, "scorer_")
    assert itemizer.n_samples_seen_ > 0
    results = itemizer.transform(X[:2])
    assert len(results) == 2
    for filing, result in zip(small_corpus[:2], results):
        assert isinstance(result, ItemizedFiling)
        assert result.serial == filing.serial
        assert result.segments


def test_itemizer_fit_transform_shortcut(small_corpus):
    X, y = _training_xy(small_corpus[:4])
    results = Form10KItemizer(epochs=60).fit_transform(X, y)
    assert len(results) == 4


def test_itemizer_accepts_prefit_scorer(small_corpus, trained_scorer):
    itemizer = Form10KItemizer(scorer=trained_scorer)
    result = itemizer.itemize(small_corpus[0].as_raw())
    assert result.segments


def test_itemizer_without_model_refuses_transform(small_corpus):
    with pytest.raises(ModelMissing):
        Form10KItemizer().transform([small_corpus[0].as_raw()])


def test_itemizer_empty_fit_rejected():
    with pytest.raises(EmptyCorpus):
        Form10KItemizer().fit([], [])


def test_itemizer_fit_requires_aligned_gold(small_corpus):
    X, y = _training_xy(small_corpus)
    with pytest.raises(ValueError):
        Form10KItemizer().fit(X, None)
    with pytest.raises(ValueError):
        Form10KItemizer().fit(X, y[:-1])


def test_strict_mode_raises_on_structureless_input(trained_scorer):
    raw = RawFiling(serial="BLANK-1", bytes=b"nothing relevant here\n", fetched_at=0.0)
    tolerant = Form10KItemizer(scorer=trained_scorer)
    result = tolerant.itemize(raw)
    assert result.reconstruction.is_empty and result.needs_review
    strict = Form10KItemizer(scorer=trained_scorer, strict=True)
    with pytest.raises(NoStructureError):
        strict.itemize(raw)


def test_transform_is_deterministic(small_corpus, trained_scorer):
    itemizer = Form10KItemizer(scorer=trained_scorer)
    raw = small_corpus[0].as_raw()
    a = itemizer.itemize(raw)
    b = itemizer.itemize(raw)
    assert a.segments == b.segments
    assert a.structure_score == b.structure_score
