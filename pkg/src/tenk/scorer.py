"""Candidate verification: a trainable confidence model plus decision rule.

The scorer assigns each candidate a probability of being a genuine item
start. Probabilities at or above the threshold are accepted; the rest are
routed to human review. The built-in model is logistic regression trained
by full-batch gradient descent, which keeps training deterministic and the
gradient analytically checkable; an external scorer can be plugged in over
HTTP for anything heavier.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import httpx
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .docmodel import DocumentModel
from .errors import ConfigError, DegenerateData, ExternalUnavailable
from .features import N_FEATURES, extract_features
from .matcher import CandidateBoundary, FormatSignature

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = "tenk-scorer/1"


class Decision(Enum):
    ACCEPT = "accept"
    REVIEW = "review"


class Provenance(Enum):
    SYNTHETIC = "synthetic"
    EXPERT_REVIEW = "expert_review"


@dataclass(frozen=True)
class ScoreResult:
    probability: float
    decision: Decision


@dataclass(frozen=True)
class LabeledCandidate:
    """One training sample: feature tuple, truth, and where it came from."""

    features: tuple[float, ...]
    label: bool
    provenance: Provenance = Provenance.SYNTHETIC


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(
    X: np.ndarray, y: np.ndarray, weights: np.ndarray, bias: float, l2: float
) -> float:
    """Mean binary cross-entropy plus L2 penalty (bias unregularized).

    This is the exact objective fit() descends, kept standalone so tests can
    difference it numerically against the analytic gradient.
    """
    z = X @ weights + bias
    bce = np.logaddexp(0.0, z) - y * z
    return float(bce.mean() + 0.5 * l2 * weights @ weights)


def logistic_gradient(
    X: np.ndarray, y: np.ndarray, weights: np.ndarray, bias: float, l2: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of logistic_loss in (weights, bias)."""
    p = _sigmoid(X @ weights + bias)
    residual = p - y
    grad_w = X.T @ residual / len(y) + l2 * weights
    grad_b = float(residual.mean())
    return grad_w, grad_b


class CandidateScorer(BaseEstimator, ClassifierMixin):
    """Logistic regression over candidate features, with an accept threshold.

    Weights start at zero and training is full batch, so identical data
    yields bit-identical models; the seed parameter exists for API stability
    but nothing in the current procedure consumes randomness.
    """

    def __init__(
        self,
        learning_rate: float = 0.5,
        l2: float = 1e-4,
        epochs: int = 500,
        seed: int = 0,
        threshold: float = 0.5,
    ):
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = epochs
        self.seed = seed
        self.threshold = threshold

    def fit(self, X, y) -> "CandidateScorer":
        if not (0.0 < self.threshold < 1.0):
            raise ConfigError(f"threshold must be in (0,1), got {self.threshold}")
        if len(np.asarray(y)) == 0:
            raise DegenerateData("no training samples")
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y disagree on sample count")
        classes = np.unique(y)
        if not np.array_equal(classes, [0.0, 1.0]):
            raise DegenerateData(f"need both classes 0 and 1, got {classes}")

        weights = np.zeros(X.shape[1], dtype=np.float64)
        bias = 0.0
        for _ in range(self.epochs):
            grad_w, grad_b = logistic_gradient(X, y, weights, bias, self.l2)
            weights = weights - self.learning_rate * grad_w
            bias = bias - self.learning_rate * grad_b

        self.weights_ = weights
        self.bias_ = bias
        self.trained_on_ = int(X.shape[0])
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "weights_")
        X = check_array(X, dtype=np.float64)
        p = _sigmoid(X @ self.weights_ + self.bias_)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(int)

    def score_candidate(self, features: np.ndarray) -> ScoreResult:
        """Probability plus accept/review decision for a single candidate."""
        p = float(self.predict_proba(np.asarray(features).reshape(1, -1))[0, 1])
        return ScoreResult(probability=p, decision=self.decide(p))

    def decide(self, probability: float) -> Decision:
        # Exact threshold counts as accept; the >= rule is part of the contract.
        return Decision.ACCEPT if probability >= self.threshold else Decision.REVIEW

    def save(self, path: Path | str):
        check_is_fitted(self, "weights_")
        payload = {
            "format": MODEL_FORMAT_VERSION,
            "weights": [float(w) for w in self.weights_],
            "bias": float(self.bias_),
            "threshold": self.threshold,
            "trained_on": self.trained_on_,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path | str) -> "CandidateScorer":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != MODEL_FORMAT_VERSION:
            raise ConfigError(f"unrecognized model file format: {payload.get('format')!r}")
        scorer = cls(threshold=float(payload["threshold"]))
        scorer.weights_ = np.array(payload["weights"], dtype=np.float64)
        scorer.bias_ = float(payload["bias"])
        scorer.trained_on_ = int(payload.get("trained_on", 0))
        scorer.n_features_in_ = len(scorer.weights_)
        scorer.classes_ = np.array([0, 1])
        return scorer


@dataclass
class TrainConfig:
    learning_rate: float = 0.5
    l2: float = 1e-4
    epochs: int = 500
    seed: int = 0
    threshold: float = 0.5


def train_scorer(data: list[LabeledCandidate], config: TrainConfig | None = None) -> CandidateScorer:
    """Fit a scorer from labeled candidates."""
    if not data:
        raise DegenerateData("no training samples")
    config = config or TrainConfig()
    X = np.array([lc.features for lc in data], dtype=np.float64)
    y = np.array([1.0 if lc.label else 0.0 for lc in data])
    scorer = CandidateScorer(
        learning_rate=config.learning_rate,
        l2=config.l2,
        epochs=config.epochs,
        seed=config.seed,
        threshold=config.threshold,
    )
    return scorer.fit(X, y)


@dataclass
class ExternalScorerConfig:
    """Where and how to reach an out-of-process scorer."""

    url: str
    timeout: float = 5.0
    context_chars: int = 2000
    transport: httpx.BaseTransport | None = field(default=None, repr=False)


def score_external(
    config: ExternalScorerConfig,
    doc: DocumentModel,
    candidate: CandidateBoundary,
    threshold: float = 0.5,
) -> ScoreResult:
    """Ask the external endpoint to verify one candidate.

    Request: {context_text, style_flags, item_label}; response: {probability}.
    Any transport failure or malformed body raises ExternalUnavailable.
    """
    sig = candidate.signature or FormatSignature()
    lo = max(0, candidate.offset - config.context_chars)
    hi = min(len(doc.plain_text), candidate.offset + config.context_chars)
    payload = {
        "context_text": doc.plain_text[lo:hi],
        "style_flags": {
            "larger_size": sig.larger_size,
            "larger_weight": sig.larger_weight,
            "centered": sig.centered,
            "italic": sig.italic,
            "short_line": sig.short_line,
            "near_hyperlink": sig.near_hyperlink,
        },
        "item_label": str(candidate.item),
    }
    try:
        with httpx.Client(transport=config.transport) as client:
            resp = client.post(config.url, json=payload, timeout=config.timeout)
        if resp.status_code != 200:
            raise ExternalUnavailable(f"external scorer returned {resp.status_code}")
        probability = float(resp.json()["probability"])
    except ExternalUnavailable:
        raise
    except Exception as exc:
        raise ExternalUnavailable(f"external scorer failed: {exc}") from exc
    if not (0.0 <= probability <= 1.0):
        raise ExternalUnavailable(f"probability out of range: {probability}")
    decision = Decision.ACCEPT if probability >= threshold else Decision.REVIEW
    return ScoreResult(probability=probability, decision=decision)


def score_with_fallback(
    config: ExternalScorerConfig | None,
    doc: DocumentModel,
    candidate: CandidateBoundary,
    scorer: CandidateScorer,
    all_candidates: list[CandidateBoundary],
) -> ScoreResult:
    """External scorer when configured, built-in scorer when it is not or fails."""
    if config is not None:
        try:
            return score_external(config, doc, candidate, threshold=scorer.threshold)
        except ExternalUnavailable as exc:
            logger.warning("external scorer unavailable, falling back to built-in: %s", exc)
    return scorer.score_candidate(extract_features(doc, candidate, all_candidates))
