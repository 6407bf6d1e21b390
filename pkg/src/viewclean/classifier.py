"""Weighted soft-margin SVM over pair features, plus ensemble scores.

Training uses libsvm (through scikit-learn) with per-class weights set to
the reciprocals of the class cardinalities, so a handful of positive
examples is not drowned out by the negatives. A training set with only one
class is a real occurrence early in a cleaning run (a small initial sample
may draw no positives) and yields a constant classifier instead of an
error.

The signed decision value doubles as a margin distance: positive means
duplicate, and a value of exactly zero conservatively maps to
not-duplicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.svm import SVC

from .errors import ConfigError
from .relation import PairKey

SOLVER_TOL = 1e-3  # libsvm stopping tolerance on the dual
DEFAULT_C = 10.0  # similarity features live in [0,1]; a firm margin suits them


@dataclass(frozen=True)
class LabeledPair:
    pair: PairKey
    features: np.ndarray
    label: bool  # True = duplicate


@dataclass(frozen=True)
class Prediction:
    pair: PairKey
    label: bool
    decision: float


@dataclass(frozen=True)
class EnsembleScore:
    pair: PairKey
    uncertainty: float
    entropy: float


@dataclass(frozen=True)
class Model:
    """Trained classifier. ``constant`` is set when training saw one class."""

    kernel: str
    feature_count: int
    class_weights: tuple[float, float]  # (w_negative, w_positive)
    svc: SVC | None
    constant: float | None = None

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.ndim != 2 or features.shape[1] != self.feature_count:
            raise ConfigError(
                f"expected feature arity {self.feature_count}, got {features.shape}"
            )
        if self.constant is not None:
            return np.full(len(features), self.constant)
        return self.svc.decision_function(features)


def _class_weights(y: np.ndarray) -> tuple[float, float]:
    # reciprocal cardinalities, normalized so the weights average to 1
    n = len(y)
    n_pos = int(y.sum())
    n_neg = n - n_pos
    return (n / (2.0 * n_neg) if n_neg else 1.0, n / (2.0 * n_pos) if n_pos else 1.0)


def train(
    data: list[LabeledPair], kernel: str = "linear", c: float | None = None
) -> Model:
    """Fit the weighted max-margin model. Deterministic for fixed data."""
    if not data:
        raise ConfigError("cannot train on an empty set")
    if kernel not in ("linear", "gaussian"):
        raise ConfigError(f"unknown kernel {kernel!r}")
    X = np.array([lp.features for lp in data], dtype=float)
    y = np.array([1 if lp.label else 0 for lp in data])
    n_features = X.shape[1]
    if y.min() == y.max():
        const = 1.0 if y[0] == 1 else -1.0
        return Model(kernel, n_features, (1.0, 1.0), None, constant=const)
    w_neg, w_pos = _class_weights(y)
    svc = SVC(
        kernel="linear" if kernel == "linear" else "rbf",
        gamma=1.0 / n_features,
        C=DEFAULT_C if c is None else c,
        class_weight={0: w_neg, 1: w_pos},
        tol=SOLVER_TOL,
    )
    svc.fit(X, y)
    return Model(kernel, n_features, (w_neg, w_pos), svc)


def predict(model: Model, pairs: list[PairKey], features: np.ndarray) -> list[Prediction]:
    """One prediction per input pair, order preserved. decision > 0 means
    duplicate; an exact 0 maps to not-duplicate."""
    if not pairs:
        return []
    decisions = model.decision_values(features)
    return [
        Prediction(pair, bool(d > 0), float(d)) for pair, d in zip(pairs, decisions)
    ]


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def ensemble_scores(
    data: list[LabeledPair],
    candidates: list[PairKey],
    features: np.ndarray,
    k: int = 10,
    seed: int = 0,
    kernel: str = "linear",
) -> list[EnsembleScore]:
    """Disagreement of k models trained on bootstrap resamples of ``data``.

    For each candidate, p is the fraction of models voting duplicate;
    uncertainty is 1 - |2p - 1| and entropy the binary entropy of p, both
    0 when the committee is unanimous and 1 at an even split.
    """
    if not data:
        raise ConfigError("ensemble needs a non-empty training set")
    if not candidates:
        return []
    rng = np.random.default_rng(seed)
    features = np.asarray(features, dtype=float)
    votes = np.zeros(len(candidates))
    for _ in range(k):
        idx = rng.integers(0, len(data), size=len(data))
        model = train([data[i] for i in idx], kernel=kernel)
        votes += model.decision_values(features) > 0
    out = []
    for pair, v in zip(candidates, votes):
        p = v / k
        out.append(EnsembleScore(pair, 1.0 - abs(2.0 * p - 1.0), binary_entropy(p)))
    return out


def describe(model: Model) -> str:
    """Plain-text dump of a trained model for debugging."""
    lines = [
        f"kernel: {model.kernel}",
        f"features: {model.feature_count}",
        f"class weights (neg, pos): {model.class_weights[0]:.6g}, "
        f"{model.class_weights[1]:.6g}",
    ]
    if model.constant is not None:
        lines.append(f"constant decision: {model.constant:+.1f} (single-class training)")
        return "\n".join(lines)
    svc = model.svc
    lines.append(f"support vectors per class: {svc.n_support_.tolist()}")
    lines.append(f"bias: {float(svc.intercept_[0]):.6g}")
    if model.kernel == "linear":
        coefs = ", ".join(f"{c:.6g}" for c in svc.coef_[0])
        lines.append(f"weights: [{coefs}]")
    return "\n".join(lines)


def f1_on_holdout(model: Model, holdout: list[LabeledPair]) -> float:
    """F1 of the duplicate class. A holdout with no positives and no
    positive predictions counts as perfect; other 0/0 cases are 0."""
    if not holdout:
        raise ConfigError("empty holdout")
    X = np.array([lp.features for lp in holdout], dtype=float)
    truth = np.array([lp.label for lp in holdout])
    predicted = model.decision_values(X) > 0
    tp = int(np.sum(predicted & truth))
    fp = int(np.sum(predicted & ~truth))
    fn = int(np.sum(~predicted & truth))
    if tp == 0:
        return 1.0 if (fp == 0 and fn == 0) else 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)
