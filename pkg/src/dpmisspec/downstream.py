"""Downstream classifier trained on probabilistic labels, plus evaluation metrics."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Optional

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from . import model as lm
from .errors import DimMismatch, NonFinite, SingleClass, ValidationError
from .factors import as_votes
from .sampling import make_rng

LOSSES = ("cross_entropy", "brier")
_EPS = 1e-12


def noise_aware_loss(pred, posterior_pos, loss_kind="brier"):
    """Expected loss of prediction ``pred = P(y=+1)`` under label posterior ``posterior_pos``.

    Brier: ``L(pred, y) = (pred - [y = +1])**2``, always in [0, 1].
    Cross-entropy: ``L(pred, y) = -log P(y)``, unbounded; meant for training only.
    """
    pred = np.asarray(pred, dtype=float)
    q = np.asarray(posterior_pos, dtype=float)
    if loss_kind == "brier":
        out = q * (pred - 1.0) ** 2 + (1.0 - q) * pred ** 2
    elif loss_kind == "cross_entropy":
        p = np.clip(pred, _EPS, 1 - _EPS)
        out = -(q * np.log(p) + (1.0 - q) * np.log1p(-p))
    else:
        raise ValidationError(f"unknown loss {loss_kind!r}; expected one of {LOSSES}")
    return float(out) if out.ndim == 0 else out


def one_hot_votes(votes) -> np.ndarray:
    """Three indicator columns per LF (for votes -1, 0, +1), in LF order."""
    votes = as_votes(votes)
    single = votes.ndim == 1
    votes = np.atleast_2d(votes)
    n, m = votes.shape
    out = np.zeros((n, 3 * m))
    out[np.arange(n)[:, None], 3 * np.arange(m)[None, :] + votes + 1] = 1.0
    return out[0] if single else out


def make_features(votes, noise_dim=0, seed=0) -> np.ndarray:
    """One-hot votes, optionally followed by ``noise_dim`` standard normal columns."""
    feats = one_hot_votes(votes)
    if noise_dim:
        noise = make_rng(seed).standard_normal((feats.shape[0], noise_dim))
        feats = np.hstack([feats, noise])
    return feats


@dataclass
class TrainConfig:
    step_size: float = 0.5
    epochs: int = 20
    batch_size: int = 64
    seed: int = 0
    loss: str = "cross_entropy"
    hidden: tuple = (16, 16)

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.loss not in LOSSES:
            raise ValidationError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if not self.step_size > 0 or self.epochs < 0 or self.batch_size < 1:
            raise ValidationError("step_size and batch_size must be positive, epochs nonnegative")
        if any(h < 1 for h in self.hidden):
            raise ValidationError("hidden layer sizes must be positive")

    @classmethod
    def from_dict(cls, d) -> "TrainConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValidationError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


@dataclass
class Classifier:
    """Feed-forward net with tanh hidden layers and a sigmoid output ``P(y = +1 | x)``."""

    weights: list  # [(W, b), ...], last layer maps to a single unit
    loss_history: list = field(default_factory=list)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0][0].shape[0]] + [w.shape[1] for w, _ in self.weights]

    @classmethod
    def init(cls, n_features, hidden=(16, 16), seed=0) -> "Classifier":
        rng = make_rng(seed)
        sizes = [n_features, *hidden, 1]
        weights = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (a + b))
            weights.append((rng.uniform(-limit, limit, size=(a, b)), np.zeros(b)))
        return cls(weights)

    def _forward(self, x):
        acts = [x]
        for w, b in self.weights[:-1]:
            acts.append(np.tanh(acts[-1] @ w + b))
        w, b = self.weights[-1]
        logit = (acts[-1] @ w + b)[:, 0]
        return acts, logit

    def predict(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=float))
        if x.shape[1] != self.sizes[0]:
            raise DimMismatch(f"classifier expects {self.sizes[0]} features, got {x.shape[1]}")
        return expit(self._forward(x)[1])

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes,
            "layers": [{"W": w.tolist(), "b": b.tolist()} for w, b in self.weights],
        }

    @classmethod
    def from_dict(cls, d) -> "Classifier":
        return cls([(np.array(layer["W"], dtype=float), np.array(layer["b"], dtype=float))
                    for layer in d["layers"]])


def _backward(clf: Classifier, acts, logit, q, loss):
    f = expit(logit)
    if loss == "cross_entropy":
        delta = f - q
    else:
        delta = 2.0 * (f - q) * f * (1.0 - f)
    delta = (delta / len(q))[:, None]
    grads = []
    for layer in range(len(clf.weights) - 1, -1, -1):
        w, _ = clf.weights[layer]
        grads.append((acts[layer].T @ delta, delta.sum(axis=0)))
        if layer:
            delta = (delta @ w.T) * (1.0 - acts[layer] ** 2)
    return grads[::-1]


def train_noise_aware(features, posteriors, config: TrainConfig | None = None) -> Classifier:
    """Mini-batch gradient descent on the mean noise-aware loss.

    Rows are reshuffled every epoch with a generator seeded by ``config.seed``;
    ``loss_history`` records the full-data training loss after each epoch
    (entry 0 is the loss before training).
    """
    config = config or TrainConfig()
    x = np.asarray(features, dtype=float)
    q = np.asarray(posteriors, dtype=float).reshape(-1)
    if x.ndim != 2 or x.shape[0] != q.size:
        raise DimMismatch(f"features {x.shape} and posteriors {q.shape} do not line up")
    if not np.all(np.isfinite(x)):
        raise ValidationError("features must be finite")
    if q.size and (q.min() < 0 or q.max() > 1):
        raise ValidationError("posteriors must lie in [0, 1]")
    clf = Classifier.init(x.shape[1], config.hidden, config.seed)
    rng = make_rng(config.seed + 1)
    n = x.shape[0]

    def epoch_loss():
        return float(np.mean(noise_aware_loss(clf.predict(x), q, config.loss))) if n else 0.0

    clf.loss_history.append(epoch_loss())
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            acts, logit = clf._forward(x[idx])
            grads = _backward(clf, acts, logit, q[idx], config.loss)
            clf.weights = [(w - config.step_size * gw, b - config.step_size * gb)
                           for (w, b), (gw, gb) in zip(clf.weights, grads)]
        clf.loss_history.append(epoch_loss())
        if not np.isfinite(clf.loss_history[-1]):
            raise NonFinite(f"training diverged in epoch {epoch}; reduce step_size")
    return clf


def roc_auc(scores, truth) -> float:
    """Rank-based ROC-AUC, ties counted as half a win."""
    scores = np.asarray(scores, dtype=float).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if scores.shape != truth.shape:
        raise DimMismatch(f"{scores.size} scores vs {truth.size} labels")
    pos = truth > 0
    n_pos = int(pos.sum())
    n_neg = truth.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC-AUC needs both classes in the truth vector")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def brier_score(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    target = (np.asarray(truth) > 0).astype(float)
    return float(np.mean((pred - target) ** 2))


def noise_aware_risk(weights, posterior_pos, pred) -> float:
    """``sum_rows weight * E_{y ~ posterior}[Brier(pred, y)]``."""
    return float(np.asarray(weights) @ noise_aware_loss(pred, posterior_pos, "brier"))


def empirical_risk_gap(p_true: lm.ModelParams, p_misspec: lm.ModelParams, classifier,
                       feature_map: Callable = one_hot_votes) -> float:
    """``|R_true(w) - R_misspec(w)|`` with Brier loss, computed by enumeration.

    Rows are weighted by the marginal of ``p_true``; each risk takes the
    classifier's prediction on ``feature_map(row)`` and the respective model's
    posterior as the label distribution. ``classifier`` is a :class:`Classifier`
    or any callable mapping features to ``P(y = +1)``.
    """
    if p_true.m != p_misspec.m:
        raise DimMismatch(f"models have different m: {p_true.m} vs {p_misspec.m}")
    lm.check_cap(p_true.m)
    rows = lm.all_rows(p_true.m)
    predict = classifier.predict if hasattr(classifier, "predict") else classifier
    pred = np.asarray(predict(feature_map(rows)), dtype=float).reshape(-1)
    weights = lm.marginal_table(p_true)
    r_true = noise_aware_risk(weights, lm.posterior(p_true, rows), pred)
    r_mis = noise_aware_risk(weights, lm.posterior(p_misspec, rows), pred)
    return abs(r_true - r_mis)


def metrics_json(roc_auc_value: Optional[float], brier: Optional[float],
                 risk_gap: Optional[float] = None) -> str:
    return json.dumps({"roc_auc": roc_auc_value, "brier": brier, "risk_gap": risk_gap},
                      indent=2, sort_keys=True)
