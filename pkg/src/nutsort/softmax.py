"""Softmax classifier head: class probabilities, cross-entropy loss, gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .matrix import Matrix, glorot_init

PROB_CLAMP = 1e-12


@dataclass
class SoftmaxParams:
    """Linear map from feature vectors to class scores.

    w is k x d (k classes, d feature dims), b has length k.  weight_decay
    is the L2 coefficient on w (biases are not decayed).
    """

    w: Matrix
    b: np.ndarray
    weight_decay: float = 0.001

    @property
    def k(self) -> int:
        return self.w.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]

    def validate(self) -> None:
        if self.k < 2 or self.d < 1:
            raise ParameterError(f"softmax head needs k >= 2 and d >= 1, got k={self.k}, d={self.d}")
        if self.b.shape != (self.k,):
            raise ShapeError(f"bias shape {self.b.shape} does not match k={self.k}")
        if not (np.isfinite(self.w).all() and np.isfinite(self.b).all()):
            raise ParameterError("softmax parameters contain non-finite values")
        if self.weight_decay < 0.0:
            raise ParameterError(f"weight_decay must be >= 0, got {self.weight_decay}")

    def copy(self) -> "SoftmaxParams":
        return SoftmaxParams(self.w.copy(), self.b.copy(), self.weight_decay)

    @classmethod
    def init(cls, k: int, d: int, rng: np.random.Generator, weight_decay: float = 0.001) -> "SoftmaxParams":
        return cls(w=glorot_init(k, d, rng), b=np.zeros(k), weight_decay=weight_decay)


@dataclass
class SoftmaxGradients:
    """Gradients of ``sm_loss``: parameters plus the input features."""

    d_w: Matrix
    d_b: np.ndarray
    d_features: Matrix


def softmax(z: Matrix) -> Matrix:
    """Row-wise softmax with max subtraction; each row sums to 1."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def logits(params: SoftmaxParams, features: Matrix) -> Matrix:
    if features.ndim != 2 or features.shape[1] != params.d:
        raise ShapeError(f"softmax head expects batch x {params.d} features, got {features.shape}")
    return features @ params.w.T + params.b


def _check_labels(features: Matrix, labels: Matrix, k: int) -> None:
    if labels.shape != (features.shape[0], k):
        raise ShapeError(f"labels shape {labels.shape} does not match batch {features.shape[0]} x k={k}")
    row_sums = labels.sum(axis=1)
    if not (np.all((labels == 0.0) | (labels == 1.0)) and np.all(row_sums == 1.0)):
        raise ParameterError("labels must be one-hot rows")


def sm_loss(params: SoftmaxParams, features: Matrix, labels: Matrix) -> float:
    """Mean cross-entropy plus L2 decay on the weights.

    Probabilities are clamped at 1e-12 before the log, so the loss stays
    finite even on a hopelessly confident wrong prediction.
    """
    _check_labels(features, labels, params.k)
    probs = softmax(logits(params, features))
    batch = features.shape[0]
    ce = -np.sum(labels * np.log(np.maximum(probs, PROB_CLAMP))) / batch
    decay = 0.5 * params.weight_decay * np.sum(params.w**2)
    return float(ce + decay)


def sm_gradients(params: SoftmaxParams, features: Matrix, labels: Matrix) -> SoftmaxGradients:
    """Analytic gradients of ``sm_loss``, including d(loss)/d(features).

    The feature gradient is what lets the supervised loss back-propagate
    into the encoder stack during fine-tuning.
    """
    _check_labels(features, labels, params.k)
    probs = softmax(logits(params, features))
    batch = features.shape[0]
    delta = (probs - labels) / batch
    d_w = delta.T @ features + params.weight_decay * params.w
    d_b = delta.sum(axis=0)
    d_features = delta @ params.w
    return SoftmaxGradients(d_w, d_b, d_features)
