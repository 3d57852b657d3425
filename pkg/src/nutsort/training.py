"""Gradient-descent training: greedy layerwise pretraining and fine-tuning.

One plain gradient-descent loop (``gd_train``) drives every phase with a
constant per-phase learning rate, full-batch by default.  ``pretrain``
trains each autoencoder on the previous layer's features and then the
softmax head; ``fine_tune`` back-propagates the supervised loss through
every retained layer at once.  Everything is deterministic for a fixed
seed and configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .autoencoder import (
    AutoencoderParams,
    SparsityConfig,
    ae_gradients,
    ae_loss,
    encode,
    sigmoid,
    sigmoid_prime_from_output,
)
from .data import Dataset
from .errors import ConfigError, NumericError, ShapeError
from .matrix import Matrix, make_rng
from .network import StackedNetwork
from .softmax import SoftmaxParams, sm_gradients, sm_loss


@dataclass(frozen=True)
class TracePoint:
    """One logged training-progress sample.

    Accuracies are None for phases where they are not defined (the
    unsupervised autoencoder phases have no classifier to score).
    """

    phase: str
    iteration: int
    loss: float
    train_accuracy: float | None = None
    val_accuracy: float | None = None


TrainingTrace = list[TracePoint]


@dataclass(frozen=True)
class PhaseSpec:
    """The slice of the training configuration one phase runs under."""

    name: str
    epochs: int
    learning_rate: float
    batch_size: int | None = None  # None = full batch
    log_every: int = 100

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ConfigError(f"{self.name}: epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"{self.name}: learning rate must be > 0, got {self.learning_rate}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"{self.name}: batch size must be >= 1, got {self.batch_size}")
        if self.log_every < 1:
            raise ConfigError(f"{self.name}: log_every must be >= 1, got {self.log_every}")


@dataclass(frozen=True)
class TrainConfig:
    """Epochs, rates, batching, seeding, and sparsity for the whole pipeline.

    epochs_pretrain may be a single count applied to every autoencoder
    layer or one count per layer; sparsity likewise.  batch_size None means
    full-batch descent.  Zero epochs skip a phase.
    """

    epochs_pretrain: int | tuple[int, ...] = (600, 600)
    epochs_softmax: int = 3000
    epochs_finetune: int = 1000
    lr_pretrain: float = 0.1
    lr_softmax: float = 0.1
    lr_finetune: float = 0.01
    batch_size: int | None = None
    seed: int = 0
    sparsity: SparsityConfig | tuple[SparsityConfig, ...] = field(default_factory=SparsityConfig)
    softmax_weight_decay: float = 0.001
    log_every: int = 100

    def __post_init__(self) -> None:
        for name, epochs in (
            ("epochs_softmax", self.epochs_softmax),
            ("epochs_finetune", self.epochs_finetune),
        ):
            if epochs < 0:
                raise ConfigError(f"{name} must be >= 0, got {epochs}")
        for e in self._pretrain_epoch_list():
            if e < 0:
                raise ConfigError(f"epochs_pretrain entries must be >= 0, got {e}")
        for name, lr in (
            ("lr_pretrain", self.lr_pretrain),
            ("lr_softmax", self.lr_softmax),
            ("lr_finetune", self.lr_finetune),
        ):
            if lr <= 0:
                raise ConfigError(f"{name} must be > 0, got {lr}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1 or None, got {self.batch_size}")
        if self.log_every < 1:
            raise ConfigError(f"log_every must be >= 1, got {self.log_every}")

    def _pretrain_epoch_list(self) -> tuple[int, ...]:
        if isinstance(self.epochs_pretrain, int):
            return (self.epochs_pretrain,)
        return tuple(self.epochs_pretrain)

    def pretrain_epochs(self, layer_count: int) -> list[int]:
        """Per-layer pretraining epochs, broadcasting a single count."""
        if isinstance(self.epochs_pretrain, int):
            return [self.epochs_pretrain] * layer_count
        epochs = list(self.epochs_pretrain)
        if len(epochs) != layer_count:
            raise ConfigError(
                f"epochs_pretrain has {len(epochs)} entries for {layer_count} autoencoder layers"
            )
        return epochs

    def layer_sparsity(self, layer_count: int) -> list[SparsityConfig]:
        """Per-layer sparsity configs, broadcasting a single config."""
        if isinstance(self.sparsity, SparsityConfig):
            return [self.sparsity] * layer_count
        cfgs = list(self.sparsity)
        if len(cfgs) != layer_count:
            raise ConfigError(
                f"sparsity has {len(cfgs)} entries for {layer_count} autoencoder layers"
            )
        return cfgs


LossFn = Callable[..., float]
GradFn = Callable[..., list[np.ndarray]]
MetricsFn = Callable[[list[np.ndarray]], tuple[float | None, float | None]]


def gd_train(
    loss_fn: LossFn,
    grad_fn: GradFn,
    params: Sequence[np.ndarray],
    data: tuple[np.ndarray, ...],
    phase: PhaseSpec,
    rng: np.random.Generator,
    metrics_fn: MetricsFn | None = None,
) -> tuple[list[np.ndarray], TrainingTrace]:
    """Plain gradient descent, full-batch or minibatch.

    loss_fn/grad_fn are called as fn(params, *batch_arrays) where each
    batch array is a row slice of the corresponding array in ``data``.
    Minibatch order is a fresh seeded permutation per epoch.  Logged loss
    is evaluated on the full data after the update at that iteration.
    Raises NumericError, naming phase and iteration, if a loss or gradient
    goes non-finite.
    """
    params = [np.array(p, dtype=np.float64) for p in params]
    trace: TrainingTrace = []
    if phase.epochs == 0:
        return params, trace

    n_rows = data[0].shape[0]
    batch = phase.batch_size if phase.batch_size is not None else n_rows
    batch = min(batch, n_rows)
    full_batch = batch >= n_rows

    iteration = 0
    for epoch in range(phase.epochs):
        order = None if full_batch else rng.permutation(n_rows)
        for start in range(0, n_rows, batch):
            if order is None:
                rows = tuple(d[start : start + batch] for d in data)
            else:
                idx = order[start : start + batch]
                rows = tuple(d[idx] for d in data)
            grads = grad_fn(params, *rows)
            iteration += 1
            for g in grads:
                if not np.isfinite(g).all():
                    raise NumericError("non-finite gradient", phase.name, iteration)
            params = [p - phase.learning_rate * g for p, g in zip(params, grads)]

            last = epoch == phase.epochs - 1 and start + batch >= n_rows
            if iteration % phase.log_every == 0 or last:
                loss = loss_fn(params, *data)
                if not math.isfinite(loss):
                    raise NumericError("non-finite loss", phase.name, iteration)
                train_acc, val_acc = metrics_fn(params) if metrics_fn else (None, None)
                trace.append(TracePoint(phase.name, iteration, loss, train_acc, val_acc))
    return params, trace


def train_autoencoder(
    params: AutoencoderParams,
    x: Matrix,
    cfg: SparsityConfig,
    phase: PhaseSpec,
    rng: np.random.Generator,
) -> tuple[AutoencoderParams, TrainingTrace]:
    """Train one autoencoder layer on a batch of inputs."""

    def loss_fn(arrays: list[np.ndarray], xb: Matrix) -> float:
        return ae_loss(AutoencoderParams(*arrays), xb, cfg)

    def grad_fn(arrays: list[np.ndarray], xb: Matrix) -> list[np.ndarray]:
        return ae_gradients(AutoencoderParams(*arrays), xb, cfg).arrays()

    arrays, trace = gd_train(
        loss_fn,
        grad_fn,
        [params.w_enc, params.b_hidden, params.w_dec, params.b_out],
        (x,),
        phase,
        rng,
    )
    return AutoencoderParams(*arrays), trace


def _head_accuracy(w: Matrix, b: np.ndarray, features: Matrix, label_idx: np.ndarray) -> float:
    return float(np.mean(np.argmax(features @ w.T + b, axis=1) == label_idx))


def train_softmax(
    params: SoftmaxParams,
    features: Matrix,
    labels: Matrix,
    phase: PhaseSpec,
    rng: np.random.Generator,
    val: tuple[Matrix, Matrix] | None = None,
) -> tuple[SoftmaxParams, TrainingTrace]:
    """Train the classifier head on fixed features."""
    decay = params.weight_decay
    label_idx = np.argmax(labels, axis=1)
    val_idx = np.argmax(val[1], axis=1) if val is not None else None

    def loss_fn(arrays: list[np.ndarray], fb: Matrix, lb: Matrix) -> float:
        return sm_loss(SoftmaxParams(arrays[0], arrays[1], decay), fb, lb)

    def grad_fn(arrays: list[np.ndarray], fb: Matrix, lb: Matrix) -> list[np.ndarray]:
        g = sm_gradients(SoftmaxParams(arrays[0], arrays[1], decay), fb, lb)
        return [g.d_w, g.d_b]

    def metrics_fn(arrays: list[np.ndarray]) -> tuple[float | None, float | None]:
        train_acc = _head_accuracy(arrays[0], arrays[1], features, label_idx)
        val_acc = None
        if val is not None:
            val_acc = _head_accuracy(arrays[0], arrays[1], val[0], val_idx)
        return train_acc, val_acc

    arrays, trace = gd_train(
        loss_fn, grad_fn, [params.w, params.b], (features, labels), phase, rng, metrics_fn
    )
    return SoftmaxParams(arrays[0], arrays[1], decay), trace


def pretrain(
    dataset: Dataset,
    layer_sizes: Sequence[int],
    cfg: TrainConfig,
    val: Dataset | None = None,
) -> tuple[StackedNetwork, TrainingTrace]:
    """Greedy layerwise pretraining followed by softmax-head training.

    layer_sizes is [n, m1, ..., mK] with n equal to the dataset feature
    width.  Each autoencoder trains on the previous layer's features; the
    head trains on the final features.  Decoders are retained in the layer
    records but take no part in the assembled classifier.
    """
    layer_sizes = list(layer_sizes)
    if len(layer_sizes) < 2:
        raise ConfigError(f"layer_sizes needs at least [n, m1], got {layer_sizes}")
    if layer_sizes[0] != dataset.feature_width:
        raise ShapeError(
            f"layer_sizes[0]={layer_sizes[0]} does not match dataset feature width "
            f"{dataset.feature_width}"
        )
    layer_count = len(layer_sizes) - 1
    epochs = cfg.pretrain_epochs(layer_count)
    sparsity = cfg.layer_sparsity(layer_count)

    rng = make_rng(cfg.seed)
    trace: TrainingTrace = []
    encoders: list[AutoencoderParams] = []
    features = dataset.features
    val_features = val.features if val is not None else None

    for i, (n, m) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        layer = AutoencoderParams.init(n, m, rng)
        phase = PhaseSpec(f"pretrain{i + 1}", epochs[i], cfg.lr_pretrain, cfg.batch_size, cfg.log_every)
        layer, phase_trace = train_autoencoder(layer, features, sparsity[i], phase, rng)
        encoders.append(layer)
        trace.extend(phase_trace)
        features = encode(layer, features)
        if val_features is not None:
            val_features = encode(layer, val_features)

    head = SoftmaxParams.init(
        dataset.num_classes, layer_sizes[-1], rng, cfg.softmax_weight_decay
    )
    phase = PhaseSpec("softmax", cfg.epochs_softmax, cfg.lr_softmax, cfg.batch_size, cfg.log_every)
    head_val = (val_features, val.labels) if val is not None else None
    head, head_trace = train_softmax(head, features, dataset.labels, phase, rng, head_val)
    trace.extend(head_trace)

    net = StackedNetwork(encoders, head, sparsity)
    net.validate()
    return net, trace


def finetune_arrays(net: StackedNetwork) -> list[np.ndarray]:
    """The parameters fine-tuning updates, in a fixed flat order."""
    arrays: list[np.ndarray] = []
    for enc in net.encoders:
        arrays.extend([enc.w_enc, enc.b_hidden])
    arrays.extend([net.head.w, net.head.b])
    return arrays


def apply_finetuned(net: StackedNetwork, arrays: Sequence[np.ndarray]) -> StackedNetwork:
    """Rebuild a network from fine-tuned arrays, keeping the old decoders."""
    encoders = []
    for i, enc in enumerate(net.encoders):
        encoders.append(
            AutoencoderParams(
                w_enc=np.asarray(arrays[2 * i]),
                b_hidden=np.asarray(arrays[2 * i + 1]),
                w_dec=enc.w_dec.copy(),
                b_out=enc.b_out.copy(),
            )
        )
    head = SoftmaxParams(np.asarray(arrays[-2]), np.asarray(arrays[-1]), net.head.weight_decay)
    return StackedNetwork(encoders, head, list(net.sparsity))


def _stack_forward(arrays: Sequence[np.ndarray], x: Matrix) -> list[Matrix]:
    acts = [x]
    for i in range(0, len(arrays) - 2, 2):
        acts.append(sigmoid(acts[-1] @ arrays[i].T + arrays[i + 1]))
    return acts


def _stack_loss(
    arrays: Sequence[np.ndarray],
    layer_decays: Sequence[float],
    head_decay: float,
    x: Matrix,
    labels: Matrix,
) -> float:
    acts = _stack_forward(arrays, x)
    loss = sm_loss(SoftmaxParams(arrays[-2], arrays[-1], head_decay), acts[-1], labels)
    for i, lam in enumerate(layer_decays):
        loss += 0.5 * lam * float(np.sum(arrays[2 * i] ** 2))
    return loss


def _stack_gradients(
    arrays: Sequence[np.ndarray],
    layer_decays: Sequence[float],
    head_decay: float,
    x: Matrix,
    labels: Matrix,
) -> list[np.ndarray]:
    acts = _stack_forward(arrays, x)
    head_grads = sm_gradients(SoftmaxParams(arrays[-2], arrays[-1], head_decay), acts[-1], labels)
    grads: list[np.ndarray | None] = [None] * len(arrays)
    grads[-2] = head_grads.d_w
    grads[-1] = head_grads.d_b
    d_act = head_grads.d_features
    for i in range(len(layer_decays) - 1, -1, -1):
        delta = d_act * sigmoid_prime_from_output(acts[i + 1])
        grads[2 * i] = delta.T @ acts[i] + layer_decays[i] * arrays[2 * i]
        grads[2 * i + 1] = delta.sum(axis=0)
        d_act = delta @ arrays[2 * i]
    return grads  # type: ignore[return-value]


def stack_loss(net: StackedNetwork, x: Matrix, labels: Matrix) -> float:
    """The fine-tuning objective: cross-entropy through the whole stack
    plus L2 decay on every weight matrix (reconstruction and sparsity
    terms are not part of fine-tuning)."""
    decays = [s.weight_decay for s in net.sparsity]
    return _stack_loss(finetune_arrays(net), decays, net.head.weight_decay, x, labels)


def stack_gradients(net: StackedNetwork, x: Matrix, labels: Matrix) -> list[np.ndarray]:
    """Analytic gradients of ``stack_loss`` in ``finetune_arrays`` order."""
    decays = [s.weight_decay for s in net.sparsity]
    return _stack_gradients(finetune_arrays(net), decays, net.head.weight_decay, x, labels)


def fine_tune(
    net: StackedNetwork,
    dataset: Dataset,
    cfg: TrainConfig,
    val: Dataset | None = None,
) -> tuple[StackedNetwork, TrainingTrace]:
    """Joint supervised training of all encoder and head parameters."""
    net.validate()
    if dataset.feature_width != net.input_width:
        raise ShapeError(
            f"network expects input width {net.input_width}, dataset has {dataset.feature_width}"
        )
    if dataset.num_classes != net.num_classes:
        raise ShapeError(
            f"network has {net.num_classes} classes, dataset has {dataset.num_classes}"
        )
    decays = [s.weight_decay for s in net.sparsity]
    head_decay = net.head.weight_decay
    label_idx = dataset.label_indices()
    val_idx = val.label_indices() if val is not None else None

    def loss_fn(arrays: list[np.ndarray], xb: Matrix, lb: Matrix) -> float:
        return _stack_loss(arrays, decays, head_decay, xb, lb)

    def grad_fn(arrays: list[np.ndarray], xb: Matrix, lb: Matrix) -> list[np.ndarray]:
        return _stack_gradients(arrays, decays, head_decay, xb, lb)

    def metrics_fn(arrays: list[np.ndarray]) -> tuple[float | None, float | None]:
        acts = _stack_forward(arrays, dataset.features)
        scores = acts[-1] @ arrays[-2].T + arrays[-1]
        train_acc = float(np.mean(np.argmax(scores, axis=1) == label_idx))
        val_acc = None
        if val is not None:
            val_acts = _stack_forward(arrays, val.features)
            val_scores = val_acts[-1] @ arrays[-2].T + arrays[-1]
            val_acc = float(np.mean(np.argmax(val_scores, axis=1) == val_idx))
        return train_acc, val_acc

    phase = PhaseSpec(
        "finetune", cfg.epochs_finetune, cfg.lr_finetune, cfg.batch_size, cfg.log_every
    )
    arrays, trace = gd_train(
        loss_fn,
        grad_fn,
        finetune_arrays(net),
        (dataset.features, dataset.labels),
        phase,
        make_rng(cfg.seed),
        metrics_fn,
    )
    tuned = apply_finetuned(net, arrays)
    tuned.validate()
    return tuned, trace
