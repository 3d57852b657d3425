"""The deployable classifier: an ordered encoder stack plus a softmax head.

Only the encoder halves of the pretrained autoencoder layers take part in
inference; decoders stay in the parameter records (they are cheap and allow
pretraining to resume) but are never evaluated by ``predict``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autoencoder import AutoencoderParams, SparsityConfig, sigmoid
from .errors import ShapeError
from .matrix import Matrix, make_rng
from .softmax import SoftmaxParams, logits, softmax


@dataclass
class StackedNetwork:
    """Encoder stack, classifier head, and the per-layer sparsity settings

    the layers were (or would be) pretrained with.  The sparsity settings
    ride along so a serialized model is self-describing.
    """

    encoders: list[AutoencoderParams]
    head: SoftmaxParams
    sparsity: list[SparsityConfig] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.sparsity:
            self.sparsity = [SparsityConfig() for _ in self.encoders]

    @property
    def input_width(self) -> int:
        return self.encoders[0].n

    @property
    def num_classes(self) -> int:
        return self.head.k

    @property
    def layer_sizes(self) -> list[int]:
        return [self.encoders[0].n] + [e.m for e in self.encoders]

    def validate(self) -> None:
        if not self.encoders:
            raise ShapeError("network has no encoder layers")
        for e in self.encoders:
            e.validate()
        self.head.validate()
        for lower, upper in zip(self.encoders, self.encoders[1:]):
            if lower.m != upper.n:
                raise ShapeError(
                    f"encoder chain broken: layer with m={lower.m} feeds layer expecting n={upper.n}"
                )
        if self.encoders[-1].m != self.head.d:
            raise ShapeError(
                f"head expects {self.head.d} features but last encoder produces {self.encoders[-1].m}"
            )
        if len(self.sparsity) != len(self.encoders):
            raise ShapeError(
                f"{len(self.sparsity)} sparsity configs for {len(self.encoders)} encoder layers"
            )

    def copy(self) -> "StackedNetwork":
        return StackedNetwork(
            [e.copy() for e in self.encoders], self.head.copy(), list(self.sparsity)
        )


def build_network(
    layer_sizes: list[int],
    num_classes: int,
    seed: int,
    sparsity: list[SparsityConfig] | None = None,
    head_weight_decay: float = 0.001,
) -> StackedNetwork:
    """Glorot-initialized network for the given [n, m1, ..., mK] widths.

    Useful for shape validation and as the untrained starting point of the
    pretraining pipeline.
    """
    if len(layer_sizes) < 2:
        raise ShapeError(f"need at least [n, m1], got {layer_sizes}")
    rng = make_rng(seed)
    encoders = [
        AutoencoderParams.init(n, m, rng) for n, m in zip(layer_sizes[:-1], layer_sizes[1:])
    ]
    head = SoftmaxParams.init(num_classes, layer_sizes[-1], rng, head_weight_decay)
    net = StackedNetwork(encoders, head, list(sparsity) if sparsity else [])
    net.validate()
    return net


def forward_activations(net: StackedNetwork, x: Matrix) -> list[Matrix]:
    """Activations [x, h1, ..., hK] of the encoder stack for a batch."""
    if x.ndim != 2 or x.shape[1] != net.input_width:
        raise ShapeError(f"network expects batch x {net.input_width}, got {x.shape}")
    acts = [x]
    for enc in net.encoders:
        acts.append(sigmoid(acts[-1] @ enc.w_enc.T + enc.b_hidden))
    return acts


def encode_stack(net: StackedNetwork, x: Matrix) -> Matrix:
    """Features produced by the full encoder stack."""
    return forward_activations(net, x)[-1]


def predict(net: StackedNetwork, x: Matrix) -> tuple[np.ndarray, Matrix]:
    """Class indices and per-class probabilities for a batch.

    Ties in the probability row break toward the lower class index.
    """
    probs = softmax(logits(net.head, encode_stack(net, x)))
    labels = np.argmax(probs, axis=1)
    return labels, probs


def accuracy_on(net: StackedNetwork, x: Matrix, label_indices: np.ndarray) -> float:
    """Fraction of samples whose predicted class matches the given indices."""
    predicted, _ = predict(net, x)
    return float(np.mean(predicted == label_indices))
