"""One sparse autoencoder layer.

Sigmoid encoder and decoder with independent (untied) weight matrices, a
composite loss (mean squared reconstruction error, L2 decay on weights but
not biases, KL-divergence sparsity penalty on mean hidden activations), and
analytic gradients of that loss.  ``finite_diff_gradient`` is the
independent oracle the analytic path is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError, ShapeError
from .matrix import Matrix, glorot_init

KL_CLAMP = 1e-10

# Smallest/largest float64 strictly inside (0, 1); sigmoid saturates to
# these instead of 0.0/1.0 so downstream logs stay finite.
_SIG_LO = np.nextafter(0.0, 1.0)
_SIG_HI = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class SparsityConfig:
    """Sparsity target and penalty weights for one autoencoder layer.

    rho: target mean hidden activation, in (0, 1).
    beta: weight of the KL sparsity penalty, >= 0.
    weight_decay: L2 coefficient on encoder/decoder weights (not biases), >= 0.
    """

    rho: float = 0.05
    beta: float = 1.0
    weight_decay: float = 0.001

    def __post_init__(self) -> None:
        if not 0.0 < self.rho < 1.0:
            raise ParameterError(f"rho must be in (0, 1), got {self.rho}")
        if self.beta < 0.0:
            raise ParameterError(f"beta must be >= 0, got {self.beta}")
        if self.weight_decay < 0.0:
            raise ParameterError(f"weight_decay must be >= 0, got {self.weight_decay}")


@dataclass
class AutoencoderParams:
    """Encoder/decoder weights and biases of one layer.

    w_enc is m x n, w_dec is n x m; biases are flat vectors of length m and
    n.  Encoder and decoder are independent parameter sets.
    """

    w_enc: Matrix
    b_hidden: np.ndarray
    w_dec: Matrix
    b_out: np.ndarray

    @property
    def n(self) -> int:
        return self.w_enc.shape[1]

    @property
    def m(self) -> int:
        return self.w_enc.shape[0]

    def validate(self) -> None:
        n, m = self.n, self.m
        if self.w_enc.shape != (m, n) or self.w_dec.shape != (n, m):
            raise ShapeError(f"weight shapes disagree: enc {self.w_enc.shape}, dec {self.w_dec.shape}")
        if self.b_hidden.shape != (m,) or self.b_out.shape != (n,):
            raise ShapeError(
                f"bias shapes {self.b_hidden.shape}/{self.b_out.shape} do not match (m={m}, n={n})"
            )
        for a in (self.w_enc, self.b_hidden, self.w_dec, self.b_out):
            if not np.isfinite(a).all():
                raise ParameterError("autoencoder parameters contain non-finite values")

    def copy(self) -> "AutoencoderParams":
        return AutoencoderParams(
            self.w_enc.copy(), self.b_hidden.copy(), self.w_dec.copy(), self.b_out.copy()
        )

    @classmethod
    def init(cls, n: int, m: int, rng: np.random.Generator) -> "AutoencoderParams":
        """Glorot-uniform weights, zero biases, drawn encoder-then-decoder."""
        return cls(
            w_enc=glorot_init(m, n, rng),
            b_hidden=np.zeros(m),
            w_dec=glorot_init(n, m, rng),
            b_out=np.zeros(n),
        )


@dataclass
class LayerGradients:
    """Partial derivatives of the layer loss, one array per parameter."""

    d_w_enc: Matrix
    d_b_hidden: np.ndarray
    d_w_dec: Matrix
    d_b_out: np.ndarray

    def arrays(self) -> list[np.ndarray]:
        return [self.d_w_enc, self.d_b_hidden, self.d_w_dec, self.d_b_out]


def sigmoid(v: Matrix) -> Matrix:
    """Elementwise 1 / (1 + exp(-v)), stable for arbitrarily large |v|.

    The negative branch is computed as exp(v) / (1 + exp(v)) so nothing
    overflows; outputs are clamped to the open interval (0, 1).
    """
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return np.clip(out, _SIG_LO, _SIG_HI)


def sigmoid_prime_from_output(s: Matrix) -> Matrix:
    """Derivative of the sigmoid expressed through its output: s * (1 - s)."""
    return s * (1.0 - s)


def encode(params: AutoencoderParams, x: Matrix) -> Matrix:
    """Hidden activations for a batch (one sample per row)."""
    if x.ndim != 2 or x.shape[1] != params.n:
        raise ShapeError(f"encode expects batch x {params.n}, got {x.shape}")
    return sigmoid(x @ params.w_enc.T + params.b_hidden)


def decode(params: AutoencoderParams, h: Matrix) -> Matrix:
    """Reconstruction from hidden activations; output width equals the input width."""
    if h.ndim != 2 or h.shape[1] != params.m:
        raise ShapeError(f"decode expects batch x {params.m}, got {h.shape}")
    return sigmoid(h @ params.w_dec.T + params.b_out)


def _kl_terms(rho: float, rho_hat: np.ndarray) -> np.ndarray:
    return rho * np.log(rho / rho_hat) + (1.0 - rho) * np.log((1.0 - rho) / (1.0 - rho_hat))


def ae_loss(params: AutoencoderParams, x: Matrix, cfg: SparsityConfig) -> float:
    """Mean reconstruction error + L2 weight decay + KL sparsity penalty.

    Mean hidden activations are clamped away from 0 and 1 before the KL
    term so a saturated unit keeps the loss finite.
    """
    h = encode(params, x)
    y = decode(params, h)
    batch = x.shape[0]
    recon = 0.5 * np.sum((y - x) ** 2) / batch
    decay = 0.5 * cfg.weight_decay * (np.sum(params.w_enc**2) + np.sum(params.w_dec**2))
    rho_hat = np.clip(h.mean(axis=0), KL_CLAMP, 1.0 - KL_CLAMP)
    sparsity = cfg.beta * np.sum(_kl_terms(cfg.rho, rho_hat))
    return float(recon + decay + sparsity)


def ae_gradients(params: AutoencoderParams, x: Matrix, cfg: SparsityConfig) -> LayerGradients:
    """Analytic gradients of ``ae_loss`` with respect to every parameter.

    The sparsity penalty back-propagates through the batch-mean hidden
    activation; where the KL clamp is active that path has zero slope,
    matching the loss as actually computed.
    """
    h = encode(params, x)
    y = decode(params, h)
    batch = x.shape[0]

    delta_out = (y - x) / batch * sigmoid_prime_from_output(y)
    d_w_dec = delta_out.T @ h + cfg.weight_decay * params.w_dec
    d_b_out = delta_out.sum(axis=0)

    d_hidden = delta_out @ params.w_dec
    rho_hat_raw = h.mean(axis=0)
    inside = (rho_hat_raw > KL_CLAMP) & (rho_hat_raw < 1.0 - KL_CLAMP)
    rho_hat = np.clip(rho_hat_raw, KL_CLAMP, 1.0 - KL_CLAMP)
    d_kl = np.where(inside, -cfg.rho / rho_hat + (1.0 - cfg.rho) / (1.0 - rho_hat), 0.0)
    d_hidden = d_hidden + cfg.beta * d_kl / batch

    delta_hidden = d_hidden * sigmoid_prime_from_output(h)
    d_w_enc = delta_hidden.T @ x + cfg.weight_decay * params.w_enc
    d_b_hidden = delta_hidden.sum(axis=0)

    return LayerGradients(d_w_enc, d_b_hidden, d_w_dec, d_b_out)


def central_difference(
    loss_fn: Callable[[list[np.ndarray]], float],
    arrays: list[np.ndarray],
    epsilon: float,
) -> list[np.ndarray]:
    """Central finite differences of a scalar loss over a list of arrays.

    Perturbs one scalar entry at a time; the arrays themselves are left
    untouched.  O(total parameter count) loss evaluations, so only for
    small probes and tests.
    """
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    work = [a.astype(np.float64).copy() for a in arrays]
    grads = [np.zeros_like(a) for a in work]
    for a, g in zip(work, grads):
        flat_a = a.ravel()
        flat_g = g.ravel()
        for i in range(flat_a.size):
            orig = flat_a[i]
            flat_a[i] = orig + epsilon
            up = loss_fn(work)
            flat_a[i] = orig - epsilon
            down = loss_fn(work)
            flat_a[i] = orig
            flat_g[i] = (up - down) / (2.0 * epsilon)
    return grads


def finite_diff_gradient(
    loss_fn: Callable[[AutoencoderParams], float],
    params: AutoencoderParams,
    epsilon: float,
) -> LayerGradients:
    """Finite-difference gradient of an arbitrary scalar loss over the layer."""

    def loss_over_arrays(arrays: list[np.ndarray]) -> float:
        return loss_fn(AutoencoderParams(*arrays))

    grads = central_difference(
        loss_over_arrays,
        [params.w_enc, params.b_hidden, params.w_dec, params.b_out],
        epsilon,
    )
    return LayerGradients(*grads)
