"""Binary model serialization.

Layout (all little-endian):

    magic "SAEM"            4 bytes
    format version          uint32 (currently 1)
    autoencoder layer count uint32
    per layer: n, m         uint64 each
               w_enc m*n, b_hidden m, w_dec n*m, b_out n   float64 row-major
    head: k, d              uint64 each
          w k*d, b k        float64 row-major
    per layer: rho, beta, weight_decay                     float64
    head weight_decay                                      float64

Round-trips are bitwise exact.  Malformed input raises ModelFormatError
naming the byte offset where decoding failed.
"""

from __future__ import annotations

import os
import struct
from typing import Union

import numpy as np

from .autoencoder import AutoencoderParams, SparsityConfig
from .errors import ModelFormatError
from .network import StackedNetwork
from .softmax import SoftmaxParams

MAGIC = b"SAEM"
FORMAT_VERSION = 1

# Guardrail against nonsense dimension fields in corrupt files: the
# largest plausible layer is ~73k x 2000, well under this cap.
_MAX_DIM = 1 << 32


def _f64_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def serialize(net: StackedNetwork) -> bytes:
    """Encode a network (including decoders and sparsity config) as bytes."""
    net.validate()
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(net.encoders))]
    for enc in net.encoders:
        parts.append(struct.pack("<QQ", enc.n, enc.m))
        parts.append(_f64_bytes(enc.w_enc))
        parts.append(_f64_bytes(enc.b_hidden))
        parts.append(_f64_bytes(enc.w_dec))
        parts.append(_f64_bytes(enc.b_out))
    head = net.head
    parts.append(struct.pack("<QQ", head.k, head.d))
    parts.append(_f64_bytes(head.w))
    parts.append(_f64_bytes(head.b))
    for cfg in net.sparsity:
        parts.append(struct.pack("<ddd", cfg.rho, cfg.beta, cfg.weight_decay))
    parts.append(struct.pack("<d", head.weight_decay))
    return b"".join(parts)


class _Reader:
    """Cursor over a byte buffer that reports offsets on underrun."""

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.buf):
            raise ModelFormatError(
                f"truncated while reading {what}: need {count} bytes, "
                f"have {len(self.buf) - self.pos}",
                offset=self.pos,
            )
        chunk = self.buf[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]

    def f64(self, what: str) -> float:
        return struct.unpack("<d", self.take(8, what))[0]

    def f64_array(self, shape: tuple[int, ...], what: str) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)

    def dim(self, what: str) -> int:
        value = self.u64(what)
        if not 1 <= value < _MAX_DIM:
            raise ModelFormatError(f"bad {what} {value}", offset=self.pos - 8)
        return value


def deserialize(buf: bytes) -> StackedNetwork:
    """Decode bytes produced by serialize back into a network."""
    r = _Reader(buf)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    version = r.u32("format version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format version {version}, expected {FORMAT_VERSION}", offset=4
        )
    layer_count = r.u32("layer count")
    if layer_count < 1:
        raise ModelFormatError("layer count must be >= 1", offset=8)

    encoders = []
    for i in range(layer_count):
        n = r.dim(f"layer {i} input width")
        m = r.dim(f"layer {i} hidden width")
        encoders.append(
            AutoencoderParams(
                w_enc=r.f64_array((m, n), f"layer {i} w_enc"),
                b_hidden=r.f64_array((m,), f"layer {i} b_hidden"),
                w_dec=r.f64_array((n, m), f"layer {i} w_dec"),
                b_out=r.f64_array((n,), f"layer {i} b_out"),
            )
        )
    k = r.dim("head class count")
    d = r.dim("head feature width")
    head_w = r.f64_array((k, d), "head w")
    head_b = r.f64_array((k,), "head b")
    sparsity = []
    for i in range(layer_count):
        rho = r.f64(f"layer {i} rho")
        beta = r.f64(f"layer {i} beta")
        decay = r.f64(f"layer {i} weight_decay")
        sparsity.append(SparsityConfig(rho=rho, beta=beta, weight_decay=decay))
    head_decay = r.f64("head weight_decay")
    if r.pos != len(buf):
        raise ModelFormatError(
            f"{len(buf) - r.pos} trailing byte(s) after model data", offset=r.pos
        )

    net = StackedNetwork(encoders, SoftmaxParams(head_w, head_b, head_decay), sparsity)
    try:
        net.validate()
    except Exception as exc:
        raise ModelFormatError(f"decoded network is inconsistent: {exc}", offset=r.pos) from exc
    return net


def expected_size(layer_sizes: list[int], num_classes: int) -> int:
    """Byte length serialize produces for a given architecture."""
    total = 4 + 4 + 4
    for n, m in zip(layer_sizes[:-1], layer_sizes[1:]):
        total += 16 + 8 * (m * n + m + n * m + n)
    d = layer_sizes[-1]
    total += 16 + 8 * (num_classes * d + num_classes)
    total += 8 * (3 * (len(layer_sizes) - 1) + 1)
    return total


def save_model(net: StackedNetwork, path: Union[str, os.PathLike]) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(net))


def load_model(path: Union[str, os.PathLike]) -> StackedNetwork:
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc}") from exc
    try:
        return deserialize(buf)
    except ModelFormatError as exc:
        wrapped = ModelFormatError(f"{path}: {exc}")  # message already names the offset
        wrapped.offset = exc.offset
        raise wrapped from exc
