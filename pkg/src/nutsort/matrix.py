"""Dense matrix kernel and seeded random initialization.

A matrix is a 2-D ``numpy.ndarray`` of float64 in row-major order; batches
store one sample per row.  NumPy supplies the arithmetic, this module pins
down the contracts the rest of the package relies on: shape checking with
informative errors, and bitwise-reproducible random initialization.

Randomness comes from PCG64 (``numpy.random.Generator``), whose streams are
identical for a given seed across runs and platforms.  Treat every array
returned here as read-only; training code builds new arrays instead of
mutating old ones.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ShapeError

Matrix = np.ndarray

_ELEMENTWISE_OPS = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator for the given 64-bit seed (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def as_matrix(data) -> Matrix:
    """Coerce nested sequences or an array to a 2-D float64 matrix."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return a


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product; raises ShapeError naming both shapes on mismatch."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def transpose(a: Matrix) -> Matrix:
    """Transpose as a contiguous copy, so transpose(transpose(a)) == a bitwise."""
    return np.ascontiguousarray(a.T)


def elementwise(a: Matrix, b: Matrix, op: str) -> Matrix:
    """Pointwise add/sub/mul of two same-shaped matrices."""
    if op not in _ELEMENTWISE_OPS:
        raise ValueError(f"unknown elementwise op {op!r}; expected one of {sorted(_ELEMENTWISE_OPS)}")
    if a.shape != b.shape:
        raise ShapeError(f"elementwise {op} shape mismatch: {a.shape} vs {b.shape}")
    return _ELEMENTWISE_OPS[op](a, b)


def map_scalar(a: Matrix, f: Callable[[float], float]) -> Matrix:
    """Apply a scalar function to every entry."""
    return np.vectorize(f, otypes=[np.float64])(a)


def glorot_init(rows: int, cols: int, rng: np.random.Generator) -> Matrix:
    """Uniform init on [-r, r] with r = sqrt(6 / (rows + cols)).

    Consumes the generator, so successive calls with one rng yield
    independent matrices while a fresh seed reproduces the whole sequence.
    """
    if rows < 1 or cols < 1:
        raise ShapeError(f"glorot_init needs positive dims, got {rows}x{cols}")
    r = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-r, r, size=(rows, cols))
