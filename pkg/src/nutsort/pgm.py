"""Binary PGM (P5) reading and writing.

Only 8-bit images (maxval 255) are supported, which is all the rest of
the package produces or consumes.  The reader accepts '#' comments in
the header, as the format allows, and reports malformed files with the
byte offset where parsing stopped.
"""

from __future__ import annotations

import os
from typing import Union

import numpy as np

from .errors import DataError

_WHITESPACE = b" \t\n\r\x0b\x0c"


def _parse_header_int(buf: bytes, pos: int, what: str) -> tuple[int, int]:
    """Read one whitespace/comment-delimited decimal token starting at pos."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and buf[pos : pos + 1].isdigit():
        pos += 1
    if pos == start:
        raise DataError(f"expected {what} at byte {start}")
    return int(buf[start:pos]), pos


def decode_pgm(buf: bytes) -> np.ndarray:
    """Decode a P5 buffer into a (height, width) uint8 array."""
    if buf[:2] != b"P5":
        raise DataError(f"not a binary PGM file (magic {buf[:2]!r}, expected b'P5')")
    width, pos = _parse_header_int(buf, 2, "width")
    height, pos = _parse_header_int(buf, pos, "height")
    maxval, pos = _parse_header_int(buf, pos, "maxval")
    if width < 1 or height < 1:
        raise DataError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise DataError(f"unsupported maxval {maxval} (only 255 is handled)")
    if pos >= len(buf) or buf[pos : pos + 1] not in _WHITESPACE:
        raise DataError(f"expected single whitespace after maxval at byte {pos}")
    pos += 1
    need = width * height
    have = len(buf) - pos
    if have != need:
        raise DataError(f"pixel data is {have} bytes, expected exactly {need}")
    return np.frombuffer(buf, dtype=np.uint8, offset=pos).reshape(height, width).copy()


def read_pgm(path: Union[str, os.PathLike]) -> np.ndarray:
    """Read a binary PGM file into a (height, width) uint8 array."""
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    try:
        return decode_pgm(buf)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def encode_pgm(image: np.ndarray) -> bytes:
    """Encode a (height, width) uint8 array as a P5 buffer."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise DataError(f"PGM image must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise DataError(f"PGM image must be uint8, got {arr.dtype}")
    h, w = arr.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    return header + arr.tobytes()


def write_pgm(path: Union[str, os.PathLike], image: np.ndarray) -> None:
    """Write a (height, width) uint8 array as a binary PGM file."""
    buf = encode_pgm(image)
    with open(path, "wb") as fh:
        fh.write(buf)
