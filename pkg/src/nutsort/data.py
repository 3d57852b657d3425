"""Image ingestion and dataset assembly.

Images become flat rows in [0,1]: grayscale, resize to the target
dimensions, divide by 255, flatten row-major.  Directories are scanned
in lexicographic order so the same tree always yields the same Dataset.
A synthetic two-class blob generator stands in for real image corpora
in tests and demos.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, ParameterError, ShapeError
from .matrix import Matrix, make_rng
from .pgm import read_pgm, write_pgm

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # Rec.601 luma


@dataclass(frozen=True)
class PreprocessConfig:
    """Target geometry and resampling filter for ingestion."""

    target_height: int = 270
    target_width: int = 270
    resize_filter: str = "bilinear"

    def __post_init__(self) -> None:
        if self.target_height < 1 or self.target_width < 1:
            raise ParameterError(
                f"target dims must be >= 1, got {self.target_height}x{self.target_width}"
            )
        if self.resize_filter not in ("nearest", "bilinear"):
            raise ParameterError(
                f"resize_filter must be 'nearest' or 'bilinear', got {self.resize_filter!r}"
            )


@dataclass
class Dataset:
    """Feature rows in [0,1], one-hot labels, and per-sample provenance."""

    features: Matrix
    labels: Matrix
    class_names: list[str]
    source_paths: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return self.features.shape[0]

    @property
    def feature_width(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return self.labels.shape[1]

    def label_indices(self) -> np.ndarray:
        return np.argmax(self.labels, axis=1)

    def validate(self) -> None:
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise ShapeError("features and labels must be 2-D")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ShapeError(
                f"row count mismatch: {self.features.shape[0]} features vs "
                f"{self.labels.shape[0]} labels"
            )
        if self.source_paths and len(self.source_paths) != self.features.shape[0]:
            raise ShapeError("source_paths length does not match row count")
        if len(self.class_names) != self.labels.shape[1]:
            raise ShapeError(
                f"{len(self.class_names)} class names for {self.labels.shape[1]} label columns"
            )
        if self.features.size and (self.features.min() < 0.0 or self.features.max() > 1.0):
            raise DataError("feature entries must lie in [0,1]")
        row_sums = self.labels.sum(axis=1)
        if not (np.all(row_sums == 1.0) and np.all((self.labels == 0) | (self.labels == 1))):
            raise DataError("labels must be one-hot rows")


def _round_half_up(x: np.ndarray | float) -> np.ndarray | float:
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luminance of an (..., 3) uint8 array, rounded to uint8.

    Equal-channel pixels map to themselves since the weights sum to 1.
    """
    arr = np.asarray(rgb)
    if arr.shape[-1] != 3:
        raise ShapeError(f"expected trailing RGB axis of size 3, got shape {arr.shape}")
    r, g, b = GRAY_WEIGHTS
    gray = arr[..., 0] * r + arr[..., 1] * g + arr[..., 2] * b
    return _round_half_up(gray).astype(np.uint8)


def resize(image: np.ndarray, height: int, width: int, method: str = "bilinear") -> np.ndarray:
    """Resample a 2-D image to height×width using pixel-center mapping."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ShapeError(f"resize expects a 2-D image, got shape {img.shape}")
    if height < 1 or width < 1:
        raise ParameterError(f"target dims must be >= 1, got {height}x{width}")
    if method not in ("nearest", "bilinear"):
        raise ParameterError(f"unknown resize method {method!r}")
    in_h, in_w = img.shape
    if (in_h, in_w) == (height, width):
        return img.copy()

    if method == "nearest":
        rows = np.floor((np.arange(height) + 0.5) * in_h / height).astype(int)
        cols = np.floor((np.arange(width) + 0.5) * in_w / width).astype(int)
        rows = np.clip(rows, 0, in_h - 1)
        cols = np.clip(cols, 0, in_w - 1)
        return img[np.ix_(rows, cols)]

    src_r = np.clip((np.arange(height) + 0.5) * in_h / height - 0.5, 0.0, in_h - 1.0)
    src_c = np.clip((np.arange(width) + 0.5) * in_w / width - 0.5, 0.0, in_w - 1.0)
    r0 = np.floor(src_r).astype(int)
    c0 = np.floor(src_c).astype(int)
    r1 = np.minimum(r0 + 1, in_h - 1)
    c1 = np.minimum(c0 + 1, in_w - 1)
    fr = (src_r - r0)[:, None]
    fc = (src_c - c0)[None, :]
    top = img[np.ix_(r0, c0)] * (1 - fc) + img[np.ix_(r0, c1)] * fc
    bot = img[np.ix_(r1, c0)] * (1 - fc) + img[np.ix_(r1, c1)] * fc
    return top * (1 - fr) + bot * fr


def _read_raster(path: str) -> np.ndarray:
    """Read an image file as a 2-D uint8 grayscale array."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return read_pgm(path)
    if ext == ".png":
        try:
            from PIL import Image
        except ImportError as exc:  # pragma: no cover
            raise DataError(f"{path}: PNG support requires Pillow") from exc
        try:
            with Image.open(path) as im:
                if im.mode == "L":
                    return np.asarray(im, dtype=np.uint8)
                rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot decode {path}: {exc}") from exc
        return to_grayscale(rgb)
    raise DataError(f"unsupported image format {ext!r} for {path}")


def load_image(path: str, cfg: PreprocessConfig | None = None) -> Matrix:
    """Load one image as a 1×(H·W) row of values in [0,1]."""
    cfg = cfg or PreprocessConfig()
    gray = _read_raster(path)
    resized = resize(gray, cfg.target_height, cfg.target_width, cfg.resize_filter)
    return (resized / 255.0).reshape(1, cfg.target_height * cfg.target_width)


def load_directory(root: str, cfg: PreprocessConfig | None = None) -> Dataset:
    """Assemble a Dataset from root/<class_name>/<image files>.

    Classes and files are taken in lexicographic order; the first class
    name becomes label column 0.  Any unreadable file is a fatal error,
    and all such failures are reported together.
    """
    cfg = cfg or PreprocessConfig()
    if not os.path.isdir(root):
        raise DataError(f"not a directory: {root}")
    class_names = sorted(
        d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d))
    )
    if not class_names:
        raise DataError(f"no class subdirectories under {root}")

    rows: list[Matrix] = []
    label_idx: list[int] = []
    paths: list[str] = []
    problems: list[str] = []
    for ci, name in enumerate(class_names):
        class_dir = os.path.join(root, name)
        files = sorted(
            f for f in os.listdir(class_dir) if os.path.isfile(os.path.join(class_dir, f))
        )
        if not files:
            problems.append(f"empty class directory: {class_dir}")
            continue
        for fname in files:
            path = os.path.join(class_dir, fname)
            try:
                rows.append(load_image(path, cfg))
            except DataError as exc:
                problems.append(str(exc))
                continue
            label_idx.append(ci)
            paths.append(path)
    if problems:
        raise DataError(
            f"{len(problems)} ingestion failure(s) under {root}:\n" + "\n".join(problems)
        )

    features = np.vstack(rows)
    labels = np.zeros((len(rows), len(class_names)), dtype=np.float64)
    labels[np.arange(len(rows)), label_idx] = 1.0
    ds = Dataset(features, labels, class_names, paths)
    ds.validate()
    return ds


def _take(dataset: Dataset, idx: np.ndarray) -> Dataset:
    return Dataset(
        dataset.features[idx].copy(),
        dataset.labels[idx].copy(),
        list(dataset.class_names),
        [dataset.source_paths[i] for i in idx] if dataset.source_paths else [],
    )


def split(dataset: Dataset, val_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified train/validation split by seeded shuffle.

    Each class contributes round(class_count * val_fraction) validation
    samples (halves round up, capped so training keeps at least one).
    """
    if not 0.0 < val_fraction < 1.0:
        raise ConfigError(f"val_fraction must be in (0,1), got {val_fraction}")
    label_idx = dataset.label_indices()
    rng = make_rng(seed)
    val_parts: list[np.ndarray] = []
    train_parts: list[np.ndarray] = []
    for ci in range(dataset.num_classes):
        members = np.flatnonzero(label_idx == ci)
        if members.size < 2:
            raise DataError(
                f"class {dataset.class_names[ci]!r} has {members.size} sample(s); "
                "need at least 2 to split"
            )
        n_val = int(_round_half_up(members.size * val_fraction))
        n_val = min(max(n_val, 0), members.size - 1)
        shuffled = members[rng.permutation(members.size)]
        val_parts.append(shuffled[:n_val])
        train_parts.append(shuffled[n_val:])
    train_idx = np.sort(np.concatenate(train_parts))
    val_idx = np.sort(np.concatenate(val_parts))
    return _take(dataset, train_idx), _take(dataset, val_idx)


BLOB_CLASS_NAMES = ["defective", "healthy"]
BLOB_BACKGROUND = 0.1
BLOB_BRIGHT = 0.9


def blob_templates(side: int) -> Matrix:
    """The two noise-free class templates as flat rows."""
    if side < 4:
        raise ParameterError(f"side must be >= 4, got {side}")
    q = side // 2
    templates = np.full((2, side, side), BLOB_BACKGROUND)
    templates[0, :q, :q] = BLOB_BRIGHT  # class 0: top-left square
    templates[1, side - q :, side - q :] = BLOB_BRIGHT  # class 1: bottom-right square
    return templates.reshape(2, side * side)


def synth_blobs(samples_per_class: int, side: int, noise_sd: float, seed: int) -> Dataset:
    """Two-class synthetic corpus: a bright square per class plus noise.

    Gaussian pixel noise is clipped back to [0,1]; noise_sd=0 repeats the
    exact templates.  Deterministic per seed.
    """
    if samples_per_class < 1:
        raise ParameterError(f"samples_per_class must be >= 1, got {samples_per_class}")
    if noise_sd < 0:
        raise ParameterError(f"noise_sd must be >= 0, got {noise_sd}")
    templates = blob_templates(side)
    rng = make_rng(seed)
    rows: list[Matrix] = []
    paths: list[str] = []
    for ci in range(2):
        block = np.repeat(templates[ci : ci + 1], samples_per_class, axis=0)
        if noise_sd > 0:
            block = block + rng.normal(0.0, noise_sd, size=block.shape)
        rows.append(np.clip(block, 0.0, 1.0))
        paths.extend(f"synth:{BLOB_CLASS_NAMES[ci]}/{i}" for i in range(samples_per_class))
    features = np.vstack(rows)
    labels = np.zeros((2 * samples_per_class, 2), dtype=np.float64)
    labels[: samples_per_class, 0] = 1.0
    labels[samples_per_class :, 1] = 1.0
    ds = Dataset(features, labels, list(BLOB_CLASS_NAMES), paths)
    ds.validate()
    return ds


def write_blob_directory(
    root: str, samples_per_class: int, side: int, noise_sd: float, seed: int
) -> list[str]:
    """Materialize a synthetic corpus as PGM files under root/<class>/.

    Returns the written file paths.  Pixel values are quantized to uint8,
    so a re-ingested copy matches the generated Dataset to within 1/255.
    """
    ds = synth_blobs(samples_per_class, side, noise_sd, seed)
    label_idx = ds.label_indices()
    written: list[str] = []
    digits = max(4, len(str(samples_per_class - 1)))
    counters = [0, 0]
    for row, ci in zip(ds.features, label_idx):
        class_dir = os.path.join(root, ds.class_names[ci])
        os.makedirs(class_dir, exist_ok=True)
        image = _round_half_up(row.reshape(side, side) * 255.0).astype(np.uint8)
        path = os.path.join(class_dir, f"blob_{counters[ci]:0{digits}d}.pgm")
        write_pgm(path, image)
        written.append(path)
        counters[ci] += 1
    return written
