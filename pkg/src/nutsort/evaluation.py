"""Confusion counts, rates, trace CSV emission, and weight visualization.

The positive class is "defective" throughout: a false positive is a
healthy item flagged defective.  Rates are reported under two
conventions side by side: fraction-of-total (accuracy + fp + fn = 1)
and the usual classwise fractions fp/(fp+tn), fn/(fn+tp).  Divisions
with an empty denominator yield None rather than NaN.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .network import StackedNetwork
from .pgm import write_pgm
from .training import TracePoint, TrainingTrace


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        for name, v in (("tp", self.tp), ("tn", self.tn), ("fp", self.fp), ("fn", self.fn)):
            if v < 0:
                raise ParameterError(f"{name} must be >= 0, got {v}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(
    predicted: np.ndarray, actual: np.ndarray, positive_class: int = 0
) -> ConfusionCounts:
    """Count binary outcomes; label arrays hold class indices."""
    pred = np.asarray(predicted).ravel()
    true = np.asarray(actual).ravel()
    if pred.shape != true.shape:
        raise ShapeError(
            f"predicted has {pred.shape[0]} entries, actual has {true.shape[0]}"
        )
    p_pos = pred == positive_class
    t_pos = true == positive_class
    return ConfusionCounts(
        tp=int(np.sum(p_pos & t_pos)),
        tn=int(np.sum(~p_pos & ~t_pos)),
        fp=int(np.sum(p_pos & ~t_pos)),
        fn=int(np.sum(~p_pos & t_pos)),
    )


@dataclass(frozen=True)
class Metrics:
    """Rates derived from a confusion matrix; None marks 0/0 cases."""

    accuracy: float
    fp_rate_total: float
    fn_rate_total: float
    fp_rate_classwise: float | None
    fn_rate_classwise: float | None
    precision: float | None
    recall: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {
            "accuracy": self.accuracy,
            "fp_rate_total": self.fp_rate_total,
            "fn_rate_total": self.fn_rate_total,
            "fp_rate_classwise": self.fp_rate_classwise,
            "fn_rate_classwise": self.fn_rate_classwise,
            "precision": self.precision,
            "recall": self.recall,
        }


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def metrics(c: ConfusionCounts) -> Metrics:
    """All rates from the counts; raises on an empty evaluation."""
    if c.total == 0:
        raise ParameterError("cannot compute metrics of zero samples")
    return Metrics(
        accuracy=(c.tp + c.tn) / c.total,
        fp_rate_total=c.fp / c.total,
        fn_rate_total=c.fn / c.total,
        fp_rate_classwise=_ratio(c.fp, c.fp + c.tn),
        fn_rate_classwise=_ratio(c.fn, c.fn + c.tp),
        precision=_ratio(c.tp, c.tp + c.fp),
        recall=_ratio(c.tp, c.tp + c.fn),
    )


def format_confusion(c: ConfusionCounts, class_names: tuple[str, str] = ("defective", "healthy")) -> str:
    """Aligned plain-text confusion matrix, rows = actual, cols = predicted."""
    pos, neg = class_names
    rows = [
        ("", f"pred {pos}", f"pred {neg}"),
        (f"actual {pos}", str(c.tp), str(c.fn)),
        (f"actual {neg}", str(c.fp), str(c.tn)),
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    return "\n".join(
        "  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)) for row in rows
    )


def format_metrics(m: Metrics) -> str:
    lines = []
    for key, value in m.as_dict().items():
        rendered = "undefined" if value is None else f"{value:.4f}"
        lines.append(f"{key}: {rendered}")
    return "\n".join(lines)


def _render_float(v: float | None) -> str:
    return "" if v is None else f"{v:.17g}"


def emit_trace_csv(trace: TrainingTrace, path: str) -> None:
    """Write the training trace; accuracy cells are empty when absent."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phase", "iteration", "loss", "train_accuracy", "val_accuracy"])
        for p in trace:
            writer.writerow(
                [
                    p.phase,
                    p.iteration,
                    _render_float(p.loss),
                    _render_float(p.train_accuracy),
                    _render_float(p.val_accuracy),
                ]
            )


def parse_trace_csv(path: str) -> TrainingTrace:
    """Read back a file written by emit_trace_csv."""
    trace: TrainingTrace = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["phase", "iteration", "loss", "train_accuracy", "val_accuracy"]
        if header != expected:
            raise ParameterError(f"unexpected trace header {header}, want {expected}")
        for row in reader:
            if len(row) != 5:
                raise ParameterError(f"trace row has {len(row)} cells: {row}")
            trace.append(
                TracePoint(
                    phase=row[0],
                    iteration=int(row[1]),
                    loss=float(row[2]),
                    train_accuracy=float(row[3]) if row[3] else None,
                    val_accuracy=float(row[4]) if row[4] else None,
                )
            )
    return trace


def weight_image(row: np.ndarray, height: int, width: int) -> np.ndarray:
    """Min-max scale one weight row to uint8; constant rows map to 128."""
    if row.size != height * width:
        raise ShapeError(f"row of {row.size} values cannot fill {height}x{width}")
    lo = float(row.min())
    hi = float(row.max())
    if hi == lo:
        return np.full((height, width), 128, dtype=np.uint8)
    scaled = (row.reshape(height, width) - lo) / (hi - lo) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def visualize_weights(
    net: StackedNetwork,
    layer_index: int,
    out_dir: str,
    shape: tuple[int, int] | None = None,
) -> list[str]:
    """Write one PGM per hidden neuron of the chosen encoder layer.

    Each neuron's weight row is reshaped to shape (defaulting to the
    square root of the input width, which must then be a perfect square).
    """
    if not 0 <= layer_index < len(net.encoders):
        raise ParameterError(
            f"layer_index {layer_index} out of range for {len(net.encoders)} layers"
        )
    enc = net.encoders[layer_index]
    if shape is None:
        side = int(round(enc.n**0.5))
        if side * side != enc.n:
            raise ParameterError(
                f"layer input width {enc.n} is not square; pass an explicit shape"
            )
        shape = (side, side)
    if shape[0] * shape[1] != enc.n:
        raise ParameterError(f"shape {shape} does not cover input width {enc.n}")

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for j in range(enc.m):
        image = weight_image(enc.w_enc[j], shape[0], shape[1])
        path = os.path.join(out_dir, f"weight_{layer_index}_{j}.pgm")
        write_pgm(path, image)
        paths.append(path)
    return paths
