"""Command-line interface.

Commands: train, eval, predict, visualize, gradcheck, synth.  Settings
come from defaults, then an optional JSON config file (--config), then
flags, later sources winning.  Exit codes: 0 success, 2 configuration
problem, 3 data problem, 4 numeric failure.  Errors print one line to
stderr starting with "error:".

The positive class for all reported rates is "defective" (falling back
to the lexicographically first class when no directory has that name).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

from .config import RunConfig, resolve_config
from .data import Dataset, PreprocessConfig, load_directory, load_image, split, write_blob_directory
from .errors import (
    ConfigError,
    DataError,
    NumericError,
    NutsortError,
    ParameterError,
    ShapeError,
)
from .evaluation import (
    confusion,
    emit_trace_csv,
    format_confusion,
    format_metrics,
    metrics,
    visualize_weights,
)
from .gradcheck import DEFAULT_THRESHOLD, run_suite
from .model_io import load_model, save_model
from .network import StackedNetwork, predict
from .report import render_confusion_figure, render_trace_figure
from .training import fine_tune, pretrain

MODEL_FILENAME = "model.saem"


def _meta_path(model_path: str) -> str:
    return model_path + ".meta.json"


def _write_meta(model_path: str, class_names: list[str], pre: PreprocessConfig) -> None:
    meta = {
        "class_names": class_names,
        "target_height": pre.target_height,
        "target_width": pre.target_width,
        "resize_filter": pre.resize_filter,
    }
    with open(_meta_path(model_path), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def _read_meta(model_path: str) -> dict[str, Any] | None:
    path = _meta_path(model_path)
    if not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model metadata {path}: {exc}") from exc
    if not isinstance(meta, dict):
        raise DataError(f"model metadata {path} must be a JSON object")
    return meta


def _positive_class(class_names: Sequence[str]) -> int:
    return list(class_names).index("defective") if "defective" in class_names else 0


def _evaluate(net: StackedNetwork, ds: Dataset, out_dir: str | None = None) -> None:
    """Predict on a dataset, print confusion and rates, render the figure."""
    labels, _ = predict(net, ds.features)
    pos = _positive_class(ds.class_names)
    neg = 1 - pos if ds.num_classes == 2 else (pos + 1) % ds.num_classes
    counts = confusion(labels, ds.label_indices(), positive_class=pos)
    names = (ds.class_names[pos], ds.class_names[neg])
    print(format_confusion(counts, names))
    print(format_metrics(metrics(counts)))
    if out_dir is not None:
        fig_path = os.path.join(out_dir, "confusion.png")
        render_confusion_figure(counts, fig_path, names)
        print(f"confusion figure: {fig_path}")


def cmd_train(cfg: RunConfig) -> int:
    if cfg.data_dir is None:
        raise ConfigError("train needs a data directory (data_dir key or --data flag)")
    pre = cfg.preprocess_config()
    dataset = load_directory(cfg.data_dir, pre)
    train_ds, val_ds = split(dataset, cfg.val_fraction, cfg.seed)
    print(
        f"loaded {dataset.count} samples ({train_ds.count} train / {val_ds.count} val), "
        f"{dataset.feature_width} features, classes {dataset.class_names}"
    )

    tcfg = cfg.train_config()
    net, trace = pretrain(train_ds, cfg.layer_sizes, tcfg, val=val_ds)
    net, ft_trace = fine_tune(net, train_ds, tcfg, val=val_ds)
    trace = trace + ft_trace

    os.makedirs(cfg.out_dir, exist_ok=True)
    model_path = os.path.join(cfg.out_dir, MODEL_FILENAME)
    save_model(net, model_path)
    _write_meta(model_path, dataset.class_names, pre)
    csv_path = os.path.join(cfg.out_dir, "trace.csv")
    emit_trace_csv(trace, csv_path)
    render_trace_figure(trace, os.path.join(cfg.out_dir, "trace.png"))
    print(f"model: {model_path}")
    print(f"trace: {csv_path}")

    print("validation split:")
    _evaluate(net, val_ds, cfg.out_dir)
    return 0


def _load_model_and_meta(model_path: str, cfg: RunConfig) -> tuple[StackedNetwork, PreprocessConfig, list[str] | None]:
    net = load_model(model_path)
    meta = _read_meta(model_path)
    if meta is None:
        return net, cfg.preprocess_config(), None
    pre = PreprocessConfig(
        target_height=int(meta.get("target_height", cfg.target_height)),
        target_width=int(meta.get("target_width", cfg.target_width)),
        resize_filter=str(meta.get("resize_filter", cfg.resize_filter)),
    )
    names = meta.get("class_names")
    return net, pre, list(names) if names else None


def cmd_eval(cfg: RunConfig, model_path: str, data_dir: str) -> int:
    net, pre, _ = _load_model_and_meta(model_path, cfg)
    dataset = load_directory(data_dir, pre)
    if dataset.feature_width != net.input_width:
        raise ShapeError(
            f"model expects input width {net.input_width}, "
            f"data yields {dataset.feature_width}"
        )
    if dataset.num_classes != net.num_classes:
        raise DataError(
            f"model has {net.num_classes} classes, data has {dataset.num_classes}"
        )
    _evaluate(net, dataset)
    return 0


def cmd_predict(cfg: RunConfig, model_path: str, image_paths: list[str]) -> int:
    net, pre, class_names = _load_model_and_meta(model_path, cfg)
    if class_names is None:
        class_names = [f"class_{i}" for i in range(net.num_classes)]
    for path in image_paths:
        row = load_image(path, pre)
        labels, probs = predict(net, row)
        name = class_names[labels[0]]
        rendered = " ".join(f"{p:.6f}" for p in probs[0])
        print(f"{path}\t{name}\t{rendered}")
    return 0


def cmd_visualize(cfg: RunConfig, model_path: str, layer: int) -> int:
    net, _, _ = _load_model_and_meta(model_path, cfg)
    paths = visualize_weights(net, layer, cfg.out_dir)
    print(f"wrote {len(paths)} weight images to {cfg.out_dir}")
    return 0


def cmd_gradcheck(cfg: RunConfig) -> int:
    suite = run_suite(seed=cfg.seed)
    by_kind: dict[str, float] = {}
    for r in suite.results:
        by_kind[r.kind] = max(by_kind.get(r.kind, 0.0), r.max_rel_error)
    for kind, err in by_kind.items():
        print(f"{kind}: max relative error {err:.3e}")
    print(f"overall: max relative error {suite.max_rel_error:.3e} (threshold {DEFAULT_THRESHOLD:.0e})")
    if not suite.passed:
        raise NumericError(f"gradient check exceeded threshold: {suite.max_rel_error:.3e}")
    return 0


def cmd_synth(cfg: RunConfig) -> int:
    written = write_blob_directory(
        cfg.out_dir, cfg.synth_per_class, cfg.synth_side, cfg.synth_noise_sd, cfg.seed
    )
    print(f"wrote {len(written)} images under {cfg.out_dir}")
    return 0


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated integers, got {text!r}") from exc


def _overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    over: dict[str, Any] = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out is not None:
        over["out_dir"] = args.out
    if args.val_fraction is not None:
        over["val_fraction"] = args.val_fraction
    if args.layers is not None:
        over["layer_sizes"] = _parse_int_list(args.layers, "--layers")
    if args.epochs is not None:
        counts = _parse_int_list(args.epochs, "--epochs")
        if len(counts) < 3:
            raise ConfigError(
                "--epochs expects per-layer pretrain counts then softmax,finetune "
                f"(at least 3 numbers), got {args.epochs!r}"
            )
        over["epochs_pretrain"] = counts[:-2]
        over["epochs_softmax"] = counts[-2]
        over["epochs_finetune"] = counts[-1]
    if args.lr is not None:
        try:
            rates = [float(p) for p in args.lr.split(",") if p != ""]
        except ValueError as exc:
            raise ConfigError(f"--lr expects comma-separated numbers, got {args.lr!r}") from exc
        if len(rates) == 1:
            rates = rates * 3
        if len(rates) != 3:
            raise ConfigError(f"--lr expects 1 or 3 numbers (pretrain,softmax,finetune), got {args.lr!r}")
        over["lr_pretrain"], over["lr_softmax"], over["lr_finetune"] = rates
    extra = getattr(args, "_extra_overrides", None)
    if extra:
        over.update(extra)
    return over


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--val-fraction", type=float, dest="val_fraction", help="validation fraction in (0,1)")
    common.add_argument("--layers", help="comma-separated sizes: input,hidden1[,hidden2,...]")
    common.add_argument("--epochs", help="per-layer pretrain counts then softmax,finetune (comma-separated)")
    common.add_argument("--lr", help="learning rate(s): one value or pretrain,softmax,finetune")
    common.add_argument(
        "--print-config",
        action="store_true",
        help="print the fully resolved config as JSON and exit",
    )

    parser = argparse.ArgumentParser(
        prog="nutsort",
        description="Stacked sparse-autoencoder image classifier (positive class: defective).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", parents=[common], help="ingest, pretrain, fine-tune, report")
    p_train.add_argument("--data", help="dataset root with one subdirectory per class")

    p_eval = sub.add_parser("eval", parents=[common], help="evaluate a saved model on a directory")
    p_eval.add_argument("model", help="model file")
    p_eval.add_argument("data", help="dataset root")

    p_pred = sub.add_parser("predict", parents=[common], help="classify individual images")
    p_pred.add_argument("model", help="model file")
    p_pred.add_argument("images", nargs="+", help="image files (PGM or PNG)")

    p_vis = sub.add_parser("visualize", parents=[common], help="write encoder weights as images")
    p_vis.add_argument("model", help="model file")
    p_vis.add_argument("--layer", type=int, default=0, help="encoder layer index (default 0)")

    sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient self-check")

    p_synth = sub.add_parser("synth", parents=[common], help="generate a synthetic blob corpus")
    p_synth.add_argument("--per-class", type=int, dest="per_class", help="samples per class")
    p_synth.add_argument("--side", type=int, help="image side length (>= 4)")
    p_synth.add_argument("--noise-sd", type=float, dest="noise_sd", help="Gaussian pixel noise sd")

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    extra: dict[str, Any] = {}
    if args.command == "train" and args.data is not None:
        extra["data_dir"] = args.data
    if args.command == "synth":
        if args.per_class is not None:
            extra["synth_per_class"] = args.per_class
        if args.side is not None:
            extra["synth_side"] = args.side
        if args.noise_sd is not None:
            extra["synth_noise_sd"] = args.noise_sd
    args._extra_overrides = extra
    cfg = resolve_config(args.config, _overrides_from_args(args))

    if args.print_config:
        print(json.dumps(cfg.as_json_dict(), indent=2))
        return 0

    if args.command == "train":
        return cmd_train(cfg)
    if args.command == "eval":
        return cmd_eval(cfg, args.model, args.data)
    if args.command == "predict":
        return cmd_predict(cfg, args.model, args.images)
    if args.command == "visualize":
        return cmd_visualize(cfg, args.model, args.layer)
    if args.command == "gradcheck":
        return cmd_gradcheck(cfg)
    if args.command == "synth":
        return cmd_synth(cfg)
    raise ConfigError(f"unknown command {args.command!r}")


def _exit_code(exc: NutsortError) -> int:
    if isinstance(exc, (ConfigError, ParameterError)):
        return 2
    if isinstance(exc, NumericError):
        return 4
    return 3  # DataError, ShapeError, and anything else data-shaped


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except NutsortError as exc:
        message = str(exc).replace("\n", " | ")
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
