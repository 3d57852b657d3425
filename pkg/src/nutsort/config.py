"""Flat run configuration: JSON file, flag overrides, strict validation.

Every key is checked before any work starts; unknown keys are rejected
rather than ignored so a typo cannot silently fall back to a default.
Flags win over file values, file values win over defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from typing import Any

from .autoencoder import SparsityConfig
from .data import PreprocessConfig
from .errors import ConfigError
from .training import TrainConfig


@dataclass
class RunConfig:
    """Everything a command needs, as one flat key set."""

    data_dir: str | None = None
    out_dir: str = "run"
    layer_sizes: list[int] = field(default_factory=lambda: [72900, 2000, 500])
    val_fraction: float = 0.2
    seed: int = 0
    epochs_pretrain: list[int] = field(default_factory=lambda: [600])  # broadcast if single
    epochs_softmax: int = 3000
    epochs_finetune: int = 1000
    lr_pretrain: float = 0.1
    lr_softmax: float = 0.1
    lr_finetune: float = 0.01
    batch_size: int | None = None  # None = full batch; JSON spells it "full"
    rho: float = 0.05
    beta: float = 1.0
    weight_decay: float = 0.001
    softmax_weight_decay: float = 0.001
    log_every: int = 100
    target_height: int = 270
    target_width: int = 270
    resize_filter: str = "bilinear"
    synth_per_class: int = 40
    synth_side: int = 16
    synth_noise_sd: float = 0.1

    def validate(self) -> None:
        """Cross-field validation by building the derived config objects."""
        if len(self.layer_sizes) < 2:
            raise ConfigError(f"layer_sizes needs at least 2 entries, got {self.layer_sizes}")
        if any(s < 1 for s in self.layer_sizes):
            raise ConfigError(f"layer_sizes entries must be >= 1, got {self.layer_sizes}")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError(f"val_fraction must be in (0,1), got {self.val_fraction}")
        layer_count = len(self.layer_sizes) - 1
        if len(self.epochs_pretrain) == 1 and layer_count > 1:
            self.epochs_pretrain = self.epochs_pretrain * layer_count
        if len(self.epochs_pretrain) != layer_count:
            raise ConfigError(
                f"epochs_pretrain has {len(self.epochs_pretrain)} entries for "
                f"{layer_count} autoencoder layers"
            )
        try:
            self.sparsity()
            self.train_config()
            self.preprocess_config()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.synth_side < 4:
            raise ConfigError(f"synth_side must be >= 4, got {self.synth_side}")
        if self.synth_per_class < 1:
            raise ConfigError(f"synth_per_class must be >= 1, got {self.synth_per_class}")
        if self.synth_noise_sd < 0:
            raise ConfigError(f"synth_noise_sd must be >= 0, got {self.synth_noise_sd}")

    def sparsity(self) -> SparsityConfig:
        return SparsityConfig(rho=self.rho, beta=self.beta, weight_decay=self.weight_decay)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs_pretrain=tuple(self.epochs_pretrain),
            epochs_softmax=self.epochs_softmax,
            epochs_finetune=self.epochs_finetune,
            lr_pretrain=self.lr_pretrain,
            lr_softmax=self.lr_softmax,
            lr_finetune=self.lr_finetune,
            batch_size=self.batch_size,
            seed=self.seed,
            sparsity=self.sparsity(),
            softmax_weight_decay=self.softmax_weight_decay,
            log_every=self.log_every,
        )

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(
            target_height=self.target_height,
            target_width=self.target_width,
            resize_filter=self.resize_filter,
        )

    def as_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "batch_size" and value is None:
                value = "full"
            out[f.name] = value
        return out


def _want_int(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _want_float(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _want_str(key: str, value: Any) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string, got {value!r}")
    return value


def _want_int_list(key: str, value: Any) -> list[int]:
    if isinstance(value, int) and not isinstance(value, bool):
        return [value]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key} must be a non-empty list of integers, got {value!r}")
    return [_want_int(f"{key}[{i}]", v) for i, v in enumerate(value)]


def _want_batch(key: str, value: Any) -> int | None:
    if value == "full" or value is None:
        return None
    return _want_int(key, value)


_COERCERS = {
    "data_dir": _want_str,
    "out_dir": _want_str,
    "layer_sizes": _want_int_list,
    "val_fraction": _want_float,
    "seed": _want_int,
    "epochs_pretrain": _want_int_list,
    "epochs_softmax": _want_int,
    "epochs_finetune": _want_int,
    "lr_pretrain": _want_float,
    "lr_softmax": _want_float,
    "lr_finetune": _want_float,
    "batch_size": _want_batch,
    "rho": _want_float,
    "beta": _want_float,
    "weight_decay": _want_float,
    "softmax_weight_decay": _want_float,
    "log_every": _want_int,
    "target_height": _want_int,
    "target_width": _want_int,
    "resize_filter": _want_str,
    "synth_per_class": _want_int,
    "synth_side": _want_int,
    "synth_noise_sd": _want_float,
}


def _apply(cfg: RunConfig, values: dict[str, Any], origin: str) -> None:
    unknown = sorted(set(values) - set(_COERCERS))
    if unknown:
        raise ConfigError(f"unknown config key(s) in {origin}: {', '.join(unknown)}")
    for key, raw in values.items():
        setattr(cfg, key, _COERCERS[key](key, raw))


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return data


def resolve_config(
    file_path: str | None = None, overrides: dict[str, Any] | None = None
) -> RunConfig:
    """defaults <- config file <- flag overrides, then validate."""
    cfg = RunConfig()
    if file_path is not None:
        _apply(cfg, load_config_file(file_path), file_path)
    if overrides:
        _apply(cfg, dict(overrides), "command-line flags")
    cfg.validate()
    return cfg
