"""Experiment configuration: defaults, YAML/JSON files, CLI overrides.

Precedence, lowest to highest: built-in defaults, config file, explicit
command-line flags. Files are YAML (JSON is valid YAML, so replaying a
saved ``config.json`` snapshot works); keys may be flat or grouped under
``model:``, ``train:``, and ``generate:`` sections.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .exceptions import ConfigError

_SECTIONS = ("model", "train", "generate")


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a run."""

    dataset: str = ""
    dataset_name: str = ""
    out: str = ""
    seed: int = 0
    deterministic: bool = False
    # model
    dim: int = 256
    n_layers: int = 4
    max_nodes: int = 50
    n_steps: int = 100
    residual: bool = False
    dtype: str = "float32"
    # training
    lr: float = 1e-4
    epochs: int = 100
    batch_size: int = 16
    lambda_struct: float = 1.0
    objective: str = "simplified"
    augment: int = 1
    mask_pad: bool = False
    full_t_sum: bool = False
    val_candidates: int = 4
    val_every: int = 1
    oversize: str = "truncate"
    # generation
    n_candidates: int = 500
    edge_threshold: float = 0.8
    refine_source: str = "type_representation"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _flatten(document: dict) -> dict:
    flat = {}
    for key, value in document.items():
        if key in _SECTIONS and isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def load_config_file(path) -> dict:
    """Parse a config file into a flat {field: value} dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        document = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: cannot parse config ({exc})") from None
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    flat = _flatten(document)
    unknown = sorted(set(flat) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    return flat


def resolve_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then file values, then explicit overrides."""
    merged: dict = {}
    for layer in (file_values or {}, overrides or {}):
        for key, value in layer.items():
            if value is None:
                continue
            if key not in _FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def save_config_snapshot(config: ExperimentConfig, path):
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
