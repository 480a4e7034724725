"""Run configuration: flat key=value files with typed keys.

Two profiles ship with the package: desk.cfg (small dimensions, the default
for tests and quick runs) and paper.cfg (full-scale dimensions and the
published learning rate of 1.0, which is aggressive for Adam and kept only
at that scale).
"""

from __future__ import annotations

import dataclasses
import importlib.resources
from dataclasses import dataclass

from .errors import ConfigError

# config-file key -> dataclass field (lambda is a Python keyword)
_KEY_TO_FIELD = {"lambda": "lam"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}


@dataclass
class TrainConfig:
    lam: float = 0.6              # semantic/syntactic trade-off
    hidden_size: int = 16         # H, per LSTM direction
    projection_size: int = 32     # P, affinity projection
    gcn_maps: int = 16            # F, GCN feature maps
    attention_size: int = 32      # T, attention transform
    regressor_size: int = 16      # R, regressor hidden layer
    lr: float = 1e-3
    epochs: int = 200
    batch_size: int = 1
    seed: int = 0
    patience: int = 10            # epochs without dev improvement before stopping
    no_structure: bool = False    # bypass affinity + GCN, head reads LSTM states
    no_attention: bool = False    # head reads the anchor node vector directly
    row_normalize_a: bool = False
    gcn_layers: int = 2
    gcn_activation: str = "relu"
    ffn_activation: str = "relu"
    huber_delta: float = 1.0
    clip_predictions: bool = False  # evaluation-time clamp to [-3, +3]

    def validate(self) -> "TrainConfig":
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must lie in [0, 1], got {self.lam}")
        for dim_field in ("hidden_size", "projection_size", "gcn_maps",
                          "attention_size", "regressor_size", "gcn_layers"):
            if getattr(self, dim_field) < 1:
                raise ConfigError(f"{dim_field} must be positive, "
                                  f"got {getattr(self, dim_field)}")
        if self.lr <= 0.0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.huber_delta <= 0.0:
            raise ConfigError(f"huber_delta must be positive, got {self.huber_delta}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.patience < 0:
            raise ConfigError(f"patience must be nonnegative, got {self.patience}")
        for act_field in ("gcn_activation", "ffn_activation"):
            if getattr(self, act_field) not in ("relu", "tanh"):
                raise ConfigError(f"{act_field} must be 'relu' or 'tanh', "
                                  f"got {getattr(self, act_field)!r}")
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(TrainConfig)}


def _convert(key: str, field_name: str, raw: str):
    kind = _FIELDS[field_name].type
    raw = raw.strip()
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a {kind}, got {raw!r}") from None
    return raw


def parse_config(text: str, base: TrainConfig | None = None) -> TrainConfig:
    cfg = dataclasses.replace(base) if base is not None else TrainConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        field_name = _KEY_TO_FIELD.get(key, key)
        if field_name not in _FIELDS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        setattr(cfg, field_name, _convert(key, field_name, value))
    return cfg.validate()


def load_config(path: str) -> TrainConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg: TrainConfig) -> dict:
    return {_FIELD_TO_KEY.get(f.name, f.name): getattr(cfg, f.name)
            for f in dataclasses.fields(TrainConfig)}


def config_from_dict(d: dict) -> TrainConfig:
    cfg = TrainConfig()
    for key, value in d.items():
        field_name = _KEY_TO_FIELD.get(key, key)
        if field_name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, field_name, value)
    return cfg.validate()


def builtin_config(name: str) -> TrainConfig:
    """Load a shipped profile by stem, e.g. 'desk' or 'paper'."""
    res = importlib.resources.files("factgraph").joinpath("configs").joinpath(f"{name}.cfg")
    if not res.is_file():
        raise ConfigError(f"no builtin config named {name!r}")
    return parse_config(res.read_text())
