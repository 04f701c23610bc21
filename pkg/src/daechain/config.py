"""Flat key=value run configuration.

One `key = value` pair per line, UTF-8, '#' starts a comment, blank lines
ignored. Unknown or duplicate keys are rejected with the offending line
number, as are unparseable values. List values use commas between scalars
("hidden = 64,64"); mixture means and variances separate components with
';' and coordinates with ',' ("mixture_means = 0.3,0.4; 0.7,0.6").

The same keys can be overridden from the command line via repeated
`--set key=value` flags, applied after the file in the order given.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .datasets import DatasetSpec
from .models import TrainConfig
from .oracle import GaussianMixture
from .sampler import ChainConfig


class ConfigError(ValueError):
    """A configuration file or override that cannot be used."""


@dataclass(frozen=True)
class RunConfig:
    """Every tunable of the command-line surface, with defaults."""

    model: str = "dae"
    loss: str = "bce"
    sigma: float = 0.5
    latent: int = 2
    hidden: tuple = (64, 64)
    disc_hidden: tuple = (64, 64)
    dropout: float = 0.2
    epochs: int = 30
    batch_size: int = 100
    seed: int = 0
    regularizer_weight: float = 1.0
    alpha: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    dataset: str = "mixture1d"
    n_samples: int = 10_000
    mixture_weights: tuple = (0.5, 0.5)
    mixture_means: tuple = ((0.35,), (0.65,))
    mixture_variances: tuple = ((0.0025,), (0.0025,))
    idx_path: str = ""
    chain_steps: int = 20
    inject_sigma: float = 0.0
    record_every: int = 1
    n_chains: int = 256
    check_sigmas: tuple = (0.2, 0.1, 0.05, 0.02, 0.01)
    grid_points: int = 10
    quad_nodes: int = 64
    out_dir: str = "out"
    checkpoint: str = "model.ckpt"
    image_shape: tuple | None = None
    grid_cols: int = 16


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    return text


def _parse_ints(text: str) -> tuple:
    return tuple(int(tok.strip(), 10) for tok in text.split(",") if tok.strip())


def _parse_floats(text: str) -> tuple:
    return tuple(float(tok.strip()) for tok in text.split(",") if tok.strip())


def _parse_points(text: str) -> tuple:
    points = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            points.append(_parse_floats(part))
    if not points:
        raise ValueError("expected at least one ';'-separated component")
    return tuple(points)


def _parse_shape(text: str):
    if not text.strip():
        return None
    shape = _parse_ints(text)
    if len(shape) != 2:
        raise ValueError("image_shape needs exactly two integers")
    return shape


_PARSERS = {
    "model": _parse_str,
    "loss": _parse_str,
    "sigma": _parse_float,
    "latent": _parse_int,
    "hidden": _parse_ints,
    "disc_hidden": _parse_ints,
    "dropout": _parse_float,
    "epochs": _parse_int,
    "batch_size": _parse_int,
    "seed": _parse_int,
    "regularizer_weight": _parse_float,
    "alpha": _parse_float,
    "beta1": _parse_float,
    "beta2": _parse_float,
    "dataset": _parse_str,
    "n_samples": _parse_int,
    "mixture_weights": _parse_floats,
    "mixture_means": _parse_points,
    "mixture_variances": _parse_points,
    "idx_path": _parse_str,
    "chain_steps": _parse_int,
    "inject_sigma": _parse_float,
    "record_every": _parse_int,
    "n_chains": _parse_int,
    "check_sigmas": _parse_floats,
    "grid_points": _parse_int,
    "quad_nodes": _parse_int,
    "out_dir": _parse_str,
    "checkpoint": _parse_str,
    "image_shape": _parse_shape,
    "grid_cols": _parse_int,
}


def _parse_pair(key: str, value: str, where: str) -> tuple[str, object]:
    key = key.strip()
    if key not in _PARSERS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return key, _PARSERS[key](value.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse config text into a RunConfig; errors carry the line number."""
    seen: dict[str, object] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key, parsed = _parse_pair(key, value, f"line {lineno}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen[key] = parsed
    return RunConfig(**seen)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def apply_overrides(cfg: RunConfig, overrides) -> RunConfig:
    """Apply 'key=value' strings on top of a RunConfig, in order."""
    updates = {}
    for text in overrides:
        if "=" not in text:
            raise ConfigError(f"override {text!r}: expected key=value")
        key, value = text.split("=", 1)
        key, parsed = _parse_pair(key, value, f"override {text!r}")
        updates[key] = parsed
    return dataclasses.replace(cfg, **updates)


# ---------------------------------------------------------------------------
# derived objects
# ---------------------------------------------------------------------------

def mixture_from_config(cfg: RunConfig) -> GaussianMixture:
    return GaussianMixture(
        np.array(cfg.mixture_weights, dtype=np.float64),
        np.array(cfg.mixture_means, dtype=np.float64),
        np.array(cfg.mixture_variances, dtype=np.float64),
    )


def dataset_spec_from_config(cfg: RunConfig) -> DatasetSpec:
    mixture = None
    if cfg.dataset in ("mixture1d", "mixture2d"):
        mixture = mixture_from_config(cfg)
    return DatasetSpec(cfg.dataset, cfg.n_samples, mixture, cfg.idx_path or None)


def train_config_from_config(cfg: RunConfig) -> TrainConfig:
    return TrainConfig(
        loss_kind=cfg.loss,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        seed=cfg.seed,
        regularizer_weight=cfg.regularizer_weight,
        alpha=cfg.alpha,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
    )


def chain_config_from_config(cfg: RunConfig) -> ChainConfig:
    return ChainConfig(cfg.chain_steps, cfg.inject_sigma, cfg.record_every)
