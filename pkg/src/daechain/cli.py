"""Command-line surface: train models, run chains, check the math.

Subcommands:

    train         dataset -> trained model -> checkpoint + loss.csv
    sample        checkpoint -> chains from uniform noise -> CSV + PGM grids
    refine        checkpoint -> chains from decoded prior draws -> CSV + PGMs
    score-check   compare (R(x) - x) / sigma^2 against the analytic score
    oracle-check  tabulate how the exact denoiser's score error shrinks with sigma

Every subcommand reads an optional --config file plus repeatable
--set key=value overrides. Exit codes: 0 success, 1 usage, 2 runtime
failure. Random streams are split by fixed offsets: the dataset uses
seed+1, chains use seed+2, and training itself uses the seed, so the
same config reproduces every artifact byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    chain_config_from_config,
    dataset_spec_from_config,
    load_config,
    mixture_from_config,
    train_config_from_config,
)
from .datasets import build_dataset
from .io_formats import (
    CheckpointError,
    IdxFormatError,
    load_checkpoint,
    read_idx_header,
    save_checkpoint,
    write_csv,
    write_pgm_grid,
)
from .models import reconstruct, train
from .numeric import NumericError, Prng, ShapeError
from .oracle import (
    QuadratureSpec,
    UnderflowError,
    analytic_score,
    high_density_grid,
    limit_convergence_study,
)
from .sampler import chain_diagnostics, refine_from_prior, sample_from_noise


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="daechain", description="denoising autoencoders as samplers")
    sub = parser.add_subparsers(dest="command", metavar="command")
    commands = {
        "train": "train a model on the configured dataset and save a checkpoint",
        "sample": "iterate reconstruction chains from uniform noise",
        "refine": "decode prior draws and refine them by chain iteration",
        "score-check": "compare model score estimates with the analytic score",
        "oracle-check": "run the exact-denoiser convergence study",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="key=value config file")
        p.add_argument(
            "--set",
            metavar="KEY=VALUE",
            action="append",
            default=[],
            dest="overrides",
            help="override one config key (repeatable)",
        )
    return parser


def _checkpoint_path(cfg: RunConfig) -> str:
    if os.path.isabs(cfg.checkpoint):
        return cfg.checkpoint
    return os.path.join(cfg.out_dir, cfg.checkpoint)


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _mixture_if_matching(cfg: RunConfig, data_dim: int):
    if cfg.dataset not in ("mixture1d", "mixture2d"):
        return None
    gm = mixture_from_config(cfg)
    return gm if gm.dim == data_dim else None


def _image_shape(cfg: RunConfig, data_dim: int) -> tuple[int, int]:
    if cfg.image_shape is not None:
        return cfg.image_shape
    if cfg.dataset == "blobs8x8":
        return (8, 8)
    if cfg.dataset == "idx_images" and cfg.idx_path:
        _, rows, cols = read_idx_header(cfg.idx_path)
        return (rows, cols)
    return (1, data_dim)


def _cmd_train(cfg: RunConfig) -> int:
    data = build_dataset(dataset_spec_from_config(cfg), Prng(cfg.seed + 1))
    model, trace = train(
        cfg.model,
        data,
        train_config_from_config(cfg),
        latent_dim=cfg.latent,
        hidden=cfg.hidden,
        sigma=cfg.sigma,
        dropout_rate=cfg.dropout,
        disc_hidden=cfg.disc_hidden,
    )
    ckpt = _checkpoint_path(cfg)
    os.makedirs(os.path.dirname(ckpt) or ".", exist_ok=True)
    save_checkpoint(model, ckpt)
    write_csv(trace, _out_path(cfg, "loss.csv"))
    print(
        f"trained {cfg.model} ({cfg.loss}, sigma={cfg.sigma}) on "
        f"{data.shape[0]}x{data.shape[1]} samples for {cfg.epochs} epochs; "
        f"final loss {trace[-1]['loss']:.6f}; checkpoint {ckpt}"
    )
    return 0


def _run_chains(cfg: RunConfig, start: str) -> int:
    model = load_checkpoint(_checkpoint_path(cfg))
    gm = _mixture_if_matching(cfg, model.data_dim)
    rng = Prng(cfg.seed + 2)
    chain_cfg = chain_config_from_config(cfg)
    if start == "noise":
        trace = sample_from_noise(model, cfg.n_chains, chain_cfg, rng, gm)
        prefix = "sample"
    else:
        trace = refine_from_prior(model, cfg.n_chains, chain_cfg, rng, gm)
        prefix = "refine"

    rows = []
    for i, t in enumerate(trace.times):
        for c in range(trace.n_chains):
            row = {"time": t, "chain": c}
            row.update(
                {f"x{j}": trace.states[i, c, j] for j in range(trace.states.shape[2])}
            )
            if trace.log_densities is not None:
                row["log_density"] = trace.log_densities[i, c]
            rows.append(row)
    write_csv(rows, _out_path(cfg, f"{prefix}_states.csv"))

    shape = _image_shape(cfg, model.data_dim)
    for i, t in enumerate(trace.times):
        write_pgm_grid(
            trace.states[i], shape, cfg.grid_cols,
            _out_path(cfg, f"{prefix}_step{t:04d}.pgm"),
        )

    diag = chain_diagnostics(trace, gm)
    line = (
        f"{prefix}: {trace.n_chains} chains, {chain_cfg.steps} steps, "
        f"inject_sigma={chain_cfg.inject_sigma}"
    )
    if diag.log_densities is not None:
        first, last = diag.log_densities[0], diag.log_densities[-1]
        gains = last - first
        line += (
            f"; mean log p {first.mean():.4f} -> {last.mean():.4f}"
            f", median gain {np.median(gains):.4f}"
            f", improved {np.mean(gains > 0.0):.2%}"
            f", chains that switched mode: {diag.n_chains_switched}"
        )
    else:
        line += f"; mean final step displacement {diag.displacements[-1].mean():.6f}"
    print(line)
    return 0


def _cmd_sample(cfg: RunConfig) -> int:
    return _run_chains(cfg, "noise")


def _cmd_refine(cfg: RunConfig) -> int:
    return _run_chains(cfg, "prior")


def _cmd_score_check(cfg: RunConfig) -> int:
    model = load_checkpoint(_checkpoint_path(cfg))
    gm = mixture_from_config(cfg)
    sigma = model.corruption.sigma
    if sigma <= 0.0:
        raise ValueError("score-check needs a model trained with sigma > 0")
    grid = high_density_grid(gm, cfg.grid_points)
    estimate = (reconstruct(model, grid) - grid) / (sigma * sigma)
    truth = analytic_score(gm, grid)
    rows = [
        {"x": grid[i, 0], "estimated_score": estimate[i, 0], "analytic_score": truth[i, 0]}
        for i in range(grid.shape[0])
    ]
    write_csv(rows, _out_path(cfg, "score.csv"))
    sign_match = float(np.mean(np.sign(estimate) == np.sign(truth)))
    pearson = float(np.corrcoef(estimate[:, 0], truth[:, 0])[0, 1])
    print(
        f"score-check over {grid.shape[0]} grid points: "
        f"sign match {sign_match:.4f}, pearson {pearson:.4f}"
    )
    return 0


def _cmd_oracle_check(cfg: RunConfig) -> int:
    gm = mixture_from_config(cfg)
    grid = high_density_grid(gm, cfg.grid_points)
    quad = QuadratureSpec(nodes_per_dim=cfg.quad_nodes)
    study = limit_convergence_study(gm, cfg.check_sigmas, grid, quad)
    rows = [{"sigma": s, "max_rel_error": e} for s, e in study.rows()]
    write_csv(rows, _out_path(cfg, "convergence.csv"))
    print(
        f"oracle-check over {grid.shape[0]} grid points: "
        f"non_increasing={study.non_increasing}, "
        f"smallest sigma error {study.max_rel_errors[-1]:.6f}"
    )
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "sample": _cmd_sample,
    "refine": _cmd_refine,
    "score-check": _cmd_score_check,
    "oracle-check": _cmd_oracle_check,
}

_RUNTIME_ERRORS = (
    ConfigError,
    CheckpointError,
    IdxFormatError,
    NumericError,
    ShapeError,
    UnderflowError,
    ValueError,
    ArithmeticError,
    OSError,
)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help lands here
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    for override in args.overrides:
        if "=" not in override:
            parser.print_usage(sys.stderr)
            print(f"error: --set expects key=value, got {override!r}", file=sys.stderr)
            return 1
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = apply_overrides(cfg, args.overrides)
        return _COMMANDS[args.command](cfg)
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
