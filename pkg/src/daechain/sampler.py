"""Iterative sampling by repeated reconstruction.

A trained denoiser R maps a point toward higher data density, so iterating
x_{t+1} = R(x_t) walks noise toward the data manifold. Two variants are
provided: chains started from uniform noise in the data cube, and chains
started from a decoded standard-normal latent (decode the prior, then
refine). Optionally, Gaussian noise of standard deviation inject_sigma is
added before each encoding step; that smooths the effective density the
chain climbs and lets it hop between modes instead of settling into one.

Traces record the visited states (always including the first and last),
per-step displacement norms, and, when a ground-truth mixture is supplied,
the true log-density of each recorded state, which is what the diagnostics
summarize: density series, displacement series, and mode membership via
the argmax of mixture responsibilities.

States are never clamped: reconstruction outputs already live in (0, 1),
and noise-injected encoder inputs may leave the cube by design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import Model, decode_latent, reconstruct
from .numeric import NumericError, Prng, ShapeError
from .oracle import GaussianMixture, mixture_log_pdf_batch, responsibilities


@dataclass(frozen=True)
class ChainConfig:
    """Chain length, optional pre-encoding noise, and recording cadence."""

    steps: int = 20
    inject_sigma: float = 0.0
    record_every: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.inject_sigma < 0.0:
            raise ValueError(f"inject_sigma must be >= 0, got {self.inject_sigma}")
        if not 1 <= self.record_every <= self.steps:
            raise ValueError(
                f"record_every must lie in [1, steps], got {self.record_every}"
            )


@dataclass(frozen=True)
class ChainTrace:
    """Recorded chain states plus per-step bookkeeping.

    times holds the recorded step indices (always starting at 0 and ending
    at the final step); states is (n_recorded, n_chains, d); displacements
    is (steps, n_chains) with ||x_{t+1} - x_t||_2 for every step, recorded
    or not; log_densities is (n_recorded, n_chains) when a ground-truth
    mixture was supplied to the run, else None.
    """

    times: tuple[int, ...]
    states: np.ndarray
    displacements: np.ndarray
    log_densities: np.ndarray | None

    @property
    def n_chains(self) -> int:
        return self.states.shape[1]

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _as_operator(model):
    if callable(model):
        return model
    return lambda xs: reconstruct(model, xs)


def run_chain(
    model,
    x0,
    cfg: ChainConfig,
    rng: Prng | None = None,
    gm: GaussianMixture | None = None,
) -> ChainTrace:
    """Iterate x_{t+1} = R(x_t + eta_t) from x0 and record the trajectory.

    `model` is a trained autoencoder or any callable mapping a (n, d) batch
    to a (n, d) batch; eta_t ~ N(0, inject_sigma^2 I) is fresh per step and
    zero when inject_sigma is 0 (in which case no rng is needed). A
    ground-truth mixture, when given, adds true log-densities to the trace.
    """
    if cfg.inject_sigma > 0.0 and rng is None:
        raise ValueError("inject_sigma > 0 requires an rng for the injected noise")
    op = _as_operator(model)
    x = np.array(x0, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ShapeError(f"x0 must be a (n, d) batch or a (d,) point, got shape {np.shape(x0)}")
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite chain state at step 0")

    times = [0]
    states = [x.copy()]
    displacements = []
    for t in range(1, cfg.steps + 1):
        fed = x + rng.normal(x.shape, cfg.inject_sigma) if cfg.inject_sigma > 0.0 else x
        nxt = np.asarray(op(fed), dtype=np.float64)
        if nxt.shape != x.shape:
            raise ShapeError(
                f"chain operator changed the state shape from {x.shape} to {nxt.shape}"
            )
        if not np.all(np.isfinite(nxt)):
            raise NumericError(f"non-finite chain state at step {t}")
        displacements.append(np.linalg.norm(nxt - x, axis=1))
        x = nxt
        if t % cfg.record_every == 0 or t == cfg.steps:
            times.append(t)
            states.append(x.copy())

    log_densities = None
    if gm is not None:
        log_densities = np.stack([mixture_log_pdf_batch(gm, s) for s in states])
    return ChainTrace(tuple(times), np.stack(states), np.stack(displacements), log_densities)


def sample_from_noise(
    model,
    batch: int,
    cfg: ChainConfig,
    rng: Prng,
    gm: GaussianMixture | None = None,
    data_dim: int | None = None,
) -> ChainTrace:
    """Start `batch` chains from x0 ~ U(0,1)^d and run them through the model.

    The data dimension is taken from the model; pass data_dim explicitly
    when the operator is a bare callable.
    """
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    dim = data_dim if data_dim is not None else model.data_dim
    x0 = rng.uniform((batch, dim))
    return run_chain(model, x0, cfg, rng, gm)


def refine_from_prior(
    model: Model,
    batch: int,
    cfg: ChainConfig,
    rng: Prng,
    gm: GaussianMixture | None = None,
) -> ChainTrace:
    """Decode z ~ N(0, I) into data space, then refine by chain iteration."""
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    z = rng.normal((batch, model.latent_dim), 1.0)
    x0 = decode_latent(model, z)
    return run_chain(model, x0, cfg, rng, gm)


@dataclass(frozen=True)
class ChainDiagnostics:
    """Density, displacement, and mode-membership summaries of a trace.

    mode_membership is (n_recorded, n_chains) component indices (argmax of
    mixture responsibilities), mode_switches the per-chain count of changes
    between consecutive recorded states, and n_chains_switched how many
    chains changed mode at least once. The mixture-based fields are None
    when no ground-truth mixture is available.
    """

    times: tuple[int, ...]
    displacements: np.ndarray
    log_densities: np.ndarray | None
    mode_membership: np.ndarray | None
    mode_switches: np.ndarray | None
    n_chains_switched: int | None


def chain_diagnostics(
    trace: ChainTrace, gm: GaussianMixture | None = None
) -> ChainDiagnostics:
    """Summarize a trace; pass the ground-truth mixture for density/mode data."""
    if gm is None:
        return ChainDiagnostics(
            trace.times, trace.displacements, trace.log_densities, None, None, None
        )
    log_densities = trace.log_densities
    if log_densities is None:
        log_densities = np.stack(
            [mixture_log_pdf_batch(gm, s) for s in trace.states]
        )
    membership = np.stack(
        [np.argmax(responsibilities(gm, s), axis=1) for s in trace.states]
    )
    switches = (membership[1:] != membership[:-1]).sum(axis=0)
    return ChainDiagnostics(
        trace.times,
        trace.displacements,
        log_densities,
        membership,
        switches,
        int(np.count_nonzero(switches)),
    )
