"""Denoising autoencoder variants and their training loops.

Three models share one corrupt-encode-decode skeleton: a plain denoising
autoencoder (DAE), a variational one (DVAE) whose encoder outputs the mean
and log-variance of a Gaussian posterior, and an adversarial one (DAAE)
that pushes encoded vectors toward a standard-normal prior with a small
discriminator. Corruption adds Gaussian noise and deliberately does not
clamp the result: the noisy input may leave [0, 1], and truncating it would
change which reconstruction is optimal. The decoder's sigmoid head keeps
outputs inside (0, 1), where the BCE loss needs them.

Reconstruction is always evaluated deterministically: dropout off, and the
DVAE decodes the posterior mean rather than a latent sample. That matters
because a trained reconstruction step doubles as a gradient-ascent move on
the data log-density, an interpretation that latent noise would wash out.

Training is sequential minibatch Adam with every random draw routed through
a single Prng stream, so a fixed (seed, config, dataset) triple reproduces
the trained parameters bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .losses import adversarial_losses, bce_loss, kl_to_standard_normal, mse_loss
from .nn import (
    AdamState,
    Mlp,
    MlpGrads,
    MlpSpec,
    adam_step,
    init_adam,
    init_mlp,
    mlp_backward,
    mlp_forward,
)
from .numeric import NumericError, Prng, ShapeError

MODEL_KINDS = ("dae", "dvae", "daae")
LOSS_KINDS = ("bce", "mse")


@dataclass(frozen=True)
class CorruptionSpec:
    """Additive Gaussian noise x_noisy = x + eps, eps ~ N(0, sigma^2 I)."""

    sigma: float = 0.5

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"corruption sigma must be >= 0, got {self.sigma}")


def corrupt(x, spec: CorruptionSpec, rng: Prng) -> np.ndarray:
    """Add noise to a batch; the output is intentionally not clamped."""
    xv = np.asarray(x, dtype=np.float64)
    return xv + rng.normal(xv.shape, spec.sigma)


@dataclass
class DaeModel:
    """Encoder/decoder pair trained on a denoising objective."""

    encoder: Mlp
    decoder: Mlp
    corruption: CorruptionSpec
    kind: str = field(default="dae", init=False)

    def __post_init__(self):
        _check_autoencoder_dims(self.encoder, self.decoder, latent_factor=1)

    @property
    def data_dim(self) -> int:
        return self.encoder.spec.in_dim

    @property
    def latent_dim(self) -> int:
        return self.decoder.spec.in_dim


@dataclass
class DvaeModel:
    """Variational variant: the encoder emits (mu, logvar), 2L outputs for latent dim L."""

    encoder: Mlp
    decoder: Mlp
    corruption: CorruptionSpec
    kind: str = field(default="dvae", init=False)

    def __post_init__(self):
        _check_autoencoder_dims(self.encoder, self.decoder, latent_factor=2)

    @property
    def data_dim(self) -> int:
        return self.encoder.spec.in_dim

    @property
    def latent_dim(self) -> int:
        return self.decoder.spec.in_dim


@dataclass
class DaaeModel:
    """Adversarial variant: a discriminator scores prior draws against encodings."""

    encoder: Mlp
    decoder: Mlp
    discriminator: Mlp
    corruption: CorruptionSpec
    dropout_rate: float = 0.2
    kind: str = field(default="daae", init=False)

    def __post_init__(self):
        _check_autoencoder_dims(self.encoder, self.decoder, latent_factor=1)
        if self.discriminator.spec.in_dim != self.encoder.spec.out_dim:
            raise ShapeError(
                f"discriminator input dim {self.discriminator.spec.in_dim} does not "
                f"match latent dim {self.encoder.spec.out_dim}"
            )
        if self.discriminator.spec.out_dim != 1:
            raise ShapeError("discriminator must produce a single score")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @property
    def data_dim(self) -> int:
        return self.encoder.spec.in_dim

    @property
    def latent_dim(self) -> int:
        return self.decoder.spec.in_dim


Model = DaeModel | DvaeModel | DaaeModel


def _check_autoencoder_dims(encoder: Mlp, decoder: Mlp, latent_factor: int) -> None:
    if encoder.spec.out_dim != latent_factor * decoder.spec.in_dim:
        raise ShapeError(
            f"encoder output dim {encoder.spec.out_dim} does not match "
            f"{latent_factor} x decoder input dim {decoder.spec.in_dim}"
        )
    if decoder.spec.out_dim != encoder.spec.in_dim:
        raise ShapeError(
            f"decoder output dim {decoder.spec.out_dim} does not match "
            f"data dim {encoder.spec.in_dim}"
        )


@dataclass(frozen=True)
class TrainConfig:
    """Loss choice, epoch budget, and Adam hyperparameters."""

    loss_kind: str = "bce"
    epochs: int = 30
    batch_size: int = 100
    seed: int = 0
    regularizer_weight: float = 1.0
    alpha: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}, got {self.loss_kind!r}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.regularizer_weight < 0.0:
            raise ValueError("regularizer_weight must be >= 0")


@dataclass
class OptStates:
    """One Adam state per trainable network."""

    encoder: AdamState
    decoder: AdamState
    discriminator: AdamState | None = None


def init_opt_states(model: Model, cfg: TrainConfig) -> OptStates:
    def make(mlp: Mlp) -> AdamState:
        return init_adam(mlp, alpha=cfg.alpha, beta1=cfg.beta1, beta2=cfg.beta2)

    disc = make(model.discriminator) if isinstance(model, DaaeModel) else None
    return OptStates(make(model.encoder), make(model.decoder), disc)


def build_model(
    kind: str,
    data_dim: int,
    latent_dim: int,
    rng: Prng,
    hidden=(64, 64),
    sigma: float = 0.5,
    dropout_rate: float = 0.2,
    disc_hidden=(64, 64),
) -> Model:
    """Construct a freshly initialized model of the given kind.

    The encoder stacks `hidden` ReLU layers onto the data and ends in a
    linear head (of width latent_dim, or 2*latent_dim for the DVAE); the
    decoder mirrors the hidden stack back to the data dim under a sigmoid
    head. The DAAE discriminator maps the latent through leaky-ReLU layers
    with dropout to a single sigmoid score.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")
    if data_dim < 1 or latent_dim < 1:
        raise ValueError("data_dim and latent_dim must be >= 1")
    hidden = tuple(int(h) for h in hidden)
    enc_out = 2 * latent_dim if kind == "dvae" else latent_dim
    encoder = init_mlp(
        MlpSpec((data_dim, *hidden, enc_out), "relu", "identity"), rng
    )
    decoder = init_mlp(
        MlpSpec((latent_dim, *reversed(hidden), data_dim), "relu", "sigmoid"), rng
    )
    corruption = CorruptionSpec(sigma)
    if kind == "dae":
        return DaeModel(encoder, decoder, corruption)
    if kind == "dvae":
        return DvaeModel(encoder, decoder, corruption)
    disc_hidden = tuple(int(h) for h in disc_hidden)
    discriminator = init_mlp(
        MlpSpec((latent_dim, *disc_hidden, 1), "leaky_relu", "sigmoid"), rng
    )
    return DaaeModel(encoder, decoder, discriminator, corruption, dropout_rate)


# ---------------------------------------------------------------------------
# deterministic evaluation
# ---------------------------------------------------------------------------

def _as_batch(x, dim: int, what: str) -> tuple[np.ndarray, bool]:
    xv = np.asarray(x, dtype=np.float64)
    single = xv.ndim == 1
    pts = xv[None, :] if single else xv
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ShapeError(f"{what} shape {xv.shape} does not match expected dim {dim}")
    return pts, single


def encode_to_latent(model: Model, x) -> np.ndarray:
    """Deterministic latent for a batch; the DVAE returns its posterior mean."""
    pts, single = _as_batch(x, model.data_dim, "input")
    h, _ = mlp_forward(model.encoder, pts)
    z = h[:, : model.latent_dim] if isinstance(model, DvaeModel) else h
    return z[0] if single else z


def decode_latent(model: Model, z) -> np.ndarray:
    """Decode latent vectors to data space; sigmoid head keeps values in (0, 1)."""
    zs, single = _as_batch(z, model.latent_dim, "latent")
    r, _ = mlp_forward(model.decoder, zs)
    return r[0] if single else r


def reconstruct(model: Model, x) -> np.ndarray:
    """One deterministic reconstruction pass: decode(encode(x)), eval mode."""
    pts, single = _as_batch(x, model.data_dim, "input")
    r = decode_latent(model, encode_to_latent(model, pts))
    return r[0] if single else r


# ---------------------------------------------------------------------------
# training steps
# ---------------------------------------------------------------------------

def _loss_fn(cfg: TrainConfig):
    return bce_loss if cfg.loss_kind == "bce" else mse_loss


def _check_finite(value: float, what: str) -> None:
    if not math.isfinite(value):
        raise NumericError(f"non-finite {what} (got {value!r}); training aborted")


def dae_train_step(
    model: DaeModel, batch, cfg: TrainConfig, rng: Prng, opt: OptStates
) -> float:
    """Corrupt, reconstruct, backpropagate, and apply one Adam update.

    Mutates the model parameters and optimizer state in place and returns
    the pre-update loss value.
    """
    x = np.asarray(batch, dtype=np.float64)
    x_noisy = corrupt(x, model.corruption, rng)
    z, enc_cache = mlp_forward(model.encoder, x_noisy)
    r, dec_cache = mlp_forward(model.decoder, z)
    loss = _loss_fn(cfg)(x, r)
    _check_finite(loss.value, f"{cfg.loss_kind} loss")
    dec_grads, grad_z = mlp_backward(model.decoder, dec_cache, loss.grad)
    enc_grads, _ = mlp_backward(model.encoder, enc_cache, grad_z)
    adam_step(model.encoder, enc_grads, opt.encoder)
    adam_step(model.decoder, dec_grads, opt.decoder)
    return loss.value


def dvae_train_step(
    model: DvaeModel, batch, cfg: TrainConfig, rng: Prng, opt: OptStates
) -> tuple[float, float]:
    """One reparameterized step: z = mu + exp(logvar/2) * eta, eta ~ N(0, I).

    The objective is recon + regularizer_weight * KL(q(z|x_noisy) || N(0, I)).
    Draw order per step: corruption noise first, then the latent eta.
    Returns (recon_loss, kl_loss); mutates model and optimizer in place.
    """
    x = np.asarray(batch, dtype=np.float64)
    latent = model.latent_dim
    x_noisy = corrupt(x, model.corruption, rng)
    h, enc_cache = mlp_forward(model.encoder, x_noisy)
    mu, logvar = h[:, :latent], h[:, latent:]
    std = np.exp(0.5 * logvar)
    eta = rng.normal(mu.shape, 1.0)
    z = mu + std * eta
    r, dec_cache = mlp_forward(model.decoder, z)
    recon = _loss_fn(cfg)(x, r)
    kl = kl_to_standard_normal(mu, logvar)
    w = cfg.regularizer_weight
    _check_finite(recon.value + w * kl.value, "variational objective")
    dec_grads, grad_z = mlp_backward(model.decoder, dec_cache, recon.grad)
    grad_mu = grad_z + w * kl.grad_mu
    grad_logvar = grad_z * eta * (0.5 * std) + w * kl.grad_logvar
    enc_grads, _ = mlp_backward(
        model.encoder, enc_cache, np.concatenate([grad_mu, grad_logvar], axis=1)
    )
    adam_step(model.encoder, enc_grads, opt.encoder)
    adam_step(model.decoder, dec_grads, opt.decoder)
    return recon.value, kl.value


def daae_train_step(
    model: DaaeModel, batch, cfg: TrainConfig, rng: Prng, opt: OptStates
) -> tuple[float, float, float]:
    """Three updates in a fixed order: autoencoder, discriminator, encoder.

    The same corrupted batch feeds all three phases. Phase 2 trains the
    discriminator (dropout on) to score prior draws above encodings; phase 3
    nudges the encoder to fool the updated discriminator, evaluated without
    dropout. Returns (recon_loss, disc_loss, enc_loss).
    """
    x = np.asarray(batch, dtype=np.float64)
    x_noisy = corrupt(x, model.corruption, rng)

    # phase 1: autoencoder on the denoising loss
    z, enc_cache = mlp_forward(model.encoder, x_noisy)
    r, dec_cache = mlp_forward(model.decoder, z)
    recon = _loss_fn(cfg)(x, r)
    _check_finite(recon.value, f"{cfg.loss_kind} loss")
    dec_grads, grad_z = mlp_backward(model.decoder, dec_cache, recon.grad)
    enc_grads, _ = mlp_backward(model.encoder, enc_cache, grad_z)
    adam_step(model.encoder, enc_grads, opt.encoder)
    adam_step(model.decoder, dec_grads, opt.decoder)

    # phase 2: discriminator on prior draws vs fresh encodings
    z_encoded, _ = mlp_forward(model.encoder, x_noisy)
    z_prior = rng.normal(z_encoded.shape, 1.0)
    scores_prior, cache_prior = mlp_forward(
        model.discriminator, z_prior, train_mode=True,
        dropout_rate=model.dropout_rate, rng=rng,
    )
    scores_encoded, cache_encoded = mlp_forward(
        model.discriminator, z_encoded, train_mode=True,
        dropout_rate=model.dropout_rate, rng=rng,
    )
    adv = adversarial_losses(scores_prior, scores_encoded)
    _check_finite(adv.disc_value, "discriminator loss")
    grads_prior, _ = mlp_backward(model.discriminator, cache_prior, adv.grad_disc_prior)
    grads_encoded, _ = mlp_backward(
        model.discriminator, cache_encoded, adv.grad_disc_encoded
    )
    disc_grads = MlpGrads(
        [a + b for a, b in zip(grads_prior.weights, grads_encoded.weights)],
        [a + b for a, b in zip(grads_prior.biases, grads_encoded.biases)],
    )
    adam_step(model.discriminator, disc_grads, opt.discriminator)

    # phase 3: encoder fools the updated discriminator (eval mode, no dropout);
    # the prior half of this loss call is ignored, only the fooling terms count
    z_fool, enc_cache_fool = mlp_forward(model.encoder, x_noisy)
    scores_fool, cache_fool = mlp_forward(model.discriminator, z_fool)
    fool = adversarial_losses(scores_prior, scores_fool)
    _check_finite(fool.enc_value, "encoder adversarial loss")
    _, grad_z_fool = mlp_backward(model.discriminator, cache_fool, fool.grad_enc_encoded)
    enc_grads_fool, _ = mlp_backward(model.encoder, enc_cache_fool, grad_z_fool)
    adam_step(model.encoder, enc_grads_fool, opt.encoder)

    return recon.value, adv.disc_value, fool.enc_value


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def train(
    model_kind: str,
    dataset,
    cfg: TrainConfig = TrainConfig(),
    latent_dim: int = 2,
    hidden=(64, 64),
    sigma: float = 0.5,
    dropout_rate: float = 0.2,
    disc_hidden=(64, 64),
) -> tuple[Model, list[dict]]:
    """Train a fresh model on (n, d) data in [0, 1]; returns (model, loss trace).

    Epochs are shuffled with a seeded permutation and consumed in contiguous
    minibatches (the last one may be short). The trace holds one dict per
    epoch with the mean per-step losses: always "loss" (reconstruction),
    plus "kl" for the DVAE and "disc"/"enc" for the DAAE.
    """
    data = np.asarray(dataset, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError(f"dataset must be a nonempty (n, d) array, got shape {data.shape}")
    if np.any(data < 0.0) or np.any(data > 1.0):
        raise ValueError("dataset values must lie in [0, 1]")

    rng = Prng(cfg.seed)
    model = build_model(
        model_kind, data.shape[1], latent_dim, rng,
        hidden=hidden, sigma=sigma,
        dropout_rate=dropout_rate, disc_hidden=disc_hidden,
    )
    opt = init_opt_states(model, cfg)
    n = data.shape[0]
    trace: list[dict] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        sums: dict[str, float] = {}
        steps = 0
        for start in range(0, n, cfg.batch_size):
            batch = data[order[start : start + cfg.batch_size]]
            if model_kind == "dae":
                row = {"loss": dae_train_step(model, batch, cfg, rng, opt)}
            elif model_kind == "dvae":
                recon, kl = dvae_train_step(model, batch, cfg, rng, opt)
                row = {"loss": recon, "kl": kl}
            else:
                recon, disc, enc = daae_train_step(model, batch, cfg, rng, opt)
                row = {"loss": recon, "disc": disc, "enc": enc}
            for key, value in row.items():
                sums[key] = sums.get(key, 0.0) + value
            steps += 1
        entry = {"epoch": epoch}
        entry.update({key: value / steps for key, value in sums.items()})
        trace.append(entry)
    return model, trace
