"""Plain multilayer perceptrons with explicit backpropagation and Adam.

Weights are stored per layer as (out, in) matrices; a forward pass computes
z_i = h @ W_i.T + b_i. Hidden layers use relu or leaky_relu with optional
inverted dropout in train mode; the output head is sigmoid or identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numeric import (
    NumericError,
    Prng,
    ShapeError,
    derivative_of_leaky_relu,
    derivative_of_relu,
    derivative_of_sigmoid,
    leaky_relu,
    relu,
    sigmoid,
)

HIDDEN_ACTIVATIONS = ("relu", "leaky_relu")
OUTPUT_ACTIVATIONS = ("sigmoid", "identity")


@dataclass(frozen=True)
class MlpSpec:
    """Architecture tag: layer sizes plus activation choices."""

    layer_sizes: tuple[int, ...]
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"
    leaky_slope: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2:
            raise ValueError("an MLP needs at least an input and an output size")
        if any(s <= 0 for s in self.layer_sizes):
            raise ValueError(f"layer sizes must be positive, got {self.layer_sizes}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        if not 0.0 <= self.leaky_slope < 1.0:
            raise ValueError(f"leaky slope must lie in [0, 1), got {self.leaky_slope}")

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1


@dataclass
class Mlp:
    """Parameters bound to their spec. Weight i has shape (sizes[i+1], sizes[i])."""

    spec: MlpSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        sizes = self.spec.layer_sizes
        if len(self.weights) != self.spec.n_layers or len(self.biases) != self.spec.n_layers:
            raise ShapeError("parameter count does not match spec layer count")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expect = (sizes[i + 1], sizes[i])
            if w.shape != expect:
                raise ShapeError(f"layer {i} weight shape {w.shape}, spec wants {expect}")
            if b.shape != (sizes[i + 1],):
                raise ShapeError(f"layer {i} bias shape {b.shape}, spec wants ({sizes[i + 1]},)")


@dataclass
class MlpGrads:
    """Gradients shaped like the Mlp parameters."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class ForwardCache:
    """Intermediates kept by mlp_forward for the matching backward pass."""

    inputs: list[np.ndarray]       # input to each affine layer
    preacts: list[np.ndarray]      # z_i before activation
    masks: list[np.ndarray | None]  # dropout mask per hidden layer (scaled), or None
    output: np.ndarray             # final activated output


def init_mlp(spec: MlpSpec, rng: Prng) -> Mlp:
    """Glorot-uniform weights, zero biases: W_ij ~ U(-a, a), a = sqrt(6/(fan_in+fan_out))."""
    weights, biases = [], []
    sizes = spec.layer_sizes
    for i in range(spec.n_layers):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform((fan_out, fan_in), -bound, bound))
        biases.append(np.zeros(fan_out))
    return Mlp(spec, weights, biases)


def _hidden_act(spec: MlpSpec, z: np.ndarray) -> np.ndarray:
    if spec.hidden_activation == "relu":
        return relu(z)
    return leaky_relu(z, spec.leaky_slope)


def _hidden_act_derivative(spec: MlpSpec, z: np.ndarray) -> np.ndarray:
    if spec.hidden_activation == "relu":
        return derivative_of_relu(z)
    return derivative_of_leaky_relu(z, spec.leaky_slope)


def mlp_forward(
    mlp: Mlp,
    x,
    train_mode: bool = False,
    dropout_rate: float = 0.0,
    rng: Prng | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Run the network on a (batch, in_dim) matrix.

    In train mode with dropout_rate > 0, hidden activations are masked with
    inverted dropout (kept units scaled by 1/(1-rate)), which needs an rng.
    Eval mode applies no masks, so train-mode expectations match eval output.
    """
    x = np.asarray(x, dtype=np.float64)
    spec = mlp.spec
    if x.ndim != 2 or x.shape[1] != spec.in_dim:
        raise ShapeError(
            f"input shape {x.shape} does not match spec input size {spec.in_dim}"
        )
    if not 0.0 <= dropout_rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {dropout_rate}")
    use_dropout = train_mode and dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ValueError("train-mode dropout requires an rng")

    inputs: list[np.ndarray] = []
    preacts: list[np.ndarray] = []
    masks: list[np.ndarray | None] = []
    h = x
    last = spec.n_layers - 1
    for i in range(spec.n_layers):
        inputs.append(h)
        z = h @ mlp.weights[i].T + mlp.biases[i]
        preacts.append(z)
        if i < last:
            a = _hidden_act(spec, z)
            if use_dropout:
                keep = rng.uniform(a.shape) >= dropout_rate
                mask = keep / (1.0 - dropout_rate)
                a = a * mask
                masks.append(mask)
            else:
                masks.append(None)
            h = a
        else:
            if spec.output_activation == "sigmoid":
                out = sigmoid(z)
            else:
                out = z
    cache = ForwardCache(inputs, preacts, masks, out)
    return out, cache


def mlp_backward(
    mlp: Mlp, cache: ForwardCache, grad_output: np.ndarray
) -> tuple[MlpGrads, np.ndarray]:
    """Backpropagate d(loss)/d(output) through the cached forward pass.

    Returns parameter gradients and the gradient with respect to the input.
    """
    spec = mlp.spec
    n = spec.n_layers
    if len(cache.inputs) != n or len(cache.preacts) != n:
        raise ValueError("stale cache: layer count does not match this network")
    for i in range(n):
        if cache.inputs[i].shape[1] != mlp.weights[i].shape[1] or (
            cache.preacts[i].shape[1] != mlp.weights[i].shape[0]
        ):
            raise ValueError(f"stale cache: layer {i} shapes do not match this network")
    grad_output = np.asarray(grad_output, dtype=np.float64)
    if grad_output.shape != cache.output.shape:
        raise ShapeError(
            f"grad_output shape {grad_output.shape} does not match output "
            f"shape {cache.output.shape}"
        )

    if spec.output_activation == "sigmoid":
        g = grad_output * derivative_of_sigmoid(cache.output)
    else:
        g = grad_output

    wgrads: list[np.ndarray] = [np.empty(0)] * n
    bgrads: list[np.ndarray] = [np.empty(0)] * n
    for i in reversed(range(n)):
        # g holds d(loss)/d(z_i) here
        wgrads[i] = g.T @ cache.inputs[i]
        bgrads[i] = g.sum(axis=0)
        g = g @ mlp.weights[i]
        if i > 0:
            mask = cache.masks[i - 1]
            if mask is not None:
                g = g * mask
            g = g * _hidden_act_derivative(spec, cache.preacts[i - 1])
    return MlpGrads(wgrads, bgrads), g


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """First/second moment accumulators plus step count and hyperparameters."""

    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    t: int = 0
    alpha: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(
    mlp: Mlp,
    alpha: float = 2e-4,
    beta1: float = 0.5,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
        raise ValueError("beta1 and beta2 must lie in [0, 1)")
    return AdamState(
        m_w=[np.zeros_like(w) for w in mlp.weights],
        v_w=[np.zeros_like(w) for w in mlp.weights],
        m_b=[np.zeros_like(b) for b in mlp.biases],
        v_b=[np.zeros_like(b) for b in mlp.biases],
        alpha=alpha,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(mlp: Mlp, grads: MlpGrads, state: AdamState) -> None:
    """One bias-corrected Adam update, applied to the Mlp in place."""
    if len(grads.weights) != len(mlp.weights):
        raise ShapeError("gradient layer count does not match the network")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**state.t
    corr2 = 1.0 - b2**state.t
    for i in range(len(mlp.weights)):
        for kind, param, g, m, v in (
            ("weight", mlp.weights[i], grads.weights[i], state.m_w, state.v_w),
            ("bias", mlp.biases[i], grads.biases[i], state.m_b, state.v_b),
        ):
            if not np.all(np.isfinite(g)):
                raise NumericError(f"layer {i} {kind} gradient is not finite")
            m[i] = b1 * m[i] + (1.0 - b1) * g
            v[i] = b2 * v[i] + (1.0 - b2) * (g * g)
            m_hat = m[i] / corr1
            v_hat = v[i] / corr2
            param -= state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
