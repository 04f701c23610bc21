"""Deterministic numeric core: float64 arrays, activations, seeded sampling.

All values are C-order float64 ndarrays. Randomness flows through ``Prng``,
which owns a PCG64 uniform stream; normal draws are produced from that stream
with the Box-Muller transform so a fixed seed replays the whole pipeline
bit for bit.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ShapeError",
    "NumericError",
    "Prng",
    "sample_gaussian",
    "sample_uniform",
    "matmul",
    "sigmoid",
    "derivative_of_sigmoid",
    "relu",
    "derivative_of_relu",
    "leaky_relu",
    "derivative_of_leaky_relu",
]


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class NumericError(RuntimeError):
    """A value that must be finite came out NaN or infinite."""


def _as_shape(shape) -> tuple[int, ...]:
    if isinstance(shape, (int, np.integer)):
        shape = (int(shape),)
    out = tuple(int(s) for s in shape)
    if not out or any(s <= 0 for s in out):
        raise ValueError(f"shape must be positive integers, got {shape!r}")
    return out


class Prng:
    """Seeded random stream; single owner, no sharing across threads.

    The stream state is fully determined by ``seed``. ``uniform``,
    ``normal`` and ``permutation`` are convenience wrappers over the
    module-level sampling functions and numpy's Fisher-Yates shuffle.
    """

    def __init__(self, seed: int):
        if seed < 0 or seed > 2**64 - 1:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, shape, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        return sample_uniform(self, shape, lo, hi)

    def normal(self, shape, sigma: float = 1.0) -> np.ndarray:
        return sample_gaussian(self, shape, sigma)

    def permutation(self, n: int) -> np.ndarray:
        if n < 0:
            raise ValueError(f"permutation length must be >= 0, got {n}")
        return self._gen.permutation(n)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Prng(seed={self.seed})"


def sample_uniform(rng: Prng, shape, lo: float, hi: float) -> np.ndarray:
    """Draw uniforms on [lo, hi) from the rng's stream."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    shape = _as_shape(shape)
    n = int(np.prod(shape))
    u = rng._gen.random(n)
    return (lo + (hi - lo) * u).reshape(shape)


def sample_gaussian(rng: Prng, shape, sigma: float) -> np.ndarray:
    """Draw N(0, sigma^2) values via Box-Muller on the rng's uniform stream.

    sigma = 0 returns exact zeros without consuming the stream.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    shape = _as_shape(shape)
    n = int(np.prod(shape))
    if sigma == 0.0:
        return np.zeros(shape)
    half = (n + 1) // 2
    u1 = rng._gen.random(half)
    u2 = rng._gen.random(half)
    # u1 in [0, 1) so 1 - u1 in (0, 1]; log stays finite
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:n]
    return (sigma * z).reshape(shape)


def matmul(a, b) -> np.ndarray:
    """Matrix product of two 2-D float64 arrays, accumulated in float64."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(
            f"matmul requires 2-D operands, got shapes {a.shape} and {b.shape}"
        )
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul inner dimensions disagree: {a.shape} x {b.shape}"
        )
    return a @ b


# ---------------------------------------------------------------------------
# activations
# ---------------------------------------------------------------------------

def sigmoid(x) -> np.ndarray:
    """Logistic function 1 / (1 + exp(-x)), overflow-safe for any |x|."""
    x = np.asarray(x, dtype=np.float64)
    t = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + t), t / (1.0 + t))


def derivative_of_sigmoid(y) -> np.ndarray:
    """Derivative expressed through the sigmoid output y: y * (1 - y)."""
    y = np.asarray(y, dtype=np.float64)
    return y * (1.0 - y)


def relu(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0)


def derivative_of_relu(x) -> np.ndarray:
    """Subgradient of relu; at exactly 0 the positive branch (1) is used."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, 1.0, 0.0)


def leaky_relu(x, slope: float) -> np.ndarray:
    _check_slope(slope)
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, x, slope * x)


def derivative_of_leaky_relu(x, slope: float) -> np.ndarray:
    """Subgradient of leaky_relu; at exactly 0 the positive branch (1) is used."""
    _check_slope(slope)
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, 1.0, slope)


def _check_slope(slope: float) -> None:
    if not 0.0 <= slope < 1.0:
        raise ValueError(f"leaky slope must lie in [0, 1), got {slope}")
