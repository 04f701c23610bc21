"""Ground-truth Gaussian mixtures and the exact optimal denoiser.

For a data density p and Gaussian corruption x_noisy = x + eps with
eps ~ N(0, sigma^2 I), the reconstruction that minimizes either the MSE or
the BCE denoising objective at a point x is the posterior mean of the clean
data given the noisy observation:

    R*(x) = E_eps[ p(x - eps) (x - eps) ] / E_eps[ p(x - eps) ]

which equals x + sigma^2 * d/dx log (p * N(0, sigma^2))(x). As sigma -> 0
the smoothed score converges to the true score, so

    (R*(x) - x) / sigma^2  ->  d/dx log p(x),

i.e. one application of the ideal denoiser is a small gradient-ascent step
on the data log-density. This module evaluates R* directly, by Gauss-Hermite
quadrature or Monte Carlo over eps, against diagonal Gaussian mixtures whose
log-density and score are available in closed form. Both expectations are
accumulated in the log domain and combined as a normalized weighted average,
so the ratio stays stable far into the tails; a denominator below 1e-300
raises UnderflowError instead of returning garbage.

For a single Gaussian N(mu, s^2) the posterior mean is conjugate:

    R*(x) = (s^2 x + sigma^2 mu) / (s^2 + sigma^2)

and the relative error of (R*(x) - x) / sigma^2 against the true score
(mu - x) / s^2 is exactly sigma^2 / (s^2 + sigma^2), independent of x.
That closed form anchors the convergence study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp, softmax

from .numeric import Prng, ShapeError

LOG_UNDERFLOW = math.log(1e-300)

QUADRATURE_METHODS = ("gauss_hermite", "monte_carlo")


class UnderflowError(ArithmeticError):
    """The smoothed density underflowed; the point is too far from the mass."""


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture of diagonal Gaussians: weights (k,), means (k, d), variances (k, d)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.means, dtype=np.float64)
        v = np.asarray(self.variances, dtype=np.float64)
        if m.ndim == 1:
            m = m[:, None]
        if v.ndim == 1:
            v = v[:, None]
        if w.ndim != 1 or m.ndim != 2 or v.ndim != 2:
            raise ShapeError(
                f"expected weights (k,), means (k, d), variances (k, d); got "
                f"{w.shape}, {m.shape}, {v.shape}"
            )
        if not (w.shape[0] == m.shape[0] == v.shape[0]) or m.shape != v.shape:
            raise ShapeError(
                f"component counts disagree: weights {w.shape}, means {m.shape}, "
                f"variances {v.shape}"
            )
        if np.any(w <= 0.0):
            raise ValueError("mixture weights must be positive")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {w.sum()!r}")
        if np.any(v <= 0.0):
            raise ValueError("mixture variances must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def confined_to_unit_box(gm: GaussianMixture, span: float = 4.0) -> bool:
    """True when every mean +- span standard deviations stays inside (0, 1)."""
    s = np.sqrt(gm.variances)
    lo = gm.means - span * s
    hi = gm.means + span * s
    return bool(np.all(lo > 0.0) and np.all(hi < 1.0))


def _component_log_pdfs(gm: GaussianMixture, xs: np.ndarray) -> np.ndarray:
    # xs: (n, d) -> (n, k) log w_k + log N(x; mu_k, diag(v_k))
    diff = xs[:, None, :] - gm.means[None, :, :]
    quad = (diff * diff) / gm.variances[None, :, :]
    logdet = np.log(2.0 * np.pi * gm.variances).sum(axis=1)
    comp = -0.5 * (quad.sum(axis=2) + logdet[None, :])
    return comp + np.log(gm.weights)[None, :]


def _as_points(gm: GaussianMixture, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.ndim != 2 or pts.shape[1] != gm.dim:
        raise ShapeError(f"point shape {x.shape} does not match mixture dim {gm.dim}")
    return pts, single


def mixture_log_pdf_batch(gm: GaussianMixture, xs) -> np.ndarray:
    """log p(x) for each row of xs, computed with log-sum-exp over components."""
    pts, _ = _as_points(gm, np.atleast_2d(np.asarray(xs, dtype=np.float64)))
    return logsumexp(_component_log_pdfs(gm, pts), axis=1)


def mixture_log_pdf(gm: GaussianMixture, x) -> float:
    """log p(x) at a single point (d,)."""
    pts, single = _as_points(gm, x)
    if not single and pts.shape[0] != 1:
        raise ShapeError("mixture_log_pdf takes one point; use mixture_log_pdf_batch")
    return float(logsumexp(_component_log_pdfs(gm, pts), axis=1)[0])


def responsibilities(gm: GaussianMixture, xs) -> np.ndarray:
    """Posterior component probabilities, one row per point."""
    pts, _ = _as_points(gm, np.atleast_2d(np.asarray(xs, dtype=np.float64)))
    return softmax(_component_log_pdfs(gm, pts), axis=1)


def analytic_score(gm: GaussianMixture, x) -> np.ndarray:
    """Closed-form d/dx log p(x) = sum_k resp_k(x) (mu_k - x) / v_k."""
    pts, single = _as_points(gm, x)
    resp = responsibilities(gm, pts)  # (n, k)
    pull = (gm.means[None, :, :] - pts[:, None, :]) / gm.variances[None, :, :]
    score = np.einsum("nk,nkd->nd", resp, pull)
    return score[0] if single else score


def high_density_grid(
    gm: GaussianMixture,
    n: int,
    lo: float = 0.0,
    hi: float = 1.0,
    nats: float = 4.0,
    candidates: int = 4001,
) -> np.ndarray:
    """Evenly pick n 1-D points whose log-density is within `nats` of the peak."""
    if gm.dim != 1:
        raise ValueError("high_density_grid supports 1-D mixtures only")
    if n < 1:
        raise ValueError(f"need n >= 1 grid points, got {n}")
    xs = np.linspace(lo, hi, candidates)[:, None]
    logp = mixture_log_pdf_batch(gm, xs)
    peak = max(float(logp.max()), float(mixture_log_pdf_batch(gm, gm.means).max()))
    keep = xs[logp >= peak - nats]
    if keep.shape[0] < n:
        raise ValueError("not enough candidate points inside the high-density region")
    idx = np.linspace(0, keep.shape[0] - 1, n).round().astype(int)
    return keep[idx]


# ---------------------------------------------------------------------------
# optimal reconstruction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """How to average over the corruption noise eps ~ N(0, sigma^2 I)."""

    method: str = "gauss_hermite"
    nodes_per_dim: int = 64
    n_samples: int = 100_000
    mc_seed: int = 0

    def __post_init__(self):
        if self.method not in QUADRATURE_METHODS:
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if self.method == "gauss_hermite" and self.nodes_per_dim < 8:
            raise ValueError("gauss_hermite needs at least 8 nodes per dim")
        if self.method == "monte_carlo" and self.n_samples < 10_000:
            raise ValueError("monte_carlo needs at least 10000 samples")


@lru_cache(maxsize=8)
def _gh_nodes(nodes_per_dim: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product Gauss-Hermite nodes (m, dim) and log-weights (m,)."""
    nodes, weights = hermgauss(nodes_per_dim)
    logw = np.log(weights)
    if dim == 1:
        return nodes[:, None], logw
    grids = np.meshgrid(*([nodes] * dim), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    wgrids = np.meshgrid(*([logw] * dim), indexing="ij")
    logws = sum(w.reshape(-1) for w in wgrids)
    return pts, logws


def optimal_reconstruction(
    gm: GaussianMixture, sigma: float, x, quad: QuadratureSpec = QuadratureSpec()
) -> np.ndarray:
    """Evaluate R*(x) = E[p(x - eps)(x - eps)] / E[p(x - eps)] at one point.

    Gauss-Hermite uses the change of variables eps = sigma * sqrt(2) * u so
    that E[f(eps)] = pi^(-d/2) sum_i w_i f(sigma sqrt(2) u_i); Monte Carlo
    draws eps from a Prng seeded with quad.mc_seed. In both cases the ratio
    is computed as a weighted average of the shifted points with weights
    exp(log w_i + log p(x - eps_i) - max), which keeps it stable in the
    tails. Raises UnderflowError when the smoothed density E[p(x - eps)]
    falls below 1e-300.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    pts, single = _as_points(gm, x)
    if pts.shape[0] != 1:
        raise ShapeError("optimal_reconstruction takes a single point")
    xv = pts[0]
    d = gm.dim

    if quad.method == "gauss_hermite":
        u, logw = _gh_nodes(quad.nodes_per_dim, d)
        eps = sigma * math.sqrt(2.0) * u
        log_norm = -0.5 * d * math.log(math.pi)
    else:
        rng = Prng(quad.mc_seed)
        eps = rng.normal((quad.n_samples, d), sigma)
        logw = np.zeros(eps.shape[0])
        log_norm = -math.log(eps.shape[0])

    shifted = xv[None, :] - eps  # candidate clean points x - eps
    logq = logw + mixture_log_pdf_batch(gm, shifted)
    m = float(logq.max())
    tau = np.exp(logq - m)
    tau_sum = float(tau.sum())
    log_denominator = m + math.log(tau_sum) + log_norm
    if log_denominator < LOG_UNDERFLOW:
        raise UnderflowError(
            f"smoothed density underflow at x={xv.tolist()} (log value "
            f"{log_denominator:.1f}); the point is too far from the mixture mass"
        )
    recon = (tau[:, None] * shifted).sum(axis=0) / tau_sum
    return recon if single else recon[None, :]


def score_from_reconstruction(r_of_x, x, sigma: float) -> np.ndarray:
    """Score estimate (R(x) - x) / sigma^2 implied by a reconstruction."""
    if sigma == 0.0:
        raise ValueError("sigma must be nonzero to convert a reconstruction to a score")
    r = np.asarray(r_of_x, dtype=np.float64)
    xv = np.asarray(x, dtype=np.float64)
    if r.shape != xv.shape:
        raise ShapeError(f"reconstruction shape {r.shape} does not match x shape {xv.shape}")
    return (r - xv) / (sigma * sigma)


@dataclass(frozen=True)
class ConvergenceStudy:
    """Per-sigma worst-case relative score error over a grid."""

    sigmas: tuple[float, ...]
    max_rel_errors: tuple[float, ...]
    non_increasing: bool

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.sigmas, self.max_rel_errors))


def limit_convergence_study(
    gm: GaussianMixture,
    sigmas,
    grid,
    quad: QuadratureSpec = QuadratureSpec(),
) -> ConvergenceStudy:
    """Tabulate how fast (R*(x) - x) / sigma^2 approaches the true score.

    For each sigma (strictly decreasing) and each grid point x (which must
    lie in the high-density region, log p(x) >= peak - 4), computes the
    relative error ||est - score|| / ||score||; points with a vanishing true
    score contribute their absolute error instead. The `non_increasing` flag
    reports whether the error column is monotone up to quadrature noise.
    """
    sig = [float(s) for s in sigmas]
    if len(sig) < 1 or any(s <= 0.0 for s in sig):
        raise ValueError("sigmas must be positive")
    if any(b >= a for a, b in zip(sig, sig[1:])):
        raise ValueError("sigmas must be strictly decreasing")
    pts, _ = _as_points(gm, np.atleast_2d(np.asarray(grid, dtype=np.float64)))
    logp = mixture_log_pdf_batch(gm, pts)
    peak = max(float(mixture_log_pdf_batch(gm, gm.means).max()), float(logp.max()))
    if np.any(logp < peak - 4.0 - 1e-9):
        raise ValueError("grid leaves the high-density region (log p >= peak - 4)")

    truth = analytic_score(gm, pts)
    errors = []
    for s in sig:
        worst = 0.0
        for i in range(pts.shape[0]):
            recon = optimal_reconstruction(gm, s, pts[i], quad)
            est = score_from_reconstruction(recon, pts[i], s)
            tn = float(np.linalg.norm(truth[i]))
            err = float(np.linalg.norm(est - truth[i]))
            worst = max(worst, err / tn if tn > 1e-12 else err)
        errors.append(worst)
    mono = all(
        b <= a * (1.0 + 1e-6) + 1e-12 for a, b in zip(errors, errors[1:])
    )
    return ConvergenceStudy(tuple(sig), tuple(errors), mono)
