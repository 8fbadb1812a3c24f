"""Gaussian mixture proposals fitted with EM and selected by BIC.

Between populations the sampler fits mixtures with K = 1..K_max components
to the active particles and keeps the K with the lowest BIC. Covariances are
ridged every M-step because active populations routinely have coordinates
that are exactly zero in every particle; without the ridge the MLE
covariance is singular.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError, GmmError, SingularComponentError
from .spike_slab import apply_spike, apply_threshold

logger = logging.getLogger("sabc")

__all__ = [
    "GaussianMixture",
    "EmResult",
    "responsibilities",
    "em_fit",
    "bic",
    "select_mixture",
    "sample_sparse_particle",
    "inflate_covariance",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianMixture:
    """Mixture parameters plus cached Cholesky factors of the covariances."""

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    chols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.covariances = np.asarray(self.covariances, dtype=float)
        K = self.weights.shape[0]
        if self.means.ndim != 2 or self.means.shape[0] != K:
            raise ConfigError("means must be (K, dim)")
        dim = self.means.shape[1]
        if self.covariances.shape != (K, dim, dim):
            raise ConfigError("covariances must be (K, dim, dim)")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ConfigError("weights must be positive and sum to 1")
        try:
            self.chols = np.linalg.cholesky(self.covariances)
        except np.linalg.LinAlgError as e:
            raise GmmError(f"covariance not positive definite: {e}") from None

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def _log_densities(points, means, chols):
    """(n, K) matrix of log N(x_i | mu_j, Sigma_j)."""
    n, d = points.shape
    K = means.shape[0]
    out = np.empty((n, K))
    for j in range(K):
        L = chols[j]
        diff = (points - means[j]).T
        sol = solve_triangular(L, diff, lower=True, check_finite=False)
        quad = np.einsum("dn,dn->n", sol, sol)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        out[:, j] = -0.5 * (d * _LOG_2PI + logdet + quad)
    return out


def responsibilities(points, weights, means, chols):
    """E-step: posterior component memberships and total log-likelihood.

    Rows of the returned (n, K) matrix sum to one; computed in log space so
    widely separated components cannot underflow the normalization.
    """
    lw = _log_densities(points, means, chols) + np.log(weights)[None, :]
    rowmax = lw.max(axis=1)
    if not np.all(np.isfinite(rowmax)):
        j = int(np.argmin(np.diagonal(chols, axis1=1, axis2=2).prod(axis=1)))
        raise SingularComponentError(
            f"responsibility normalization is singular (most collapsed component: {j})"
        )
    norm = rowmax + np.log(np.exp(lw - rowmax[:, None]).sum(axis=1))
    resp = np.exp(lw - norm[:, None])
    return resp, float(norm.sum())


@dataclass
class EmResult:
    mixture: GaussianMixture
    loglik: float
    n_iter: int
    loglik_trace: list


def em_fit(points, K: int, rng: np.random.Generator, tol: float = 1e-6,
           max_iter: int = 200, ridge: float | None = None) -> EmResult:
    """Fit a K-component Gaussian mixture by EM from a random start.

    Initialization: means are K distinct sampled points, covariances the
    ridged sample covariance, weights uniform. Every M-step adds a ridge to
    the covariance diagonals. An explicit scalar `ridge` adds exactly
    ridge*I. `ridge=None` regularizes per coordinate: 1e-6 times that
    coordinate's sample variance, floored at 1e-12 so exact-zero columns
    stay usable. The relative form matters when coordinate scales span
    orders of magnitude (informed priors): a shared scalar tied to the mean
    diagonal injects the large coordinates' scale into the small ones and
    the proposal stops concentrating. Stops when
    |ll_t - ll_{t-1}| <= tol * max(1, |ll_{t-1}|) or after `max_iter` M-steps.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise GmmError(f"points must be (n, dim), got shape {points.shape}")
    n, d = points.shape
    if K < 1:
        raise GmmError(f"K must be >= 1, got {K}")
    if n < K:
        raise GmmError(f"cannot fit {K} components to {n} points")

    base_cov = np.atleast_2d(np.cov(points.T, bias=True))
    if ridge is None:
        ridge_diag = np.maximum(1e-6 * np.diag(base_cov), 1e-12)
    else:
        ridge_diag = np.full(d, float(ridge))
    ridge_mat = np.diag(ridge_diag)

    weights = np.full(K, 1.0 / K)
    means = points[rng.choice(n, size=K, replace=False)].copy()
    covs = np.repeat((base_cov + ridge_mat)[None, :, :], K, axis=0)
    chols = np.linalg.cholesky(covs)

    trace = []
    ll_prev = None
    n_iter = 0
    while True:
        resp, ll = responsibilities(points, weights, means, chols)
        trace.append(ll)
        if ll_prev is not None and abs(ll - ll_prev) <= tol * max(1.0, abs(ll_prev)):
            break
        if n_iter == max_iter:
            break
        nj = resp.sum(axis=0)
        if np.any(nj < 1e-300):
            j = int(np.argmin(nj))
            raise SingularComponentError(f"component {j} collapsed to zero responsibility")
        weights = nj / n
        means = (resp.T @ points) / nj[:, None]
        for j in range(K):
            diff = points - means[j]
            covs[j] = (resp[:, j] * diff.T) @ diff / nj[j] + ridge_mat
        try:
            chols = np.linalg.cholesky(covs)
        except np.linalg.LinAlgError as e:
            raise SingularComponentError(f"covariance update lost positive definiteness: {e}") from None
        ll_prev = ll
        n_iter += 1

    mixture = GaussianMixture(weights=weights, means=means, covariances=covs.copy())
    return EmResult(mixture=mixture, loglik=ll, n_iter=n_iter, loglik_trace=trace)


def bic(loglik: float, K: int, n_points: int, dim: int) -> float:
    """Bayesian information criterion with the full free-parameter count.

    p = (K-1) mixture weights + K*dim means + K*dim*(dim+1)/2 covariance
    entries; BIC = p*ln(n) - 2*loglik (lower is better).
    """
    if n_points < 1:
        raise GmmError("BIC needs at least one point")
    p = (K - 1) + K * dim + K * dim * (dim + 1) // 2
    return p * float(np.log(n_points)) - 2.0 * loglik


def select_mixture(points, K_max: int, restarts: int = 3, rng: np.random.Generator | None = None,
                   tol: float = 1e-6, max_iter: int = 200, ridge: float | None = None
                   ) -> GaussianMixture:
    """Fit K = 1..min(K_max, n) mixtures and return the lowest-BIC one.

    Each K gets `restarts` EM runs from fresh random starts, keeping the best
    log-likelihood. BIC ties cannot occur for equal logliks across different
    K (the parameter count differs), and among equal-BIC fits the smallest K
    wins by scan order.
    """
    points = np.asarray(points, dtype=float)
    if rng is None:
        rng = np.random.default_rng()
    n = points.shape[0]
    if K_max < 1:
        raise GmmError(f"K_max must be >= 1, got {K_max}")
    best = None
    best_bic = np.inf
    for K in range(1, min(K_max, n) + 1):
        best_ll = -np.inf
        best_fit = None
        for _ in range(restarts):
            child = rng.spawn(1)[0]
            result = em_fit(points, K, child, tol=tol, max_iter=max_iter, ridge=ridge)
            if result.loglik > best_ll:
                best_ll = result.loglik
                best_fit = result
        b = bic(best_ll, K, n, points.shape[1])
        logger.debug("gmm: K=%d loglik=%.4f bic=%.4f", K, best_ll, b)
        if b < best_bic:
            best_bic = b
            best = best_fit
    return best.mixture


def sample_sparse_particle(gmm: GaussianMixture, eta: float, lam, rng: np.random.Generator
                           ) -> np.ndarray:
    """One proposal draw: mixture sample, then sparsify with probability 1/2.

    Random-number order is fixed (component uniform, dim normals, the 1/2
    coin, then the spike uniforms when the coin demands sparsification) so a
    draw is a pure function of its substream.
    """
    u = rng.random()
    k = min(int(np.searchsorted(np.cumsum(gmm.weights), u, side="right")), gmm.K - 1)
    z = rng.standard_normal(gmm.dim)
    theta = gmm.means[k] + gmm.chols[k] @ z
    r = rng.random()
    if r > 0.5:
        theta = apply_threshold(apply_spike(theta, eta, rng), lam)
    return theta


def inflate_covariance(gmm: GaussianMixture, gamma: float) -> GaussianMixture:
    """Diagonalize and inflate every covariance: Sigma -> diag(gamma * diag(Sigma)).

    Used when re-initializing a refinement round: the widened axis-aligned
    mixture re-opens the search around the previous posterior.
    """
    if not (gamma > 0):
        raise ConfigError(f"gamma must be positive, got {gamma}")
    covs = np.array([np.diag(gamma * np.diag(c)) for c in gmm.covariances])
    return GaussianMixture(weights=gmm.weights.copy(), means=gmm.means.copy(), covariances=covs)
