"""Spike-and-slab priors, sparsification, and rejection sampling.

The prior on each coefficient mixes a point mass at zero (the spike) with a
uniform slab. Candidate vectors drawn from the slab are sparsified in two
moves: independent coordinate spikes (kept with probability eta), then a
hard threshold that zeroes any surviving coefficient with magnitude at most
lambda_i. Exact zeros matter: the L0 penalty in the loss counts them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AcceptanceBudgetError, ConfigError
from .dictionary import Dictionary
from .loss import LossValue, regularized_nmse_batch
from .rng import NS_DRAW, substream
from .simulator import SimOptions, simulate_acceleration_batch

logger = logging.getLogger("sabc")

__all__ = [
    "SlabPrior",
    "Particle",
    "Population",
    "slab_bounds_for",
    "apply_spike",
    "apply_threshold",
    "draw_slab",
    "rejection_sample",
    "generate_initial_population",
]


@dataclass(frozen=True)
class SlabPrior:
    """Per-coordinate uniform slab bounds (lo_i, hi_i)."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ConfigError("slab bounds must be equal-length 1-d arrays")
        if not np.all(self.lo < self.hi):
            raise ConfigError("slab bounds must satisfy lo < hi in every coordinate")

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def half_width(self) -> np.ndarray:
        return (self.hi - self.lo) / 2.0


def slab_bounds_for(dictionary: Dictionary, scheme: str = "uniform", a: float = 1.0) -> SlabPrior:
    """Slab bounds for each dictionary term.

    "uniform": every coordinate gets (-a, a). "informed": a pure-displacement
    monomial x^k gets (-100*10^k, 100*10^k), matching the magnitude a k-th
    order restoring coefficient can plausibly take; everything else (-1, 1).
    """
    if scheme == "uniform":
        if not (a > 0):
            raise ConfigError(f"uniform slab needs a > 0, got {a}")
        width = np.full(len(dictionary), float(a))
    elif scheme == "informed":
        width = np.ones(len(dictionary))
        for i, term in enumerate(dictionary):
            if term.kind == "monomial" and term.pv == 0:
                width[i] = 100.0 * 10.0**term.px
    else:
        raise ConfigError(f"unknown slab scheme {scheme!r}; use 'uniform' or 'informed'")
    return SlabPrior(lo=-width, hi=width)


@dataclass
class Particle:
    """One candidate coefficient vector with its evaluated loss."""

    theta: np.ndarray
    loss: LossValue


@dataclass
class Population:
    """Accepted particles plus the threshold they were accepted under."""

    particles: list
    epsilon: float

    def __post_init__(self):
        if not self.particles:
            raise ConfigError("population must not be empty")
        dim = self.particles[0].theta.shape[0]
        for p in self.particles:
            if p.theta.shape != (dim,):
                raise ConfigError("all particles must share the same dimension")
            if not p.loss.total < self.epsilon:
                raise ConfigError(
                    f"particle loss {p.loss.total} is not below epsilon {self.epsilon}"
                )

    def __len__(self) -> int:
        return len(self.particles)

    def thetas(self) -> np.ndarray:
        return np.array([p.theta for p in self.particles])

    def totals(self) -> np.ndarray:
        return np.array([p.loss.total for p in self.particles])

    def best(self) -> Particle:
        return self.particles[int(np.argmin(self.totals()))]


def apply_spike(theta: np.ndarray, eta: float, rng: np.random.Generator) -> np.ndarray:
    """Zero each coordinate independently with probability 1 - eta.

    Draws one uniform v_i per coordinate and zeroes where v_i > eta, so
    eta=1 keeps everything and eta=0 zeroes everything (a.s.).
    """
    if not (0.0 <= eta <= 1.0):
        raise ConfigError(f"eta must be in [0, 1], got {eta}")
    theta = np.array(theta, dtype=float, copy=True)
    v = rng.random(theta.shape[0])
    theta[v > eta] = 0.0
    return theta


def apply_threshold(theta: np.ndarray, lam) -> np.ndarray:
    """Zero every coordinate with |theta_i| <= lambda_i (boundary zeroes)."""
    theta = np.array(theta, dtype=float, copy=True)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ConfigError("lambda thresholds must be >= 0")
    theta[np.abs(theta) <= lam] = 0.0
    return theta


def draw_slab(prior: SlabPrior, rng: np.random.Generator) -> np.ndarray:
    """One uniform draw from the slab."""
    return prior.lo + (prior.hi - prior.lo) * rng.random(prior.dim)


def rejection_sample(draw_fn, dataset, dictionary, beta, epsilon, count, opts: SimOptions,
                     max_draws, backend=None, pool=None):
    """Accept `count` particles with loss below `epsilon`.

    `draw_fn(i)` must return the i-th candidate vector; draws are indexed
    from zero and accepted in index order, so the result is independent of
    batch sizes and threading. Returns (particles, draws_used). Raises
    AcceptanceBudgetError when `max_draws` candidates were not enough.
    """
    accepted = []
    draws = 0
    while len(accepted) < count:
        if draws >= max_draws:
            rate = len(accepted) / draws if draws else 0.0
            raise AcceptanceBudgetError(
                f"draw budget exhausted: {len(accepted)}/{count} accepted after "
                f"{draws} draws (rate {rate:.2e}) at epsilon={epsilon:.6g}",
                draws=draws,
                accepted=len(accepted),
            )
        need = count - len(accepted)
        rate = (len(accepted) + 1.0) / (draws + 1.0)
        batch = int(min(1024, max(32, math.ceil(1.15 * need / rate))))
        batch = min(batch, max_draws - draws)
        thetas = np.stack([draw_fn(draws + j) for j in range(batch)])
        acc, ok = simulate_acceleration_batch(
            dictionary, thetas, dataset.x0, dataset.v0, dataset.t, opts,
            backend=backend, pool=pool,
        )
        total, nmse, l0 = regularized_nmse_batch(dataset, acc, ok, beta, thetas)
        for j in range(batch):
            if total[j] < epsilon:
                accepted.append(
                    Particle(thetas[j].copy(), LossValue(float(total[j]), float(nmse[j]), int(l0[j])))
                )
                if len(accepted) == count:
                    break
        draws += batch
    logger.debug("accepted %d/%d draws below epsilon=%.6g", count, draws, epsilon)
    return accepted, draws


def generate_initial_population(dataset, dictionary: Dictionary, cfg, *, round_idx: int = 1,
                                epsilon: float | None = None, beta: float | None = None,
                                backend=None, pool=None) -> Population:
    """Rejection-sample the first population from the sparsified slab prior.

    Each draw takes a fresh slab sample, applies the spike, then the hard
    threshold, and is accepted when its loss lands below the round's opening
    threshold epsilon_1.
    """
    epsilon = cfg.epsilon1 if epsilon is None else epsilon
    beta = cfg.beta if beta is None else beta
    prior = cfg.slab
    lam = cfg.lam

    def draw(i):
        rng = substream(cfg.seed, NS_DRAW, round_idx, 1, i)
        theta = draw_slab(prior, rng)
        theta = apply_spike(theta, cfg.eta, rng)
        return apply_threshold(theta, lam)

    particles, _ = rejection_sample(
        draw, dataset, dictionary, beta, epsilon, cfg.N_S, cfg.sim_options(),
        cfg.max_draws, backend=backend, pool=pool,
    )
    return Population(particles=particles, epsilon=epsilon)
