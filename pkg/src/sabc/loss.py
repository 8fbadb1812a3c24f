"""Sparsity-regularized discrepancy between measured and simulated acceleration.

The distance is a relative normalized mean squared error plus an L0 penalty:

    rho = 100 / (m * sigma2) * sum_i (acc_sim_i - acc_meas_i)^2 + beta * ||theta||_0

with sigma2 the population variance of the measured series. Diverged
simulations get +inf, so they can never be accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LossValue", "l0_norm", "regularized_nmse", "regularized_nmse_batch"]


@dataclass(frozen=True)
class LossValue:
    """Total loss with its two ingredients kept separate for reporting."""

    total: float
    nmse: float
    l0: int


def l0_norm(theta: np.ndarray) -> int:
    """Number of exactly nonzero coefficients (no tolerance)."""
    return int(np.count_nonzero(np.asarray(theta)))


def regularized_nmse(dataset, acc_sim, beta: float, theta) -> LossValue:
    """Loss of one candidate; `acc_sim` is the simulated series or None (diverged)."""
    k = l0_norm(theta)
    if acc_sim is None:
        return LossValue(total=np.inf, nmse=np.inf, l0=k)
    if dataset.sigma2 <= 0:
        raise ValueError("dataset variance is zero; relative NMSE is undefined")
    resid = np.asarray(acc_sim, dtype=float) - dataset.acc
    nmse = 100.0 * float(resid @ resid) / (dataset.m * dataset.sigma2)
    if not np.isfinite(nmse):
        return LossValue(total=np.inf, nmse=np.inf, l0=k)
    return LossValue(total=nmse + beta * k, nmse=nmse, l0=k)


def regularized_nmse_batch(dataset, acc, ok, beta: float, thetas):
    """Vectorized losses for a (B, m) batch.

    Returns (total (B,), nmse (B,), l0 (B,)); rows with ok=False get +inf.
    """
    thetas = np.asarray(thetas)
    l0 = np.count_nonzero(thetas, axis=1)
    if dataset.sigma2 <= 0:
        raise ValueError("dataset variance is zero; relative NMSE is undefined")
    with np.errstate(all="ignore"):
        resid = np.where(ok[:, None], acc, 0.0) - dataset.acc[None, :]
        nmse = 100.0 * np.einsum("bm,bm->b", resid, resid) / (dataset.m * dataset.sigma2)
    bad = ~ok | ~np.isfinite(nmse)
    nmse = np.where(bad, np.inf, nmse)
    total = np.where(bad, np.inf, nmse + beta * l0)
    return total, nmse, l0
