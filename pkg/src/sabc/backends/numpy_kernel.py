"""Vectorized pure-numpy simulation kernel.

Fallback backend used when the compiled extension is unavailable. Integrates
a batch of candidate models at once: states are (B,) vectors and every RK4
stage evaluates the whole dictionary across the batch. Arithmetic mirrors the
compiled kernel (left-associated integer powers, identical stage ordering) so
the two backends agree to rounding on the same inputs.
"""

import numpy as np

from ..dictionary import (
    KIND_ABS,
    KIND_CONSTANT,
    KIND_MONOMIAL,
    KIND_SIGNED_QUAD,
    KIND_SIN,
)

COMPILED = False


def _rhs(codes, thetas, x, v, pmax):
    """Batched acceleration theta . B(x, v); x, v, result are (B,)."""
    B = x.shape[0]
    # incremental left-associated powers match the compiled powi() exactly
    xp = np.empty((pmax + 1, B))
    vp = np.empty((pmax + 1, B))
    xp[0] = 1.0
    vp[0] = 1.0
    for k in range(1, pmax + 1):
        np.multiply(xp[k - 1], x, out=xp[k])
        np.multiply(vp[k - 1], v, out=vp[k])

    feats = np.empty((codes.shape[0], B))
    for j, (kind, a, b) in enumerate(codes):
        if kind == KIND_CONSTANT:
            feats[j] = 1.0
        elif kind == KIND_MONOMIAL:
            np.multiply(xp[a], vp[b], out=feats[j])
        elif kind == KIND_SIN:
            np.sin(x if a == 0 else v, out=feats[j])
        elif kind == KIND_ABS:
            np.abs(x if a == 0 else v, out=feats[j])
        else:  # KIND_SIGNED_QUAD
            sgn = x if a == 0 else v
            mag = x if b == 0 else v
            np.multiply(sgn, np.abs(mag), out=feats[j])
    return np.einsum("nb,bn->b", feats, thetas)


def simulate_batch(codes, thetas, x0, v0, t, substeps, blowup):
    """Integrate B candidate models over the output grid `t`.

    Parameters
    ----------
    codes : int32 (N, 3)
        Term encoding rows (kind, a, b).
    thetas : float64 (B, N)
        Coefficient vectors, one model per row.
    x0, v0 : float
        Shared initial state at time zero.
    t : float64 (m,)
        Strictly increasing output times (need not include zero).
    substeps : int
        Fixed RK4 sub-steps per output interval.
    blowup : float
        Trajectories whose state magnitude exceeds this are flagged diverged.

    Returns
    -------
    acc : float64 (B, m)
        Model acceleration at each output time (+inf rows where diverged).
    xs, vs : float64 (B, m)
        Displacement and velocity at each output time.
    ok : bool (B,)
        False where the trajectory diverged or produced non-finite output.
    """
    codes = np.ascontiguousarray(codes, dtype=np.int32)
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    B = thetas.shape[0]
    m = t.shape[0]
    mono = codes[codes[:, 0] == KIND_MONOMIAL]
    pmax = int(max(mono[:, 1].max() if len(mono) else 0, mono[:, 2].max() if len(mono) else 0))

    x = np.full(B, float(x0))
    v = np.full(B, float(v0))
    alive = np.ones(B, dtype=bool)
    acc = np.empty((B, m))
    xs = np.empty((B, m))
    vs = np.empty((B, m))

    with np.errstate(all="ignore"):
        k1v = _rhs(codes, thetas, x, v, pmax)  # rhs at the initial state
        t_prev = 0.0
        for i in range(m):
            h = (t[i] - t_prev) / substeps
            t_prev = t[i]
            for s in range(substeps):
                if s > 0:
                    k1v = _rhs(codes, thetas, x, v, pmax)
                k1x = v
                k2x = v + (0.5 * h) * k1v
                k2v = _rhs(codes, thetas, x + (0.5 * h) * k1x, k2x, pmax)
                k3x = v + (0.5 * h) * k2v
                k3v = _rhs(codes, thetas, x + (0.5 * h) * k2x, k3x, pmax)
                k4x = v + h * k3v
                k4v = _rhs(codes, thetas, x + h * k3x, k4x, pmax)
                x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
                v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
                alive &= (np.abs(x) <= blowup) & (np.abs(v) <= blowup)
            k1v = _rhs(codes, thetas, x, v, pmax)
            acc[:, i] = k1v
            xs[:, i] = x
            vs[:, i] = v

    ok = alive & np.isfinite(acc).all(axis=1)
    acc[~ok] = np.inf
    xs[~ok] = np.inf
    vs[~ok] = np.inf
    return acc, xs, vs, ok
