"""Measurement datasets, benchmark generation, and candidate simulation.

Ground-truth benchmark data is integrated with an adaptive embedded RK45
method at tight tolerance; candidate models inside the sampler use the much
cheaper fixed-step RK4 kernels from `sabc.backends`. Only acceleration is
ever exposed as data: the discovery problem is posed on noisy acceleration
measurements alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .backends import get_backend
from .dictionary import Dictionary
from .errors import ConfigError

__all__ = [
    "Dataset",
    "SimOptions",
    "BenchmarkSpec",
    "BENCHMARKS",
    "add_noise",
    "generate_benchmark",
    "simulate_acceleration",
    "simulate_trajectory",
    "simulate_acceleration_batch",
    "save_dataset",
    "load_dataset",
]


@dataclass
class SimOptions:
    """Fixed-step integrator options for candidate simulation."""

    substeps: int = 1
    blowup: float = 1e8

    def __post_init__(self):
        if self.substeps < 1:
            raise ConfigError(f"substeps must be >= 1, got {self.substeps}")
        if not (self.blowup > 0):
            raise ConfigError(f"blowup must be positive, got {self.blowup}")


@dataclass
class Dataset:
    """A uniformly sampled acceleration record with initial conditions.

    `x0`, `v0` are the state at time zero; the grid `t` starts at `dt` (time
    zero itself is not a sample). `sigma2` is the population variance of
    `acc` and is the normalizer of the discrepancy loss; it is computed here
    once so repeated loss evaluations do not recompute it.
    """

    t: np.ndarray
    acc: np.ndarray
    x0: float
    v0: float
    dt: float = 0.0
    noise_pct: float = 0.0
    sigma2: float = field(default=0.0)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.acc = np.asarray(self.acc, dtype=float)
        if self.t.ndim != 1 or self.acc.shape != self.t.shape:
            raise ConfigError(
                f"t and acc must be equal-length 1-d arrays, got {self.t.shape} and {self.acc.shape}"
            )
        m = self.t.shape[0]
        if m < 2:
            raise ConfigError(f"dataset needs at least 2 samples, got {m}")
        if not np.all(np.isfinite(self.acc)):
            raise ConfigError("acc contains non-finite values")
        steps = np.diff(self.t)
        if not self.dt:
            self.dt = float(steps[0])
        if self.dt <= 0 or np.any(np.abs(steps - self.dt) > 1e-9 * self.dt):
            raise ConfigError("t must be uniformly spaced with positive step")
        recomputed = float(np.var(self.acc))
        if self.sigma2:
            if abs(self.sigma2 - recomputed) > 1e-12 * max(recomputed, 1.0):
                raise ConfigError(
                    f"sigma2={self.sigma2} does not match recomputed variance {recomputed}"
                )
        self.sigma2 = recomputed

    @property
    def m(self) -> int:
        return self.t.shape[0]


@dataclass(frozen=True)
class BenchmarkSpec:
    """A synthetic truth model plus its sampling protocol."""

    name: str
    truth: dict  # term label -> coefficient
    x0: float
    v0: float
    t_end: float
    m: int
    dictionary: str
    substeps: int  # recommended fixed-step subdivision for this grid

    def rhs(self, x, v):
        raise NotImplementedError

    @property
    def dt(self) -> float:
        return self.t_end / self.m

    def grid(self) -> np.ndarray:
        return np.arange(1, self.m + 1) * self.dt


class _Pendulum(BenchmarkSpec):
    def rhs(self, x, v):
        return 0.4 - 0.5 * v - np.sin(x)


class _Linear(BenchmarkSpec):
    def rhs(self, x, v):
        return -500.0 * x - 0.5 * v


class _Duffing(BenchmarkSpec):
    def rhs(self, x, v):
        return -500.0 * x - 0.5 * v - 50000.0 * x**3


class _Viscous(BenchmarkSpec):
    def rhs(self, x, v):
        return -500.0 * x - 0.5 * v - 0.8 * v * np.abs(v)


BENCHMARKS = {
    "pendulum": _Pendulum(
        name="pendulum",
        truth={"1": 0.4, "xd": -0.5, "sin(x)": -1.0},
        x0=0.0,
        v0=0.0,
        t_end=10.0,
        m=300,
        dictionary="pendulum23",
        substeps=10,
    ),
    "linear": _Linear(
        name="linear",
        truth={"x": -500.0, "xd": -0.5},
        x0=0.1,
        v0=0.0,
        t_end=1.0,
        m=1000,
        dictionary="oscillator21",
        substeps=1,
    ),
    "duffing": _Duffing(
        name="duffing",
        truth={"x": -500.0, "xd": -0.5, "x^3": -50000.0},
        x0=0.1,
        v0=0.0,
        t_end=1.0,
        m=1000,
        dictionary="oscillator21",
        substeps=1,
    ),
    "viscous": _Viscous(
        name="viscous",
        truth={"x": -500.0, "xd": -0.5, "xd|xd|": -0.8},
        x0=0.1,
        v0=0.0,
        t_end=1.0,
        m=1000,
        dictionary="oscillator21",
        substeps=1,
    ),
}


def add_noise(acc: np.ndarray, noise_pct: float, seed: int) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise scaled to the signal's std.

    The noise std is `noise_pct * std(acc)` (population std of the input).
    `noise_pct=0` returns the input unchanged.
    """
    acc = np.asarray(acc, dtype=float)
    if noise_pct < 0:
        raise ConfigError(f"noise_pct must be >= 0, got {noise_pct}")
    if noise_pct == 0:
        return acc.copy()
    std = noise_pct * float(acc.std())
    rng = np.random.default_rng(seed)
    return acc + std * rng.standard_normal(acc.shape[0])


def generate_benchmark(name: str, noise_pct: float = 0.02, seed: int = 0) -> Dataset:
    """Simulate a benchmark truth model and return its noisy dataset.

    Truth trajectories come from an adaptive embedded RK45 integration at
    local tolerance 1e-9, sampled on the benchmark's uniform grid; the
    acceleration series is the truth right-hand side evaluated on the exact
    states, plus measurement noise.
    """
    try:
        spec = BENCHMARKS[name]
    except KeyError:
        raise ConfigError(f"unknown benchmark {name!r}; available: {sorted(BENCHMARKS)}") from None
    t = spec.grid()
    sol = solve_ivp(
        lambda _t, y: (y[1], spec.rhs(y[0], y[1])),
        (0.0, float(t[-1])),
        (spec.x0, spec.v0),
        method="RK45",
        t_eval=t,
        rtol=1e-9,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"truth integration failed for {name}: {sol.message}")
    clean = spec.rhs(sol.y[0], sol.y[1])
    noisy = add_noise(clean, noise_pct, seed)
    return Dataset(t=t, acc=noisy, x0=spec.x0, v0=spec.v0, dt=spec.dt, noise_pct=noise_pct)


def _as_theta(dictionary: Dictionary, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(dictionary),):
        raise ValueError(f"theta shape {theta.shape} does not match {len(dictionary)} terms")
    return theta


def simulate_acceleration(dictionary, theta, x0, v0, t, opts: SimOptions | None = None,
                          backend=None):
    """Fixed-step RK4 acceleration series for one candidate model.

    Returns the (m,) acceleration array, or None if the trajectory diverged
    (state magnitude beyond `opts.blowup`, or non-finite output). Divergence
    is an ordinary outcome for wild candidates, not an error.
    """
    opts = opts or SimOptions()
    kern = backend if backend is not None else get_backend()
    theta = _as_theta(dictionary, theta)
    acc, _, _, ok = kern.simulate_batch(
        dictionary.codes(), theta[None, :], float(x0), float(v0),
        np.asarray(t, dtype=float), opts.substeps, opts.blowup,
    )
    return acc[0] if ok[0] else None


def simulate_trajectory(dictionary, theta, x0, v0, t, opts: SimOptions | None = None,
                        backend=None):
    """Like simulate_acceleration but returns (acc, x, v), or None if diverged."""
    opts = opts or SimOptions()
    kern = backend if backend is not None else get_backend()
    theta = _as_theta(dictionary, theta)
    acc, xs, vs, ok = kern.simulate_batch(
        dictionary.codes(), theta[None, :], float(x0), float(v0),
        np.asarray(t, dtype=float), opts.substeps, opts.blowup,
    )
    return (acc[0], xs[0], vs[0]) if ok[0] else None


def simulate_acceleration_batch(dictionary, thetas, x0, v0, t, opts: SimOptions,
                                backend=None, pool=None):
    """Acceleration series for a (B, N) batch of candidates.

    Returns (acc (B, m), ok (B,)). When `pool` (a ThreadPoolExecutor) is
    given, the batch is split into contiguous row slices evaluated
    concurrently; per-row results are independent of the split.
    """
    kern = backend if backend is not None else get_backend()
    thetas = np.ascontiguousarray(thetas, dtype=float)
    t = np.asarray(t, dtype=float)
    codes = dictionary.codes()
    B = thetas.shape[0]
    workers = getattr(pool, "_max_workers", 1) if pool is not None else 1
    if workers <= 1 or B < 2 * workers:
        acc, _, _, ok = kern.simulate_batch(codes, thetas, float(x0), float(v0), t,
                                            opts.substeps, opts.blowup)
        return acc, ok
    bounds = np.linspace(0, B, workers + 1, dtype=int)
    futures = [
        pool.submit(kern.simulate_batch, codes, thetas[lo:hi], float(x0), float(v0), t,
                    opts.substeps, opts.blowup)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    parts = [f.result() for f in futures]
    acc = np.concatenate([p[0] for p in parts], axis=0)
    ok = np.concatenate([p[3] for p in parts], axis=0)
    return acc, ok


def _format_float(x: float) -> str:
    return f"{x:.17g}"


def save_dataset(ds: Dataset, outdir, seed=None, truth_name=None, truth_coefficients=None):
    """Write `data.csv` (t, acc) and `data.meta.json` into `outdir`."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["t,acc"]
    lines += [f"{_format_float(ti)},{_format_float(ai)}" for ti, ai in zip(ds.t, ds.acc)]
    (outdir / "data.csv").write_text("\n".join(lines) + "\n")
    meta = {
        "x0": ds.x0,
        "v0": ds.v0,
        "dt": ds.dt,
        "noise_pct": ds.noise_pct,
        "seed": seed,
        "truth_name": truth_name,
        "truth_coefficients": truth_coefficients,
    }
    (outdir / "data.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return outdir / "data.csv", outdir / "data.meta.json"


def load_dataset(path) -> tuple[Dataset, dict]:
    """Read a dataset written by save_dataset; `path` is the csv or its directory.

    Returns (dataset, meta). Raises ConfigError on missing files or malformed
    content.
    """
    path = Path(path)
    csv_path = path / "data.csv" if path.is_dir() else path
    if not csv_path.exists():
        raise ConfigError(f"dataset file not found: {csv_path}")
    name = csv_path.name
    meta_path = csv_path.with_name(name[:-4] + ".meta.json" if name.endswith(".csv") else name + ".meta.json")
    if not meta_path.exists():
        raise ConfigError(f"dataset metadata not found: {meta_path}")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed dataset metadata {meta_path}: {e}") from None
    for key in ("x0", "v0", "dt"):
        if key not in meta:
            raise ConfigError(f"dataset metadata {meta_path} missing key {key!r}")
    rows = csv_path.read_text().strip().splitlines()
    if not rows or rows[0].strip() != "t,acc":
        raise ConfigError(f"{csv_path} must start with a 't,acc' header")
    try:
        data = np.array([[float(f) for f in r.split(",")] for r in rows[1:]])
    except ValueError as e:
        raise ConfigError(f"malformed dataset row in {csv_path}: {e}") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigError(f"{csv_path} must have exactly two columns")
    ds = Dataset(
        t=data[:, 0],
        acc=data[:, 1],
        x0=float(meta["x0"]),
        v0=float(meta["v0"]),
        dt=float(meta["dt"]),
        noise_pct=float(meta.get("noise_pct") or 0.0),
    )
    return ds, meta
