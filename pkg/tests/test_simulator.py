import json
import math

import numpy as np
import pytest

from sabc.dictionary import Dictionary, TermSpec, oscillator21
from sabc.errors import ConfigError
from sabc.simulator import (
    BENCHMARKS, Dataset, SimOptions, add_noise, generate_benchmark,
    load_dataset, save_dataset, simulate_acceleration, simulate_trajectory,
)


def _linear_theta(k=-500.0, c=-0.5):
    d = oscillator21()
    theta = np.zeros(21)
    theta[d.index_of("x")] = k
    theta[d.index_of("xd")] = c
    return d, theta


def test_zero_theta_zero_ic_gives_zero_acc(poly2_dict):
    t = 0.01 * np.arange(1, 51)
    acc = simulate_acceleration(poly2_dict, np.zeros(6), 0.0, 0.0, t, SimOptions())
    assert acc is not None
    assert np.all(acc == 0.0)


def test_undamped_oscillator_vs_analytic():
    # xdd = -500 x, x0=0.1, v0=0 -> xdd(t) = -50 cos(sqrt(500) t)
    d, theta = _linear_theta(c=0.0)
    t = 1e-3 * np.arange(1, 1001)
    acc = simulate_acceleration(d, theta, 0.1, 0.0, t, SimOptions(substeps=10))
    assert acc is not None
    exact = -50.0 * np.cos(math.sqrt(500.0) * t)
    assert np.max(np.abs(acc - exact)) < 1e-6


def test_duffing_equilibrium_at_origin():
    d = oscillator21()
    theta = np.zeros(21)
    theta[d.index_of("x")] = -500.0
    theta[d.index_of("xd")] = -0.5
    theta[d.index_of("x^3")] = -50000.0
    t = 1e-3 * np.arange(1, 201)
    acc = simulate_acceleration(d, theta, 0.0, 0.0, t, SimOptions())
    assert np.all(acc == 0.0)


def test_rk4_convergence_order():
    # halving the internal step should shrink max error ~16x (8x-32x window)
    d, theta = _linear_theta()
    t = 1e-3 * np.arange(1, 1001)
    ref = simulate_trajectory(d, theta, 0.1, 0.0, t, SimOptions(substeps=64))
    errs = []
    for sub in (1, 2, 4):
        out = simulate_trajectory(d, theta, 0.1, 0.0, t, SimOptions(substeps=sub))
        errs.append(np.max(np.abs(out[1] - ref[1])))
    for coarse, fine in zip(errs, errs[1:]):
        assert 8.0 < coarse / fine < 32.0


def test_energy_decay_damped_linear():
    d, theta = _linear_theta()
    t = 1e-3 * np.arange(1, 1001)
    _, xs, vs = simulate_trajectory(d, theta, 0.1, 0.0, t, SimOptions(substeps=4))
    energy = 0.5 * vs**2 + 0.5 * 500.0 * xs**2
    assert np.all(np.diff(energy) <= 1e-9)


def test_divergence_returns_none():
    d = oscillator21()
    theta = np.zeros(21)
    theta[d.index_of("x")] = 1e6  # strong positive feedback blows up
    t = 1e-3 * np.arange(1, 1001)
    assert simulate_acceleration(d, theta, 0.1, 0.0, t, SimOptions()) is None


def test_simulation_pure_function(poly2_dict):
    rng = np.random.default_rng(0)
    theta = rng.normal(scale=0.1, size=6)
    t = 0.02 * np.arange(1, 101)
    a1 = simulate_acceleration(poly2_dict, theta, 0.3, -0.1, t, SimOptions(substeps=3))
    a2 = simulate_acceleration(poly2_dict, theta, 0.3, -0.1, t, SimOptions(substeps=3))
    assert np.array_equal(a1, a2)


def test_benchmark_grids():
    pend = generate_benchmark("pendulum", noise_pct=0.0, seed=0)
    assert pend.m == 300
    assert pend.t[0] == pytest.approx(1.0 / 30.0)
    assert pend.t[-1] == pytest.approx(10.0)
    assert pend.x0 == 0.0 and pend.v0 == 0.0
    for name in ("linear", "duffing", "viscous"):
        ds = generate_benchmark(name, noise_pct=0.0, seed=0)
        assert ds.m == 1000
        assert ds.t[0] == pytest.approx(1e-3)
        assert ds.t[-1] == pytest.approx(1.0)


def test_benchmark_truth_residual_small(linear_dataset):
    # noiseless data should match the dictionary model nearly exactly
    d, theta = _linear_theta()
    acc = simulate_acceleration(d, theta, linear_dataset.x0, linear_dataset.v0,
                                linear_dataset.t, SimOptions(substeps=10))
    assert np.max(np.abs(acc - linear_dataset.acc)) < 1e-5


def test_unknown_benchmark_rejected():
    with pytest.raises(Exception):
        generate_benchmark("lorenz", noise_pct=0.0, seed=0)


def test_add_noise_zero_pct_identity():
    acc = np.array([1.0, -2.0, 3.5])
    out = add_noise(acc, 0.0, seed=9)
    assert np.array_equal(out, acc)


def test_add_noise_deterministic():
    acc = np.linspace(-1, 1, 64)
    assert np.array_equal(add_noise(acc, 0.05, seed=4), add_noise(acc, 0.05, seed=4))
    assert not np.array_equal(add_noise(acc, 0.05, seed=4), add_noise(acc, 0.05, seed=5))


def test_add_noise_std_scaling():
    rng = np.random.default_rng(1)
    acc = rng.normal(size=100_000)
    out = add_noise(acc, 0.02, seed=2)
    target = 0.02 * float(np.std(acc))
    measured = float(np.std(out - acc))
    assert abs(measured - target) / target < 0.02


def test_dataset_validates_spacing():
    t = np.array([0.1, 0.2, 0.35])
    with pytest.raises(Exception):
        Dataset(t=t, acc=np.zeros(3), x0=0.0, v0=0.0, dt=0.1, noise_pct=0.0, sigma2=0.0)


def test_dataset_validates_sigma2():
    t = 0.1 * np.arange(1, 5)
    acc = np.array([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(Exception):
        Dataset(t=t, acc=acc, x0=0.0, v0=0.0, dt=0.1, noise_pct=0.0, sigma2=99.0)
    ok = Dataset(t=t, acc=acc, x0=0.0, v0=0.0, dt=0.1, noise_pct=0.0,
                 sigma2=float(np.var(acc)))
    assert ok.m == 4


def test_dataset_io_roundtrip(tmp_path):
    ds = generate_benchmark("pendulum", noise_pct=0.02, seed=7)
    save_dataset(ds, tmp_path, seed=7, truth_name="pendulum",
                 truth_coefficients={"1": 0.4, "xd": -0.5, "sin(x)": -1.0})
    loaded, meta = load_dataset(tmp_path)
    assert np.array_equal(loaded.t, ds.t)
    assert np.array_equal(loaded.acc, ds.acc)
    assert loaded.x0 == ds.x0 and loaded.v0 == ds.v0
    assert loaded.sigma2 == pytest.approx(ds.sigma2, rel=1e-15)
    assert meta["seed"] == 7
    assert meta["truth_name"] == "pendulum"


def test_dataset_save_deterministic(tmp_path):
    ds = generate_benchmark("linear", noise_pct=0.02, seed=3)
    p1 = tmp_path / "a"
    p2 = tmp_path / "b"
    save_dataset(ds, p1, seed=3)
    save_dataset(ds, p2, seed=3)
    assert (p1 / "data.csv").read_bytes() == (p2 / "data.csv").read_bytes()
    assert (p1 / "data.meta.json").read_bytes() == (p2 / "data.meta.json").read_bytes()


def test_load_missing_dataset_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_dataset(tmp_path / "nope")


def test_load_malformed_meta_errors(tmp_path):
    ds = generate_benchmark("linear", noise_pct=0.0, seed=0)
    save_dataset(ds, tmp_path)
    (tmp_path / "data.meta.json").write_text(json.dumps({"x0": 0.1}))
    with pytest.raises(ConfigError):
        load_dataset(tmp_path)


def test_benchmark_truth_registry():
    assert set(BENCHMARKS) == {"pendulum", "linear", "duffing", "viscous"}
    assert BENCHMARKS["duffing"].truth["x^3"] == -50000.0
    assert BENCHMARKS["viscous"].truth["xd|xd|"] == -0.8


def test_noise_free_benchmark_reuses_clean_series():
    a = generate_benchmark("duffing", noise_pct=0.0, seed=0)
    b = generate_benchmark("duffing", noise_pct=0.0, seed=99)
    assert np.array_equal(a.acc, b.acc)
