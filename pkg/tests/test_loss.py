import numpy as np
import pytest

from sabc.loss import l0_norm, regularized_nmse, regularized_nmse_batch
from sabc.simulator import Dataset


def _dataset_from(acc):
    acc = np.asarray(acc, dtype=float)
    t = 0.1 * np.arange(1, len(acc) + 1)
    return Dataset(t=t, acc=acc, x0=0.0, v0=0.0, dt=0.1, noise_pct=0.0,
                   sigma2=float(np.var(acc)))


def brute_force_loss(acc_data, acc_sim, beta, theta):
    # independent restatement of the loss formula for oracle checks
    m = len(acc_data)
    sigma2 = sum((a - sum(acc_data) / m) ** 2 for a in acc_data) / m
    sq = sum((s - d) ** 2 for s, d in zip(acc_sim, acc_data))
    nnz = sum(1 for v in theta if v != 0)
    return 100.0 * sq / (m * sigma2) + beta * nnz


def test_l0_counts_exact_zeros():
    assert l0_norm(np.array([0.0, 0.0, 0.0])) == 0
    assert l0_norm(np.array([0.5, 0.0, -2.0])) == 2
    assert l0_norm(np.array([1e-300, -0.0, 3.0])) == 2  # tiny is nonzero, -0.0 is zero


def test_pendulum_truth_support_l0():
    theta = np.zeros(23)
    theta[[0, 2, 21]] = [0.4, -0.5, -1.0]
    assert l0_norm(theta) == 3


def test_perfect_fit_zero_beta():
    ds = _dataset_from([1.0, 2.0, 3.0, 2.0])
    lv = regularized_nmse(ds, ds.acc.copy(), 0.0, np.array([1.0, 2.0]))
    assert lv.total == 0.0 and lv.nmse == 0.0 and lv.l0 == 2


def test_pure_penalty():
    ds = _dataset_from([1.0, 2.0, 3.0, 2.0])
    lv = regularized_nmse(ds, ds.acc.copy(), 1.0, np.array([1.0, 2.0, 3.0, 0.0]))
    assert lv.total == 3.0


def test_hand_computed_example():
    # acc=[1,2,3], sim=[1,2,4]: sigma2 = 2/3, nmse = 100/(3*(2/3)) = 50
    ds = _dataset_from([1.0, 2.0, 3.0])
    lv = regularized_nmse(ds, np.array([1.0, 2.0, 4.0]), 0.0, np.zeros(4))
    assert lv.nmse == pytest.approx(50.0, rel=1e-15)
    assert lv.total == pytest.approx(50.0, rel=1e-15)


def test_matches_brute_force_on_random_inputs():
    rng = np.random.default_rng(12)
    for _ in range(25):
        m = int(rng.integers(3, 40))
        acc = rng.normal(size=m)
        sim = acc + rng.normal(scale=0.3, size=m)
        theta = rng.normal(size=8) * (rng.random(8) > 0.4)
        beta = float(rng.uniform(0, 2))
        ds = _dataset_from(acc)
        lv = regularized_nmse(ds, sim, beta, theta)
        oracle = brute_force_loss(acc.tolist(), sim.tolist(), beta, theta.tolist())
        assert lv.total == pytest.approx(oracle, rel=1e-12)


def test_diverged_is_infinite():
    ds = _dataset_from([1.0, 2.0, 3.0])
    lv = regularized_nmse(ds, None, 0.5, np.array([1.0, 0.0]))
    assert lv.total == np.inf and lv.nmse == np.inf and lv.l0 == 1


def test_constant_data_rejected():
    t = 0.1 * np.arange(1, 4)
    ds = Dataset(t=t, acc=np.ones(3), x0=0.0, v0=0.0, dt=0.1, noise_pct=0.0, sigma2=0.0)
    with pytest.raises(ValueError):
        regularized_nmse(ds, np.ones(3), 0.0, np.zeros(2))


def test_beta_monotonicity():
    ds = _dataset_from([1.0, 2.0, 3.0])
    sim = np.array([1.1, 2.0, 2.9])
    theta = np.array([1.0, 0.0, 2.0])
    lo = regularized_nmse(ds, sim, 0.1, theta).total
    hi = regularized_nmse(ds, sim, 0.7, theta).total
    assert hi > lo
    zero_theta = np.zeros(3)
    assert (regularized_nmse(ds, sim, 0.1, zero_theta).total
            == regularized_nmse(ds, sim, 0.7, zero_theta).total)


def test_residual_scale_quadratic():
    ds = _dataset_from([1.0, -1.0, 2.0, 0.5])
    base = np.array([0.1, 0.0, -0.2, 0.05])
    l1 = regularized_nmse(ds, ds.acc + base, 0.0, np.zeros(1)).nmse
    l3 = regularized_nmse(ds, ds.acc + 3 * base, 0.0, np.zeros(1)).nmse
    assert l3 == pytest.approx(9.0 * l1, rel=1e-12)


def test_batch_matches_scalar():
    rng = np.random.default_rng(4)
    ds = _dataset_from(rng.normal(size=30))
    B = 16
    sims = ds.acc[None, :] + rng.normal(scale=0.2, size=(B, 30))
    thetas = rng.normal(size=(B, 6)) * (rng.random((B, 6)) > 0.5)
    ok = np.ones(B, dtype=bool)
    ok[3] = False
    total, nmse, l0 = regularized_nmse_batch(ds, sims, ok, 0.25, thetas)
    for i in range(B):
        if not ok[i]:
            assert total[i] == np.inf
            continue
        ref = regularized_nmse(ds, sims[i], 0.25, thetas[i])
        assert total[i] == pytest.approx(ref.total, rel=1e-14)
        assert nmse[i] == pytest.approx(ref.nmse, rel=1e-14)
        assert l0[i] == ref.l0


def test_total_permutation_invariant_in_theta():
    ds = _dataset_from([1.0, 2.0, 3.0])
    sim = np.array([1.0, 2.5, 3.0])
    theta = np.array([0.0, 1.5, -2.0, 0.0, 0.3])
    perm = np.array([4, 2, 0, 1, 3])
    a = regularized_nmse(ds, sim, 0.9, theta).total
    b = regularized_nmse(ds, sim, 0.9, theta[perm]).total
    assert a == b
