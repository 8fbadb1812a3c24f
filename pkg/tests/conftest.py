import numpy as np
import pytest

from sabc.dictionary import Dictionary, TermSpec
from sabc.simulator import Dataset, SimOptions, generate_benchmark


@pytest.fixture(scope="session")
def poly2_dict():
    """Six-term dictionary [1, x, xd, x^2, x*xd, xd^2]."""
    return Dictionary(
        [TermSpec.constant(),
         TermSpec.monomial(1, 0), TermSpec.monomial(0, 1),
         TermSpec.monomial(2, 0), TermSpec.monomial(1, 1), TermSpec.monomial(0, 2)],
        name="poly2",
    )


@pytest.fixture(scope="session")
def linear_dataset():
    """Noiseless damped linear oscillator data (m=1000, dt=1e-3)."""
    return generate_benchmark("linear", noise_pct=0.0, seed=0)


@pytest.fixture(scope="session")
def tiny_dataset():
    """Short synthetic dataset, cheap enough for sampler loop tests.

    Truth: xdd = -4x - 0.4xd, x0=1, v0=0, 80 samples at dt=0.05. Low
    stiffness keeps substeps=1 accurate and random candidates stable.
    """
    from scipy.integrate import solve_ivp

    dt = 0.05
    m = 80
    t = dt * np.arange(1, m + 1)
    sol = solve_ivp(lambda _, s: [s[1], -4.0 * s[0] - 0.4 * s[1]], (0.0, t[-1]),
                    [1.0, 0.0], t_eval=t, rtol=1e-10, atol=1e-12)
    acc = -4.0 * sol.y[0] - 0.4 * sol.y[1]
    return Dataset(t=t, acc=acc, x0=1.0, v0=0.0, dt=dt, noise_pct=0.0,
                   sigma2=float(np.var(acc)))


@pytest.fixture(scope="session")
def sim_opts():
    return SimOptions(substeps=2, blowup=1e8)
