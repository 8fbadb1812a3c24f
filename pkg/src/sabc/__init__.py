"""Sparse likelihood-free discovery of single-DOF governing equations.

Given noisy acceleration measurements of a one-degree-of-freedom system,
the sampler searches a dictionary of candidate terms for a sparse model
xdd = theta . B(x, xd) by approximate Bayesian computation with
spike-and-slab sparsification, nested acceptance thresholds, and Gaussian
mixture proposals.
"""

from .dictionary import (
    Dictionary,
    TermSpec,
    build_polynomial_group,
    evaluate_dictionary,
    oscillator21,
    pendulum23,
    predicted_acceleration,
    preset_dictionary,
)
from .errors import (
    AcceptanceBudgetError,
    ConfigError,
    GmmError,
    SabcError,
    SamplerError,
    SingularComponentError,
    StallError,
)
from .gmm import (
    GaussianMixture,
    bic,
    em_fit,
    inflate_covariance,
    responsibilities,
    sample_sparse_particle,
    select_mixture,
)
from .loss import LossValue, l0_norm, regularized_nmse, regularized_nmse_batch
from .sampler import (
    RunReport,
    SabcConfig,
    delta1,
    delta2_msre,
    inclusion_probability,
    next_threshold,
    run,
    run_round,
    select_active,
)
from .simulator import (
    BENCHMARKS,
    Dataset,
    SimOptions,
    add_noise,
    generate_benchmark,
    load_dataset,
    save_dataset,
    simulate_acceleration,
    simulate_acceleration_batch,
    simulate_trajectory,
)
from .spike_slab import (
    Particle,
    Population,
    SlabPrior,
    apply_spike,
    apply_threshold,
    draw_slab,
    generate_initial_population,
    slab_bounds_for,
)

__version__ = "0.1.0"
