"""Maximum-correntropy Kalman filtering with square-root array implementations."""

from .filters import (
    FILTERS,
    CORRENTROPY_FILTERS,
    ConventionalState,
    FactoredState,
    Filter,
    KernelConfig,
    StepOutput,
    compute_L,
    gaussian_kernel,
    make_filter,
)
from .model import (
    Gaussian,
    GaussianMixture,
    GaussianPlusShot,
    StateSpaceModel,
    Trajectory,
    build_example1,
    build_example2,
    noise_case,
    sample_noise,
    simulate,
    trial_rng,
)

__version__ = "0.1.0"
