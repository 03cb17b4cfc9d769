"""Exact spectral Kalman filtering and function-space MCMC for linear advection on the 2-torus."""

__version__ = "0.1.0"

from .spectral import (
    DEFAULT_LATTICE,
    NormParams,
    SpectralField,
    WavenumberLattice,
    from_grid,
    partial_fourier_projection,
    sobolev_norm,
    spatial_average,
    to_grid,
    translate,
)
from .velocity import BrownianPerturbed, ConstantVelocity, IntegrableDrift, VelocityPath
from .operators import AdvectionOperator
from .gaussian import (
    CovarianceSpec,
    GaussianSampler,
    GridWhite,
    LaplacianPower,
    equivalence_diagnostic,
    trace,
)
from .kalman import (
    AssimilationState,
    assimilate,
    assimilate_step,
    filter_mean,
    initial_state,
    misfit,
    posterior_log_density_ratio,
    smoother_closed_form,
)
from .truthgen import Scenario, ScenarioConfig, generate_observations, reference_truth_ic
from .asymptotics import (
    LimitTarget,
    RateFit,
    brownian_moment_oracle,
    filter_error_curve,
    geometric_sum_oracle,
    smoother_error_curve,
)
from .mcmc import (
    GibbsConfig,
    PcnConfig,
    gibbs_sample_velocity_and_ic,
    pcn_sample_initial_condition,
    velocity_seed,
)
