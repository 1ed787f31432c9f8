"""k-spreading rumor model: exact simulation, fluid limits, and CLT covariances."""

from .model import (
    DensityState,
    InitialConfiguration,
    InvalidStateError,
    InvalidTransitionError,
    ModelParams,
    PopulationState,
    apply_increment,
    beta,
    diffusion,
    drift,
    increments,
    jacobian,
    time_changed_rates,
    transition_rates,
)
from .asymptotics import (
    AsymptoticSummary,
    ZeroClassification,
    asymptotic_summary,
    classify_zeros,
    f_eval,
    f_standard,
    gamma_lower,
    poisson_partial_mean,
    poisson_tail,
    rho,
    series_coefficients,
    x_infinity,
    y_infinity,
)
from .fluid import FluidTrajectory, closed_form, fluid_trajectory, integrate_numeric, tau_infinity
from .clt import (
    CltResult,
    DegeneracyError,
    QuadratureError,
    clt_pipeline,
    delta_infinity,
    fundamental_matrix,
    lambda_infinity,
    projection_b,
    sigma,
)
from .simulate import FinalOutcome, Trajectory, replicate, simulate_embedded, simulate_exact
from .montecarlo import (
    CltReport,
    ExperimentConfig,
    LlnReport,
    SweepRow,
    initial_counts,
    run_clt,
    run_lln,
    sweep_k,
)

__version__ = "0.1.0"
