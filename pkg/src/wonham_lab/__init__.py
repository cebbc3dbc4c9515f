"""Simulation and verification lab for exact and approximate filters of
finite-state continuous-time Markov chains observed in Gaussian noise."""

__version__ = "0.1.0"

from .bounds import (
    BoundKind,
    BoundScale,
    BoundSeries,
    ComparisonReport,
    ErrorTermSeries,
    LocalTimeEstimate,
    combined_drift_error,
    comparison_check,
    deterministic_rate,
    discounted_local_time_integral,
    e3_spread,
    error_terms,
    estimate_local_time,
    expected_error_bound,
    exponential_bound,
    hilbert_scale,
    lse_alpha,
    pathwise_rate_simple,
    pathwise_rate_simple_series,
    pathwise_rate_subset,
    robustness_constants,
    softargmax_alpha,
    solve_bound_ode,
    state_dependent_rate,
    tamed_euler,
)
from .ctmc import (
    EPS_FLOOR,
    CtmcPath,
    RateMatrix,
    SensorVector,
    SimplexVector,
    TimeGrid,
    cyclic_rate_matrix,
    matrix_from_text,
    matrix_to_text,
    perturb_initial,
    perturb_with_signs,
    random_sensor,
    sample_ctmc_path,
    stationary_distribution,
    validate_rate_matrix,
)
from .filtering import (
    ApproximateFilterSpec,
    FilterTrajectory,
    ObservationIncrements,
    exact_wonham_spec,
    hilbert_error_series,
    integrate_generic,
    integrate_wonham,
    misspecified_wonham_spec,
    simulate_observations,
)
from .hilbert import (
    DeltaMatrix,
    delta_infinity,
    delta_matrix,
    hilbert_distance,
    theta_chart,
    theta_inverse,
)
from .qapprox import nmf_approximate_q, qtilde_fixture
