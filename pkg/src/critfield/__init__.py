"""Numerical laboratory for a scaling-critical reaction-diffusion flow.

The flow starts from mollified white noise on a periodic square, carries a
logarithmically attenuated reaction, and approaches a Gaussian mean-field
solution whose amplitude obeys an explicit ODE in an exponential time
variable.  The package provides the spectral solver, the amplitude ODEs,
noise-sensitivity companions with their envelope bounds, and a Monte Carlo
harness that verifies every desk-checkable statement.
"""

__version__ = "0.1.0"

from .expectation import QuadratureRule, expect_F_prime, gauss_hermite, variance_for_sigma_ode
from .grid import (
    RealField,
    SpectralField,
    TorusGrid,
    apply_semigroup,
    forward_transform,
    grid_point_variance,
    inverse_transform,
    kernel_field,
)
from .kernels import backend as kernel_backend
from .meanfield import (
    SigmaBoundError,
    SigmaPath,
    TimeMap,
    allen_cahn_sigma_closed,
    mkv_field,
    sigma_at_time,
    solve_sigma_eps,
    solve_sigma_limit,
)
from .noise import GENERATOR_NAME, NoiseRealization, mollify, sample_white_noise
from .reaction import (
    Reaction,
    allen_cahn,
    cutoff,
    linear,
    odd_poly,
    reaction_from_config,
    verify_class,
    zero_reaction,
)
from .solver import (
    BlowUpError,
    MalliavinCheck,
    SolverConfig,
    Trajectory,
    build_mesh,
    evolve,
    evolve_malliavin,
    malliavin_bound_check,
    nonlinear_substep,
)

__all__ = [
    "__version__",
    "TorusGrid", "RealField", "SpectralField",
    "forward_transform", "inverse_transform", "apply_semigroup",
    "grid_point_variance", "kernel_field",
    "NoiseRealization", "sample_white_noise", "mollify", "GENERATOR_NAME",
    "Reaction", "allen_cahn", "linear", "odd_poly", "zero_reaction",
    "cutoff", "verify_class", "reaction_from_config",
    "QuadratureRule", "gauss_hermite", "expect_F_prime", "variance_for_sigma_ode",
    "SigmaPath", "TimeMap", "SigmaBoundError",
    "solve_sigma_eps", "solve_sigma_limit", "sigma_at_time", "mkv_field",
    "allen_cahn_sigma_closed",
    "SolverConfig", "Trajectory", "BlowUpError", "MalliavinCheck",
    "build_mesh", "evolve", "nonlinear_substep", "evolve_malliavin",
    "malliavin_bound_check",
    "kernel_backend",
]
