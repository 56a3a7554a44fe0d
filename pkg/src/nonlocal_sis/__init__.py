"""Numerical suite for a two-compartment SIS epidemic model with nonlocal
(integral) dispersal on a bounded interval.

Movement is modeled by a convolution against a symmetric jump kernel rather
than a Laplacian, so no boundary conditions enter: the operator is a dense
symmetric matrix after midpoint quadrature. On top of that discretization the
package computes the principal spectral threshold and the basic reproduction
number by three independent routes, solves the disease-free and endemic
steady states (the latter by a monotone two-sided bracket iteration with a
proof-style ordering check every step), integrates the time-dependent system
with a conservative Runge-Kutta scheme, and evaluates the limiting profiles
reached when either diffusivity grows without bound.
"""

from .acceptance import CriterionResult, run_all, run_one
from .dynamics import (
    SimulationResult,
    classify_longtime,
    dispersal_spectral_gap,
    fit_decay_rate,
    integrate_to,
    lyapunov_value,
    rhs_fields,
    stable_timestep,
)
from .equilibria import (
    EquilibriumResult,
    ModelParams,
    disease_free,
    endemic_equilibrium,
    equilibrium_residual,
    infection_term,
    iterate_reduced_map,
    limit_profile_both_infinity,
    limit_profile_di_infinity,
    limit_profile_ds_infinity,
    limit_system_residual,
    logistic_steady,
    recover_equilibrium,
    solve_ratio_profile,
    solve_reduced_infected,
)
from .errors import (
    AssumptionViolatedError,
    AsymmetricOperatorError,
    ConfigError,
    DivisionGuardError,
    InvalidBracketError,
    InvalidDomainError,
    KernelQuadratureError,
    KernelTooNarrowError,
    LengthMismatchError,
    MassDriftError,
    ModelError,
    NegativeStateError,
    NoConvergenceError,
    NonpositiveEigenvectorError,
    NonpositiveParameterError,
    OutOfRangeError,
    SingularOperatorError,
    StepCollapseError,
    SubcriticalRegimeError,
)
from .mesh import Kernel, KernelSpec, Mesh1D, build_kernel, build_mesh, integrate
from .operators import (
    OperatorMatrix,
    assemble_dispersal,
    assemble_removal_generator,
    spectral_bound,
)
from .runner import (
    RateSpec,
    RunRecord,
    ScenarioConfig,
    build_problem,
    emit_config,
    load_config,
    parse_config,
    run,
    theorem_suite,
)
from .spectral import (
    CriticalDispersal,
    RateFields,
    SpectralReport,
    find_critical_dispersal,
    principal_eigen_exists,
    principal_eigenvalue,
    principal_eigenvalue_scan,
    r0_all_routes,
    weighted_eigenvalue,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolatedError", "AsymmetricOperatorError", "ConfigError",
    "CriterionResult", "CriticalDispersal", "DivisionGuardError",
    "EquilibriumResult", "InvalidBracketError", "InvalidDomainError",
    "Kernel", "KernelQuadratureError", "KernelSpec", "KernelTooNarrowError",
    "LengthMismatchError", "MassDriftError", "Mesh1D", "ModelError",
    "ModelParams", "NegativeStateError", "NoConvergenceError",
    "NonpositiveEigenvectorError", "NonpositiveParameterError",
    "OperatorMatrix", "OutOfRangeError", "RateFields", "RateSpec",
    "RunRecord", "ScenarioConfig", "SimulationResult", "SingularOperatorError",
    "SpectralReport", "StepCollapseError", "SubcriticalRegimeError",
    "assemble_dispersal", "assemble_removal_generator", "build_kernel",
    "build_mesh", "build_problem", "classify_longtime", "disease_free",
    "dispersal_spectral_gap", "emit_config", "endemic_equilibrium",
    "equilibrium_residual", "find_critical_dispersal", "fit_decay_rate",
    "infection_term", "integrate", "integrate_to", "iterate_reduced_map",
    "limit_profile_both_infinity", "limit_profile_di_infinity",
    "limit_profile_ds_infinity", "limit_system_residual", "load_config",
    "logistic_steady", "lyapunov_value", "parse_config",
    "principal_eigen_exists", "principal_eigenvalue",
    "principal_eigenvalue_scan", "r0_all_routes", "recover_equilibrium",
    "rhs_fields", "run", "run_all", "run_one", "solve_ratio_profile",
    "solve_reduced_infected", "spectral_bound", "stable_timestep",
    "theorem_suite", "weighted_eigenvalue",
]
