"""Numerical toolkit for the PT-symmetric complex-shifted harmonic oscillator.

Builds every operator, basis, metric, and involution of the model in a
truncated Fock space and verifies its defining identities (real spectrum,
metric orthonormality, involution and transformation rules, the complex
position decomposition, and the uncertainty principle) as machine-checkable
residuals.
"""

from .errors import BranchError, ConfigError, PtoscError, TruncationError
from .matrices import (QuadratureRule, frob, gauss_hermite, herm_eig, herm_exp,
                       interior, mat_exp, rel_residual)
from .model import (HALF_INTEGER_PI, INTEGER_PI, BiorthogonalSystem, ModelParams,
                    OperatorSet, b_basis, build_operators, build_system,
                    dual_basis, ladder_ops, overlap_formula)
from .metric import (EnergyTrajectory, MetricBundle, build_metric,
                     closed_form_energy, default_time_grid, energy_trajectory,
                     evolve, expectation, inner)
from .involutions import (AntilinearOp, CalibrationReport, InvolutionSuite,
                          RuleResult, build_suite, conjugate_by,
                          verify_symmetries, verify_transformations)
from .position import (DensityProfile, PositionDecomposition, Uncertainties,
                       default_profile_grid, density, hermite_function,
                       hermite_functions, position_decomposition, uncertainties)
from .verify import CheckResult, VerificationReport, run_verification

__version__ = "0.1.0"

__all__ = [
    "AntilinearOp", "BiorthogonalSystem", "BranchError", "CalibrationReport",
    "CheckResult", "ConfigError", "DensityProfile", "EnergyTrajectory",
    "HALF_INTEGER_PI", "INTEGER_PI", "InvolutionSuite", "MetricBundle",
    "ModelParams", "OperatorSet", "PositionDecomposition", "PtoscError",
    "QuadratureRule", "RuleResult", "TruncationError", "Uncertainties",
    "VerificationReport", "b_basis", "build_metric", "build_operators",
    "build_suite", "build_system", "closed_form_energy", "conjugate_by",
    "default_profile_grid", "default_time_grid", "density", "dual_basis",
    "energy_trajectory", "evolve", "expectation", "frob", "gauss_hermite",
    "herm_eig", "herm_exp", "hermite_function", "hermite_functions", "inner",
    "interior", "ladder_ops", "mat_exp", "overlap_formula",
    "position_decomposition", "rel_residual", "run_verification",
    "uncertainties", "verify_symmetries", "verify_transformations",
]
