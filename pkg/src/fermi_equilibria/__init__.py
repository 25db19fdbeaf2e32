"""Equilibria of the Boltzmann equation for Fermi-Dirac particles.

Numerical tools for the two equilibrium regimes of densities bounded by 1:
Fermi-Dirac distributions and indicators of balls.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .collision import (
    angular_reduction,
    collision_terms,
    dissipation_estimate,
    equilibrium_residual,
    gain_functional_I,
    gamma_rate,
    lipschitz_constant,
    loss_functional_J,
    post_collision,
)
from .density import (
    AnnulusDensity,
    BallDensity,
    FermiDiracDensity,
    Moments,
    RadialGridDensity,
    compute_moments,
    entropy,
)
from .equilibrium import (
    Classification,
    Regime,
    ball_from_mass,
    classify,
    invert_parameters,
    verify_classification,
)
from .errors import *  # noqa: F401,F403
from .fermi import fermi_I, fermi_J, fermi_P, threshold
from .geometry import (
    AnnulusShape,
    BallShape,
    ReuleauxShape,
    annulus_lambda_bound,
    check_antipodal_condition,
    lambda_estimate,
    sphere_fraction,
)
from .numerics import McConfig, QuadratureSpec

__all__ = [
    "BACKEND", "AnnulusShape", "BallShape", "ReuleauxShape",
    "annulus_lambda_bound", "check_antipodal_condition", "lambda_estimate", "sphere_fraction",
    "AnnulusDensity", "BallDensity", "Classification", "FermiDiracDensity",
    "McConfig", "Moments", "QuadratureSpec", "RadialGridDensity", "Regime",
    "angular_reduction", "ball_from_mass", "classify", "collision_terms", "compute_moments",
    "dissipation_estimate", "entropy", "equilibrium_residual", "fermi_I", "fermi_J", "fermi_P",
    "gain_functional_I", "gamma_rate", "invert_parameters", "lipschitz_constant",
    "loss_functional_J", "post_collision", "threshold", "verify_classification",
]
