"""Keller-Segel dynamics with fractional diffusion: solver, moment method and blow-up criteria."""
from .criteria import (CriteriaConstants, CriterionVerdict, check_concentration, check_mass_threshold,
                       check_smallness, check_rescaled_mass, moment_lp_tension, morrey_tension, rescale_initial)
from .fractional import fractional_laplacian, interaction, riesz_constant, semigroup_apply
from .grid import Field, Grid, integrate, lp_norm, weighted_moment
from .solver import MomentSeries, SimParams, run
from .virial import frac_laplacian_weight, moment_rhs, weight_value

__version__ = "0.1.0"

__all__ = [
    "CriteriaConstants", "CriterionVerdict", "Field", "Grid", "MomentSeries", "SimParams",
    "check_concentration", "check_mass_threshold", "check_smallness", "check_rescaled_mass",
    "frac_laplacian_weight", "fractional_laplacian", "integrate", "interaction", "lp_norm",
    "moment_lp_tension", "moment_rhs", "morrey_tension", "rescale_initial", "riesz_constant",
    "run", "semigroup_apply", "weight_value", "weighted_moment",
]
