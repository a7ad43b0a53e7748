"""Numerical laboratory for a two-producer Bertrand export model with a
local-government guidance stage."""

from .demand import DemandSystem, LinearDemand, LinearDemandParams, SpecificDemand, fd_partials
from .dynamics import AdjustmentConfig, Trajectory, check_descent, liapunov_Z2, simulate
from .equilibrium import (Equilibrium, best_response, closed_form_equilibrium, iso_profit_points, solve_iterative,
                          solve_newton, stability_quantities)
from .errors import (DegenerateModel, InvalidInput, InvalidParameters, ModelError, NoBestResponse,
                     NoInteriorSolution, NonConvergence, SingularJacobian, UnstableEquilibrium)
from .extended import extended_jacobian, extended_statics_cbarL, solve_extended
from .model import (MarketPrimitives, PolicyFunctions, aggregate_surplus, consumer_surplus, thresholds)
from .policy import dGE_dcbarL, optimize_guidance
from .scenario import Scenario, load_scenario
from .statics import nonspecific_statics, specific_statics

__all__ = [
    "AdjustmentConfig", "DegenerateModel", "DemandSystem", "Equilibrium", "InvalidInput", "InvalidParameters",
    "LinearDemand", "LinearDemandParams", "MarketPrimitives", "ModelError", "NoBestResponse", "NoInteriorSolution",
    "NonConvergence", "PolicyFunctions", "Scenario", "SingularJacobian", "SpecificDemand", "Trajectory",
    "UnstableEquilibrium", "aggregate_surplus", "best_response", "check_descent", "closed_form_equilibrium",
    "consumer_surplus", "dGE_dcbarL", "extended_jacobian", "extended_statics_cbarL", "fd_partials",
    "iso_profit_points", "liapunov_Z2", "load_scenario", "nonspecific_statics", "optimize_guidance", "simulate",
    "solve_extended", "solve_iterative", "solve_newton", "specific_statics", "stability_quantities", "thresholds",
]
