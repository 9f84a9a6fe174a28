"""Minimal-action configurations of a self-repelling branching random walk.

Particles on a binary tree of depth ``N`` branch every generation; each pair
of same-generation particles closer than ``eps`` costs ``beta``. The package
computes the Dirichlet (pre-profile) phase, the staircase (post-profile)
phase, their costs and scaling laws, and checks them against brute force and
Monte Carlo.
"""
__version__ = "0.1.0"

from .action import CostBreakdown, interaction_count, total_action
from .admissible import build_admissible, build_trajectory, optimal_K, restricted_minimiser, staircase_evolution
from .core import ModelParams, NodeId, OccupationProfile, TreeProfile
from .dirichlet import linear_boundary, solve_closed_form, solve_quadratic_min, solve_recursive, standard_boundary
from .errors import (
    BudgetExceeded,
    DegenerateRegime,
    Infeasible,
    ModelAssumptionError,
    NoParent,
    NotRepresentable,
    OffGrid,
    ShapeMismatch,
    SRBRWError,
)

__all__ = [
    "BudgetExceeded",
    "CostBreakdown",
    "DegenerateRegime",
    "Infeasible",
    "ModelAssumptionError",
    "ModelParams",
    "NoParent",
    "NodeId",
    "NotRepresentable",
    "OccupationProfile",
    "OffGrid",
    "SRBRWError",
    "ShapeMismatch",
    "TreeProfile",
    "build_admissible",
    "build_trajectory",
    "interaction_count",
    "linear_boundary",
    "optimal_K",
    "restricted_minimiser",
    "solve_closed_form",
    "solve_quadratic_min",
    "solve_recursive",
    "staircase_evolution",
    "standard_boundary",
    "total_action",
]
