"""Linear equilibrium of elastic stents as graphs of inextensible curved rods.

Each strut carries displacement ``y`` and infinitesimal rotation ``theta``;
inextensibility and unshearability ``y' + t x theta = 0`` are enforced with a
Lagrange multiplier (the contact force), and rigid motions are removed by
two mean-value constraints whose multipliers ``alpha``, ``beta`` absorb any
load imbalance.
"""

from .fem import DiscreteSystem, DofMap, Mesh, StentState, assemble_system
from .geometry import ArcCurve, Frame, ParamCurve, PolylineCurve, StraightCurve, eval_frame, skew
from .graph import Edge, GraphError, StentGraph, class_s_check, incidence_matrix
from .loads import ConstantLoad, FunctionLoad, PolynomialLoad, SampledLoad
from .rod import CrossSection, Material, RodProperties, elasticity_matrix
from .solver import SaddleSolveReport, solve_mixed, solve_single_rod, strong_residual

__version__ = "0.1.0"

__all__ = [
    "DiscreteSystem", "DofMap", "Mesh", "StentState", "assemble_system", "ArcCurve", "Frame",
    "ParamCurve", "PolylineCurve", "StraightCurve", "eval_frame", "skew", "Edge", "GraphError",
    "StentGraph", "class_s_check", "incidence_matrix", "ConstantLoad", "FunctionLoad",
    "PolynomialLoad", "SampledLoad", "CrossSection", "Material", "RodProperties",
    "elasticity_matrix", "SaddleSolveReport", "solve_mixed", "solve_single_rod",
    "strong_residual",
]
