"""Constructive and verification tools: rigid motions, the 6x6 rod system, the block
graph system with its pseudo-inverse lift, and the stability constants."""

from .block import (BlockSaddle, InfSupLift, InfSupResult, NotClassS, assemble_block_saddle,
                    infsup_lift, lift_bound_constant, pseudo_inverse)
from .constants import (InfSupConstant, discrete_infsup_constant, ellipticity_constant,
                        poincare_constant)
from .rigid import (RigidMotion, balance_load, closed_form_multipliers, necessary_conditions,
                    node_points, rigid_basis, rigid_motion_field)
from .single_rod import RodLift, Unsolvable, single_rod_lift, single_rod_matrix

__all__ = [
    "BlockSaddle", "InfSupLift", "InfSupResult", "NotClassS", "assemble_block_saddle",
    "infsup_lift", "lift_bound_constant", "pseudo_inverse", "InfSupConstant",
    "discrete_infsup_constant", "ellipticity_constant", "poincare_constant", "RigidMotion",
    "balance_load", "closed_form_multipliers", "necessary_conditions", "node_points",
    "rigid_basis", "rigid_motion_field", "RodLift", "Unsolvable", "single_rod_lift",
    "single_rod_matrix",
]
