"""Mixed finite-element Stokes solver on voxel meshes."""

from .mesh import VoxelMesh, build_mesh
from .assemble import StokesSystem, assemble
from .minres import FlowSolution, minres_solve
from .precond import make_preconditioner
from .permeability import (
    PermeabilityResult,
    analytic_channel_permeability,
    compute_permeability,
    series_truncation_bound,
)

__all__ = [
    "VoxelMesh",
    "build_mesh",
    "StokesSystem",
    "assemble",
    "FlowSolution",
    "minres_solve",
    "make_preconditioner",
    "PermeabilityResult",
    "compute_permeability",
    "analytic_channel_permeability",
    "series_truncation_bound",
]
