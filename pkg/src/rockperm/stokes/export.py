"""Export of discrete flow fields and machine-readable solver reports.

Field layout (numpy ``.npz`` archive):

* ``cells``     -- (M, 3) int64 cell indices of the fluid mesh;
* ``h``         -- scalar cell edge length (unit-cube coordinates);
* ``velocity``  -- (V, 3) float64 velocity vectors at mesh vertices;
* ``vertices``  -- (V, 3) int64 integer vertex coordinates (multiply by
  ``h`` for physical unit-cube positions);
* ``pressure``  -- (M,) float64 cell-centered pressure (elementwise
  value for the discontinuous space, vertex average for the continuous
  one).

Vertex velocities are exact nodal values: the velocity space contains
the mesh vertices as nodes for both supported orders.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .assemble import StokesSystem, node_grid
from .minres import FlowSolution


def export_fields(path, system: StokesSystem, solution: FlowSolution) -> None:
    """Write the (velocity, pressure) fields of a solution as ``.npz``."""
    mesh = system.mesh
    k = system.ell + 1
    q1_id, nverts = node_grid(mesh, 1)
    vert_coords = np.argwhere(q1_id >= 0)
    order = np.argsort(q1_id[q1_id >= 0])
    vert_coords = vert_coords[order]
    # vertex (gx, gy, gz) of the Q1 grid is node (k*gx, k*gy, k*gz) of
    # the velocity node grid
    vel_ids = system.vel_node_id[
        k * vert_coords[:, 0], k * vert_coords[:, 1], k * vert_coords[:, 2]
    ]
    nv = system.nv
    velocity = np.stack(
        [solution.x_u[c * nv + vel_ids] for c in range(3)], axis=1
    )
    if system.ell == 0:
        pressure = solution.x_p.copy()
    else:
        pressure = solution.x_p[system.p_dofmap].mean(axis=1)
    np.savez_compressed(
        path,
        cells=mesh.cells,
        h=np.float64(mesh.h),
        velocity=velocity,
        vertices=vert_coords,
        pressure=pressure,
    )


@dataclass
class SolverReport:
    """Per-sample solver diagnostics in machine-readable form."""

    sample_id: str
    order: int
    refinement_level: int
    n: int
    m: int
    iterations: int
    achieved_residual: float
    converged: bool
    wall_time_s: float
    residual_history: list = field(default_factory=list)
    timestamp: float = field(default_factory=time.time)


def write_solver_report(path, report: SolverReport) -> None:
    with open(path, "w") as fh:
        json.dump(asdict(report), fh, indent=2)
        fh.write("\n")


def read_solver_report(path) -> SolverReport:
    with open(path) as fh:
        return SolverReport(**json.load(fh))
