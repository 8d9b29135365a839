"""Hexahedral voxel meshes inscribed into the unit cube.

One cell per fluid voxel; uniform refinement splits every cell 2x2x2.
Boundary faces with x in {0, 1} form the traction boundary (inflow at
x = 0, outflow at x = 1); every other boundary face, including interior
fluid-solid interfaces, carries the no-slip condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..voxel import VoxelGrid, retain_percolating

#: (axis, side) pairs for the six face directions; side -1 is the low face.
FACE_DIRS = [(0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)]


class MeshError(ValueError):
    pass


def _refine(mask: np.ndarray, levels: int) -> np.ndarray:
    out = mask
    for _ in range(levels):
        for ax in range(3):
            out = np.repeat(out, 2, axis=ax)
    return out


@dataclass
class VoxelMesh:
    fluid: np.ndarray  # refined cell mask, shape (Nx, Ny, Nz)
    refinement_level: int
    base_fluid: np.ndarray  # unrefined voxel mask
    h: float  # cell edge in unit-cube coordinates

    cells: np.ndarray = field(init=False)  # (M, 3) fluid cell indices
    cell_id: np.ndarray = field(init=False)  # (Nx, Ny, Nz), -1 for solid

    def __post_init__(self):
        idx = np.argwhere(self.fluid)
        self.cells = np.ascontiguousarray(idx.astype(np.int64))
        self.cell_id = np.full(self.fluid.shape, -1, dtype=np.int64)
        self.cell_id[self.fluid] = np.arange(idx.shape[0])

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def dims(self):
        return self.fluid.shape

    def boundary_face_mask(self, axis: int, side: int) -> np.ndarray:
        """Boolean over cells: has a boundary face in direction (axis, side).

        A face is a boundary face when the neighboring voxel across it is
        solid or outside the bounding box.
        """
        coord = self.cells[:, axis]
        n = self.fluid.shape[axis]
        nbr = self.cells.copy()
        nbr[:, axis] = coord + side
        inside = (nbr[:, axis] >= 0) & (nbr[:, axis] < n)
        out = np.ones(self.num_cells, dtype=bool)
        ii = nbr[inside]
        out[inside] = ~self.fluid[ii[:, 0], ii[:, 1], ii[:, 2]]
        return out

    def gamma_in_cells(self) -> np.ndarray:
        """Cells whose -x face lies in the x = 0 plane (inflow faces)."""
        return np.flatnonzero((self.cells[:, 0] == 0))

    def gamma_out_cells(self) -> np.ndarray:
        return np.flatnonzero(self.cells[:, 0] == self.fluid.shape[0] - 1)

    def face_counts(self):
        """(gamma_in, gamma_out, gamma_d) boundary face counts."""
        n_in = self.gamma_in_cells().size
        n_out = self.gamma_out_cells().size
        total = 0
        for axis, side in FACE_DIRS:
            total += int(self.boundary_face_mask(axis, side).sum())
        return n_in, n_out, total - n_in - n_out


def build_mesh(grid: VoxelGrid, refinement_level: int = 0) -> VoxelMesh:
    """Mesh the fluid voxels of a percolating grid.

    Raises MeshError when no fluid component connects the two x faces;
    callers are expected to filter inputs through retain_percolating.
    """
    if refinement_level < 0:
        raise ValueError("refinement_level must be non-negative")
    _, permeable = retain_percolating(grid, "x")
    if not permeable:
        raise MeshError("grid does not percolate along x; cannot mesh")
    base = grid.data
    fluid = _refine(base, refinement_level)
    h = 1.0 / (base.shape[0] * 2**refinement_level)
    return VoxelMesh(
        fluid=fluid, refinement_level=refinement_level, base_fluid=base, h=h
    )
