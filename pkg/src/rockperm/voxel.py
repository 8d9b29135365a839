"""Binary voxel geometries: I/O, subsampling, pruning, morphology, descriptors.

A grid is a 3D occupancy array of fluid (True) and solid (False) voxels,
indexed ``[ix, iy, iz]``.  On disk, grids are stored in a 1-bit raw format:
linear index ``ix + nx*(iy + ny*iz)`` (x fastest), packed LSB-first into
bytes, file size ``ceil(nx*ny*nz / 8)``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

#: 6-connectivity structuring element (face neighbors only).
STRUCT6 = ndimage.generate_binary_structure(3, 1)

ROTATIONS = ("none", "y90", "z90")
AXES = {"x": 0, "y": 1, "z": 2}


class RawFormatError(ValueError):
    """Raised when a raw file does not match the declared dimensions."""


@dataclass(frozen=True)
class VoxelGrid:
    """Bit-per-voxel occupancy grid with a physical voxel edge length [m]."""

    data: np.ndarray  # bool array, shape (nx, ny, nz)
    voxel_edge: float = 2.25e-6

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=bool)
        if arr.ndim != 3:
            raise ValueError("voxel data must be a 3D array")
        object.__setattr__(self, "data", arr)

    @property
    def dims(self):
        return self.data.shape

    @property
    def fluid_count(self) -> int:
        return int(self.data.sum())

    def __eq__(self, other):
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.voxel_edge == other.voxel_edge
            and bool(np.array_equal(self.data, other.data))
        )


@dataclass(frozen=True)
class SubsampleMeta:
    """Provenance of a subsample: parent-grid origin, rotation, flow axis."""

    origin: tuple  # (ix, iy, iz) voxel offsets in the parent grid
    rotation: str = "none"  # one of ROTATIONS
    flow_axis: str = "x"

    def __post_init__(self):
        if self.rotation not in ROTATIONS:
            raise ValueError(f"unknown rotation {self.rotation!r}")
        if self.flow_axis not in AXES:
            raise ValueError(f"unknown flow axis {self.flow_axis!r}")


def load_raw(path, dims, voxel_edge=2.25e-6) -> VoxelGrid:
    """Read a 1-bit raw file into a VoxelGrid.

    Bit i of byte b corresponds to linear index 8*b + i; bit value 1 marks
    a fluid voxel.  The file must contain exactly ceil(nx*ny*nz/8) bytes.
    """
    nx, ny, nz = dims
    nbits = nx * ny * nz
    expected = math.ceil(nbits / 8)
    actual = os.path.getsize(path)
    if actual != expected:
        raise RawFormatError(
            f"{path}: expected {expected} bytes for dims {dims}, got {actual}"
        )
    raw = np.fromfile(path, dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[:nbits]
    # linear index is x-fastest, so a C-order reshape gives [iz, iy, ix]
    arr = bits.reshape(nz, ny, nx).transpose(2, 1, 0).astype(bool)
    return VoxelGrid(arr, voxel_edge)


def save_raw(grid: VoxelGrid, path) -> None:
    """Write a grid in the 1-bit raw format (inverse of load_raw)."""
    bits = grid.data.transpose(2, 1, 0).reshape(-1).astype(np.uint8)
    packed = np.packbits(bits, bitorder="little")
    packed.tofile(path)


def extract_subsamples(grid: VoxelGrid, size: int, stride: int):
    """Sliding-frame extraction of cubic subsamples.

    Frames are placed at all origins o with o+size <= dim per axis, at
    multiples of the stride, enumerated in lexicographic (z, y, x) order.
    Returns a list of (VoxelGrid, SubsampleMeta).
    """
    nx, ny, nz = grid.dims
    if size > min(nx, ny, nz):
        raise ValueError(f"subsample size {size} exceeds grid dims {grid.dims}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    out = []
    for iz in range(0, nz - size + 1, stride):
        for iy in range(0, ny - size + 1, stride):
            for ix in range(0, nx - size + 1, stride):
                sub = grid.data[ix : ix + size, iy : iy + size, iz : iz + size]
                out.append(
                    (
                        VoxelGrid(sub.copy(), grid.voxel_edge),
                        SubsampleMeta(origin=(ix, iy, iz)),
                    )
                )
    return out


def rotate90(grid: VoxelGrid, axis: str) -> VoxelGrid:
    """Rotate a cubic grid by 90 degrees around the y or z axis.

    The rotation maps the parent z axis (for ``y90``) or the parent y axis
    (for ``z90``) onto the sample x axis, so that an x-driven flow through
    the rotated grid probes the corresponding parent axis.
    """
    nx, ny, nz = grid.dims
    if not (nx == ny == nz):
        raise ValueError(f"rotate90 requires a cubic grid, got {grid.dims}")
    a = grid.data
    if axis == "y":
        # new[i, j, k] = old[n-1-k, j, i]
        rot = a.transpose(2, 1, 0)[::-1, :, :]
    elif axis == "z":
        # new[i, j, k] = old[n-1-j, i, k]
        rot = a.transpose(1, 0, 2)[:, ::-1, :]
    else:
        raise ValueError(f"rotation axis must be 'y' or 'z', got {axis!r}")
    return VoxelGrid(np.ascontiguousarray(rot), grid.voxel_edge)


def rotated_variant(grid: VoxelGrid, rotation: str) -> VoxelGrid:
    """Apply one of the enumeration rotations ('none', 'y90', 'z90')."""
    if rotation == "none":
        return grid
    return rotate90(grid, rotation[0])


def retain_percolating(grid: VoxelGrid, axis: str = "x"):
    """Keep only fluid components connecting both faces along ``axis``.

    Components are labeled under 6-connectivity; a component is kept iff it
    intersects both the axis=0 and the axis=max face.  Returns the pruned
    grid and a flag telling whether any component was kept.
    """
    ax = AXES[axis]
    labels, nlab = ndimage.label(grid.data, structure=STRUCT6)
    if nlab == 0:
        return VoxelGrid(np.zeros(grid.dims, dtype=bool), grid.voxel_edge), False
    lo = np.unique(np.take(labels, 0, axis=ax))
    hi = np.unique(np.take(labels, -1, axis=ax))
    keep = np.intersect1d(lo, hi)
    keep = keep[keep != 0]
    if keep.size == 0:
        return VoxelGrid(np.zeros(grid.dims, dtype=bool), grid.voxel_edge), False
    mask = np.isin(labels, keep)
    return VoxelGrid(mask, grid.voxel_edge), True


def porosity(grid: VoxelGrid) -> float:
    """Fluid-voxel fraction of the total volume."""
    return grid.fluid_count / grid.data.size


def _face_adjacencies(data: np.ndarray) -> int:
    """Number of fluid-fluid face pairs."""
    n = 0
    for ax in range(3):
        a = np.swapaxes(data, 0, ax)
        n += int((a[:-1] & a[1:]).sum())
    return n


def surface_area(grid: VoxelGrid):
    """Graph-based surface estimate: 6*nodes - 2*edges fluid faces.

    Counts fluid faces against solid voxels and against the domain
    boundary alike.  Returns (face_count, area in m^2).
    """
    nodes = grid.fluid_count
    edges = _face_adjacencies(grid.data)
    face_count = 6 * nodes - 2 * edges
    return face_count, face_count * grid.voxel_edge**2


def specific_surface_area(grid: VoxelGrid) -> float:
    """Surface area per unit material (solid) volume [1/m]."""
    _, area = surface_area(grid)
    solid = grid.data.size - grid.fluid_count
    if solid == 0:
        return math.inf
    return area / (solid * grid.voxel_edge**3)


def morph(grid: VoxelGrid, layers: int) -> VoxelGrid:
    """Dilate (layers > 0) or erode (layers < 0) the fluid set.

    One layer is one 6-neighborhood dilation/erosion step; layers = 0 is
    the identity.
    """
    if abs(layers) > min(grid.dims) // 2:
        raise ValueError(f"|layers| = {abs(layers)} too large for dims {grid.dims}")
    if layers == 0:
        return grid
    if layers > 0:
        out = ndimage.binary_dilation(grid.data, STRUCT6, iterations=layers)
    else:
        # outside the box counts as fluid: the sample continues past its
        # bounding faces, so erosion must not eat the domain boundary
        out = ndimage.binary_erosion(
            grid.data, STRUCT6, iterations=-layers, border_value=1
        )
    return VoxelGrid(out, grid.voxel_edge)


def to_ascii(grid: VoxelGrid) -> str:
    """Debug export: one 0/1 block per z-slice, rows along y, columns x."""
    blocks = []
    nx, ny, nz = grid.dims
    for iz in range(nz):
        rows = [
            "".join("1" if grid.data[ix, iy, iz] else "0" for ix in range(nx))
            for iy in range(ny)
        ]
        blocks.append(f"# z={iz}\n" + "\n".join(rows))
    return "\n\n".join(blocks) + "\n"
