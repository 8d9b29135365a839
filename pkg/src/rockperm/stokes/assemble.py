"""Assembly of the stabilized Taylor-Hood saddle-point system.

Velocity: continuous vector-valued Q_{l+1} on hexahedra; pressure:
discontinuous P0 (l = 0, with face-jump stabilization) or continuous Q1
(l = 1).  Blocks:

    [[A, B^T], [B, -C]] [x_u, x_p] = [b, 0]

with A the vector Laplacian (scaled by 1/Re), B the negative divergence,
C the l = 0 pressure stabilization, W the pressure mass matrix used in
the preconditioner.  No-slip DOFs are eliminated symmetrically (zeroed
rows/columns, unit diagonal), keeping the reported DOF counts n and m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import elements
from .mesh import VoxelMesh


def node_grid(mesh: VoxelMesh, k: int):
    """Used-node mask and id lookup for the degree-k tensor node grid.

    Node (gx, gy, gz) of the grid (k*Nx+1, k*Ny+1, k*Nz+1) is used when
    some fluid cell touches it.  Returns (node_id array with -1 for
    unused, number of used nodes).
    """
    nx, ny, nz = mesh.dims
    nn = (k * nx + 1, k * ny + 1, k * nz + 1)
    used = np.zeros(nn, dtype=bool)
    cx, cy, cz = mesh.cells[:, 0], mesh.cells[:, 1], mesh.cells[:, 2]
    for az in range(k + 1):
        for ay in range(k + 1):
            for ax in range(k + 1):
                used[k * cx + ax, k * cy + ay, k * cz + az] = True
    node_id = np.full(nn, -1, dtype=np.int64)
    node_id[used] = np.arange(int(used.sum()))
    return node_id, int(used.sum())


def cell_dofmap(mesh: VoxelMesh, k: int, node_id: np.ndarray) -> np.ndarray:
    """(num_cells, (k+1)^3) global node ids, local index x fastest."""
    cx, cy, cz = mesh.cells[:, 0], mesh.cells[:, 1], mesh.cells[:, 2]
    cols = []
    for az in range(k + 1):
        for ay in range(k + 1):
            for ax in range(k + 1):
                cols.append(node_id[k * cx + ax, k * cy + ay, k * cz + az])
    return np.stack(cols, axis=1)


def _local_face_indices(k: int, axis: int, side: int) -> np.ndarray:
    """Local node indices on one cell face, consistent with dofmap order."""
    nb = k + 1
    az, ay, ax = np.meshgrid(range(nb), range(nb), range(nb), indexing="ij")
    coords = (ax, ay, az)
    sel = coords[axis] == (0 if side < 0 else k)
    lin = az * nb * nb + ay * nb + ax
    return lin[sel]


def dirichlet_mask(mesh: VoxelMesh, k: int, node_id: np.ndarray, nv: int):
    """Scalar-node mask of no-slip DOFs: nodes on any Gamma_D face."""
    dofmap = cell_dofmap(mesh, k, node_id)
    mask = np.zeros(nv, dtype=bool)
    nx = mesh.dims[0]
    for axis, side in (
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 1),
        (2, -1),
        (2, 1),
    ):
        bcells = mesh.boundary_face_mask(axis, side)
        if axis == 0:
            # faces lying in the x = 0 / x = 1 planes are traction faces
            plane = mesh.cells[:, 0] == (0 if side < 0 else nx - 1)
            bcells = bcells & ~plane
        if not bcells.any():
            continue
        loc = _local_face_indices(k, axis, side)
        mask[dofmap[np.ix_(bcells, loc)].ravel()] = True
    return mask, dofmap


def _scatter(dofmap_rows, dofmap_cols, local, shape):
    m = dofmap_rows.shape[0]
    rows = np.broadcast_to(
        dofmap_rows[:, :, None], (m, local.shape[0], local.shape[1])
    )
    cols = np.broadcast_to(
        dofmap_cols[:, None, :], (m, local.shape[0], local.shape[1])
    )
    data = np.broadcast_to(local[None, :, :], rows.shape)
    mat = sp.coo_matrix(
        (data.ravel(), (rows.ravel(), cols.ravel())), shape=shape
    )
    return mat.tocsr()


@dataclass
class StokesSystem:
    ell: int
    re: float
    h: float
    n: int  # velocity DOFs (3 * scalar nodes, counted before elimination)
    m: int  # pressure DOFs
    L: sp.csr_matrix  # eliminated scalar Laplacian / Re, (n/3) square
    B: sp.csr_matrix  # divergence block, m x n
    C: sp.csr_matrix | None  # l = 0 stabilization, m x m
    W: sp.csr_matrix  # pressure mass matrix, m x m
    b: np.ndarray  # rhs, length n
    dirichlet: np.ndarray  # bool over scalar velocity nodes
    vel_node_id: np.ndarray
    vel_dofmap: np.ndarray
    p_dofmap: np.ndarray | None  # None for l = 0 (pressure dof = cell)
    mesh: VoxelMesh

    BT: sp.csr_matrix = field(init=False)

    def __post_init__(self):
        self.BT = self.B.T.tocsr()

    @property
    def nv(self) -> int:
        return self.n // 3

    def saddle_matvec(self, x: np.ndarray) -> np.ndarray:
        xu = x[: self.n].reshape(3, self.nv)
        xp = x[self.n :]
        yu = np.empty_like(xu)
        for c in range(3):
            yu[c] = self.L @ xu[c]
        yu = yu.reshape(-1) + self.BT @ xp
        yp = self.B @ x[: self.n]
        if self.C is not None:
            yp = yp - self.C @ xp
        return np.concatenate([yu, yp])

    def saddle_matrix(self) -> sp.csr_matrix:
        """Explicit sparse saddle matrix (for small-problem checks)."""
        a_full = sp.kron(sp.eye(3), self.L, format="csr")
        c = self.C if self.C is not None else sp.csr_matrix((self.m, self.m))
        return sp.bmat([[a_full, self.BT], [self.B, -c]], format="csr")

    @property
    def rhs(self) -> np.ndarray:
        return np.concatenate([self.b, np.zeros(self.m)])


def assemble(
    mesh: VoxelMesh,
    ell: int,
    re: float = 1.0,
    stab_beta: float = 0.01,
    eliminate: bool = True,
) -> StokesSystem:
    """Assemble the mixed system for pressure order ``ell`` in {0, 1}."""
    if ell not in (0, 1):
        raise ValueError(f"unsupported pressure order {ell}; expected 0 or 1")
    k = ell + 1
    h = mesh.h
    node_id, nv = node_grid(mesh, k)
    dir_mask, vdof = dirichlet_mask(mesh, k, node_id, nv)

    lloc = elements.scalar_stiffness(k, h) / re
    L = _scatter(vdof, vdof, lloc, (nv, nv))

    # pressure space
    if ell == 0:
        m = mesh.num_cells
        pdof = np.arange(m, dtype=np.int64)[:, None]
        p_dofmap = None
        wdiag = np.full(m, h**3)
        W = sp.diags(wdiag).tocsr()
        C = _assemble_stabilization(mesh, stab_beta, h, re)
    else:
        p_node_id, m = node_grid(mesh, 1)
        pdof = cell_dofmap(mesh, 1, p_node_id)
        p_dofmap = pdof
        W = _scatter(pdof, pdof, elements.scalar_mass(1, h), (m, m))
        C = None

    # divergence block over the three components, component-major layout
    bx, by, bz = elements.divergence_blocks(ell, k, h)
    n = 3 * nv
    blocks = []
    for c, loc in enumerate((bx, by, bz)):
        bc = _scatter(pdof, vdof, -loc, (m, nv))
        blocks.append(bc)
    B = sp.hstack(blocks, format="csr")

    # traction rhs on the x-velocity component
    b = np.zeros(n)
    wface = elements.face_weights(k, h)
    loc_in = _local_face_indices(k, 0, -1)
    loc_out = _local_face_indices(k, 0, 1)
    for cells_idx, loc in (
        (mesh.gamma_in_cells(), loc_in),
        (mesh.gamma_out_cells(), loc_out),
    ):
        if cells_idx.size:
            ids = vdof[np.ix_(cells_idx, loc)]
            np.add.at(b, ids.ravel(), np.tile(wface, cells_idx.size))

    if eliminate:
        keep = sp.diags((~dir_mask).astype(float))
        L = (keep @ L @ keep + sp.diags(dir_mask.astype(float))).tocsr()
        keep3 = sp.block_diag([keep] * 3)
        B = (B @ keep3).tocsr()
        b[np.tile(dir_mask, 3)] = 0.0

    return StokesSystem(
        ell=ell,
        re=re,
        h=h,
        n=n,
        m=m,
        L=L,
        B=B,
        C=C,
        W=W,
        b=b,
        dirichlet=dir_mask,
        vel_node_id=node_id,
        vel_dofmap=vdof,
        p_dofmap=p_dofmap,
        mesh=mesh,
    )


def _assemble_stabilization(mesh: VoxelMesh, beta: float, h: float, re: float):
    """Face-jump pressure stabilization for the Q1-P0 pair.

    For each interior face between fluid cells j, l the cell-pair gets
    the local jump contribution beta*h^3*[[1, -1], [-1, 1]] (face-area
    times face-diameter scaling); equivalently a scaled cell-centered
    finite-volume pressure Laplacian.  A small beta is enough to remove
    the checkerboard pressure modes and make the saddle matrix full
    rank; large values visibly pollute the computed flux, so the
    default is kept well below the classical beta = 1/4.

    The Re factor matches the Re scaling of the Schur complement of the
    1/Re-scaled momentum block, keeping the Darcy number independent of
    the Reynolds number.
    """
    s = beta * h**3 * re
    rows, cols, data = [], [], []
    for ax in range(3):
        f = np.swapaxes(mesh.fluid, 0, ax)
        ids = np.swapaxes(mesh.cell_id, 0, ax)
        pair = f[:-1] & f[1:]
        a = ids[:-1][pair]
        bb = ids[1:][pair]
        rows.extend([a, bb, a, bb])
        cols.extend([a, bb, bb, a])
        data.extend(
            [
                np.full(a.size, s),
                np.full(a.size, s),
                np.full(a.size, -s),
                np.full(a.size, -s),
            ]
        )
    m = mesh.num_cells
    if not rows:
        return sp.csr_matrix((m, m))
    mat = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m, m),
    )
    return mat.tocsr()
