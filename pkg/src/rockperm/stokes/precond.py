"""Block-diagonal preconditioners diag(A_hat, W_hat) for MINRES.

The contract is two SPD linear actions: ``apply_velocity`` approximates
the inverse of the (eliminated) vector Laplacian, ``apply_pressure`` the
inverse of the pressure mass matrix.  Built-ins:

* ``jacobi``   -- diagonal scaling of both blocks;
* ``gmg``      -- geometric multigrid V-cycle on the velocity block,
                  exploiting the nested voxel refinement hierarchy (with a
                  Q_{l+1} -> Q_1 order-reduction step on top for l = 1);
* ``amg``      -- algebraic multigrid V-cycle via pyamg, if installed;
* ``auto``     -- gmg.

Each action is a fixed linear operator, so MINRES convergence theory
applies unchanged.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import elements
from .assemble import StokesSystem, _scatter, cell_dofmap, dirichlet_mask, node_grid
from .mesh import VoxelMesh, _refine

#: coarsest-level size up to which a sparse LU is used for the exact solve
_DIRECT_LIMIT = 60_000


class JacobiPreconditioner:
    name = "jacobi"

    def __init__(self, system: StokesSystem):
        ld = system.L.diagonal()
        wd = system.W.diagonal()
        self._vinv = 1.0 / ld
        self._pinv = 1.0 / wd
        self._nv = system.nv

    def apply_velocity(self, r):
        return (r.reshape(3, self._nv) * self._vinv).reshape(-1)

    def apply_pressure(self, r):
        return r * self._pinv


def _coarse_solver(mat: sp.csr_matrix):
    if mat.shape[0] <= _DIRECT_LIMIT:
        lu = spla.splu(mat.tocsc())
        return lu.solve
    try:
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(mat.tocsr())
        prec = ml.aspreconditioner(cycle="V")
        return lambda b: prec @ b
    except ImportError:
        dinv = 1.0 / mat.diagonal()

        def sweeps(b, mat=mat, dinv=dinv):
            x = 0.67 * dinv * b
            for _ in range(24):
                x = x + 0.67 * dinv * (b - mat @ x)
            return x

        return sweeps


def build_prolongation(c_id, f_id, c_dir, f_dir) -> sp.csr_matrix:
    """Interpolation from a vertex grid to the half-spacing node grid.

    Covers both nested-mesh Q1 -> Q1 refinement (fine grid of the 2x
    refined mesh) and the Q1 -> Q2 order raise on one mesh (Q2 nodes sit
    at half spacing).  Rows at no-slip fine nodes and columns at no-slip
    coarse nodes are zeroed so corrections respect the boundary data.
    """
    f_coords = np.argwhere(f_id >= 0)
    f_ids = f_id[f_id >= 0]
    low = f_coords // 2
    parity = f_coords % 2
    rows, cols, data = [], [], []
    for s in range(8):
        sbits = np.array([(s >> d) & 1 for d in range(3)])
        w = np.where(parity == 1, 0.5, np.where(sbits[None, :] == 0, 1.0, 0.0))
        wprod = w.prod(axis=1)
        keep = wprod > 0
        cc = low[keep] + sbits[None, :] * parity[keep]
        cids = c_id[cc[:, 0], cc[:, 1], cc[:, 2]]
        rows.append(f_ids[keep])
        cols.append(cids)
        data.append(wprod[keep])
    nf = int((f_id >= 0).sum())
    nc = int((c_id >= 0).sum())
    p = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nf, nc),
    ).tocsr()
    keep_f = sp.diags((~f_dir).astype(float))
    keep_c = sp.diags((~c_dir).astype(float))
    return (keep_f @ p @ keep_c).tocsr()


class GmgPreconditioner:
    """Symmetric V-cycle on the velocity Laplacian, diagonal on pressure."""

    name = "gmg"

    def __init__(self, system: StokesSystem, omega=0.67, sweeps=2):
        self.omega = omega
        self.sweeps = sweeps
        self._nv = system.nv
        self._pinv = 1.0 / system.W.diagonal()

        base = system.mesh.base_fluid
        rlev = system.mesh.refinement_level
        re = system.re
        k_top = system.ell + 1

        ops = []
        prolongs = []
        prev = None  # (node_id, dirichlet)
        for lev in range(rlev + 1):
            msh = VoxelMesh(
                fluid=_refine(base, lev),
                refinement_level=lev,
                base_fluid=base,
                h=1.0 / (base.shape[0] * 2**lev),
            )
            nid, nv = node_grid(msh, 1)
            dmask, dof = dirichlet_mask(msh, 1, nid, nv)
            if lev == rlev and k_top == 1:
                lmat = None  # replaced by the system operator below
            else:
                lloc = elements.scalar_stiffness(1, msh.h) / re
                lmat = _scatter(dof, dof, lloc, (nv, nv))
                keep = sp.diags((~dmask).astype(float))
                lmat = (keep @ lmat @ keep + sp.diags(dmask.astype(float))).tocsr()
            if prev is not None:
                prolongs.append(
                    build_prolongation(prev[0], nid, prev[1], dmask)
                )
            ops.append(lmat)
            prev = (nid, dmask)

        if k_top == 2:
            # order-raise step: Q1 vertices -> Q2 nodes on the finest mesh
            prolongs.append(
                build_prolongation(
                    prev[0], system.vel_node_id, prev[1], system.dirichlet
                )
            )
            ops.append(system.L)
        else:
            ops[-1] = system.L

        self.ops = ops
        self.prolongs = prolongs
        self.invdiag = [1.0 / op.diagonal() for op in ops]
        self.coarse_solve = _coarse_solver(ops[0])

    def _vcycle(self, lvl, b):
        if lvl == 0:
            return self.coarse_solve(b)
        a = self.ops[lvl]
        d = self.invdiag[lvl]
        om = self.omega
        x = om * d * b
        for _ in range(self.sweeps - 1):
            x = x + om * d * (b - a @ x)
        p = self.prolongs[lvl - 1]
        r = b - a @ x
        x = x + p @ self._vcycle(lvl - 1, p.T @ r)
        for _ in range(self.sweeps):
            x = x + om * d * (b - a @ x)
        return x

    def apply_velocity(self, r):
        rv = r.reshape(3, self._nv)
        out = np.empty_like(rv)
        top = len(self.ops) - 1
        for c in range(3):
            out[c] = self._vcycle(top, rv[c])
        return out.reshape(-1)

    def apply_pressure(self, r):
        return r * self._pinv


class AmgPreconditioner:
    """pyamg smoothed-aggregation V-cycle on the velocity block."""

    name = "amg"

    def __init__(self, system: StokesSystem):
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(system.L.tocsr())
        self._prec = ml.aspreconditioner(cycle="V")
        self._pinv = 1.0 / system.W.diagonal()
        self._nv = system.nv

    def apply_velocity(self, r):
        rv = r.reshape(3, self._nv)
        out = np.empty_like(rv)
        for c in range(3):
            out[c] = self._prec @ rv[c]
        return out.reshape(-1)

    def apply_pressure(self, r):
        return r * self._pinv


def make_preconditioner(name: str, system: StokesSystem):
    name = (name or "auto").lower()
    if name == "auto":
        name = "gmg"
    if name == "jacobi":
        return JacobiPreconditioner(system)
    if name == "gmg":
        return GmgPreconditioner(system)
    if name == "amg":
        return AmgPreconditioner(system)
    raise ValueError(f"unknown preconditioner {name!r}")
