"""Reference 1D matrices for tensor-product Lagrange elements.

All integrals are over [0,1] with equispaced Lagrange nodes; physical
scaling by the cell edge h is applied at assembly time.  Local 3D node
ordering is x fastest, z slowest, so 3D matrices are Kronecker products
kron(Z, Y, X).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def nodes1d(k: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, k + 1)


def _gauss(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def _coeffs(k: int) -> np.ndarray:
    """Monomial coefficients (np.polyval convention) of the Lagrange basis."""
    xs = nodes1d(k)
    out = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        roots = np.delete(xs, i)
        poly = np.poly(roots) if roots.size else np.array([1.0])
        out[i, :] = poly / np.prod(xs[i] - roots) if roots.size else poly
    return out


def eval_basis(k: int, x) -> np.ndarray:
    """(k+1, len(x)) values of the degree-k Lagrange basis."""
    return np.array([np.polyval(c, x) for c in _coeffs(k)])


def eval_dbasis(k: int, x) -> np.ndarray:
    return np.array([np.polyval(np.polyder(c), x) for c in _coeffs(k)])


@lru_cache(maxsize=None)
def _quad_tables(kp: int, kv: int):
    npts = max(kp, kv) + 2
    x, w = _gauss(npts)
    return x, w


def mass1d(k: int) -> np.ndarray:
    x, w = _quad_tables(k, k)
    v = eval_basis(k, x)
    return (v * w) @ v.T


def stiff1d(k: int) -> np.ndarray:
    x, w = _quad_tables(k, k)
    d = eval_dbasis(k, x)
    return (d * w) @ d.T


def mixed_mass1d(kp: int, kv: int) -> np.ndarray:
    """(kp+1, kv+1) matrix of ∫ psi_a phi_i."""
    x, w = _quad_tables(kp, kv)
    return (eval_basis(kp, x) * w) @ eval_basis(kv, x).T


def mixed_grad1d(kp: int, kv: int) -> np.ndarray:
    """(kp+1, kv+1) matrix of ∫ psi_a phi_i'."""
    x, w = _quad_tables(kp, kv)
    return (eval_basis(kp, x) * w) @ eval_dbasis(kv, x).T


def weights1d(k: int) -> np.ndarray:
    """∫ phi_i over [0,1] for each basis function."""
    x, w = _quad_tables(k, k)
    return eval_basis(k, x) @ w


def kron3(az: np.ndarray, ay: np.ndarray, ax: np.ndarray) -> np.ndarray:
    return np.kron(az, np.kron(ay, ax))


def scalar_stiffness(k: int, h: float) -> np.ndarray:
    """Local stiffness of the scalar Laplacian on a cube of edge h."""
    m, s = mass1d(k), stiff1d(k)
    return h * (kron3(m, m, s) + kron3(m, s, m) + kron3(s, m, m))


def scalar_mass(k: int, h: float) -> np.ndarray:
    m = mass1d(k)
    return h**3 * kron3(m, m, m)


def divergence_blocks(kp: int, kv: int, h: float):
    """Local ∫ psi_a d(phi_i)/dx_c matrices for c = x, y, z.

    Shapes ((kp+1)^3, (kv+1)^3); the minus sign of the divergence block
    is applied by the caller.
    """
    mm = mixed_mass1d(kp, kv)
    gg = mixed_grad1d(kp, kv)
    bx = h**2 * kron3(mm, mm, gg)
    by = h**2 * kron3(mm, gg, mm)
    bz = h**2 * kron3(gg, mm, mm)
    return bx, by, bz


def face_weights(k: int, h: float) -> np.ndarray:
    """Integral of each 2D tensor basis function over a cell face (area h^2)."""
    w = weights1d(k)
    return h**2 * np.kron(w, w)
