"""Permeability from the discrete flow field, plus the channel reference.

Darcy's law in nondimensional form: Q = -Da * Re * (P_out - P_in) with
Da = k / L_c^2; Q is the outflow-face flux of the discrete velocity and
P_in/P_out are area-averaged face pressures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import elements
from .assemble import StokesSystem, _local_face_indices
from .minres import FlowSolution


class DegeneratePressureError(RuntimeError):
    pass


@dataclass(frozen=True)
class PermeabilityResult:
    darcy_number: float  # k on the unit-cube convention, dimensionless
    k_m2: float
    q_out: float
    q_in: float  # inflow-face flux of u.n (n = -e_x)
    p_in: float
    p_out: float

    @property
    def mass_defect(self) -> float:
        """|Q_in + Q_out|: global mass balance violation."""
        return abs(self.q_in + self.q_out)


def _face_flux(system: StokesSystem, xu_x, cells_idx, side) -> float:
    """Integral of u_x over the x-faces of the given cells."""
    k = system.ell + 1
    loc = _local_face_indices(k, 0, side)
    w = elements.face_weights(k, system.h)
    vals = xu_x[system.vel_dofmap[np.ix_(cells_idx, loc)]]
    return float((vals * w).sum())


def _face_pressure_avg(system: StokesSystem, x_p, cells_idx, side) -> float:
    h = system.h
    area = cells_idx.size * h * h
    if system.ell == 0:
        total = float(x_p[cells_idx].sum() * h * h)
    else:
        loc = _local_face_indices(1, 0, side)
        w = elements.face_weights(1, h)
        vals = x_p[system.p_dofmap[np.ix_(cells_idx, loc)]]
        total = float((vals * w).sum())
    return total / area


def compute_permeability(
    solution: FlowSolution,
    system: StokesSystem,
    characteristic_length: float,
    re: float | None = None,
) -> PermeabilityResult:
    """Darcy permeability of a converged solution.

    ``characteristic_length`` is L_c in meters (sample edge length); the
    returned k_m2 is Da * L_c^2.
    """
    re = system.re if re is None else re
    mesh = system.mesh
    nv = system.nv
    xu_x = solution.x_u[:nv]
    cin = mesh.gamma_in_cells()
    cout = mesh.gamma_out_cells()
    q_out = _face_flux(system, xu_x, cout, 1)
    q_in = -_face_flux(system, xu_x, cin, -1)
    p_in = _face_pressure_avg(system, solution.x_p, cin, -1)
    p_out = _face_pressure_avg(system, solution.x_p, cout, 1)
    dp = p_out - p_in
    scale = max(abs(p_in), abs(p_out), 1.0)
    if abs(dp) < 1e-12 * scale:
        raise DegeneratePressureError(
            f"face pressure difference {dp:.3e} is at machine-noise level"
        )
    da = -q_out / (re * dp)
    return PermeabilityResult(
        darcy_number=da,
        k_m2=da * characteristic_length**2,
        q_out=q_out,
        q_in=q_in,
        p_in=p_in,
        p_out=p_out,
    )


def series_truncation_bound(j_terms: int) -> float:
    """Guaranteed bound on the channel-series truncation |K_inf - K_j|."""
    return 192.0 / (128.0 * math.pi**5 * j_terms**4)


def analytic_channel_permeability(a: float, b: float, j_terms: int = 10) -> float:
    """Closed-form permeability of the rectangular channel (0,1) x a x b.

    Unit-cube (dimensionless) convention; a, b in (0, 1/2).  The series
    factor K_j satisfies |K_inf - K_j| <= 0.0049 * j^-4.
    """
    if not (0 < a < 0.5 and 0 < b < 0.5):
        raise ValueError("channel cross-section sides must lie in (0, 1/2)")
    if j_terms < 1:
        raise ValueError("j_terms must be >= 1")
    lo, hi = min(a, b), max(a, b)
    ratio = lo / hi
    kj = 1.0
    for n in range(1, j_terms + 1):
        odd = 2 * n - 1
        kj -= (
            (192.0 / math.pi**5)
            * ratio
            * math.tanh(odd * 0.5 * math.pi / ratio)
            / odd**5
        )
    return kj * lo**3 * hi / 12.0
