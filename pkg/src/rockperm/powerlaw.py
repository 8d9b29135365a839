"""Power-law permeability baseline k = c * f_max^gamma.

The fit is a least-squares line in base-10 logarithmic coordinates; c is
reported in darcies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: 1 darcy in m^2.
DARCY_M2 = 9.869233e-13
MILLIDARCY_M2 = DARCY_M2 * 1e-3


class FitError(ValueError):
    """Raised on degenerate regression input."""


@dataclass(frozen=True)
class PowerLawFit:
    c: float  # prefactor, darcies
    gamma: float  # dimensionless exponent
    r_squared_log: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("power-law prefactor must be positive")


def fit_power_law(pairs) -> PowerLawFit:
    """Fit log10(k) = gamma*log10(f_max) + log10(c) by least squares.

    ``pairs`` holds (f_max, k) tuples with f_max > 0 and k > 0 (darcies).
    Requires at least two pairs with at least two distinct f_max values.
    """
    arr = np.asarray(list(pairs), dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise FitError("need at least two (f_max, k) pairs")
    f, k = arr[:, 0], arr[:, 1]
    if np.any(f <= 0) or np.any(k <= 0):
        raise FitError("f_max and k must be positive for a log-log fit")
    logf = np.log10(f)
    logk = np.log10(k)
    if np.all(logf == logf[0]):
        raise FitError("all f_max values coincide; slope is undetermined")
    gamma, intercept = np.polyfit(logf, logk, 1)
    pred = gamma * logf + intercept
    ss_res = float(np.sum((logk - pred) ** 2))
    ss_tot = float(np.sum((logk - logk.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(c=float(10.0**intercept), gamma=float(gamma), r_squared_log=r2)


def predict_baseline(f_max, fit: PowerLawFit) -> float:
    """Baseline permeability in darcies; 0 for an impermeable sample."""
    if f_max < 0:
        raise ValueError("f_max must be non-negative")
    if f_max == 0:
        return 0.0
    return fit.c * f_max**fit.gamma
