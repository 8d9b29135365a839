"""Dataset metrics: standard deviation, coefficient of determination, MSE."""

from __future__ import annotations

import numpy as np


class StatisticsError(ValueError):
    pass


def std_dev(values) -> float:
    """Sample standard deviation with the N-1 denominator."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise StatisticsError("standard deviation needs at least two values")
    return float(np.sqrt(np.sum((v - v.mean()) ** 2) / (v.size - 1)))


def r_squared(targets, predictions) -> float:
    """1 - SS_res/SS_tot for targets t_i and predictions y_i."""
    t = np.asarray(targets, dtype=float)
    y = np.asarray(predictions, dtype=float)
    if t.shape != y.shape or t.size == 0:
        raise StatisticsError("targets and predictions must be equal-length")
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    ss_res = float(np.sum((t - y) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else -np.inf
    return 1.0 - ss_res / ss_tot


def mse(targets, predictions) -> float:
    t = np.asarray(targets, dtype=float)
    y = np.asarray(predictions, dtype=float)
    if t.shape != y.shape or t.size == 0:
        raise StatisticsError("targets and predictions must be equal-length")
    return float(np.mean((t - y) ** 2))


def r_squared_log10(targets, predictions) -> float:
    """R^2 after a base-10 log transform of both arguments."""
    return r_squared(np.log10(targets), np.log10(predictions))


def mse_log10(targets, predictions) -> float:
    return mse(np.log10(targets), np.log10(predictions))
