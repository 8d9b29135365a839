"""Preconditioned MINRES for the symmetric indefinite saddle system.

Convergence is declared when the residual norm induced by the inverse of
the block-diagonal preconditioner drops below rel_tol times its initial
value; that norm is available as a recurrence byproduct of the Lanczos
process, so no extra matrix-vector products are spent on monitoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SolverError(RuntimeError):
    pass


@dataclass
class FlowSolution:
    x_u: np.ndarray
    x_p: np.ndarray
    iterations: int
    achieved_residual: float  # relative, in the preconditioner-induced norm
    converged: bool
    residual_history: np.ndarray = field(repr=False)


def minres(matvec, b, apply_prec, rel_tol, max_iter):
    """Minimal-residual iteration for symmetric A with SPD preconditioner.

    Returns (x, iterations, relative residual, history).  The classic
    coupled two-term recurrence of Paige and Saunders is used; apply_prec
    must implement the action of an SPD approximation of the inverse of
    the preconditioner matrix.
    """
    x = np.zeros_like(b)
    r1 = b.copy()
    y = apply_prec(r1)
    beta1 = np.sqrt(r1 @ y)
    if beta1 < 0:
        raise SolverError("preconditioner is not positive definite")
    if beta1 == 0.0:
        return x, 0, 0.0, np.array([0.0])
    history = [1.0]

    oldb = 0.0
    beta = beta1
    dbar = 0.0
    epsln = 0.0
    phibar = beta1
    cs = -1.0
    sn = 0.0
    w = np.zeros_like(b)
    w2 = np.zeros_like(b)
    r2 = r1

    for itn in range(1, max_iter + 1):
        v = y / beta
        y = matvec(v)
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = v @ y
        y = y - (alfa / beta) * r2
        r1 = r2
        r2 = y
        y = apply_prec(r2)
        oldb = beta
        betasq = r2 @ y
        if betasq < 0:
            raise SolverError("preconditioner lost positive definiteness")
        beta = np.sqrt(betasq)

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = np.sqrt(gbar * gbar + beta * beta)
        gamma = max(gamma, np.finfo(float).eps)
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1 = w2
        w2 = w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w

        rel = abs(phibar) / beta1
        history.append(rel)
        if rel <= rel_tol:
            return x, itn, rel, np.asarray(history)

    return x, max_iter, abs(phibar) / beta1, np.asarray(history)


def minres_solve(system, preconditioner, rel_tol=1e-6, max_iter=50_000):
    """Solve the assembled saddle system; returns a FlowSolution.

    On hitting the iteration cap the solution is returned with
    ``converged = False`` and the full residual history attached.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    n = system.n

    def apply_prec(r):
        return np.concatenate(
            [
                preconditioner.apply_velocity(r[:n]),
                preconditioner.apply_pressure(r[n:]),
            ]
        )

    x, itn, rel, history = minres(
        system.saddle_matvec, system.rhs, apply_prec, rel_tol, max_iter
    )
    return FlowSolution(
        x_u=x[:n],
        x_p=x[n:],
        iterations=int(itn),
        achieved_residual=float(rel),
        converged=bool(rel <= rel_tol),
        residual_history=history,
    )
