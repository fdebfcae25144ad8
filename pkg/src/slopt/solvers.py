"""Damped Newton iteration shared by the shooting solvers."""

import math

import numpy as np

from .errors import ConvergenceError, InvalidInputError

NEWTON_TOL = 1e-9
MAX_NEWTON = 60
MAX_HALVINGS = 20
FD_STEP = 1e-6


def _fd_column(fun, x, j, dx, err, shrinks=6):
    """Central difference in coordinate j; the step shrinks tenfold when a
    probe leaves the domain where the shooting stays bounded."""
    for _ in range(shrinks):
        xp = x.copy()
        xm = x.copy()
        xp[j] += dx
        xm[j] -= dx
        try:
            return (fun(xp)[0] - fun(xm)[0]) / (2.0 * dx)
        except (ConvergenceError, InvalidInputError):
            dx *= 0.1
    raise ConvergenceError("Jacobian probes leave the bounded region",
                           {"x": x.tolist(), "residual": err})


def newton(fun, x0, tol: float = NEWTON_TOL, max_iter: int = MAX_NEWTON,
           fd_step: float = FD_STEP, halvings: int = MAX_HALVINGS, admissible=None):
    """Damped Newton with a central-difference Jacobian.

    ``fun(x)`` returns ``(residual, payload)`` and may raise a SloptError for
    inadmissible x, which the line search treats as a failed trial.  Steps are
    accepted when the residual 2-norm decreases.  Returns
    ``(x, residual, payload, iterations)``.
    """
    x = np.asarray(x0, dtype=float).copy()
    res, payload = fun(x)
    err = float(np.max(np.abs(res)))
    merit = float(np.linalg.norm(res))
    for it in range(max_iter):
        if err < tol:
            return x, res, payload, it
        jac = np.empty((res.size, x.size))
        for j in range(x.size):
            jac[:, j] = _fd_column(fun, x, j, fd_step * max(abs(x[j]), 1.0), err)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -res, rcond=None)[0]
        lam = 1.0
        for _ in range(halvings + 1):
            trial = x + lam * step
            if admissible is None or admissible(trial):
                try:
                    r_new, p_new = fun(trial)
                    m_new = float(np.linalg.norm(r_new))
                except (ConvergenceError, InvalidInputError, FloatingPointError):
                    m_new = math.inf
                if m_new < merit:
                    x, res, payload, merit = trial, r_new, p_new, m_new
                    err = float(np.max(np.abs(res)))
                    break
            lam *= 0.5
        else:
            if err < tol:
                break
            raise ConvergenceError(f"line search stalled at residual {err:.3e}",
                                   {"x": x.tolist(), "residual": err, "iterations": it})
    if err < tol:
        return x, res, payload, max_iter
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations "
                           f"(residual {err:.3e})", {"x": x.tolist(), "residual": err})
