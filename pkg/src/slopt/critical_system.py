"""Critical system of the L^p-constrained maximisation of lambda_1 + lambda_2.

For p > 1 the maximising potential is q = -(y^2 + z^2)^(p*-1) where (y, z)
are the first two eigenfunctions.  We shoot from (y, y', z, z')(0) =
(0, a, 0, b) and run Newton on (a, b, xi, eta) so that both functions vanish
at 1, have equal L2 norms and ||y^2 + z^2||_{p*} = r^(p-1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConvergenceError, DivergenceError, InvalidInputError, WrongBranchError
from .function_space import SampledFunction, UnitGrid
from .solvers import NEWTON_TOL, newton

log = logging.getLogger(__name__)

P_FLOOR = 1.0 + 1.0 / 15.0


@dataclass(frozen=True)
class CriticalSolution:
    p: float
    r: float
    a: float
    b: float
    xi: float
    eta: float
    grid: UnitGrid
    state: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)

    @property
    def pstar(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.a, self.b, self.xi, self.eta])

    @property
    def y(self) -> SampledFunction:
        return SampledFunction(self.grid, self.state[:, 0])

    @property
    def z(self) -> SampledFunction:
        return SampledFunction(self.grid, self.state[:, 2])

    @property
    def u(self) -> np.ndarray:
        return self.state[:, 0] ** 2 + self.state[:, 2] ** 2

    @property
    def q(self) -> SampledFunction:
        return SampledFunction(self.grid, -self.u ** (self.pstar - 1.0))

    @property
    def objective(self) -> float:
        return self.xi + self.eta

    @property
    def node(self) -> float:
        """Interior zero of z."""
        z = self.state[:, 2]
        t = self.grid.nodes
        k = int(np.nonzero(z[1:-2] * z[2:-1] < 0)[0][0]) + 1
        return float(t[k] - z[k] * (t[k + 1] - t[k]) / (z[k + 1] - z[k]))

    def to_json(self) -> dict:
        return {"p": self.p, "pstar": self.pstar, "r": self.r, "a": self.a, "b": self.b,
                "xi": self.xi, "eta": self.eta, "objective": self.objective,
                "residual": self.residual.tolist(), "grid_n": self.grid.n}


def _integrate(x, expo: float, grid: UnitGrid) -> np.ndarray:
    a, b, xi, eta = map(float, x)
    state, status = kernels.rk4_critical(grid.nodes, xi, eta, expo, a, b)
    if status:
        raise DivergenceError("critical system blew up")
    return state


def _residual(x, p: float, r: float, grid: UnitGrid):
    pstar = p / (p - 1.0)
    state = _integrate(x, pstar - 1.0, grid)
    y, z = state[:, 0], state[:, 2]
    t = grid.nodes
    u = y * y + z * z
    res = np.array([
        y[-1],
        z[-1],
        np.trapezoid(y * y, t) - np.trapezoid(z * z, t),
        np.trapezoid(u ** pstar, t) ** (1.0 / pstar) - r ** (p - 1.0),
    ])
    return res, state


def _sign_changes(w: np.ndarray) -> int:
    w = w[1:-1]
    w = w[w != 0]
    return int(np.count_nonzero(w[:-1] * w[1:] < 0))


def linearised_guess(p: float, r: float, grid: UnitGrid | None = None) -> np.ndarray:
    """(a, b, xi, eta) from the small-r limit: sine profiles with b = 2a."""
    grid = grid or UnitGrid()
    t = grid.nodes
    pstar = p / (p - 1.0)
    shape = (np.sin(math.pi * t) ** 2 + np.sin(2 * math.pi * t) ** 2) / math.pi ** 2
    k = np.trapezoid(shape ** pstar, t) ** (1.0 / pstar)
    a = math.sqrt(r ** (p - 1.0) / k)
    return np.array([a, 2.0 * a, math.pi ** 2, 4 * math.pi ** 2])


def _check_range(p: float, r: float):
    if not (P_FLOOR - 1e-12 <= p <= 4.0):
        raise InvalidInputError(f"p must lie in [{P_FLOOR:.6f}, 4], got {p}")
    if not (0.0 < r <= 100.0):
        raise InvalidInputError(f"r must lie in (0, 100], got {r}")


def _bounded_start(x, p: float, r: float, grid: UnitGrid) -> np.ndarray:
    """Shrink the slopes until the shooting trajectory stays bounded.

    Where y^2 + z^2 > 1 the nonlinearity is repulsive and grows like a power
    p* - 1, so a guess with slightly too large slopes blows up before t = 1.
    """
    x = np.asarray(x, dtype=float)
    for shrink in (1.0, 0.995, 0.99, 0.98, 0.95, 0.9, 0.8, 0.6):
        trial = x.copy()
        trial[:2] *= shrink
        try:
            _residual(trial, p, r, grid)
            return trial
        except DivergenceError:
            continue
    raise DivergenceError("no bounded shooting trajectory near the guess",
                          {"x": x.tolist()})


def _solve_from(p: float, r: float, guess, grid: UnitGrid, tol: float) -> CriticalSolution:
    admissible = lambda x: x[0] > 0 and x[1] > 0
    guess = _bounded_start(guess, p, r, grid)
    x, res, state, _ = newton(lambda x: _residual(x, p, r, grid), guess, tol=tol,
                              admissible=admissible)
    sol = CriticalSolution(p, r, *map(float, x), grid, state, res)
    ny, nz = _sign_changes(state[:, 0]), _sign_changes(state[:, 2])
    if ny != 0 or nz != 1 or not sol.xi < sol.eta:
        raise WrongBranchError(f"converged to a branch with {ny} nodes in y and {nz} in z",
                               {"x": x.tolist()})
    return sol


def solve_critical(p: float, r: float, guess=None, grid: UnitGrid | None = None,
                   tol: float = NEWTON_TOL) -> CriticalSolution:
    """Solve the critical system at exponent ``p`` and radius ``r``.

    Without a guess, start from the small-r linearisation and continue in r.
    """
    p, r = float(p), float(r)
    _check_range(p, r)
    grid = grid or UnitGrid()
    if guess is not None:
        return _solve_from(p, r, np.asarray(guess, dtype=float), grid, tol)
    r0 = min(r, 0.5)
    while True:
        try:
            sol = _solve_from(p, r0, linearised_guess(p, r0, grid), grid, tol)
            break
        except ConvergenceError:
            r0 *= 0.5
            if r0 < 1e-4:
                raise
    return continue_in_r(sol, r, grid=grid, tol=tol)


def continue_in_r(sol: CriticalSolution, r: float, step: float = 0.5,
                  grid: UnitGrid | None = None, tol: float = NEWTON_TOL) -> CriticalSolution:
    """Warm-started continuation in the radius with adaptive steps."""
    grid = grid or sol.grid
    min_step = 1e-3 * step
    while sol.r != r:
        target = sol.r + math.copysign(min(step, abs(r - sol.r)), r - sol.r)
        # scale the slopes with the expected r^((p-1)/2) growth of y, z
        x0 = sol.params.copy()
        x0[:2] *= (target / sol.r) ** ((sol.p - 1.0) / 2.0)
        try:
            sol = _solve_from(sol.p, target, x0, grid, tol)
            step = min(1.5 * step, 2.0)
        except ConvergenceError:
            step *= 0.5
            log.debug("r-continuation step cut to %g at r=%g", step, sol.r)
            if step < min_step:
                raise
    return sol


def hamiltonian_residual(sol: CriticalSolution) -> float:
    """max |y'^2 + z'^2 + xi y^2 + eta z^2 - u^p*/p* - (a^2 + b^2)| along the path."""
    y, yp, z, zp = sol.state.T
    u = y * y + z * z
    ham = yp ** 2 + zp ** 2 + sol.xi * y ** 2 + sol.eta * z ** 2 - u ** sol.pstar / sol.pstar
    return float(np.max(np.abs(ham - (sol.a ** 2 + sol.b ** 2))))


def u_equation_forms(sol: CriticalSolution):
    """Interior residuals of u'' + 2(1+1/p*) q u = h and of u'' - 2(1+1/p*) u^p* = h."""
    y, z = sol.state[:, 0], sol.state[:, 2]
    u = y * y + z * z
    h = 2 * sol.a ** 2 + 2 * sol.b ** 2 - 4 * sol.xi * y ** 2 - 4 * sol.eta * z ** 2
    q = -u ** (sol.pstar - 1.0)
    # fourth-order centred stencil on nodes 2..n-2
    d2 = (-u[4:] + 16 * u[3:-1] - 30 * u[2:-2] + 16 * u[1:-3] - u[:-4]) / (12 * sol.grid.h ** 2)
    c = 2.0 * (1.0 + 1.0 / sol.pstar)
    um, qm, hm = u[2:-2], q[2:-2], h[2:-2]
    linear = d2 + c * qm * um - hm
    ambrosetti = d2 - c * np.abs(um) ** sol.pstar - hm
    return linear, ambrosetti


def u_equation_residual(sol: CriticalSolution) -> float:
    return float(np.max(np.abs(u_equation_forms(sol)[0])))


@dataclass
class Continuation:
    solutions: list
    diagnostics: list
    error: Exception | None = None

    @property
    def last(self) -> CriticalSolution:
        return self.solutions[-1]


def diagnostics(sol: CriticalSolution) -> dict:
    t = sol.grid.nodes
    u = sol.u
    q = sol.q.values
    return {"p": sol.p, "M": sol.objective, "a": sol.a, "b": sol.b, "xi": sol.xi,
            "eta": sol.eta, "u_max": float(u.max()),
            "q_l1": float(np.trapezoid(np.abs(q), t)),
            "pairing": float(np.trapezoid(u * q, t))}


def continuation_to_one(r: float, p_schedule, grid: UnitGrid | None = None,
                        guess=None, tol: float = NEWTON_TOL,
                        max_substeps: int = 6) -> Continuation:
    """Solve along a decreasing p schedule, warm-starting each step.

    A failed step is retried through up to ``max_substeps`` bisections of the
    p gap; if that also fails the chain stops and ``error`` is set.
    """
    ps = [float(p) for p in p_schedule]
    if any(b >= a for a, b in zip(ps, ps[1:])):
        raise InvalidInputError("p_schedule must be strictly decreasing")
    for p in ps:
        _check_range(p, r)
    grid = grid or UnitGrid()
    out = Continuation([], [])
    try:
        sol = solve_critical(ps[0], r, guess, grid, tol)
    except ConvergenceError as exc:
        out.error = exc
        return out
    out.solutions.append(sol)
    out.diagnostics.append(diagnostics(sol))
    for p in ps[1:]:
        try:
            sol = _step_p(sol, p, grid, tol, max_substeps)
        except ConvergenceError as exc:
            exc.last_good = sol
            out.error = exc
            break
        out.solutions.append(sol)
        out.diagnostics.append(diagnostics(sol))
    return out


def _step_p(sol: CriticalSolution, p: float, grid: UnitGrid, tol: float, depth: int):
    x0 = sol.params.copy()
    # keep ||y^2 + z^2||_{p*} on its new target r^(p-1)
    x0[:2] *= math.sqrt(sol.r ** (p - sol.p))
    try:
        return _solve_from(p, sol.r, x0, grid, tol)
    except ConvergenceError:
        if depth <= 0:
            raise
    mid = 0.5 * (sol.p + p)
    half = _step_p(sol, mid, grid, tol, depth - 1)
    return _step_p(half, p, grid, tol, depth - 1)
