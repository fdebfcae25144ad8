"""Shooting solver for y'' + (lambda + q(t)) y = 0 with Dirichlet conditions.

Eigenvalues are bracketed by the number of sign changes of the shooting
solution (Sturm oscillation), then polished with Brent's method on y(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import DivergenceError, InvalidInputError, SearchRangeError
from .function_space import (PiecewisePotential, RadonMeasure, SampledFunction, UnitGrid,
                             as_potential, lp_norm, pair_against)

LAMBDA_MAX = 1e6


@dataclass(frozen=True)
class IvpSolution:
    grid: UnitGrid
    y: np.ndarray
    v: np.ndarray
    zero_count: int

    @property
    def y_end(self) -> float:
        return float(self.y[-1])

    @property
    def v_end(self) -> float:
        return float(self.v[-1])


@dataclass(frozen=True)
class EigenResult:
    m: int
    lam: float
    phi: SampledFunction
    nodes: np.ndarray

    def to_json(self) -> dict:
        return {"m": self.m, "lambda": self.lam, "nodes": self.nodes.tolist()}


class Shooter:
    """Precomputed step data for repeated shooting at different lambda.

    ``atoms`` are (position, mass) pairs snapped to the nearest grid node; the
    velocity jumps by ``-mass * y`` on arrival at that node.
    """

    def __init__(self, q: PiecewisePotential | None, grid: UnitGrid, atoms=()):
        self.grid = grid
        if q is None:
            nodes = grid.nodes.copy()
            qa = qm = qb = np.zeros(grid.n)
        else:
            nodes = q.integration_nodes(grid)
            qa, qm, qb = q.stage_samples(nodes)
        self.nodes = np.ascontiguousarray(nodes)
        self.qa = np.ascontiguousarray(qa)
        self.qm = np.ascontiguousarray(qm)
        self.qb = np.ascontiguousarray(qb)
        self.on_grid = np.searchsorted(self.nodes, grid.nodes - 1e-13)
        self.jump = np.zeros(self.nodes.size)
        for pos, mass in atoms:
            k = grid.index(pos)
            if k == 0:
                raise InvalidInputError("atoms at t = 0 are not allowed")
            self.jump[self.on_grid[k]] += mass

    def run(self, lam: float, y0: float = 0.0, v0: float = 1.0, renorm: bool = False):
        return kernels.rk4_linear(self.nodes, self.qa, self.qm, self.qb, float(lam),
                                  float(y0), float(v0), self.jump, renorm)

    def solve(self, lam: float, y0: float = 0.0, v0: float = 1.0) -> IvpSolution:
        y, v, zeros, status = self.run(lam, y0, v0)
        if status:
            raise DivergenceError(f"solution blew up at lambda={lam:g}")
        return IvpSolution(self.grid, y[self.on_grid], v[self.on_grid], int(zeros))

    def count(self, lam: float):
        """(sign changes on (0, 1], y(1) up to a positive factor)."""
        y, _, zeros, _ = self.run(lam, renorm=True)
        return int(zeros), float(y[-1])


def integrate_ivp(q, lam: float, y0: float, v0: float,
                  grid: UnitGrid | None = None) -> IvpSolution:
    """RK4 solution of y' = v, v' = -(lam + q) y with y(0) = y0, y'(0) = v0."""
    for name, val in (("lambda", lam), ("y0", y0), ("v0", v0)):
        if not math.isfinite(val):
            raise InvalidInputError(f"{name} must be finite")
    grid = grid or UnitGrid()
    return Shooter(as_potential(q), grid).solve(lam, y0, v0)


def _interior_zeros(grid: UnitGrid, y: np.ndarray) -> np.ndarray:
    t = grid.nodes[1:-1]
    w = y[1:-1]
    idx = np.nonzero(w[:-1] * w[1:] < 0)[0]
    return t[idx] - w[idx] * (t[idx + 1] - t[idx]) / (w[idx + 1] - w[idx])


def eigen_from_shooter(shooter: Shooter, m: int, scale: float,
                       lam_max: float = LAMBDA_MAX) -> EigenResult:
    """Locate lambda_m for a prepared shooter; ``scale`` sizes the first bracket."""
    if int(m) != m or m < 1:
        raise InvalidInputError(f"eigenvalue index must be >= 1, got {m}")
    m = int(m)
    centre = (m * math.pi) ** 2
    width = 10.0 * scale + 10.0
    lo, hi = max(centre - width, -lam_max), min(centre + width, lam_max)
    n_lo, _ = shooter.count(lo)
    while n_lo >= m:
        if lo <= -lam_max:
            raise SearchRangeError(f"no lower bracket for lambda_{m} above {-lam_max:g}")
        width *= 2.0
        lo = max(centre - width, -lam_max)
        n_lo, _ = shooter.count(lo)
    width = 10.0 * scale + 10.0
    n_hi, _ = shooter.count(hi)
    while n_hi < m:
        if hi >= lam_max:
            raise SearchRangeError(f"no upper bracket for lambda_{m} below {lam_max:g}")
        width *= 2.0
        hi = min(centre + width, lam_max)
        n_hi, _ = shooter.count(hi)
    # shrink until exactly one eigenvalue is enclosed
    while n_lo != m - 1 or n_hi != m:
        mid = 0.5 * (lo + hi)
        n_mid, _ = shooter.count(mid)
        if n_mid >= m:
            hi, n_hi = mid, n_mid
        else:
            lo, n_lo = mid, n_mid
        if hi - lo < 1e-12 * max(1.0, abs(hi)):
            break
    f = lambda lam: shooter.count(lam)[1]
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        lam = lo
    elif f_hi == 0.0:
        lam = hi
    else:
        lam = brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
    sol = shooter.solve(lam)
    norm = math.sqrt(float(np.trapezoid(sol.y ** 2, shooter.grid.nodes)))
    phi = SampledFunction(shooter.grid, sol.y / norm)
    return EigenResult(m, float(lam), phi, _interior_zeros(shooter.grid, sol.y))


def dirichlet_eigen(q, m: int, grid: UnitGrid | None = None,
                    lam_max: float = LAMBDA_MAX) -> EigenResult:
    """m-th Dirichlet eigenvalue and L2-normalised eigenfunction (phi'(0) > 0)."""
    grid = grid or UnitGrid()
    q = as_potential(q)
    return eigen_from_shooter(Shooter(q, grid), m, lp_norm(q, 1, grid), lam_max)


def eigen_sum(q, grid: UnitGrid | None = None) -> float:
    """lambda_1(q) + lambda_2(q)."""
    grid = grid or UnitGrid()
    q = as_potential(q)
    shooter = Shooter(q, grid)
    scale = lp_norm(q, 1, grid)
    return eigen_from_shooter(shooter, 1, scale).lam + eigen_from_shooter(shooter, 2, scale).lam


def _derivative(f: SampledFunction) -> np.ndarray:
    return np.gradient(f.values, f.grid.h, edge_order=2)


def rayleigh_sum(u: SampledFunction, v: SampledFunction, q,
                 orth_tol: float = 1e-8) -> float:
    """Sum of the two Rayleigh quotients of an orthogonal H^1_0 pair.

    ``orth_tol`` bounds |<u, v>| / (||u|| ||v||).
    """
    if u.grid != v.grid:
        raise InvalidInputError("u and v must share a grid")
    q = as_potential(q)
    t = u.grid.nodes
    uu = float(np.trapezoid(u.values ** 2, t))
    vv = float(np.trapezoid(v.values ** 2, t))
    if uu == 0.0 or vv == 0.0:
        raise InvalidInputError("u and v must be nonzero")
    for f, nrm in ((u, uu), (v, vv)):
        if max(abs(f.values[0]), abs(f.values[-1])) > 1e-8 * max(1.0, np.abs(f.values).max()):
            raise InvalidInputError("u and v must vanish at 0 and 1")
    if abs(float(np.trapezoid(u.values * v.values, t))) > orth_tol * math.sqrt(uu * vv):
        raise InvalidInputError("u and v must be orthogonal")
    dens = RadonMeasure(q)
    total = 0.0
    for f, nrm in ((u, uu), (v, vv)):
        grad = float(np.trapezoid(_derivative(f) ** 2, t))
        pot = pair_against(dens, SampledFunction(f.grid, f.values ** 2))
        total += (grad - pot) / nrm
    return total


__all__ = ["IvpSolution", "EigenResult", "Shooter", "integrate_ivp", "dirichlet_eigen",
           "eigen_sum", "rayleigh_sum", "eigen_from_shooter"]
