"""Second-order measure differential equations D(D+y) + lambda y dt + y dmu = 0.

Between atoms the density part is integrated with RK4.  Each atom is snapped
to its nearest grid node, where the right-derivative jumps by exactly
``-mass * y(tau)``; the stored ``Dy`` is the post-jump (right) value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError
from .function_space import RadonMeasure, UnitGrid, total_variation
from .sturm_liouville import EigenResult, Shooter, eigen_from_shooter, LAMBDA_MAX


@dataclass(frozen=True)
class MdeSolution:
    grid: UnitGrid
    y: np.ndarray
    Dy: np.ndarray
    zero_count: int
    atom_index: tuple
    atom_mass: tuple
    _shooter: Shooter
    lam: float

    @property
    def y_end(self) -> float:
        return float(self.y[-1])

    def left_derivative(self, k: int) -> float:
        """D+y just before node k, recomputed by one RK4 step from node k-1."""
        if k < 1:
            raise InvalidInputError("no left limit at t = 0")
        sh = self._shooter
        j = int(sh.on_grid[k])
        i = int(sh.on_grid[k - 1])
        y0 = self.y[k - 1]
        v0 = self.Dy[k - 1]
        zero = np.zeros(j - i + 1)
        y, v, _, _ = kernels.rk4_linear(sh.nodes[i:j + 1].copy(), sh.qa[i:j].copy(),
                                        sh.qm[i:j].copy(), sh.qb[i:j].copy(), self.lam,
                                        float(y0), float(v0), zero, False)
        return float(v[-1])

    def jumps(self):
        """[(tau, realised jump D+y(tau+) - D+y(tau-), -mass * y(tau))] per atom."""
        out = []
        for k, mass in zip(self.atom_index, self.atom_mass):
            realised = float(self.Dy[k]) - self.left_derivative(k)
            out.append((self.grid.nodes[k], realised, -mass * float(self.y[k])))
        return out


def _shooter(mu: RadonMeasure, grid: UnitGrid) -> Shooter:
    for pos, _ in mu.atoms:
        if grid.index(pos) == 0:
            raise InvalidInputError(f"atom at {pos} snaps to t = 0")
    return Shooter(mu.density, grid, mu.atoms)


def mde_integrate(mu: RadonMeasure, lam: float, y0: float, v0: float,
                  grid: UnitGrid | None = None) -> MdeSolution:
    """Solve the MDE initial value problem with (y, D+y)(0) = (y0, v0)."""
    for name, val in (("lambda", lam), ("y0", y0), ("v0", v0)):
        if not math.isfinite(val):
            raise InvalidInputError(f"{name} must be finite")
    grid = grid or UnitGrid()
    sh = _shooter(mu, grid)
    sol = sh.solve(lam, y0, v0)
    idx = tuple(grid.index(p) for p, _ in mu.atoms)
    return MdeSolution(grid, sol.y, sol.v, sol.zero_count, idx,
                       tuple(m for _, m in mu.atoms), sh, float(lam))


def mde_dirichlet_eigen(mu: RadonMeasure, m: int, grid: UnitGrid | None = None,
                        lam_max: float = LAMBDA_MAX) -> EigenResult:
    """m-th Dirichlet eigenvalue of the MDE eigenvalue problem."""
    grid = grid or UnitGrid()
    return eigen_from_shooter(_shooter(mu, grid), m, total_variation(mu, grid), lam_max)


def mde_eigen_sum(mu: RadonMeasure, grid: UnitGrid | None = None) -> float:
    grid = grid or UnitGrid()
    sh = _shooter(mu, grid)
    tv = total_variation(mu, grid)
    return eigen_from_shooter(sh, 1, tv).lam + eigen_from_shooter(sh, 2, tv).lam


def dirac_family(mass: float, positions, ms=(1, 2), grid: UnitGrid | None = None) -> np.ndarray:
    """Eigenvalues of ``mass * delta_a`` for each a; rows follow ``positions``."""
    grid = grid or UnitGrid()
    return np.array([[mde_dirichlet_eigen(RadonMeasure.dirac(a, mass), m, grid).lam
                      for m in ms] for a in positions])
