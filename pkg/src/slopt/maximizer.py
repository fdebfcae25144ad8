"""The L^1 maximiser of lambda_1 + lambda_2 built from pendulum arcs.

Where y^2 + z^2 < 1 the maximiser vanishes and (y, z) are free sines with
frequencies sqrt(xi), sqrt(eta).  On an active interval y^2 + z^2 = 1, so we
write (y, z) = (cos(theta/2), sin(theta/2)); theta solves the pendulum
theta'' + ell sin(theta) = 0 with ell = eta - xi and the potential there is
c + ell cos(theta) with c = a^2 + b^2 - eta - xi.

Two symmetric ansaetze are shot on [0, 1/2] and reflected (y even, z odd):

* ``two``: free on [0, alpha], pendulum on [alpha, beta], free on [beta, 1/2];
* ``one``: free on [0, alpha], pendulum on [alpha, 1 - alpha].
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (ConvergenceError, InadmissibleSolutionError, InvalidInputError,
                     PendulumRangeError, BracketError)
from .function_space import (PiecewisePotential, RadonMeasure, SampledFunction, Segment,
                             UnitGrid, lp_norm, merge_nodes, pair_against)
from .solvers import newton

log = logging.getLogger(__name__)


class Structure(str, enum.Enum):
    ONE = "one"
    TWO = "two"
    AUTO = "auto"

    @classmethod
    def parse(cls, value) -> "Structure":
        if isinstance(value, cls):
            return value
        aliases = {"onebump": "one", "one_bump": "one", "twobump": "two",
                   "two_bump": "two", "twobumpsymmetric": "two"}
        key = str(value).lower().replace("-", "")
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidInputError(f"unknown structure {value!r}") from None

    @property
    def n_params(self) -> int:
        return {"one": 5, "two": 6}[self.value]


# pendulum ------------------------------------------------------------------

def pendulum_nodes(start: float, stop: float, grid: UnitGrid) -> np.ndarray:
    inner = grid.nodes[(grid.nodes > start) & (grid.nodes < stop)]
    return merge_nodes(np.concatenate(([start], inner, [stop])))


def pendulum_flow(ell: float, theta0: float, omega0: float, start: float, stop: float,
                  grid: UnitGrid | None = None, check_range: bool = True):
    """RK4 trajectory of theta'' + ell sin(theta) = 0 from ``start`` to ``stop``.

    Nodes are ``start``, the grid nodes strictly inside, and ``stop``.
    Returns ``(t, theta, omega)``.
    """
    if not all(map(math.isfinite, (ell, theta0, omega0, start, stop))):
        raise InvalidInputError("pendulum inputs must be finite")
    if not 0.0 <= start < stop <= 1.0:
        raise InvalidInputError(f"bad pendulum interval [{start}, {stop}]")
    grid = grid or UnitGrid()
    t = pendulum_nodes(start, stop, grid)
    theta, omega = kernels.rk4_pendulum(t, float(ell), float(theta0), float(omega0))
    if check_range and (not np.all(np.isfinite(theta)) or np.abs(theta).max() > math.pi):
        raise PendulumRangeError("pendulum angle left [-pi, pi]")
    return t, theta, omega


def pendulum_energy(ell: float, theta, omega):
    return 0.5 * np.asarray(omega) ** 2 - ell * np.cos(theta)


# free (inactive) arcs --------------------------------------------------------

def _free(t, amp0, slope0, k):
    """Solution of w'' + k^2 w = 0 with (w, w')(0) = (amp0, slope0) at times t."""
    c, s = np.cos(k * t), np.sin(k * t)
    return amp0 * c + slope0 * s / k, -amp0 * k * s + slope0 * c


def _free_sq_integral(length, amp0, slope0, k):
    """Integral over [0, length] of the square of the free solution above."""
    b = slope0 / k
    s2 = math.sin(2 * k * length) / (4 * k)
    return (amp0 ** 2 * (length / 2 + s2) + b ** 2 * (length / 2 - s2)
            + amp0 * b * math.sin(k * length) ** 2 / k)


# construction ----------------------------------------------------------------

@dataclass
class _Build:
    residual: np.ndarray
    bumps: list                 # [(t, theta, omega)] on [0, 1/2]
    edge_state: list            # (y, y', z, z') at each free-arc start
    y_l2: float
    z_l2: float


def _check_params(params, structure: Structure):
    x = np.asarray(params, dtype=float)
    if x.shape != (structure.n_params,) or not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{structure.value}-bump needs {structure.n_params} finite params")
    a, b, xi, eta, alpha = x[:5]
    if not (a > 0 and b > 0 and xi > 0 and eta > 0):
        raise InvalidInputError("a, b, xi, eta must be positive")
    if structure is Structure.TWO:
        if not 0.0 < alpha < x[5] < 0.5:
            raise InvalidInputError("need 0 < alpha < beta < 1/2")
    elif not 0.0 < alpha < 0.5:
        raise InvalidInputError("need 0 < alpha < 1/2")
    return x


def _build(params, structure: Structure, r: float, grid: UnitGrid) -> _Build:
    x = _check_params(params, structure)
    a, b, xi, eta, alpha = x[:5]
    kx, ke = math.sqrt(xi), math.sqrt(eta)
    ell = eta - xi
    c_check = a * a + b * b - eta - xi
    y_a, yp_a = _free(alpha, 0.0, a, kx)
    z_a, zp_a = _free(alpha, 0.0, b, ke)
    theta0 = 2.0 * math.atan2(z_a, y_a)
    omega0 = 2.0 * (y_a * zp_a - z_a * yp_a)
    stop = x[5] if structure is Structure.TWO else 0.5
    t, th, om = pendulum_flow(ell, theta0, omega0, alpha, stop, grid)
    q = c_check + ell * np.cos(th)
    y2 = _free_sq_integral(alpha, 0.0, a, kx)
    z2 = _free_sq_integral(alpha, 0.0, b, ke)
    y2 += float(np.trapezoid(np.cos(th / 2) ** 2, t))
    z2 += float(np.trapezoid(np.sin(th / 2) ** 2, t))
    mass = 2.0 * float(np.trapezoid(-q, t))
    res = [y_a ** 2 + z_a ** 2 - 1.0, y_a * yp_a + z_a * zp_a]
    edges = [(0.0, a, 0.0, b)]
    if structure is Structure.TWO:
        beta = x[5]
        yb, zb = math.cos(th[-1] / 2), math.sin(th[-1] / 2)
        ypb, zpb = -0.5 * om[-1] * zb, 0.5 * om[-1] * yb
        edges.append((yb, ypb, zb, zpb))
        length = 0.5 - beta
        _, yp_half = _free(length, yb, ypb, kx)
        z_half, _ = _free(length, zb, zpb, ke)
        y2 += _free_sq_integral(length, yb, ypb, kx)
        z2 += _free_sq_integral(length, zb, zpb, ke)
        res += [yp_half, z_half, 2.0 * (y2 - z2), mass - r]
    else:
        res += [th[-1], 2.0 * (y2 - z2), mass - r]
    return _Build(np.array(res), [(t, th, om)], edges, 2.0 * y2, 2.0 * z2)


def shoot_profile(params, structure, r: float, grid: UnitGrid | None = None) -> np.ndarray:
    """Residual vector of the symmetric ansatz (6 for ``two``, 5 for ``one``)."""
    return _build(params, Structure.parse(structure), float(r), grid or UnitGrid()).residual


# profile ---------------------------------------------------------------------

@dataclass
class MaximizerProfile:
    r: float
    structure: Structure
    params: np.ndarray
    a: float
    b: float
    xi: float
    eta: float
    c_check: float
    ell: float
    intervals: list
    grid: UnitGrid
    y: SampledFunction = field(repr=False)
    z: SampledFunction = field(repr=False)
    qcheck: SampledFunction = field(repr=False)
    theta: SampledFunction = field(repr=False)
    residual: np.ndarray = field(repr=False)
    bumps: list = field(repr=False)    # [(t, theta)] over each full active interval

    @property
    def u(self) -> SampledFunction:
        return SampledFunction(self.grid, self.y.values ** 2 + self.z.values ** 2)

    @property
    def objective(self) -> float:
        return self.xi + self.eta

    def potential(self) -> PiecewisePotential:
        """c + ell cos(theta) on the active intervals, zero elsewhere."""
        segs = []
        cursor = 0.0
        for t, th in self.bumps:
            if t[0] > cursor:
                segs.append(Segment(cursor, float(t[0])))
            segs.append(Segment(float(t[0]), float(t[-1]), t,
                                self.c_check + self.ell * np.cos(th)))
            cursor = float(t[-1])
        if cursor < 1.0:
            segs.append(Segment(cursor, 1.0))
        return PiecewisePotential(segs)

    def measure(self) -> RadonMeasure:
        return RadonMeasure(self.potential())

    def boundary_jumps(self) -> list:
        """Jump of the potential entering each active interval (0 - q(alpha+))."""
        return [float(self.c_check + self.ell * math.cos(th[0])) for _, th in self.bumps]

    def to_json(self) -> dict:
        return {"r": self.r, "structure": self.structure.value,
                "a": self.a, "b": self.b, "xi": self.xi, "eta": self.eta,
                "c_check": self.c_check, "ell": self.ell,
                "intervals": [list(iv) for iv in self.intervals],
                "objective": self.objective, "grid_n": self.grid.n,
                "params": self.params.tolist(),
                "q": self.qcheck.values.tolist(), "y": self.y.values.tolist(),
                "z": self.z.values.tolist(), "theta": self.theta.values.tolist()}


def _mirror_bump(t, th):
    """Extend a half-interval arc on [alpha, beta] or [alpha, 1/2] to its mirror image."""
    return 1.0 - t[::-1], -th[::-1]


def build_profile(params, structure, r: float, grid: UnitGrid | None = None) -> MaximizerProfile:
    """Assemble the full profile on [0, 1] from a parameter vector."""
    structure = Structure.parse(structure)
    grid = grid or UnitGrid()
    if grid.n % 2:
        raise InvalidInputError("the maximiser needs an even grid size")
    bld = _build(params, structure, r, grid)
    x = np.asarray(params, dtype=float)
    a, b, xi, eta, alpha = map(float, x[:5])
    kx, ke = math.sqrt(xi), math.sqrt(eta)
    ell = eta - xi
    c_check = a * a + b * b - eta - xi
    t_b, th_b, om_b = bld.bumps[0]
    half = grid.n // 2
    tg = grid.nodes[: half + 1]
    y = np.empty(half + 1)
    z = np.empty(half + 1)
    q = np.zeros(half + 1)
    th_g = np.full(half + 1, np.nan)

    left = tg <= alpha
    y[left] = _free(tg[left], 0.0, a, kx)[0]
    z[left] = _free(tg[left], 0.0, b, ke)[0]
    inside = (tg > alpha) & (tg < t_b[-1])
    if structure is Structure.ONE:
        inside |= tg == t_b[-1]
    idx = np.searchsorted(t_b, tg[inside])
    th_g[inside] = th_b[idx]
    y[inside] = np.cos(th_b[idx] / 2)
    z[inside] = np.sin(th_b[idx] / 2)
    q[inside] = c_check + ell * np.cos(th_b[idx])
    if structure is Structure.TWO:
        beta = float(x[5])
        y0, yp0, z0, zp0 = bld.edge_state[1]
        right = tg >= beta
        y[right] = _free(tg[right] - beta, y0, yp0, kx)[0]
        z[right] = _free(tg[right] - beta, z0, zp0, ke)[0]
        m_t, m_th = _mirror_bump(t_b, th_b)
        bumps = [(t_b, th_b), (m_t, m_th)]
        intervals = [(alpha, beta), (1.0 - beta, 1.0 - alpha)]
    else:
        m_t, m_th = _mirror_bump(t_b[:-1], th_b[:-1])
        bumps = [(np.concatenate([t_b, m_t]), np.concatenate([th_b, m_th]))]
        intervals = [(alpha, 1.0 - alpha)]
    # reflect: y even, z odd, q even about 1/2
    y_full = np.concatenate([y, y[-2::-1]])
    z_full = np.concatenate([z, -z[-2::-1]])
    q_full = np.concatenate([q, q[-2::-1]])
    theta_full = 2.0 * np.arctan2(z_full, y_full)
    return MaximizerProfile(
        float(r), structure, x.copy(), a, b, xi, eta, c_check, ell, intervals, grid,
        SampledFunction(grid, y_full), SampledFunction(grid, z_full),
        SampledFunction(grid, q_full), SampledFunction(grid, theta_full),
        bld.residual, bumps)


# admissibility -----------------------------------------------------------------

ADMISSIBILITY_TOL = 1e-8


def admissibility_violations(profile: MaximizerProfile, tol: float = ADMISSIBILITY_TOL) -> list:
    """Names of violated invariants (empty when admissible)."""
    bad = []
    if not profile.ell > 0:
        bad.append("ell > 0")
    if profile.xi <= 0 or profile.eta <= profile.xi:
        bad.append("0 < xi < eta")
    if profile.qcheck.values.max() > tol or any(
            (profile.c_check + profile.ell * np.cos(th)).max() > tol for _, th in profile.bumps):
        bad.append("qcheck <= 0")
    if profile.u.values.max() > 1.0 + tol:
        bad.append("u <= 1 on I0")
    if any(np.abs(th).max() >= math.pi for _, th in profile.bumps):
        bad.append("theta in (-pi, pi)")
    return bad


# assembly --------------------------------------------------------------------

def _solve(structure: Structure, r: float, guess, grid: UnitGrid, tol: float):
    fun = lambda x: (shoot_profile(x, structure, r, grid), None)
    x, _, _, _ = newton(fun, np.asarray(guess, dtype=float), tol=tol)
    return build_profile(x, structure, r, grid)


def guess_from_critical(sol, structure) -> np.ndarray:
    """Parameter guess from a critical solution at p near 1.

    (a, b, xi, eta) are taken directly; alpha is where |q_p| first exceeds
    1% of its peak.  For two bumps beta mirrors alpha about the minimiser of
    q_p on [0, 1/2].
    """
    structure = Structure.parse(structure)
    t = sol.grid.nodes
    q = sol.q.values
    left = t <= 0.5
    alpha = float(t[np.argmax(np.abs(q) > 1e-2 * np.abs(q).max())])
    params = [sol.a, sol.b, sol.xi, sol.eta, alpha]
    if structure is Structure.TWO:
        t_min = float(t[left][np.argmin(q[left])])
        params.append(min(max(2.0 * t_min - alpha, alpha + 0.02), 0.49))
    return np.array(params)


SEED_P = 15.0 / 14.0
SEED_R = 5.0


def _seed(structure: Structure, r: float, grid: UnitGrid, tol: float) -> MaximizerProfile:
    from .critical_system import solve_critical
    r0 = min(r, SEED_R)
    crit = solve_critical(SEED_P, r0, grid=grid)
    return _solve(structure, r0, guess_from_critical(crit, structure), grid, tol)


def continue_profile(profile: MaximizerProfile, r: float, step: float = 1.0,
                     tol: float = 1e-10) -> MaximizerProfile:
    """Warm-started continuation of a profile in r (same structure)."""
    min_step = 1e-3
    while profile.r != r:
        target = profile.r + math.copysign(min(step, abs(r - profile.r)), r - profile.r)
        try:
            profile = _solve(profile.structure, target, profile.params, profile.grid, tol)
            step = min(2.0 * step, 4.0)
        except ConvergenceError:
            step *= 0.5
            if step < min_step:
                raise
    return profile


def _solve_structure(structure: Structure, r: float, guess, grid: UnitGrid,
                     tol: float) -> MaximizerProfile:
    if guess is not None:
        return _solve(structure, r, guess, grid, tol)
    return continue_profile(_seed(structure, r, grid, tol), r, tol=tol)


def _better(cands: list) -> MaximizerProfile:
    """Larger objective wins; near-ties go to the structure with fewer bumps."""
    cands = sorted(cands, key=lambda p: p.objective, reverse=True)
    if len(cands) > 1 and cands[0].objective - cands[1].objective <= 1e-8 * cands[0].objective:
        return min(cands[:2], key=lambda p: p.structure.n_params)
    return cands[0]


def assemble_maximizer(r: float, structure="auto", guess=None, grid: UnitGrid | None = None,
                       tol: float = 1e-10) -> MaximizerProfile:
    """Solve the shooting problem and return an admissible profile.

    ``auto`` solves both ansaetze and keeps the admissible one with the larger
    objective.  ``guess`` (a parameter vector) is only used for a fixed
    structure.
    """
    r = float(r)
    if not (0.0 < r <= 100.0):
        raise InvalidInputError(f"r must lie in (0, 100], got {r}")
    structure = Structure.parse(structure)
    grid = grid or UnitGrid()
    kinds = [Structure.TWO, Structure.ONE] if structure is Structure.AUTO else [structure]
    admissible, rejected, failed = [], {}, {}
    for kind in kinds:
        try:
            prof = _solve_structure(kind, r, guess if structure is not Structure.AUTO else None,
                                    grid, tol)
        except ConvergenceError as exc:
            failed[kind.value] = str(exc)
            continue
        bad = admissibility_violations(prof)
        if bad:
            rejected[kind.value] = bad
        else:
            admissible.append(prof)
    if admissible:
        return _better(admissible)
    if rejected:
        names = sorted({v for vals in rejected.values() for v in vals})
        raise InadmissibleSolutionError(f"no admissible profile at r={r:g}: "
                                        + ", ".join(names), names[0])
    raise ConvergenceError(f"shooting failed for every structure at r={r:g}", failed)


# verification ------------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed}


@dataclass
class VerificationReport:
    checks: list
    info: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks],
                "info": self.info}


def _d2(w: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order centred second derivative at w[2:-2]."""
    return (-w[4:] + 16 * w[3:-1] - 30 * w[2:-2] + 16 * w[1:-3] - w[:-4]) / (12 * h * h)


def _d1(w: np.ndarray, h: float) -> np.ndarray:
    return (-w[4:] + 8 * w[3:-1] - 8 * w[1:-3] + w[:-4]) / (12 * h)


def _runs(mask: np.ndarray):
    """(start, stop) index pairs of maximal True runs, stop exclusive."""
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    return list(zip(np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0]))


def _active_mask(profile: MaximizerProfile) -> np.ndarray:
    t = profile.grid.nodes
    mask = np.zeros(t.size, dtype=bool)
    for lo, hi in profile.intervals:
        mask |= (t > lo) & (t < hi)
    return mask


def verify_profile(profile: MaximizerProfile, eig_rtol: float = 1e-4) -> VerificationReport:
    """Run the nine identity checks on a profile.

    Stored samples are compared with c_check, ell and the pendulum angle, and
    the potential rebuilt from c_check feeds the spectral, MDE, sign and mass
    checks, so a corrupted constant shows up in several items.
    """
    from .sturm_liouville import dirichlet_eigen
    grid = profile.grid
    h = grid.h
    y, z, q = profile.y.values, profile.z.values, profile.qcheck.values
    u = y * y + z * z
    a2b2 = profile.a ** 2 + profile.b ** 2
    xi, eta, ell = profile.xi, profile.eta, profile.ell
    act = _active_mask(profile)
    pot = profile.potential()
    checks = []

    # (i) spectral cross-check
    try:
        l1 = dirichlet_eigen(pot, 1, grid).lam
        l2 = dirichlet_eigen(pot, 2, grid).lam
        err = max(abs(l1 - xi) / abs(xi), abs(l2 - eta) / abs(eta))
        ok = err < eig_rtol and l2 - l1 > 0
    except ConvergenceError:
        l1 = l2 = err = math.inf
        ok = False
    checks.append(Check("eigenvalues", err, eig_rtol, ok))

    # (ii) q = c + ell cos(theta) on the active set
    th = profile.theta.values
    err = float(np.abs(q[act] - (profile.c_check + ell * np.cos(th[act]))).max(initial=0.0))
    checks.append(Check("pendulum_form", err, 1e-12, err < 1e-12))

    # (iii) E1 and E2 on active-interval interiors
    worst = 0.0
    for i, j in _runs(act):
        if j - i < 5:
            continue
        w = y[i:j]
        d2, d1, ym = _d2(w, h), _d1(w, h), w[2:-2]
        e1 = d2 + (xi + a2b2 - 2 * eta) * ym + 2 * ell * ym ** 3
        e2 = (1 - ym ** 2) * d2 + ym * d1 ** 2 - ell * ym * (1 - ym ** 2) ** 2
        worst = max(worst, float(np.abs(e1).max()), float(np.abs(e2).max()))
    checks.append(Check("E1_E2", worst, 1e-3, worst < 1e-3))

    # (iv) q = a^2 + b^2 - 2 eta + 2 ell y^2
    err = float(np.abs(q[act] - (a2b2 - 2 * eta + 2 * ell * y[act] ** 2)).max(initial=0.0))
    checks.append(Check("q_y_identity", err, 1e-10, err < 1e-10))

    # (v) symmetry
    err = float(np.abs(q - q[::-1]).max())
    checks.append(Check("symmetry", err, 1e-6, err < 1e-6))

    # (vi) u'' + 2 q u = h on segment interiors
    q_rebuilt = pot.sample(grid).values
    hh = 2 * a2b2 - 4 * xi * y ** 2 - 4 * eta * z ** 2
    worst = 0.0
    for mask in (act, ~act):
        for i, j in _runs(mask):
            if j - i < 5:
                continue
            res = _d2(u[i:j], h) + 2 * q_rebuilt[i + 2:j - 2] * u[i + 2:j - 2] - hh[i + 2:j - 2]
            worst = max(worst, float(np.abs(res).max()))
    checks.append(Check("mde_residual", worst, 1e-3, worst < 1e-3))

    # (vii) sign
    seg_max = max(float(s.values.max()) for s in pot.segments if s.values is not None)
    top = max(seg_max, float(q.max()))
    checks.append(Check("sign", top, 1e-10, top <= 1e-10))

    # (viii) mass
    err = abs(lp_norm(pot, 1, grid) - profile.r)
    checks.append(Check("mass", err, 1e-8, err < 1e-8))

    # (ix) u <= 1, u == 1 on the active set
    over = float(u.max() - 1.0)
    flat = float(np.abs(u[act] - 1.0).max(initial=0.0))
    checks.append(Check("u_bound", max(over, flat), 1e-8, over <= 1e-8 and flat < 1e-8))

    info = {"lambda1": l1, "lambda2": l2, "ell": ell,
            "boundary_jumps": profile.boundary_jumps(),
            "pairing": pair_against(RadonMeasure(pot), SampledFunction(grid, u), grid),
            "theta_max": max(float(np.abs(b_th).max()) for _, b_th in profile.bumps)}
    return VerificationReport(checks, info)


# transition ----------------------------------------------------------------------

def _admissible_objective(profile) -> float:
    if profile is None or admissibility_violations(profile):
        return -math.inf
    return profile.objective


class _Tracker:
    """Solves both structures at a given r, warm-started from the nearest
    previously converged r."""

    def __init__(self, grid: UnitGrid, tol: float):
        self.grid, self.tol = grid, tol
        self.done = {Structure.ONE: {}, Structure.TWO: {}}

    def solve(self, kind: Structure, r: float):
        store = self.done[kind]
        if store:
            near = min(store, key=lambda s: abs(s - r))
            try:
                prof = continue_profile(store[near], r, step=abs(r - near) or 1.0, tol=self.tol)
            except ConvergenceError:
                return None
        else:
            try:
                prof = _solve_structure(kind, r, None, self.grid, self.tol)
            except ConvergenceError:
                return None
        store[r] = prof
        return prof

    def gap(self, r: float) -> float:
        two = self.solve(Structure.TWO, r)
        one = self.solve(Structure.ONE, r)
        g_two, g_one = _admissible_objective(two), _admissible_objective(one)
        if math.isinf(g_two) and math.isinf(g_one):
            if one is None:
                raise ConvergenceError(f"no admissible profile at r={r:g}")
            # the one-bump candidate exists but is inadmissible, so it cannot be
            # the maximiser; near the transition the two-bump solve may fail
            # because beta sits within a difference step of 1/2
            log.debug("two-bump solve failed at r=%g; one-bump inadmissible", r)
            return math.inf
        if math.isfinite(g_two) and math.isfinite(g_one):
            # near-ties: the two-bump profile has collapsed onto the one-bump
            if g_two - g_one <= 1e-8 * g_one:
                return -abs(g_two - g_one) or -0.0
        return g_two - g_one


def locate_r_star(rmin: float = 10.0, rmax: float = 20.0, tol: float = 1e-3,
                  grid: UnitGrid | None = None) -> float:
    """Radius where the maximiser switches from two bumps to one.

    Bisection on the sign of g(r) = objective(two) - objective(one), where an
    inadmissible or non-existent profile counts as minus infinity.
    """
    if not (0.0 < rmin < rmax <= 100.0) or not tol >= 1e-4:
        raise InvalidInputError("need 0 < rmin < rmax <= 100 and tol >= 1e-4")
    trk = _Tracker(grid or UnitGrid(), 1e-10)
    g_lo, g_hi = trk.gap(rmin), trk.gap(rmax)
    if not (g_lo > 0 > g_hi or g_lo == math.inf and g_hi < 0):
        raise BracketError(f"g does not change sign on [{rmin}, {rmax}] "
                           f"(g = {g_lo:.3g}, {g_hi:.3g})")
    lo, hi = rmin, rmax
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if trk.gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# optimality probes ---------------------------------------------------------------

def dirac_transfer_probe(profile: MaximizerProfile, positions=None, eps: float = 0.1):
    """lambda_1 + lambda_2 after moving mass eps from the density into an atom.

    The density is scaled by (r - eps)/r and an atom of mass -eps is placed
    at each position, so the total variation stays r.  Returns
    ``[(position, new_sum)]``.
    """
    from .mde import mde_eigen_sum
    if positions is None:
        positions = []
        for lo, hi in profile.intervals:
            positions.extend(np.linspace(lo, hi, 7)[1:-1])
    pot = profile.potential().scaled((profile.r - eps) / profile.r)
    out = []
    for pos in positions:
        mu = RadonMeasure(pot, [(float(pos), -eps)])
        out.append((float(pos), mde_eigen_sum(mu, profile.grid)))
    return out


def random_perturbation_probe(profile: MaximizerProfile, count: int = 20,
                              size: float = 1e-2, seed: int = 0):
    """Changes of lambda_1 + lambda_2 under zero-mean perturbations of the bumps.

    Each perturbation is a random smooth multiplier 1 + size * w applied to q
    on the active set, with w re-centred so that the L1 norm is unchanged; q
    stays non-positive for size < 1/max|w|.
    """
    from .sturm_liouville import eigen_sum
    rng = np.random.default_rng(seed)
    pot = profile.potential()
    base = eigen_sum(pot, profile.grid)
    deltas = []
    for _ in range(count):
        coef = rng.standard_normal(4)
        segs = []
        for s in pot.segments:
            if s.values is None:
                segs.append(s)
                continue
            x = (s.t - s.start) / (s.stop - s.start)
            w = sum(c * np.cos((k + 1) * math.pi * x) for k, c in enumerate(coef))
            # remove the q-weighted mean so the mass is preserved
            w -= np.trapezoid(w * s.values, s.t) / np.trapezoid(s.values, s.t)
            w /= max(np.abs(w).max(), 1e-300)
            segs.append(Segment(s.start, s.stop, s.t, s.values * (1.0 + size * w)))
        deltas.append(eigen_sum(PiecewisePotential(segs), profile.grid) - base)
    return base, deltas


def uniqueness_probe(profile: MaximizerProfile, count: int = 5, size: float = 0.02,
                     seed: int = 0, tol: float = 1e-10):
    """Re-solve from perturbed guesses; returns the max parameter distance."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        guess = profile.params * (1.0 + size * rng.uniform(-1, 1, profile.params.size))
        other = _solve(profile.structure, profile.r, guess, profile.grid, tol)
        worst = max(worst, float(np.abs(other.params - profile.params).max()))
    return worst


def profile_from_json(data: dict, grid: UnitGrid | None = None) -> MaximizerProfile:
    """Rebuild a profile from its JSON form.

    The bump trajectories come from the stored parameters; the sampled fields
    and the constants c_check and ell are the stored ones, so edits to them
    are visible to verify_profile.
    """
    try:
        structure = Structure.parse(data["structure"])
        grid = grid or UnitGrid(int(data["grid_n"]))
        params = data.get("params")
        if params is None:
            ivs = data["intervals"]
            params = [data["a"], data["b"], data["xi"], data["eta"], ivs[0][0]]
            if structure is Structure.TWO:
                params.append(ivs[0][1])
        prof = build_profile(params, structure, float(data["r"]), grid)
        fields = {}
        for key in ("y", "z", "q", "theta"):
            if key in data:
                vals = np.asarray(data[key], dtype=float)
                if vals.shape != (grid.n + 1,):
                    raise InvalidInputError(f"{key} must have {grid.n + 1} samples")
                fields[key] = SampledFunction(grid, vals)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed profile: {exc}") from exc
    prof.c_check = float(data.get("c_check", prof.c_check))
    prof.ell = float(data.get("ell", prof.ell))
    prof.y = fields.get("y", prof.y)
    prof.z = fields.get("z", prof.z)
    prof.qcheck = fields.get("q", prof.qcheck)
    prof.theta = fields.get("theta", prof.theta)
    return prof
