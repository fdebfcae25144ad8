import math
from functools import lru_cache

import numpy as np
import pytest

from slopt.critical_system import (continuation_to_one, hamiltonian_residual, linearised_guess,
                                   solve_critical, u_equation_forms, u_equation_residual)
from slopt.errors import ConvergenceError, InvalidInputError, WrongBranchError
from slopt.function_space import PiecewisePotential, UnitGrid, lp_norm
from slopt.sturm_liouville import dirichlet_eigen, eigen_sum

PI2 = math.pi ** 2
SWEEP = [(p, r) for p in (2.0, 1.5, 1.25, 15 / 14) for r in (1.0, 5.0, 20.0)
         if (p, r) != (15 / 14, 20.0)]


@lru_cache(maxsize=None)
def solved(p, r, n=4096):
    return solve_critical(p, r, grid=UnitGrid(n))


def test_small_r_limit():
    sol = solved(2.0, 1e-3)
    assert sol.xi == pytest.approx(PI2, rel=1e-3)
    assert sol.eta == pytest.approx(4 * PI2, rel=1e-3)
    assert sol.b / sol.a == pytest.approx(2.0, rel=1e-3)
    guess = linearised_guess(2.0, 1e-3)
    assert guess[:2] == pytest.approx(sol.params[:2], rel=1e-2)


@pytest.mark.parametrize("p,r", SWEEP)
def test_identities_across_sweep(p, r):
    sol = solved(p, r)
    assert np.abs(sol.residual).max() < 1e-9
    assert hamiltonian_residual(sol) < 1e-6
    assert u_equation_residual(sol) < 1e-3
    q = PiecewisePotential.from_sampled(sol.q)
    assert lp_norm(q, p, sol.grid) == pytest.approx(r, abs=1e-7)
    assert np.abs(sol.q.values - sol.q.values[::-1]).max() < 1e-5


@pytest.mark.parametrize("p,r", [(2.0, 5.0), (1.5, 1.0), (15 / 14, 5.0)])
def test_branch_identity(p, r):
    sol = solved(p, r)
    q = PiecewisePotential.from_sampled(sol.q)
    assert dirichlet_eigen(q, 1, sol.grid).lam == pytest.approx(sol.xi, rel=1e-4)
    assert dirichlet_eigen(q, 2, sol.grid).lam == pytest.approx(sol.eta, rel=1e-4)
    assert eigen_sum(q, sol.grid) == pytest.approx(sol.objective, rel=1e-4)


def test_constraints_at_convergence():
    sol = solved(1.5, 5.0)
    t = sol.grid.nodes
    ny = math.sqrt(np.trapezoid(sol.y.values ** 2, t))
    nz = math.sqrt(np.trapezoid(sol.z.values ** 2, t))
    assert abs(ny - nz) < 1e-8
    unorm = np.trapezoid(sol.u ** sol.pstar, t) ** (1 / sol.pstar)
    assert abs(unorm - 5.0 ** 0.5) < 1e-8
    assert np.trapezoid(sol.u * sol.q.values, t) == pytest.approx(-5.0 ** 1.5, rel=1e-8)


def test_nodal_structure():
    sol = solved(2.0, 5.0)
    assert np.all(sol.y.values[1:-1] > 0)
    assert sol.node == pytest.approx(0.5, abs=1e-6)


def test_hamiltonian_refines_at_rk4_order():
    res = [hamiltonian_residual(solved(2.0, 5.0, n)) for n in (512, 1024, 2048)]
    for a, b in zip(res, res[1:]):
        assert 10 < a / b < 25
    sol = solved(2.0, 5.0)
    y, yp, z, zp = sol.state[0]
    assert yp ** 2 + zp ** 2 == sol.a ** 2 + sol.b ** 2 and y == z == 0


def test_u_equation_forms():
    sol = solved(2.0, 5.0)
    lin, amb = u_equation_forms(sol)
    np.testing.assert_allclose(lin, amb, atol=1e-9)
    u = sol.u
    # u = (a^2 + b^2) t^2 + O(t^4) near 0, so u''(0) = 2a^2 + 2b^2
    assert 2 * u[1] / sol.grid.h ** 2 == pytest.approx(2 * sol.a ** 2 + 2 * sol.b ** 2, rel=1e-5)


def test_figure_one_structure():
    sol = solved(15 / 14, 5.0)
    q, t = sol.q.values, sol.grid.nodes
    assert q.max() <= 0
    assert np.abs(q - q[::-1]).max() < 1e-4
    interior = (q[1:-1] < q[:-2]) & (q[1:-1] < q[2:])
    minima = t[1:-1][interior]
    assert len(minima) == 2 and minima[0] < 0.5 < minima[1]
    k = sol.grid.index(0.5)
    assert q[k] > q[k - 1] and q[k] > q[k + 1]
    assert abs(q[k]) < 0.05 * np.abs(q).max()


def test_continuation_trend():
    ps = [2, 5 / 3, 3 / 2, 4 / 3, 5 / 4, 6 / 5, 15 / 14]
    run = continuation_to_one(5.0, ps)
    assert run.error is None and len(run.solutions) == len(ps)
    m = [d["M"] for d in run.diagnostics]
    umax = [d["u_max"] for d in run.diagnostics]
    assert all(b >= a - 1e-9 for a, b in zip(m, m[1:]))
    assert all(b < a for a, b in zip(umax, umax[1:]))
    assert all(u > 1 for u in umax)
    # pairing equals -r^p exactly at each p, tending to -r
    for d in run.diagnostics:
        assert d["pairing"] == pytest.approx(-5.0 ** d["p"], rel=1e-8)
    assert run.solutions[0].p == 2 and run.last.p == pytest.approx(15 / 14)


def test_continuation_rejects_bad_schedule():
    with pytest.raises(InvalidInputError):
        continuation_to_one(5.0, [1.5, 2.0])
    with pytest.raises(InvalidInputError):
        continuation_to_one(5.0, [2.0, 1.01])


def test_wrong_branch_detected():
    with pytest.raises(WrongBranchError):
        solve_critical(2.0, 1.0, [1.0, 9.0, PI2, 9 * PI2])


def test_range_checks():
    for p, r in ((1.01, 1.0), (5.0, 1.0), (2.0, 0.0), (2.0, 200.0)):
        with pytest.raises(InvalidInputError):
            solve_critical(p, r)


def test_bad_guess_reports_convergence_error():
    with pytest.raises(ConvergenceError) as info:
        solve_critical(2.0, 5.0, [1e3, 1e3, 1.0, 2.0])
    assert info.value.diagnostics
