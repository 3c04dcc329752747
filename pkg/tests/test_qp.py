import math

import numpy as np
import pytest

from kamdnlw.algebra import SiteSet, Truncation
from kamdnlw.model import (
    FieldState,
    GTerm,
    ModelParams,
    NonlinearitySpec,
    lambda_j,
    linear_solution,
    x_grid,
)
from kamdnlw.qp import (
    NewtonDivergenceError,
    QPSolution,
    basis_ells,
    continuation,
    lyapunov_exponent,
    newton_qp,
    qp_residual,
)
from kamdnlw.simulate import integrate

SITES1 = SiteSet((1,))
G = NonlinearitySpec()
G0 = NonlinearitySpec(leading=False)


def make_params(xi, m=1.0, j_max=32, grid_N=256, sites=SITES1, **kw):
    return ModelParams(m=m, sites=sites, xi=xi, grid_N=grid_N,
                       truncation=Truncation(j_max, 12, 3), **kw)


def test_basis_ells_canonical():
    ells = basis_ells(2, 3)
    assert (0, 0) in ells
    # one representative per +- pair, first nonzero positive
    for ell in ells:
        assert sum(map(abs, ell)) <= 3
        nz = next((c for c in ell if c), 0)
        assert nz >= 0
        if any(ell):
            assert tuple(-c for c in ell) not in ells


def test_residual_trivial_cases():
    params = make_params({1: 1e-3})
    lin = linear_solution(params, L=6)
    assert qp_residual(lin, params, G0) < 1e-13

    # the zero solution annihilates any quadratically vanishing nonlinearity
    zero = QPSolution(lin.plus_sites, params.m, dict(params.xi), lin.L, lin.j_max,
                      lin.ells, np.zeros_like(lin.coeffs), lin.omega_inf.copy())
    assert qp_residual(zero, params, G) == 0.0


def test_linear_solution_residual_scaling():
    # g vanishes cubically on the sqrt(xi) ansatz: residual = O(xi^{3/2})
    vals = []
    for xi in (1e-2, 1e-3, 1e-4):
        params = make_params({1: xi})
        vals.append(qp_residual(linear_solution(params, L=6), params, G))
    s1 = math.log(vals[0] / vals[1]) / math.log(10.0)
    s2 = math.log(vals[1] / vals[2]) / math.log(10.0)
    assert abs(s1 - 1.5) < 0.05 and abs(s2 - 1.5) < 0.05


def test_newton_converges_small_amplitude():
    params = make_params({1: 1e-3})
    sol = newton_qp(linear_solution(params, L=6), params, G, tol=1e-12)
    assert sol.meta["residual_collocation"] < 1e-10
    assert sol.meta["residual_galerkin"] < 1e-12
    # frequency approaches the dispersion value as xi -> 0
    assert abs(sol.omega_inf[0] - lambda_j(1.0, 1)) < 1e-3
    # pinned amplitude untouched
    assert math.isclose(sol.coeff((1,), 1), math.sqrt(8e-3) / lambda_j(1.0, 1), rel_tol=1e-15)
    # quadratic contraction was observed
    hist = sol.meta["residual_history"]
    assert hist[-1] <= 1e-12 and len(hist) <= 6


def test_newton_frequency_slope_matches_twist():
    lam1 = lambda_j(1.0, 1)
    A11 = -3.0 / (4 * lam1 ** 3)
    for xi in (3e-3, 1e-3):
        params = make_params({1: xi})
        sol = newton_qp(linear_solution(params, L=6), params, G, tol=1e-12)
        assert abs(sol.omega_inf[0] - (lam1 + A11 * xi)) < 0.5 * xi ** 2


def test_truncation_refinement_does_not_increase_residual():
    params = make_params({1: 1e-3})
    r6 = newton_qp(linear_solution(params, L=6), params, G, tol=1e-12).meta["residual_collocation"]
    r8 = newton_qp(linear_solution(params, L=8), params, G, tol=1e-12).meta["residual_collocation"]
    assert r8 <= r6 * (1 + 1e-9) + 1e-15
    params48 = make_params({1: 1e-3}, j_max=48)
    r48 = newton_qp(linear_solution(params48, L=6), params48, G, tol=1e-12).meta["residual_collocation"]
    assert r48 <= r6 * (1 + 1e-9) + 1e-15


def test_time_integration_cross_check():
    params = make_params({1: 1e-3})
    sol = newton_qp(linear_solution(params, L=6), params, G, tol=1e-12)
    N = 128
    x = x_grid(N)
    y0, _, v0 = sol.fields_at(0.0, x)
    assert np.max(np.abs(v0)) == 0.0  # time-even solution starts at rest
    T = 20 * sol.fundamental_period
    traj = integrate(FieldState(y0, v0), G, params.m, T=T, dt=0.02,
                     sample_every=250, store_states=True)
    gap = 0.0
    for idx, t in enumerate(traj.times):
        yq, _, vq = sol.fields_at(float(t), x)
        gap = max(gap, float(np.max(np.abs(traj.states[idx].y - yq))),
                  float(np.max(np.abs(traj.states[idx].v - vq))))
    assert gap < 1e-6


def test_newton_divergence_reports():
    # massless even-power equation: the spatial-mean equation is unsolvable,
    # Newton must fail rather than fake convergence
    params = make_params({1: 1e-2}, m=0.0, allow_zero_mass=True, j_max=8, grid_N=64)
    g = NonlinearitySpec(leading=False, hot=(GTerm(1.0, 0, "cos", 0, 2, 0),))  # y_x^2
    with pytest.raises(NewtonDivergenceError):
        newton_qp(linear_solution(params, L=4), params, g, tol=1e-12, max_iter=20)


def test_continuation_path():
    params = make_params({1: 1e-3})
    res = continuation(params, G, [{1: 1e-2}, {1: 3e-3}, {1: 1e-3}], L=8, tol=1e-12)
    assert not res.failures
    assert len(res.path) == 3
    for xi, sol, resid, iters in res.path:
        assert resid < 1e-9
    # frequencies decrease monotonically with amplitude (negative twist)
    freqs = [sol.omega_inf[0] for _, sol, _, _ in res.path]
    assert freqs[0] < freqs[1] < freqs[2]


def test_lyapunov_pure_rotation():
    params = make_params({1: 1e-3})
    lin = linear_solution(params, L=6)
    est = lyapunov_exponent(lin, params, None, T=200.0, grid_N=64)
    assert abs(est.chi) <= math.log(200.0) / 200.0


def test_lyapunov_dnlw_solution():
    params = make_params({1: 1e-3})
    sol = newton_qp(linear_solution(params, L=6), params, G, tol=1e-12)
    est = lyapunov_exponent(sol, params, G, T=500.0, grid_N=64)
    for t, chi in est.series:
        if t >= 100.0:
            assert abs(chi) <= 5.0 * math.log(t) / t
    assert est.bound_constant <= 5.0


def test_lyapunov_friction_control():
    # friction -5 v^3 added to the linearization along the undamped torus:
    # the exponent must come out strictly negative, well outside the
    # conservative log(T)/T envelope
    params = make_params({1: 1e-2})
    sol = newton_qp(linear_solution(params, L=6), params, G, tol=1e-12)
    gf = NonlinearitySpec(leading=True, hot=(GTerm(-5.0, 0, "cos", 0, 0, 3),))
    est = lyapunov_exponent(sol, params, gf, T=300.0, grid_N=64, base="torus")
    assert est.chi < -2.0 * math.log(300.0) / 300.0
    assert est.chi < -3.0 * est.error_bar


def test_solution_serialization_round_trip():
    params = make_params({1: 1e-3})
    sol = newton_qp(linear_solution(params, L=6), params, G, tol=1e-12)
    back = QPSolution.from_json(sol.to_json())
    assert np.allclose(back.coeffs, sol.coeffs, atol=1e-15, rtol=0)
    assert np.allclose(back.omega_inf, sol.omega_inf, rtol=0, atol=1e-15)
    assert back.xi == sol.xi
