"""Quasi-periodic standing waves by Newton iteration with unknown frequencies.

The ansatz is the even-even torus expansion

    y(t, x) = sum_{ell, j} c_{ell,j} cos(ell . omega t) cos(j x)

over harmonics |ell|_1 <= L and spatial modes j <= j_max, so time evenness
and spatial evenness are structural.  The collocation residual of
y_tt - y_xx + m y - g(x, y, y_x, y_t) is projected on the same basis; the
Newton unknowns are all coefficients except the primary harmonics
(pinned to sqrt(8 xi_j)/lambda_j, which fixes the amplitude parameters and
removes the frequency degeneracy) together with the frequency vector.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, NonlinearitySpec, lambda_j, x_grid

__all__ = [
    "QPSolution",
    "ContinuationResult",
    "NewtonDivergenceError",
    "basis_ells",
    "qp_residual",
    "newton_qp",
    "continuation",
    "lyapunov_exponent",
    "LyapunovEstimate",
]


class NewtonDivergenceError(RuntimeError):
    """Newton iteration failed to contract; diagnostics attached."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


def basis_ells(nu: int, L: int) -> tuple[tuple[int, ...], ...]:
    """Canonical torus harmonics: |ell|_1 <= L, zero or first nonzero positive.

    cos(ell.theta) = cos((-ell).theta), so one representative per +- pair.
    """
    out = []
    for ell in itertools.product(range(-L, L + 1), repeat=nu):
        if sum(abs(c) for c in ell) > L:
            continue
        nz = next((c for c in ell if c != 0), 0)
        if nz < 0:
            continue
        out.append(ell)
    return tuple(sorted(out))


@dataclass
class QPSolution:
    """Frequencies and cosine-cosine coefficients of a standing-wave torus."""

    plus_sites: tuple[int, ...]
    m: float
    xi: dict
    L: int
    j_max: int
    ells: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray          # shape (len(ells), j_max + 1)
    omega_inf: np.ndarray       # one frequency per plus site
    meta: dict = field(default_factory=dict)

    @property
    def nu(self) -> int:
        return len(self.plus_sites)

    def ell_index(self, ell) -> int:
        return self.ells.index(tuple(ell))

    def coeff(self, ell, j) -> float:
        return float(self.coeffs[self.ell_index(ell), j])

    @property
    def fundamental_period(self) -> float:
        return 2.0 * math.pi / float(np.min(self.omega_inf))

    def fields_at(self, t: float, x: np.ndarray):
        """(y, y_x, v) sampled at time t on the given spatial points."""
        ells = np.asarray(self.ells, dtype=float)
        lw = ells @ self.omega_inf
        cosv = np.cos(lw * t)
        sinv = np.sin(lw * t)
        yj = self.coeffs.T @ cosv
        vj = self.coeffs.T @ (-lw * sinv)
        js = np.arange(self.j_max + 1.0)
        cosX = np.cos(np.outer(js, x))
        sinX = np.sin(np.outer(js, x))
        y = yj @ cosX
        yx = yj @ (-(js[:, None]) * sinX)
        v = vj @ cosX
        return y, yx, v

    def embed(self, L: int | None = None, j_max: int | None = None) -> "QPSolution":
        """Zero-padded copy in a larger basis."""
        L2 = self.L if L is None else L
        j2 = self.j_max if j_max is None else j_max
        if L2 < self.L or j2 < self.j_max:
            raise ValueError("embedding must not shrink the basis")
        ells2 = basis_ells(self.nu, L2)
        coeffs2 = np.zeros((len(ells2), j2 + 1))
        idx = {ell: r for r, ell in enumerate(ells2)}
        for r, ell in enumerate(self.ells):
            coeffs2[idx[ell], : self.j_max + 1] = self.coeffs[r]
        return QPSolution(self.plus_sites, self.m, dict(self.xi), L2, j2,
                          ells2, coeffs2, self.omega_inf.copy(), dict(self.meta))

    def to_json(self) -> str:
        entries = []
        for r, ell in enumerate(self.ells):
            for j in range(self.j_max + 1):
                c = self.coeffs[r, j]
                if c != 0.0:
                    entries.append([list(ell), j, c])
        return json.dumps({
            "plus_sites": list(self.plus_sites),
            "m": self.m,
            "xi": {str(k): v for k, v in self.xi.items()},
            "L": self.L,
            "j_max": self.j_max,
            "omega_inf": list(map(float, self.omega_inf)),
            "coeffs": entries,
            "meta": self.meta,
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "QPSolution":
        d = json.loads(text)
        ps = tuple(d["plus_sites"])
        ells = basis_ells(len(ps), d["L"])
        coeffs = np.zeros((len(ells), d["j_max"] + 1))
        idx = {ell: r for r, ell in enumerate(ells)}
        for ell, j, c in d["coeffs"]:
            coeffs[idx[tuple(ell)], j] = c
        return cls(ps, d["m"], {int(k): v for k, v in d["xi"].items()}, d["L"],
                   d["j_max"], ells, coeffs, np.array(d["omega_inf"]), d.get("meta", {}))


# ---------------------------------------------------------------------------
# collocation / Galerkin machinery
# ---------------------------------------------------------------------------

class _TorusSystem:
    """Precomputed trig tables for residual evaluation and projection."""

    def __init__(self, sol: QPSolution, params: ModelParams, g):
        self.params = params
        self.g = g if g is not None else NonlinearitySpec(leading=False)
        self.L = sol.L
        self.j_max = sol.j_max
        self.nu = sol.nu
        self.ells = np.asarray(sol.ells, dtype=float)
        deg = max(3, getattr(self.g, "max_degree", 3))
        q_max = max((t.q for t in self.g.terms()), default=0) if hasattr(self.g, "terms") else 0

        # quadrature grids: uniform trapezoid is exact for trig polynomials of
        # degree < N, and the projected integrand has degree <= (deg+1) L resp.
        # (deg+1) j_max + q_max
        self.NT = (deg + 1) * self.L + 2
        self.NX = params.grid_N
        if self.NX <= (deg + 1) * self.j_max + q_max:
            raise ValueError("grid too small for exact cubic projection at this j_max")

        self._theta_tables(self.NT)
        self._x_tables(self.NX)
        # collocation grid for the reported max-norm residual
        self._coll = None

    def _theta_tables(self, NT):
        grids = np.meshgrid(*[2 * math.pi * np.arange(NT) / NT] * self.nu, indexing="ij")
        flat = np.stack([gr.ravel() for gr in grids])  # (nu, NT^nu)
        phase = self.ells @ flat                       # (n_ell, NT^nu)
        self.cosP = np.cos(phase)
        self.sinP = np.sin(phase)
        wl = np.full(len(self.ells), 2.0)
        wl[[i for i, ell in enumerate(self.ells) if not np.any(ell)]] = 1.0
        self.wl = wl / flat.shape[1]

    def _x_tables(self, NX):
        x = x_grid(NX)
        js = np.arange(self.j_max + 1.0)
        self.x = x
        self.cosX = np.cos(np.outer(js, x))
        self.sinX = np.sin(np.outer(js, x))
        self.js = js
        wj = np.full(self.j_max + 1, 2.0)
        wj[0] = 1.0
        self.wj = wj / NX

    def _fields(self, coeffs, omega, cosP, sinP):
        lw = self.ells @ omega
        U = coeffs
        y = cosP.T @ U @ self.cosX
        ytt = cosP.T @ ((-lw ** 2)[:, None] * U) @ self.cosX
        yxx = cosP.T @ (U * (-self.js ** 2)) @ self.cosX
        yx = cosP.T @ (U * (-self.js)) @ self.sinX
        yt = sinP.T @ ((-lw)[:, None] * U) @ self.cosX
        return y, ytt, yxx, yx, yt

    def residual_grid(self, coeffs, omega, cosP, sinP):
        y, ytt, yxx, yx, yt = self._fields(coeffs, omega, cosP, sinP)
        gv = self.g(self.x[None, :], y, yx, yt)
        return ytt - yxx + self.params.m * y - gv

    def galerkin(self, coeffs, omega):
        R = self.residual_grid(coeffs, omega, self.cosP, self.sinP)
        return (self.cosP @ R @ self.cosX.T) * np.outer(self.wl, self.wj)

    def collocation_max(self, coeffs, omega) -> float:
        if self._coll is None:
            NT = 2 * self.L + 1
            grids = np.meshgrid(*[2 * math.pi * np.arange(NT) / NT] * self.nu, indexing="ij")
            flat = np.stack([gr.ravel() for gr in grids])
            phase = self.ells @ flat
            self._coll = (np.cos(phase), np.sin(phase))
        R = self.residual_grid(coeffs, omega, *self._coll)
        return float(np.max(np.abs(R)))


def qp_residual(sol: QPSolution, params: ModelParams, g) -> float:
    """Max-norm of the collocation residual on the (2L+1)^nu x grid_N grid."""
    return _TorusSystem(sol, params, g).collocation_max(sol.coeffs, sol.omega_inf)


# ---------------------------------------------------------------------------
# Newton with frequency unknowns
# ---------------------------------------------------------------------------

def _pinned_slots(sol: QPSolution):
    out = []
    for d, p in enumerate(sol.plus_sites):
        unit = tuple(1 if dd == d else 0 for dd in range(sol.nu))
        out.append((sol.ells.index(unit), p))
    return out


def newton_qp(init: QPSolution, params: ModelParams, g, tol: float = 1e-12,
              max_iter: int = 30, fd_step: float = 1e-7) -> QPSolution:
    """Solve the projected residual equations; returns a refined solution.

    The primary-harmonic coefficients stay pinned to sqrt(8 xi_j)/lambda_j;
    the unknowns are the remaining coefficients and the frequencies.  The
    dense Jacobian is assembled by forward finite differences with step
    fd_step * max(1, |u_i|).  Raises NewtonDivergenceError when the residual
    grows three times in a row or stagnates above tol.
    """
    sys_ = _TorusSystem(init, params, g)
    n_ell, n_j = init.coeffs.shape
    pinned = _pinned_slots(init)
    pin_values = {}
    for (r, p) in pinned:
        lam = lambda_j(params.m, p) if params.m > 0 else float(p)
        pin_values[(r, p)] = math.sqrt(8.0 * params.xi[p]) / lam

    mask = np.ones((n_ell, n_j), dtype=bool)
    for (r, p) in pinned:
        mask[r, p] = False
    free_idx = np.flatnonzero(mask.ravel())

    def unpack(u):
        C = np.zeros((n_ell, n_j))
        C.ravel()[free_idx] = u[: free_idx.size]
        for (r, p), val in pin_values.items():
            C[r, p] = val
        return C, u[free_idx.size:]

    def resid(u):
        C, om = unpack(u)
        return sys_.galerkin(C, om).ravel()

    C0 = init.coeffs.copy()
    for (r, p), val in pin_values.items():
        C0[r, p] = val
    u = np.concatenate([C0.ravel()[free_idx], init.omega_inf.astype(float)])

    history = []
    grow_streak = 0
    for it in range(max_iter):
        r = resid(u)
        rn = float(np.max(np.abs(r)))
        history.append(rn)
        if rn <= tol:
            break
        if len(history) >= 2 and rn > history[-2]:
            grow_streak += 1
            if grow_streak >= 3:
                raise NewtonDivergenceError(
                    f"residual grew 3 consecutive iterations (last {rn:.3e})", history)
        else:
            grow_streak = 0
        if it >= 8 and rn > tol and rn > 0.25 * history[-8]:
            raise NewtonDivergenceError(
                f"residual stagnated at {rn:.3e} > tol {tol:.1e}", history)
        J = np.empty((r.size, u.size))
        for col in range(u.size):
            h = fd_step * max(1.0, abs(u[col]))
            up = u.copy()
            up[col] += h
            J[:, col] = (resid(up) - r) / h
        try:
            du = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            du, *_ = np.linalg.lstsq(J, -r, rcond=None)
        u = u + du
    else:
        r = resid(u)
        rn = float(np.max(np.abs(r)))
        history.append(rn)
        if rn > tol:
            raise NewtonDivergenceError(
                f"no convergence in {max_iter} iterations (residual {rn:.3e})", history)

    C, om = unpack(u)
    # quadratic-convergence certificate: r_{n+1} <= C_q r_n^2 once inside the basin
    ratios = [history[i + 1] / history[i] ** 2 for i in range(len(history) - 1)
              if history[i] < 1e-2 and history[i] > 0 and history[i + 1] > 0]
    sol = QPSolution(init.plus_sites, params.m, dict(params.xi), init.L, init.j_max,
                     init.ells, C, om,
                     meta={"iterations": len(history) - 1,
                           "residual_galerkin": history[-1],
                           "residual_history": history,
                           "quadratic_constant": max(ratios) if ratios else None})
    sol.meta["residual_collocation"] = sys_.collocation_max(C, om)
    return sol


@dataclass
class ContinuationResult:
    path: list          # (xi dict, QPSolution, collocation residual, iterations)
    failures: list      # (xi dict, reason)


def continuation(params: ModelParams, g, xi_path, L: int = 6, tol: float = 1e-12,
                 max_halvings: int = 4) -> ContinuationResult:
    """Walk a list of amplitude vectors, reusing and extrapolating solutions.

    On Newton failure the step is halved (midpoint inserted) up to
    max_halvings times; unresolved points are recorded in ``failures``.
    """
    from .model import linear_solution

    path, failures = [], []
    prev: QPSolution | None = None
    prev_xi = None

    def solve_at(xi, guess):
        pp = params.with_xi(xi)
        sol = newton_qp(guess, pp, g, tol=tol)
        return sol

    def attempt(xi, depth):
        nonlocal prev, prev_xi
        pp = params.with_xi(xi)
        if prev is None:
            guess = linear_solution(pp, L=L)
        else:
            guess = QPSolution(prev.plus_sites, prev.m, dict(xi), prev.L, prev.j_max,
                               prev.ells, prev.coeffs.copy(), prev.omega_inf.copy())
        try:
            sol = solve_at(xi, guess)
        except NewtonDivergenceError as err:
            if depth >= max_halvings or prev_xi is None:
                failures.append((dict(xi), str(err)))
                return
            mid = {p: 0.5 * (prev_xi[p] + xi[p]) for p in xi}
            attempt(mid, depth + 1)
            attempt(xi, depth + 1)
            return
        path.append((dict(xi), sol, sol.meta["residual_collocation"],
                     sol.meta["iterations"]))
        prev, prev_xi = sol, dict(xi)

    for xi in xi_path:
        attempt(dict(xi), 0)
    return ContinuationResult(path, failures)


# ---------------------------------------------------------------------------
# finite-time Lyapunov exponent of the linearized flow
# ---------------------------------------------------------------------------

@dataclass
class LyapunovEstimate:
    chi: float                 # chi(T) at the final time
    T: float
    series: list               # (t, chi(t)) checkpoints
    bound_constant: float      # max over checkpoints t >= 100 of |chi| t / log t
    error_bar: float


def lyapunov_exponent(sol: QPSolution, params: ModelParams, g, T: float,
                      dt: float | None = None, grid_N: int | None = None,
                      renorm_every: float = 1.0, seed: int = 1,
                      base: str = "torus") -> LyapunovEstimate:
    """Top finite-time exponent of the variational flow along the solution.

    base="torus" linearizes along the quasi-periodic synthesis of ``sol``
    (the stability statement under test); base="integrate" co-integrates the
    nonlinear trajectory from the solution's initial data and linearizes
    along it (used for friction control experiments).
    """
    N = grid_N if grid_N is not None else params.grid_N
    x = x_grid(N)
    js = np.fft.fftfreq(N, d=1.0 / N)
    lam_max = math.sqrt((N / 2) ** 2 + max(params.m, 0.0))
    dt_stab = 2.0 * math.sqrt(2.0) / lam_max
    if dt is None:
        dt = 0.5 * dt_stab
    if dt > dt_stab:
        raise ValueError(f"dt {dt} exceeds the stability bound {dt_stab:.3g}")

    gspec = g if g is not None else NonlinearitySpec(leading=False)

    def dx_op(a):
        return np.fft.ifft(1j * js * np.fft.fft(a)).real

    def dxx_op(a):
        return np.fft.ifft(-(js ** 2) * np.fft.fft(a)).real

    rng = np.random.default_rng(seed)
    phi = np.zeros(N)
    psi = np.zeros(N)
    for j in range(0, 9):
        phi += rng.normal() * np.cos(j * x) + (rng.normal() * np.sin(j * x) if j else 0.0)
        psi += rng.normal() * np.cos(j * x) + (rng.normal() * np.sin(j * x) if j else 0.0)

    m = params.m

    def energy_norm(ph, ps):
        w = np.sqrt(np.mean(ps ** 2 + dx_op(ph) ** 2 + max(m, 1e-12) * ph ** 2))
        return float(w)

    nrm = energy_norm(phi, psi)
    phi /= nrm
    psi /= nrm

    cointegrate = base == "integrate"
    if cointegrate:
        y0, _, v0 = sol.fields_at(0.0, x)
        y, v = y0.copy(), v0.copy()

    def base_fields(t, y=None, v=None):
        if cointegrate:
            return y, dx_op(y), v
        return sol.fields_at(t, x)

    def var_rhs(t, ph, ps, yb=None, vb=None):
        yy, yyx, vv = base_fields(t, yb, vb)
        gy, gyx, gv = gspec.partials(x, yy, yyx, vv)
        return ps, dxx_op(ph) - m * ph + gy * ph + gyx * dx_op(ph) + gv * ps

    def full_rhs(t, y, v, ph, ps):
        gval = gspec(x, y, dx_op(y), v)
        dv = dxx_op(y) - m * y + gval
        dph, dps = var_rhs(t, ph, ps, y, v)
        return v, dv, dph, dps

    n_steps = int(round(T / dt))
    renorm_steps = max(1, int(round(renorm_every / dt)))
    log_sum = 0.0
    series = []
    checkpoints = set(np.unique(np.round(np.geomspace(10.0, T, 40) / dt).astype(int)))
    t = 0.0
    for step in range(1, n_steps + 1):
        if cointegrate:
            k1 = full_rhs(t, y, v, phi, psi)
            k2 = full_rhs(t + dt / 2, y + dt / 2 * k1[0], v + dt / 2 * k1[1],
                          phi + dt / 2 * k1[2], psi + dt / 2 * k1[3])
            k3 = full_rhs(t + dt / 2, y + dt / 2 * k2[0], v + dt / 2 * k2[1],
                          phi + dt / 2 * k2[2], psi + dt / 2 * k2[3])
            k4 = full_rhs(t + dt, y + dt * k3[0], v + dt * k3[1],
                          phi + dt * k3[2], psi + dt * k3[3])
            y = y + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            v = v + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            phi = phi + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            psi = psi + dt / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        else:
            k1 = var_rhs(t, phi, psi)
            k2 = var_rhs(t + dt / 2, phi + dt / 2 * k1[0], psi + dt / 2 * k1[1])
            k3 = var_rhs(t + dt / 2, phi + dt / 2 * k2[0], psi + dt / 2 * k2[1])
            k4 = var_rhs(t + dt, phi + dt * k3[0], psi + dt * k3[1])
            phi = phi + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            psi = psi + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t = step * dt
        if step % renorm_steps == 0 or step in checkpoints or step == n_steps:
            nrm = energy_norm(phi, psi)
            if nrm > 0:
                log_sum += math.log(nrm)
                phi /= nrm
                psi /= nrm
            if step in checkpoints or step == n_steps:
                series.append((t, log_sum / t))

    chi = series[-1][1] if series else log_sum / max(t, dt)
    consts = [abs(c) * tt / math.log(tt) for tt, c in series if tt >= 100.0]
    tail = [c for tt, c in series if tt >= T / 4]
    err = float(np.std(tail)) if len(tail) > 1 else abs(chi)
    return LyapunovEstimate(chi=chi, T=t, series=series,
                            bound_constant=max(consts) if consts else float("nan"),
                            error_bar=err)
