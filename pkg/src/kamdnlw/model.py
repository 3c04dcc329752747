"""Derivative wave equation on the circle and its changes of variables.

The model is  y_tt - y_xx + m y = g(x, y, y_x, y_t)  with mass m > 0 and a
nonlinearity that is even in the velocity, invariant under
(x, y_x) -> (-x, -y_x), and vanishing at least quadratically at the
origin; the leading term is y * y_x^2.  This module holds the parameter
bundle, the symmetry checks on g, the complex/Fourier coordinates
u+- = (D y +- i v)/sqrt(2) with D = sqrt(-d_xx + m), the explicit
quasi-periodic solutions of the linear equation, and the action-angle
embedding of the tangential modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import SiteSet, Truncation

__all__ = [
    "GTerm",
    "NonlinearitySpec",
    "GSymmetryReport",
    "ModelParams",
    "FieldState",
    "lambda_j",
    "check_g_symmetries",
    "x_grid",
    "to_complex",
    "from_complex",
    "state_to_csv",
    "state_from_csv",
    "fourier_g",
    "linear_solution",
    "action_angle_embed",
]


class ModelError(ValueError):
    pass


def lambda_j(m: float, j) -> float | np.ndarray:
    """Linear dispersion sqrt(j^2 + m); eigenvalues of D = sqrt(-d_xx + m)."""
    if np.any(np.asarray(m) <= 0):
        raise ModelError("mass must be positive")
    return np.sqrt(np.asarray(j, dtype=float) ** 2 + m) if np.ndim(j) else math.sqrt(j * j + m)


# ---------------------------------------------------------------------------
# nonlinearity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GTerm:
    """One real monomial term  coeff * trig(q x) * y^dy * y_x^dyx * v^dv."""

    coeff: float
    q: int = 0
    trig: str = "cos"
    dy: int = 0
    dyx: int = 0
    dv: int = 0

    def __post_init__(self):
        if self.trig not in ("cos", "sin"):
            raise ModelError("trig must be 'cos' or 'sin'")
        if min(self.dy, self.dyx, self.dv) < 0:
            raise ModelError("negative exponent in nonlinearity term")

    @property
    def degree(self) -> int:
        return self.dy + self.dyx + self.dv

    def _spatial(self, x):
        if self.q == 0:
            return 1.0 if self.trig == "cos" else 0.0
        return np.cos(self.q * x) if self.trig == "cos" else np.sin(self.q * x)

    def __call__(self, x, y, yx, v):
        return self.coeff * self._spatial(x) * y ** self.dy * yx ** self.dyx * v ** self.dv


@dataclass(frozen=True)
class NonlinearitySpec:
    """g as a finite list of real monomial terms.

    ``leading`` switches the distinguished cubic term y * y_x^2 on; ``hot``
    holds further terms.  ``validate`` reports which structural hypotheses
    (evenness in v, x/y_x parity, quadratic vanishing) a term list violates;
    construction itself never raises, so counterexample nonlinearities can
    be built and fed to the certificates.
    """

    leading: bool = True
    hot: tuple[GTerm, ...] = ()

    def terms(self) -> tuple[GTerm, ...]:
        lead = (GTerm(1.0, 0, "cos", dy=1, dyx=2, dv=0),) if self.leading else ()
        return lead + tuple(self.hot)

    @property
    def is_zero(self) -> bool:
        return not self.terms()

    @property
    def max_degree(self) -> int:
        return max((t.degree for t in self.terms()), default=0)

    def __call__(self, x, y, yx, v):
        if not self.terms():
            return 0.0 * np.asarray(y, dtype=float)
        out = 0.0
        for t in self.terms():
            out = out + t(x, y, yx, v)
        return out

    def partials(self, x, y, yx, v):
        """(dg/dy, dg/dy_x, dg/dv) evaluated termwise; exact for monomials."""
        gy = gyx = gv = 0.0
        for t in self.terms():
            sp = t.coeff * t._spatial(x)
            if t.dy:
                gy = gy + sp * t.dy * y ** (t.dy - 1) * yx ** t.dyx * v ** t.dv
            if t.dyx:
                gyx = gyx + sp * y ** t.dy * t.dyx * yx ** (t.dyx - 1) * v ** t.dv
            if t.dv:
                gv = gv + sp * y ** t.dy * yx ** t.dyx * t.dv * v ** (t.dv - 1)
        zero = 0.0 * np.asarray(y, dtype=float)
        return gy + zero, gyx + zero, gv + zero

    def validate(self) -> list[str]:
        issues = []
        for t in self.terms():
            if t.dv % 2 != 0:
                issues.append(f"term {t} is odd in v (velocity-evenness fails)")
            parity = (1 if t.trig == "cos" else -1) * (-1) ** t.dyx
            if parity != 1:
                issues.append(f"term {t} breaks the (x, y_x) -> (-x, -y_x) parity")
            if t.degree < 2:
                issues.append(f"term {t} does not vanish quadratically at 0")
        return issues


@dataclass(frozen=True)
class GSymmetryReport:
    even_in_v: bool
    parity_x: bool
    max_dev_even_v: float
    max_dev_parity: float

    @property
    def passed(self) -> bool:
        return self.even_in_v and self.parity_x


def check_g_symmetries(g, n_points: int = 100, seed: int = 0,
                       tol: float = 1e-12) -> GSymmetryReport:
    """Numerical check of g(x,y,y_x,-v) = g(x,y,y_x,v) and
    g(-x,y,-y_x,v) = g(x,y,y_x,v) at random points."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 2 * math.pi, n_points)
    y, yx, v = (rng.uniform(-0.7, 0.7, n_points) for _ in range(3))
    base = g(x, y, yx, v)
    dev_v = float(np.max(np.abs(g(x, y, yx, -v) - base)))
    dev_p = float(np.max(np.abs(g(-x, y, -yx, v) - base)))
    return GSymmetryReport(dev_v <= tol, dev_p <= tol, dev_v, dev_p)


# ---------------------------------------------------------------------------
# parameters and grid states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    m: float
    sites: SiteSet
    xi: dict
    grid_N: int
    truncation: Truncation
    allow_zero_mass: bool = False

    def __post_init__(self):
        if self.m < 0 or (self.m == 0 and not self.allow_zero_mass):
            raise ModelError("mass must be positive")
        if set(self.xi) != set(self.sites.plus_sites):
            raise ModelError("amplitudes must be indexed by the tangential sites")
        if any(v <= 0 for v in self.xi.values()):
            raise ModelError("amplitudes must be positive")
        N = self.grid_N
        if N < 4 or (N & (N - 1)) != 0:
            raise ModelError("grid size must be a power of two")
        if N < 4 * self.truncation.j_max:
            raise ModelError("grid size must be at least 4 * j_max")

    def with_xi(self, xi: dict) -> "ModelParams":
        return ModelParams(self.m, self.sites, dict(xi), self.grid_N,
                           self.truncation, self.allow_zero_mass)

    @property
    def xi_vector(self) -> np.ndarray:
        return np.array([self.xi[p] for p in self.sites.plus_sites], dtype=float)


def x_grid(N: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(N) / N


@dataclass
class FieldState:
    """Real samples of (y, v) = (y, y_t) on the uniform spatial grid."""

    y: np.ndarray
    v: np.ndarray
    representation: str = "grid"

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.y.shape != self.v.shape or self.y.ndim != 1:
            raise ModelError("y and v must be 1-d arrays of equal length")

    @property
    def N(self) -> int:
        return self.y.size

    @classmethod
    def zeros(cls, N: int) -> "FieldState":
        return cls(np.zeros(N), np.zeros(N))

    def copy(self) -> "FieldState":
        return FieldState(self.y.copy(), self.v.copy())


def state_to_csv(state: FieldState) -> str:
    """Grid snapshot as CSV with columns x, y, v."""
    lines = ["x,y,v"]
    x = x_grid(state.N)
    for i in range(state.N):
        lines.append(f"{float(x[i])!r},{float(state.y[i])!r},{float(state.v[i])!r}")
    return "\n".join(lines) + "\n"


def state_from_csv(text: str) -> FieldState:
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    if not lines or lines[0].split(",") != ["x", "y", "v"]:
        raise ModelError("state CSV must have columns x,y,v")
    vals = np.array([[float(c) for c in l.split(",")] for l in lines[1:]])
    return FieldState(vals[:, 1], vals[:, 2])


def _fft_modes(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, d=1.0 / N)  # integer mode numbers in fft layout


def _flip(a: np.ndarray) -> np.ndarray:
    """Index map j -> -j in fft layout."""
    return np.roll(a[::-1], 1)


def to_complex(state: FieldState, m: float):
    """(u+, u-) Fourier coefficient arrays (fft layout).

    u+ = (D y + i v)/sqrt(2) expanded in e^{+ijx}; u- = (D y - i v)/sqrt(2)
    expanded in e^{-ijx}, so that on real states u-_j = conj(u+_j).
    """
    N = state.N
    js = _fft_modes(N)
    lam = np.sqrt(js ** 2 + m)
    yh = np.fft.fft(state.y) / N
    vh = np.fft.fft(state.v) / N
    uplus = (lam * yh + 1j * vh) / math.sqrt(2.0)
    uminus = (lam * _flip(yh) - 1j * _flip(vh)) / math.sqrt(2.0)
    return uplus, uminus


def from_complex(uplus: np.ndarray, uminus: np.ndarray, m: float,
                 reality_tol: float = 1e-9) -> FieldState:
    """Inverse of ``to_complex``; requires coefficients of a real state."""
    N = uplus.size
    js = _fft_modes(N)
    lam = np.sqrt(js ** 2 + m)
    if np.any(lam == 0):
        raise ModelError("massless inversion undefined at the zero mode")
    um = _flip(uminus)
    yh = (uplus + um) / (math.sqrt(2.0) * lam)
    vh = -1j * (uplus - um) / math.sqrt(2.0)
    y = np.fft.ifft(yh * N)
    v = np.fft.ifft(vh * N)
    dev = max(np.max(np.abs(y.imag)), np.max(np.abs(v.imag)))
    scale = max(1.0, np.max(np.abs(y.real)), np.max(np.abs(v.real)))
    if dev > reality_tol * scale:
        raise ModelError(f"coefficients are not those of a real state (dev {dev:.3e})")
    return FieldState(y.real, v.real)


def fourier_g(uplus: np.ndarray, uminus: np.ndarray, g, m: float,
              pad_factor: int = 2):
    """Fourier components of the nonlinearity in the complex variables.

    Evaluates g on a zero-padded grid (factor >= 2: exact for cubic g) and
    projects onto the retained band; returns (g+_j, g-_j) with
    g-_j = g+_{-j} enforced structurally.
    """
    N = uplus.size
    deg = getattr(g, "max_degree", 3)
    if pad_factor < (deg + 1) / 2:
        raise ModelError(
            f"aliasing budget exceeded: degree {deg} needs pad factor >= {(deg + 1) / 2}")
    M = pad_factor * N
    js = _fft_modes(N)
    lam = np.sqrt(js ** 2 + m)
    if np.any(lam == 0):
        raise ModelError("massless transform undefined at the zero mode")
    um = _flip(uminus)
    yh = (uplus + um) / (math.sqrt(2.0) * lam)
    vh = -1j * (uplus - um) / math.sqrt(2.0)

    def pad(spec):
        out = np.zeros(M, dtype=complex)
        half = N // 2
        out[:half] = spec[:half]
        out[M - half:] = spec[N - half:]
        return out

    yhp = pad(yh)
    vhp = pad(vh)
    kp = _fft_modes(M)
    x = x_grid(M)
    y = np.fft.ifft(yhp * M)
    yx = np.fft.ifft(1j * kp * yhp * M)
    v = np.fft.ifft(vhp * M)
    if max(np.max(np.abs(y.imag)), np.max(np.abs(v.imag))) < 1e-13 * max(1.0, np.max(np.abs(y.real))):
        y, yx, v = y.real, yx.real, v.real
    gvals = g(x, y, yx, v)
    gh = np.fft.fft(np.asarray(gvals, dtype=complex)) / M
    band = np.zeros(N, dtype=complex)
    half = N // 2
    band[:half] = gh[:half]
    band[N - half:] = gh[M - half:]
    gplus = band / math.sqrt(2.0)
    gminus = _flip(gplus)
    return gplus, gminus


def linear_solution(params: ModelParams, L: int = 6):
    """Quasi-periodic standing waves of the linear equation:
    y = sum_j sqrt(8 xi_j)/lambda_j * cos(lambda_j t) cos(j x)."""
    from .qp import QPSolution, basis_ells

    ps = params.sites.plus_sites
    nu = len(ps)
    ells = basis_ells(nu, L)
    coeffs = np.zeros((len(ells), params.truncation.j_max + 1))
    omega = np.array([lambda_j(params.m, p) for p in ps]) if params.m > 0 else \
        np.array([float(p) for p in ps])
    index = {ell: r for r, ell in enumerate(ells)}
    for d, p in enumerate(ps):
        unit = tuple(1 if dd == d else 0 for dd in range(nu))
        lam = omega[d]
        coeffs[index[unit], p] = math.sqrt(8.0 * params.xi[p]) / lam
    return QPSolution(plus_sites=ps, m=params.m, xi=dict(params.xi), L=L,
                      j_max=params.truncation.j_max, ells=ells,
                      coeffs=coeffs, omega_inf=omega)


def action_angle_embed(params: ModelParams, x_angles, y_actions, z: dict, zbar: dict):
    """Tangential action-angle chart:
    u+_j = sqrt(xi_|j| + y_j) e^{+i x_j}, u-_j = sqrt(xi_|j|+y_j) e^{-i x_j}
    for tangential j, identity (z_j, zbar_j) on normal modes.  Returns fft-layout
    coefficient arrays of length grid_N."""
    sites = params.sites
    n = sites.n
    if len(x_angles) != n or len(y_actions) != n:
        raise ModelError("angles/actions must match the site enumeration")
    N = params.grid_N
    uplus = np.zeros(N, dtype=complex)
    uminus = np.zeros(N, dtype=complex)
    for l, j in enumerate(sites.ordering):
        xi = params.xi[abs(j)]
        yj = y_actions[l]
        if abs(yj) >= xi:
            raise ModelError(f"action |y_{j}| = {abs(yj):.3g} leaves the chart (xi = {xi:.3g})")
        amp = np.sqrt(xi + yj)
        uplus[j % N] = amp * np.exp(1j * x_angles[l])
        uminus[j % N] = amp * np.exp(-1j * x_angles[l])
    for j, val in z.items():
        if j in sites or abs(j) > params.truncation.j_max:
            raise ModelError(f"normal index {j} outside truncation")
        uplus[j % N] = val
    for j, val in zbar.items():
        if j in sites or abs(j) > params.truncation.j_max:
            raise ModelError(f"normal index {j} outside truncation")
        uminus[j % N] = val
    return uplus, uminus


def angles_from_complex(params: ModelParams, uplus: np.ndarray, uminus: np.ndarray):
    """Inverse chart on the real subspace: angles, actions and normal modes."""
    sites = params.sites
    N = params.grid_N
    x_angles, y_actions = [], []
    for j in sites.ordering:
        up = uplus[j % N]
        um = uminus[j % N]
        y_actions.append((up * um).real - params.xi[abs(j)])
        x_angles.append(math.atan2(up.imag, up.real))
    z, zbar = {}, {}
    for j in range(-params.truncation.j_max, params.truncation.j_max + 1):
        if j in sites:
            continue
        z[j] = uplus[j % N]
        zbar[j] = uminus[j % N]
    return tuple(x_angles), tuple(y_actions), z, zbar
