"""Normal-form machinery: homological solver, third-order frequency maps,
quasi-Toeplitz diagonals, Melnikov non-resonance scanning.

The homological equation  [N, F] + P = resonant part  is solved termwise by
dividing each monomial of P by the eigenvalue of the adjoint action of the
diagonal normal form N.  Monomials in the symmetrization-kernel families
have eigenvalue exactly zero and are returned as the resonant correction;
any other term whose divisor falls below the floor is surfaced in a
small-divisor report instead of being dropped silently.

The third-order step expands the leading cubic interaction of the wave
model in exponential modes, removes the non-resonant cubic monomials by one
homological step, and reads the first-order frequency maps

    omega_p(xi) = lambda_p + (A xi)_p,   Omega_j(xi) = lambda_j + B_j . xi

off the exactly resonant terms.  A is the twist matrix.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AlgebraError,
    Monomial,
    SiteSet,
    Truncation,
    VectorField,
    in_kernel_family,
    lie_bracket,
    momentum,
    monomial,
)
from .model import ModelParams, lambda_j

__all__ = [
    "NormalForm",
    "HomologicalResult",
    "ToeplitzDecomposition",
    "AsymptoticFit",
    "MelnikovReport",
    "extract_diagonal",
    "ad_eigenvalue",
    "solve_homological",
    "dnlw_cubic_field",
    "birkhoff_third_order",
    "frequency_correction",
    "normal_frequency_perturbation",
    "toeplitz_decompose",
    "asymptotic_fit",
    "melnikov_check",
    "melnikov_density",
]


class NormalFormError(ValueError):
    pass


# ---------------------------------------------------------------------------
# diagonal normal forms
# ---------------------------------------------------------------------------

@dataclass
class NormalForm:
    """Tangential/normal frequencies with their first-order amplitude maps."""

    sites: SiteSet
    m: float
    omega: dict                 # tangential j in I -> frequency (omega_{-j} = omega_j)
    Omega: dict                 # normal j, |j| <= j_max -> frequency (Omega_{-j} = Omega_j)
    twist: np.ndarray           # nu x nu, d omega_p / d xi_q over I+
    a_const: float
    j_max: int
    xi: dict | None = None
    base_omega: dict | None = None
    base_Omega: dict | None = None
    B: dict | None = None       # normal j -> d Omega_j / d xi (length-nu array)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for j in self.sites.ordering:
            if abs(self.omega[j] - self.omega[-j]) > 1e-12 * max(1.0, abs(self.omega[j])):
                raise NormalFormError("tangential frequencies must be even in the site index")
        for j in self.Omega:
            if -j in self.Omega and abs(self.Omega[j] - self.Omega[-j]) > 1e-12 * max(1.0, abs(self.Omega[j])):
                raise NormalFormError("normal frequencies must be even in the index")

    @property
    def nu(self) -> int:
        return len(self.sites.plus_sites)

    @property
    def twist_condition_number(self) -> float:
        return float(np.linalg.cond(self.twist)) if self.twist.size else float("nan")

    def omega_plus(self) -> np.ndarray:
        return np.array([self.omega[p] for p in self.sites.plus_sites])

    def normal_indices(self, positive_only: bool = True):
        js = sorted(j for j in self.Omega if j >= 0) if positive_only else sorted(self.Omega)
        return js

    def at_xi(self, xi: dict) -> "NormalForm":
        """Frequencies at another amplitude vector via the first-order maps."""
        if self.base_omega is None or self.B is None:
            raise NormalFormError("this normal form carries no amplitude maps")
        ps = self.sites.plus_sites
        vec = np.array([xi[p] for p in ps], dtype=float)
        omega = {}
        for d, p in enumerate(ps):
            val = self.base_omega[p] + float(self.twist[d] @ vec)
            omega[p] = omega[-p] = val
        Omega = {j: self.base_Omega[j] + float(self.B[j] @ vec) for j in self.Omega}
        return NormalForm(self.sites, self.m, omega, Omega, self.twist, self.a_const,
                          self.j_max, xi=dict(xi), base_omega=self.base_omega,
                          base_Omega=self.base_Omega, B=self.B, details=self.details)

    def to_vector_field(self, truncation: Truncation) -> VectorField:
        """The diagonal field omega d/dx - i Omega_j z_j d/dz_j + i Omega_j zbar_j d/dzbar_j."""
        terms = [monomial(self.omega[j], ("x", j), sites=self.sites)
                 for j in self.sites.ordering]
        for j in range(-truncation.j_max, truncation.j_max + 1):
            if j in self.sites:
                continue
            Om = self.Omega[j]
            terms.append(monomial(-1j * Om, ("z", j), alpha={j: 1}, sites=self.sites))
            terms.append(monomial(1j * Om, ("zbar", j), beta={j: 1}, sites=self.sites))
        return VectorField(self.sites, truncation, terms)

    def to_json(self) -> str:
        return json.dumps({
            "plus_sites": list(self.sites.plus_sites),
            "m": self.m,
            "j_max": self.j_max,
            "xi": {str(k): v for k, v in (self.xi or {}).items()},
            "omega": {str(k): v for k, v in self.omega.items()},
            "Omega": {str(k): v for k, v in self.Omega.items()},
            "twist": self.twist.tolist(),
            "twist_condition_number": self.twist_condition_number,
            "a_const": self.a_const,
            "B": {str(k): list(map(float, v)) for k, v in (self.B or {}).items()},
        }, indent=1)


def extract_diagonal(N: VectorField):
    """(omega, Omega) of a diagonal field; raises if N is not diagonal."""
    omega, Omega = {}, {}
    for t in N:
        kind, j = t.comp
        if kind == "x" and t.degree == 0 and t.k_order == 0:
            if abs(t.coeff.imag) > 1e-12 * max(1.0, abs(t.coeff)):
                raise NormalFormError("tangential frequency with nonreal coefficient")
            omega[j] = omega.get(j, 0.0) + t.coeff.real
        elif kind == "z" and t.k_order == 0 and not any(t.i) and not t.beta \
                and t.alpha == ((j, 1),):
            Om = (1j * t.coeff)
            _require_real(Om, "normal frequency")
            Omega[j] = Om.real
        elif kind == "zbar" and t.k_order == 0 and not any(t.i) and not t.alpha \
                and t.beta == ((j, 1),):
            Om = (-1j * t.coeff)
            _require_real(Om, "normal frequency")
            prev = Omega.get(j)
            if prev is not None and abs(prev - Om.real) > 1e-10 * max(1.0, abs(prev)):
                raise NormalFormError(f"inconsistent z/zbar frequencies at mode {j}")
            Omega[j] = Om.real
        else:
            raise NormalFormError(f"field is not diagonal: offending term {t}")
    return omega, Omega


def _require_real(c: complex, what: str, tol: float = 1e-12) -> None:
    if abs(c.imag) > tol * max(1.0, abs(c)):
        raise NormalFormError(f"{what} is not real: {c}")


def _closed_eigenvalue(omega: dict, Omega: dict, t: Monomial, sites: SiteSet) -> complex:
    """Eigenvalue of ad_N on the monomial t for diagonal N = (omega, Omega)."""
    ordering = sites.ordering
    dot = sum(omega.get(ordering[l], 0.0) * t.k[l] for l in range(sites.n))
    osc = sum(Omega[j] * e for j, e in t.alpha) - sum(Omega[j] * e for j, e in t.beta)
    kind, j = t.comp
    shift = 0.0
    if kind == "z":
        shift = Omega[j]
    elif kind == "zbar":
        shift = -Omega[j]
    return -1j * (dot - osc + shift)


def ad_eigenvalue(N: VectorField, t: Monomial, check: bool = True,
                  tol: float = 1e-10) -> complex:
    """d with lie_bracket(N, t) = d * t, for diagonal N.

    With check=True the bracket is evaluated and proportionality asserted;
    a non-diagonal N raises before any arithmetic.
    """
    omega, Omega = extract_diagonal(N)
    d = _closed_eigenvalue(omega, Omega, t, N.sites)
    if check:
        one = VectorField(N.sites, N.truncation, [t])
        br = lie_bracket(N, one)
        dev = br.max_coeff_delta(one * d)
        if dev > tol * max(1.0, abs(t.coeff) * abs(d)):
            raise NormalFormError(f"bracket with N is not proportional to the monomial (dev {dev:.3e})")
    return d


# ---------------------------------------------------------------------------
# homological equation
# ---------------------------------------------------------------------------

@dataclass
class HomologicalResult:
    F: VectorField
    resonant: VectorField
    skipped: list            # (Monomial, divisor) below the floor, outside the kernel
    divisor_floor: float
    min_divisor: float       # smallest divisor actually used in F

    @property
    def skipped_field(self) -> VectorField:
        return VectorField(self.F.sites, self.F.truncation, (t for t, _ in self.skipped))


def solve_homological(N, P: VectorField, divisor_floor: float = 1e-8) -> HomologicalResult:
    """Termwise solve of [N, F] + (P - resonant - skipped) = 0.

    ``resonant`` collects the kernel-family terms of P (for symmetrized P
    these are the constant-coefficient diagonal corrections of the normal
    form); every other monomial is divided by its ad-eigenvalue unless the
    divisor modulus falls below the floor, in which case it lands in
    ``skipped`` for inspection.
    """
    if isinstance(N, NormalForm):
        N = N.to_vector_field(P.truncation)
    omega, Omega = extract_diagonal(N)
    sites = P.sites
    f_terms, res_terms, skipped = [], [], []
    min_div = math.inf
    for t in P:
        if in_kernel_family(t, sites):
            res_terms.append(t)
            continue
        d = _closed_eigenvalue(omega, Omega, t, sites)
        if abs(d) < divisor_floor:
            skipped.append((t, d))
            continue
        min_div = min(min_div, abs(d))
        f_terms.append(t.scaled(-1.0 / d))
    return HomologicalResult(
        F=VectorField(sites, P.truncation, f_terms),
        resonant=VectorField(sites, P.truncation, res_terms),
        skipped=skipped,
        divisor_floor=divisor_floor,
        min_divisor=min_div,
    )


# ---------------------------------------------------------------------------
# third-order step for the leading cubic interaction
# ---------------------------------------------------------------------------

def _mode_sites() -> SiteSet:
    """Mode representation: no tangential coordinates, every index a normal mode."""
    return SiteSet(())


def dnlw_cubic_field(params: ModelParams, min_tangential: int = 2) -> VectorField:
    """Cubic interaction field of the leading term y y_x^2 in exponential modes.

    All indices live as normal modes (empty tangential chart); the modes of
    y split as ytilde_a = (z_a + zbar_{-a}) / (sqrt(2) lambda_a), and the
    cubic convolution produces, for target mode j,

        dz_j/dt += -i * b*c / (4 lambda_a lambda_b lambda_c) * (factor choice)

    over ordered triples a+b+c = j.  Only monomials with at least
    ``min_tangential`` factors on tangential indices are kept: terms with
    two or more normal factors cannot shift frequencies at first order in
    the amplitudes.
    """
    J = params.truncation.j_max
    msites = _mode_sites()
    trunc = Truncation(J, 0, 3)
    tang = [s * p for p in params.sites.plus_sites for s in (1, -1)]
    tset = set(tang)
    lam = {j: lambda_j(params.m, j) for j in range(-J, J + 1)}

    terms: list[Monomial] = []
    for sign, kindname in ((1.0, "z"), (-1.0, "zbar")):
        for j in range(-J, J + 1):
            target_sum = j if kindname == "z" else -j
            triples = set()
            for free_slot in range(3):
                for t1, t2 in itertools.product(tang, repeat=2):
                    free = target_sum - t1 - t2
                    if abs(free) > J:
                        continue
                    vals = [None, None, None]
                    others = [s for s in range(3) if s != free_slot]
                    vals[others[0]], vals[others[1]] = t1, t2
                    vals[free_slot] = free
                    triples.add(tuple(vals))
            for (a, b, c) in triples:
                if sum(1 for v in (a, b, c) if v in tset) < min_tangential:
                    continue
                base = -1j * sign * b * c / (4.0 * lam[abs(a)] * lam[abs(b)] * lam[abs(c)])
                for choice in itertools.product((0, 1), repeat=3):
                    alpha: dict[int, int] = {}
                    beta: dict[int, int] = {}
                    for v, ch in zip((a, b, c), choice):
                        if ch == 0:
                            alpha[v] = alpha.get(v, 0) + 1
                        else:
                            beta[-v] = beta.get(-v, 0) + 1
                    terms.append(monomial(base, (kindname, j), k=(), i=(),
                                          alpha=alpha, beta=beta))
    return VectorField(msites, trunc, terms)


def _mode_normal_form(params: ModelParams) -> VectorField:
    J = params.truncation.j_max
    msites = _mode_sites()
    trunc = Truncation(J, 0, 3)
    terms = []
    for j in range(-J, J + 1):
        lam = lambda_j(params.m, j)
        terms.append(monomial(-1j * lam, ("z", j), alpha={j: 1}))
        terms.append(monomial(1j * lam, ("zbar", j), beta={j: 1}))
    return VectorField(msites, trunc, terms)


def _exponent_profile(t: Monomial, plus_sites):
    """Per-positive-site (phase index, factor count) of a mode-representation term."""
    mu = {p: 0 for p in plus_sites}
    tot = {p: 0 for p in plus_sites}
    normal = []
    for j, e in t.alpha:
        if abs(j) in mu:
            mu[abs(j)] += e
            tot[abs(j)] += e
        else:
            normal.append((j, e, +1))
    for j, e in t.beta:
        if abs(j) in mu:
            mu[abs(j)] -= e
            tot[abs(j)] += e
        else:
            normal.append((j, e, -1))
    return mu, tot, normal


def birkhoff_third_order(params: ModelParams, divisor_floor: float = 1e-8) -> NormalForm:
    """One cubic normal-form step for the leading nonlinearity.

    Classifies the cubic monomials by the modulus of their ad-eigenvalue
    (combinations of the dispersion values; nonzero away from the resonant
    pairings for positive mass), removes the non-resonant ones by a single
    homological solve, and extracts the first-order frequency maps from the
    exactly resonant terms.  Resonant terms that do not match the expected
    integrable patterns are reported in details["unexpected"], which also
    flags near-resonances below the divisor floor at small mass.
    """
    ps = params.sites.plus_sites
    nu = len(ps)
    J = params.truncation.j_max
    X3 = dnlw_cubic_field(params)
    N2 = _mode_normal_form(params)
    hom = solve_homological(N2, X3, divisor_floor)

    A = np.zeros((nu, nu))
    Bmat = {j: np.zeros(nu) for j in range(-J, J + 1) if j not in params.sites}
    site_idx = {p: d for d, p in enumerate(ps)}
    unexpected = []

    for t, d in hom.skipped:
        kind, j = t.comp
        if kind != "z":
            continue  # zbar mirror of the z rows
        mu, tot, normal = _exponent_profile(t, ps)
        contrib = 1j * t.coeff
        if abs(j) in site_idx:
            # tangential target: all factors tangential, torus phase e^{i theta_|j|}
            p = abs(j)
            ok = not normal and all(mu[q] == (1 if q == p else 0) for q in ps)
            eta = {q: (tot[q] - (1 if q == p else 0)) for q in ps}
            ok = ok and all(v >= 0 and v % 2 == 0 for v in eta.values()) \
                and sum(eta.values()) == 2
            if not ok:
                unexpected.append((t, d))
                continue
            q = next(qq for qq, v in eta.items() if v == 2)
            _require_real(contrib, "tangential frequency shift")
            if j > 0:
                A[site_idx[p], site_idx[q]] += contrib.real
            # negative targets mirror the positive rows; verified below
        else:
            ok = (len(normal) == 1 and normal[0] == (j, 1, +1)
                  and all(mu[q] == 0 for q in ps) and sum(tot.values()) == 2)
            if not ok:
                unexpected.append((t, d))
                continue
            q = next(qq for qq, v in tot.items() if v == 2)
            _require_real(contrib, "normal frequency shift")
            Bmat[j][site_idx[q]] += contrib.real

    # mirror-symmetry sanity: rows extracted from targets -p must agree
    neg_rows = np.zeros((nu, nu))
    for t, d in hom.skipped:
        kind, j = t.comp
        if kind != "z" or abs(j) not in site_idx or j > 0:
            continue
        mu, tot, normal = _exponent_profile(t, ps)
        p = abs(j)
        if normal or any(mu[q] != (1 if q == p else 0) for q in ps):
            continue
        eta = {q: tot[q] - (1 if q == p else 0) for q in ps}
        if all(v >= 0 and v % 2 == 0 for v in eta.values()) and sum(eta.values()) == 2:
            q = next(qq for qq, v in eta.items() if v == 2)
            neg_rows[site_idx[p], site_idx[q]] += (1j * t.coeff).real
    if not np.allclose(neg_rows, A, rtol=0, atol=1e-10):
        raise NormalFormError("frequency rows from mirrored targets disagree")

    for j in Bmat:
        if -j in Bmat and not np.allclose(Bmat[j], Bmat[-j], rtol=0, atol=1e-10):
            raise NormalFormError("normal frequency maps are not even in the index")

    xi_vec = params.xi_vector
    base_omega = {}
    omega = {}
    for d_, p in enumerate(ps):
        lam = lambda_j(params.m, p)
        base_omega[p] = base_omega[-p] = lam
        omega[p] = omega[-p] = lam + float(A[d_] @ xi_vec)
    base_Omega = {j: lambda_j(params.m, j) for j in Bmat}
    Omega = {j: base_Omega[j] + float(Bmat[j] @ xi_vec) for j in Bmat}

    window = (8, min(32, J))
    fit = asymptotic_fit(Omega, params.m, window)

    details = {
        "unexpected": unexpected,
        "n_resonant": len(hom.skipped),
        "n_removed": len(hom.F),
        "min_divisor": hom.min_divisor,
        "divisor_floor": divisor_floor,
        "asymptotic_fit": fit,
        "resonant_field": hom.skipped_field,
        "cubic_field": X3,
    }
    return NormalForm(params.sites, params.m, omega, Omega, A, fit.a_const, J,
                      xi=dict(params.xi), base_omega=base_omega,
                      base_Omega=base_Omega, B=Bmat, details=details)


# ---------------------------------------------------------------------------
# frequency corrections from a symmetrized perturbation
# ---------------------------------------------------------------------------

def frequency_correction(P: VectorField, nf: NormalForm, tol: float = 1e-12) -> NormalForm:
    """Updated normal frequencies Omega_j + i P^{z_j, z_j}.

    P^{z_j,z_j} is the x-average of d/dz_j of the z_j-component at the
    origin, i.e. the coefficient of the k = 0, z_j d/dz_j term of the
    symmetrized P.  The real-coefficients class makes i P^{z_j,z_j} real;
    a nonreal correction raises.
    """
    Omega = dict(nf.Omega)
    for t in P:
        kind, j = t.comp
        if kind != "z" or t.k_order != 0 or any(t.i) or t.beta or t.alpha != ((j, 1),):
            continue
        corr = 1j * t.coeff
        if abs(corr.imag) > tol * max(1.0, abs(corr)):
            raise NormalFormError(f"nonreal frequency correction i*{t.coeff} at mode {j}")
        if j in Omega:
            Omega[j] = Omega[j] + corr.real
    return NormalForm(nf.sites, nf.m, dict(nf.omega), Omega, nf.twist, nf.a_const,
                      nf.j_max, xi=nf.xi, base_omega=nf.base_omega,
                      base_Omega=nf.base_Omega, B=nf.B, details=nf.details)


def normal_frequency_perturbation(resonant_modes: VectorField, params: ModelParams) -> VectorField:
    """Restrict a mode-representation resonant cubic field to the torus.

    Tangential pairs z_a zbar_a are replaced by the actions xi_|a|, turning
    z_a zbar_a z_j d/dz_j terms into k = 0 linear terms xi_|a| z_j d/dz_j on
    the reduced phase space; everything else is discarded.  Feeding the
    result to ``frequency_correction`` reproduces the first-order normal
    frequency map.
    """
    sites = params.sites
    trunc = params.truncation
    terms = []
    for t in resonant_modes:
        kind, j = t.comp
        if kind != "z" or j in sites or abs(j) > trunc.j_max:
            continue
        mu, tot, normal = _exponent_profile(t, sites.plus_sites)
        if len(normal) != 1 or normal[0] != (j, 1, +1) or any(mu[q] for q in mu):
            continue
        q = next((qq for qq, v in tot.items() if v == 2), None)
        if q is None:
            continue
        terms.append(monomial(t.coeff * params.xi[q], ("z", j), alpha={j: 1}, sites=sites))
    return VectorField(sites, trunc, terms)


# ---------------------------------------------------------------------------
# quasi-Toeplitz diagonal and frequency asymptotics
# ---------------------------------------------------------------------------

@dataclass
class ToeplitzDecomposition:
    T_value: float
    R_diag: dict
    fit_window: tuple
    certificate: float          # sup_j |j R_j| over the window
    fit_residual: float
    non_toeplitz_warning: bool


def toeplitz_decompose(diag: dict, window: tuple, warn_threshold: float = 1e-2) -> ToeplitzDecomposition:
    """Split a diagonal into a constant plus an O(1/j) remainder.

    The constant is fitted on the upper half of the index window (least
    squares against {1, 1/j}) to decouple it from the 1/j tail; the
    remainder certificate is sup |j R_j| over the whole window.
    """
    lo, hi = window
    js = [j for j in sorted(diag) if lo <= j <= hi]
    if len(js) < 8:
        raise NormalFormError("Toeplitz fit needs at least 8 indices in the window")
    upper = js[len(js) // 2:]
    Amat = np.stack([np.ones(len(upper)), 1.0 / np.array(upper, dtype=float)], axis=1)
    yvec = np.array([diag[j] for j in upper])
    coef, res, *_ = np.linalg.lstsq(Amat, yvec, rcond=None)
    T = float(coef[0])
    fit_res = float(np.sqrt(np.mean((Amat @ coef - yvec) ** 2)))
    R = {j: diag[j] - T for j in js}
    cert = max(abs(j * R[j]) for j in js)
    scale = max(1.0, max(abs(v) for v in yvec))
    return ToeplitzDecomposition(T, R, (lo, hi), cert, fit_res,
                                 fit_res > warn_threshold * scale)


@dataclass
class AsymptoticFit:
    a_const: float
    sup_j_residual: float       # sup_j |j r_j|
    rows: list                  # (j, Omega_j, j * r_j)
    window: tuple


def asymptotic_fit(Omega: dict, m: float, window: tuple) -> AsymptoticFit:
    """Fit Omega_j = j + a + m/(2j) + r_j over a window of positive modes.

    The constant is identified from Omega_j - lambda_j (least squares
    against {1, 1/j}), which vanishes identically for the unperturbed
    frequencies, so the unperturbed fit returns a = 0 exactly and the
    residual reduces to the dispersion tail lambda_j - j - m/(2j).
    """
    lo, hi = window
    js = [j for j in sorted(Omega) if lo <= j <= hi and j > 0]
    if len(js) < 4:
        raise NormalFormError("asymptotic fit needs at least 4 positive modes in the window")
    jarr = np.array(js, dtype=float)
    delta = np.array([Omega[j] - lambda_j(m, j) for j in js])
    Amat = np.stack([np.ones(len(js)), 1.0 / jarr], axis=1)
    coef, *_ = np.linalg.lstsq(Amat, delta, rcond=None)
    a = float(coef[0])
    rows = []
    sup = 0.0
    for j in js:
        r = Omega[j] - j - a - m / (2.0 * j)
        rows.append((j, Omega[j], j * r))
        sup = max(sup, abs(j * r))
    return AsymptoticFit(a, sup, rows, (lo, hi))


# ---------------------------------------------------------------------------
# Melnikov conditions
# ---------------------------------------------------------------------------

@dataclass
class MelnikovReport:
    gamma: float
    tau: float
    checked: int
    violations: list            # (k, i, j, value)
    density: float
    n_samples: int = 1
    scale: float | None = None

    @property
    def passed(self) -> bool:
        return not self.violations


def _reduced_k_lattice(nu: int, k_max: int):
    """Nonzero reduced Fourier offsets: omega.k depends on k only through the
    per-site sums k_p + k_{-p}, so one condition per reduced vector suffices
    (at the minimal representative length |k|_1)."""
    ks = [k for k in itertools.product(range(-k_max, k_max + 1), repeat=nu)
          if 0 < sum(abs(c) for c in k) <= k_max]
    return np.array(ks, dtype=float), np.array([sum(abs(c) for c in k) for k in ks], dtype=float)


def melnikov_check(nf: NormalForm, gamma: float, tau: float, k_max: int,
                   j_max: int, max_violations: int = 200) -> MelnikovReport:
    """Second-order non-resonance conditions
    |omega . k + Omega_i - Omega_j| >= gamma / (1 + |k|^tau).

    k runs over the reduced lattice (nonzero, |k|_1 <= k_max) against all
    normal pairs (i, j); the k = 0 stratum (reachable from nonzero raw k
    with minimal length 2) is checked for i != j only, since (k = 0, i = j)
    labels the symmetrization-kernel families whose divisor is identically
    zero and which carry no condition.
    """
    if gamma <= 0 or tau <= 1:
        raise NormalFormError("need gamma > 0 and tau > 1")
    ow = nf.omega_plus()
    js = np.array([j for j in nf.normal_indices() if j <= j_max], dtype=int)
    Om = np.array([nf.Omega[j] for j in js])
    D = Om[:, None] - Om[None, :]

    violations = []
    checked = 0

    K, Kn = _reduced_k_lattice(nf.nu, k_max)
    dots = K @ ow
    thr = gamma / (1.0 + Kn ** tau)
    vals = np.abs(dots[:, None, None] + D[None, :, :])
    mask = vals < thr[:, None, None]
    checked += vals.size
    if np.any(mask):
        for ki, ii, jj in np.argwhere(mask)[:max_violations]:
            violations.append((tuple(int(c) for c in K[ki]), int(js[ii]), int(js[jj]),
                               float(dots[ki] + D[ii, jj])))

    # k = 0 with i != j: |Omega_i - Omega_j| >= gamma (the strongest RHS; it
    # dominates the gamma/(1+2^tau) bound of the nonzero raw representatives)
    off = ~np.eye(len(js), dtype=bool)
    vals0 = np.abs(D[off])
    checked += vals0.size
    for flat in np.flatnonzero(vals0 < gamma)[:max_violations]:
        ii, jj = np.argwhere(off)[flat]
        violations.append(((0,) * nf.nu, int(js[ii]), int(js[jj]), float(D[ii, jj])))

    return MelnikovReport(gamma, tau, checked, violations[:max_violations],
                          1.0 if not violations else 0.0)


def _halton(n: int, dim: int, skip: int = 20) -> np.ndarray:
    primes = (2, 3, 5, 7, 11, 13, 17, 19)[:dim]
    out = np.empty((n, dim))
    for d, p in enumerate(primes):
        for i in range(n):
            idx = i + 1 + skip
            f, r = 1.0, 0.0
            while idx > 0:
                f /= p
                r += f * (idx % p)
                idx //= p
            out[i, d] = r
    return out


def melnikov_density(nf: NormalForm, scales, n_samples: int = 1000,
                     gamma: float = 1e-2, tau: float | None = None,
                     k_max: int = 16, j_max: int | None = None,
                     halton_skip: int = 20) -> list[MelnikovReport]:
    """Fraction of amplitude boxes (0, scale]^nu passing all conditions.

    Uses the first-order frequency maps of the normal form over a Halton
    sequence (deterministic; ``halton_skip`` offsets into the sequence so
    parallel chunks partition it); one report per box scale.
    """
    if nf.B is None or nf.base_omega is None:
        raise NormalFormError("density scan needs the amplitude maps of the normal form")
    nu = nf.nu
    if tau is None:
        tau = 2.0 * (2 * nu + 1)
    if j_max is None:
        j_max = nf.j_max
    ps = nf.sites.plus_sites
    js = np.array([j for j in nf.normal_indices() if j <= j_max], dtype=int)
    lamN = np.array([nf.base_Omega[j] for j in js])
    Bm = np.stack([nf.B[j] for j in js])            # (n_j, nu)
    lamT = np.array([nf.base_omega[p] for p in ps])
    A = nf.twist

    K, Kn = _reduced_k_lattice(nu, k_max)
    thr = gamma / (1.0 + Kn ** tau)
    n_per_sample = K.shape[0] * len(js) ** 2 + len(js) * (len(js) - 1)

    unit = _halton(n_samples, nu, skip=halton_skip)
    reports = []
    for scale in scales:
        xi_samples = unit * scale
        good = 0
        first_viol = []
        for srow in xi_samples:
            ow = lamT + A @ srow
            Om = lamN + Bm @ srow
            D = Om[:, None] - Om[None, :]
            dots = K @ ow
            vals = np.abs(dots[:, None, None] + D[None, :, :])
            ok = not np.any(vals < thr[:, None, None])
            if ok:
                off = np.abs(D[~np.eye(len(js), dtype=bool)])
                ok = not np.any(off < gamma)
            if ok:
                good += 1
            elif len(first_viol) < 20:
                ki = np.argwhere(vals < thr[:, None, None])
                if ki.size:
                    a, b, c = ki[0]
                    first_viol.append((tuple(int(x) for x in K[a]), int(js[b]), int(js[c]),
                                       float(dots[a] + D[b, c])))
        reports.append(MelnikovReport(gamma, tau, n_samples * n_per_sample, first_viol,
                                      good / max(1, n_samples), n_samples, scale))
    return reports
