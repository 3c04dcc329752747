"""Sparse Taylor-Fourier monomial vector fields with exact exponent arithmetic.

A field is a finite sum of monomials

    c * exp(i k.x) * y^i * z^alpha * zbar^beta * d/d(component)

on a phase space with tangential angle/action pairs (x_j, y_j) indexed by a
symmetric site set I = I+ u (-I+) and normal modes (z_j, zbar_j) indexed by
j in Z \\ I up to a cutoff.  Exponents and Fourier indices are exact
integers; coefficients are complex floats.  The monomial key
(component, k, i, alpha, beta) is canonical, so structural predicates
(reversibility, reality, momentum projections) are exact set operations.

All values are immutable after construction and every operation is pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

__all__ = [
    "SiteSet",
    "Truncation",
    "Monomial",
    "NormContext",
    "VectorField",
    "Point",
    "Tangent",
    "momentum",
    "lie_bracket",
    "apply_involution",
    "check_reversible",
    "check_involution_equivariant",
    "check_real_coefficients",
    "symmetrize",
    "project_momentum",
    "majorant_norm",
    "evaluate",
    "momentum_field",
]

COEFF_TOL = 1e-12  # absolute tolerance for structural predicates on coefficients


class AlgebraError(ValueError):
    """Contract violation in the monomial algebra."""


@dataclass(frozen=True)
class SiteSet:
    """Symmetric set of tangential sites I = I+ u (-I+).

    The fixed enumeration interleaves sign pairs:
    ordering = (p1, -p1, p2, -p2, ...) with plus_sites sorted increasingly.
    Coordinate slot 2m pairs with slot 2m+1 under j -> -j.
    """

    plus_sites: tuple[int, ...]

    def __post_init__(self):
        ps = tuple(sorted(set(int(p) for p in self.plus_sites)))
        if any(p <= 0 for p in ps):
            raise AlgebraError("tangential sites must be positive integers")
        object.__setattr__(self, "plus_sites", ps)

    @property
    def ordering(self) -> tuple[int, ...]:
        return tuple(s * p for p in self.plus_sites for s in (1, -1))

    @property
    def n(self) -> int:
        return 2 * len(self.plus_sites)

    def slot(self, j: int) -> int:
        """Coordinate slot of site j in the fixed enumeration."""
        p = abs(j)
        try:
            m = self.plus_sites.index(p)
        except ValueError:
            raise AlgebraError(f"{j} is not a tangential site") from None
        return 2 * m + (0 if j > 0 else 1)

    def conj_slot(self, l: int) -> int:
        """Slot of -j given the slot of j."""
        return l ^ 1

    def __contains__(self, j: int) -> bool:
        return abs(j) in self.plus_sites

    def is_odd_k(self, k: tuple[int, ...]) -> bool:
        """Whether k lies in the resonant lattice {k : k_{-j} = -k_j}."""
        return all(k[2 * m + 1] == -k[2 * m] for m in range(len(self.plus_sites)))


@dataclass(frozen=True)
class Truncation:
    """Cutoffs: normal-mode index, l1 Fourier order, total polynomial degree."""

    j_max: int
    k_max: int
    d_max: int


Component = tuple[str, int]  # ("x"|"y"|"z"|"zbar", index)

_COMPONENT_KINDS = ("x", "y", "z", "zbar")


@dataclass(frozen=True)
class Monomial:
    """One Taylor-Fourier monomial vector-field term.

    alpha and beta are sorted tuples of (index, exponent) pairs with
    positive exponents; i has one entry per tangential coordinate slot.
    """

    coeff: complex
    k: tuple[int, ...]
    i: tuple[int, ...]
    alpha: tuple[tuple[int, int], ...]
    beta: tuple[tuple[int, int], ...]
    comp: Component

    def key(self):
        return (self.comp, self.k, self.i, self.alpha, self.beta)

    @property
    def degree(self) -> int:
        """Total polynomial degree in (y, z, zbar)."""
        return (
            sum(self.i)
            + sum(e for _, e in self.alpha)
            + sum(e for _, e in self.beta)
        )

    @property
    def k_order(self) -> int:
        return sum(abs(c) for c in self.k)

    def scaled(self, factor: complex) -> "Monomial":
        return Monomial(self.coeff * factor, self.k, self.i, self.alpha, self.beta, self.comp)


def _as_pairs(m) -> tuple[tuple[int, int], ...]:
    if isinstance(m, dict):
        items = m.items()
    else:
        items = m
    pairs = tuple(sorted((int(j), int(e)) for j, e in items if e != 0))
    if any(e < 0 for _, e in pairs):
        raise AlgebraError("negative exponent")
    return pairs


def monomial(coeff, comp, k=(), i=(), alpha=(), beta=(), sites: SiteSet | None = None) -> Monomial:
    """Convenience constructor normalizing alpha/beta to sorted pairs."""
    if sites is not None and not k:
        k = (0,) * sites.n
    if not i:
        i = (0,) * len(k)
    if not k:
        k = (0,) * len(i)
    return Monomial(complex(coeff), tuple(int(c) for c in k), tuple(int(e) for e in i),
                    _as_pairs(alpha), _as_pairs(beta), (comp[0], int(comp[1])))


def _validate(m: Monomial, sites: SiteSet, trunc: Truncation) -> None:
    if len(m.k) != sites.n or len(m.i) != sites.n:
        raise AlgebraError("k/i length does not match the site enumeration")
    if any(e < 0 for e in m.i):
        raise AlgebraError("negative y exponent")
    for j, e in m.alpha + m.beta:
        if e < 0:
            raise AlgebraError("negative normal exponent")
        if j in sites:
            raise AlgebraError(f"normal exponent at tangential site {j}")
        if abs(j) > trunc.j_max:
            raise AlgebraError(f"normal index {j} outside truncation")
    kind, j = m.comp
    if kind not in _COMPONENT_KINDS:
        raise AlgebraError(f"unknown component kind {kind!r}")
    if kind in ("x", "y"):
        if j not in sites:
            raise AlgebraError(f"component {m.comp} is not a tangential coordinate")
    else:
        if j in sites or abs(j) > trunc.j_max:
            raise AlgebraError(f"component {m.comp} outside truncation")
    if m.degree > trunc.d_max or m.k_order > trunc.k_max:
        raise AlgebraError("monomial exceeds truncation bounds")


class VectorField:
    """Canonically ordered sparse sum of monomials over one SiteSet.

    Merging is exact: coefficients of equal keys are summed and exact zeros
    dropped.  ``discarded_mass`` reports the l1 coefficient mass removed by
    truncation during products (diagnostic only).
    """

    __slots__ = ("sites", "truncation", "_terms", "discarded_mass")

    def __init__(self, sites: SiteSet, truncation: Truncation,
                 terms: Iterable[Monomial] = (), discarded_mass: float = 0.0):
        self.sites = sites
        self.truncation = truncation
        self.discarded_mass = float(discarded_mass)
        acc: dict = {}
        for t in terms:
            _validate(t, sites, truncation)
            key = t.key()
            c = acc.get(key, 0j) + t.coeff
            if c == 0:
                acc.pop(key, None)
            else:
                acc[key] = c
        self._terms = acc

    # -- container protocol -------------------------------------------------

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Monomial]:
        for key in sorted(self._terms):
            comp, k, i, alpha, beta = key
            yield Monomial(self._terms[key], k, i, alpha, beta, comp)

    def coeff(self, key) -> complex:
        return self._terms.get(key, 0j)

    def _replace_terms(self, terms, discarded=0.0) -> "VectorField":
        return VectorField(self.sites, self.truncation, terms,
                           discarded_mass=discarded)

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check_compatible(other)
        return self._replace_terms(list(self) + list(other))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __neg__(self) -> "VectorField":
        return self * (-1.0)

    def __mul__(self, factor) -> "VectorField":
        return self._replace_terms(t.scaled(factor) for t in self)

    __rmul__ = __mul__

    def _check_compatible(self, other: "VectorField") -> None:
        if self.sites != other.sites or self.truncation != other.truncation:
            raise AlgebraError("vector fields live on different site sets / truncations")

    def filter(self, pred: Callable[[Monomial], bool]) -> "VectorField":
        return self._replace_terms(t for t in self if pred(t))

    def max_coeff_delta(self, other: "VectorField") -> float:
        """sup over keys of |coeff difference|; exact structural comparison."""
        keys = set(self._terms) | set(other._terms)
        return max((abs(self.coeff(k) - other.coeff(k)) for k in keys), default=0.0)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        header = {
            "plus_sites": list(self.sites.plus_sites),
            "truncation": {"j_max": self.truncation.j_max,
                           "k_max": self.truncation.k_max,
                           "d_max": self.truncation.d_max},
            "terms": [_term_line(t) for t in self],
        }
        return json.dumps(header, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "VectorField":
        data = json.loads(text)
        sites = SiteSet(tuple(data["plus_sites"]))
        tr = data["truncation"]
        trunc = Truncation(tr["j_max"], tr["k_max"], tr["d_max"])
        terms = [_parse_term_line(line, sites) for line in data["terms"]]
        return cls(sites, trunc, terms)


def _term_line(t: Monomial) -> str:
    body = " | ".join([
        f"{t.coeff.real!r} {t.coeff.imag!r}",
        " ".join(str(c) for c in t.k),
        " ".join(str(e) for e in t.i),
        ",".join(f"{j}:{e}" for j, e in t.alpha),
        ",".join(f"{j}:{e}" for j, e in t.beta),
        f"{t.comp[0]} {t.comp[1]}",
    ])
    return body


def _parse_term_line(line: str, sites: SiteSet) -> Monomial:
    parts = [p.strip() for p in line.split("|")]
    if len(parts) != 6:
        raise AlgebraError(f"malformed term line: {line!r}")
    re_s, im_s = parts[0].split()
    k = tuple(int(c) for c in parts[1].split())
    i = tuple(int(c) for c in parts[2].split())
    alpha = _as_pairs(tuple(tuple(map(int, kv.split(":"))) for kv in parts[3].split(",") if kv))
    beta = _as_pairs(tuple(tuple(map(int, kv.split(":"))) for kv in parts[4].split(",") if kv))
    kind, idx = parts[5].split()
    return Monomial(complex(float(re_s), float(im_s)), k, i, alpha, beta, (kind, int(idx)))


# ---------------------------------------------------------------------------
# momentum
# ---------------------------------------------------------------------------

def momentum(m: Monomial, sites: SiteSet) -> int:
    """Integer momentum of a monomial term.

    pi = sum_l j_l k_l + sum_j (alpha_j - beta_j) j, shifted by -j for a
    z_j component and +j for a zbar_j component.  This is the eigenvalue
    (divided by i) of the adjoint action of ``momentum_field``.
    """
    ordering = sites.ordering
    pi = sum(ordering[l] * m.k[l] for l in range(sites.n))
    pi += sum(e * j for j, e in m.alpha)
    pi -= sum(e * j for j, e in m.beta)
    kind, j = m.comp
    if kind == "z":
        pi -= j
    elif kind == "zbar":
        pi += j
    return pi


def momentum_field(sites: SiteSet, trunc: Truncation) -> VectorField:
    """The generator whose adjoint action has the monomials as eigenvectors.

    Components: (j_l) on the angles, 0 on the actions, i*j*z_j and
    -i*j*zbar_j on the normal modes.
    """
    terms = [monomial(p, ("x", p), sites=sites) for p in sites.ordering]
    for j in range(-trunc.j_max, trunc.j_max + 1):
        if j in sites:
            continue
        terms.append(monomial(1j * j, ("z", j), alpha={j: 1}, sites=sites))
        terms.append(monomial(-1j * j, ("zbar", j), beta={j: 1}, sites=sites))
    return VectorField(sites, trunc, terms)


# ---------------------------------------------------------------------------
# Lie bracket
# ---------------------------------------------------------------------------

def _merge_pairs(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for j, e in b:
        d[j] = d.get(j, 0) + e
    return tuple(sorted(d.items()))


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = (DX)Y - (DY)X, truncated to the common bounds.

    Bilinear and antisymmetric; for a monomial m and the momentum field M,
    [m, M] = i * momentum(m) * m.  Terms pushed beyond d_max or k_max by the
    product are dropped and their coefficient mass reported.
    """
    X._check_compatible(Y)
    sites, trunc = X.sites, X.truncation
    slot_of = {("x", j): sites.slot(j) for j in sites.ordering}
    slot_of.update({("y", j): sites.slot(j) for j in sites.ordering})

    out: list[Monomial] = []
    discarded = 0.0

    def directional(t1: Monomial, t2: Monomial, sign: float):
        """sign * (D t1) t2, a monomial with target component t1.comp."""
        nonlocal discarded
        var = t2.comp
        kind, j = var
        if kind in ("x", "y"):
            l = slot_of[var]
            if kind == "x":
                f = 1j * t1.k[l]
                if f == 0:
                    return
                k1, i1, a1, b1 = t1.k, t1.i, t1.alpha, t1.beta
            else:
                if t1.i[l] == 0:
                    return
                f = float(t1.i[l])
                i1 = list(t1.i)
                i1[l] -= 1
                k1, i1, a1, b1 = t1.k, tuple(i1), t1.alpha, t1.beta
        else:
            pairs = t1.alpha if kind == "z" else t1.beta
            hit = None
            for idx, (jj, e) in enumerate(pairs):
                if jj == j:
                    hit = (idx, e)
                    break
            if hit is None:
                return
            idx, e = hit
            f = float(e)
            new = pairs[:idx] + (((j, e - 1),) if e > 1 else ()) + pairs[idx + 1:]
            new = tuple(sorted(new))
            if kind == "z":
                k1, i1, a1, b1 = t1.k, t1.i, new, t1.beta
            else:
                k1, i1, a1, b1 = t1.k, t1.i, t1.alpha, new
        coeff = sign * f * t1.coeff * t2.coeff
        if coeff == 0:
            return
        k = tuple(k1[l] + t2.k[l] for l in range(len(k1)))
        i = tuple(i1[l] + t2.i[l] for l in range(len(i1)))
        alpha = _merge_pairs(a1, t2.alpha)
        beta = _merge_pairs(b1, t2.beta)
        m = Monomial(coeff, k, i, alpha, beta, t1.comp)
        if m.degree > trunc.d_max or m.k_order > trunc.k_max:
            discarded += abs(coeff)
            return
        out.append(m)

    for t1 in X:
        for t2 in Y:
            directional(t1, t2, 1.0)
    for t2 in Y:
        for t1 in X:
            directional(t2, t1, -1.0)

    return VectorField(sites, trunc, out, discarded_mass=discarded)


# ---------------------------------------------------------------------------
# involution, reversibility, reality
# ---------------------------------------------------------------------------

def _involute_term(t: Monomial, sites: SiteSet) -> Monomial:
    """S o t o S for S: (x_j, y_j, z_j, zbar_j) -> (-x_{-j}, y_{-j}, zbar_{-j}, z_{-j})."""
    conj = sites.conj_slot
    n = len(t.k)
    k = tuple(-t.k[conj(l)] for l in range(n))
    i = tuple(t.i[conj(l)] for l in range(n))
    alpha = tuple(sorted((-j, e) for j, e in t.beta))
    beta = tuple(sorted((-j, e) for j, e in t.alpha))
    kind, j = t.comp
    if kind == "x":
        return Monomial(-t.coeff, k, i, alpha, beta, ("x", -j))
    if kind == "y":
        return Monomial(t.coeff, k, i, alpha, beta, ("y", -j))
    if kind == "z":
        return Monomial(t.coeff, k, i, alpha, beta, ("zbar", -j))
    return Monomial(t.coeff, k, i, alpha, beta, ("z", -j))


def apply_involution(X: VectorField) -> VectorField:
    """Pushforward S o X o S; an exact involution on coefficients."""
    return VectorField(X.sites, X.truncation, (_involute_term(t, X.sites) for t in X),
                       discarded_mass=X.discarded_mass)


def check_reversible(X: VectorField, tol: float = COEFF_TOL) -> bool:
    """True iff S o X o S = -X on coefficients (the reversibility identity)."""
    return apply_involution(X).max_coeff_delta(-X) <= tol


def check_involution_equivariant(X: VectorField, tol: float = COEFF_TOL) -> bool:
    """True iff S o X o S = +X.

    This is the symmetry class of homological-equation solutions: division
    by the imaginary eigenvalue of the adjoint action flips the reversible
    class into the equivariant one, and the time-1 flow of an equivariant
    field conjugates reversible fields to reversible fields.
    """
    return apply_involution(X).max_coeff_delta(X) <= tol


def check_real_coefficients(X: VectorField, tol: float = COEFF_TOL) -> bool:
    """Reality of the Taylor-Fourier coefficients.

    Angle components must have real coefficients; action and normal
    components carry a global factor i, so their stored coefficients must
    be purely imaginary.
    """
    for t in X:
        if t.comp[0] == "x":
            if abs(t.coeff.imag) > tol:
                return False
        elif abs(t.coeff.real) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# symmetrization
# ---------------------------------------------------------------------------

def _kernel_shape(t: Monomial, sites: SiteSet):
    """If t belongs to a resonant family, return its constant-coefficient image key.

    Families (k in the resonant lattice): e^{ikx} d/dx_j, e^{ikx} y^i d/dy_j
    with |i| <= 1, e^{ikx} z_{+-j} d/dz_j, e^{ikx} zbar_{+-j} d/dzbar_j.
    """
    if not sites.is_odd_k(t.k):
        return None
    kind, j = t.comp
    zero_k = (0,) * len(t.k)
    if kind == "x":
        if any(t.i) or t.alpha or t.beta:
            return None
        return Monomial(t.coeff, zero_k, t.i, t.alpha, t.beta, t.comp)
    if kind == "y":
        if t.alpha or t.beta or sum(t.i) > 1:
            return None
        return Monomial(t.coeff, zero_k, t.i, t.alpha, t.beta, t.comp)
    if kind == "z":
        if any(t.i) or t.beta or t.alpha not in (((j, 1),), ((-j, 1),)):
            return None
        return Monomial(t.coeff, zero_k, t.i, ((j, 1),), (), t.comp)
    if any(t.i) or t.alpha or t.beta not in (((j, 1),), ((-j, 1),)):
        return None
    return Monomial(t.coeff, zero_k, t.i, (), ((j, 1),), t.comp)


def in_kernel_family(t: Monomial, sites: SiteSet) -> bool:
    """Membership in the resonant (non-averageable) monomial families."""
    return _kernel_shape(t, sites) is not None


def symmetrize(X: VectorField) -> VectorField:
    """Replace resonant-family monomials by their constant-coefficient images.

    The replacement sets k to 0 and the surviving normal index to +j; it is
    idempotent, never increases |momentum| of a replaced term, and leaves
    the restriction of the field to the even subspace E unchanged.
    """
    terms = []
    for t in X:
        img = _kernel_shape(t, X.sites)
        terms.append(img if img is not None else t)
    return VectorField(X.sites, X.truncation, terms, discarded_mass=X.discarded_mass)


# ---------------------------------------------------------------------------
# momentum projections and the weighted majorant norm
# ---------------------------------------------------------------------------

def project_momentum(X: VectorField, K: int, mode: str) -> VectorField:
    """Keep |momentum| >= K ("high") or < K ("low"); the two parts sum to X."""
    if K < 0:
        raise AlgebraError("momentum threshold must be >= 0")
    if mode not in ("high", "low"):
        raise AlgebraError(f"unknown projection mode {mode!r}")
    keep_high = mode == "high"
    sites = X.sites
    return X.filter(lambda t: (abs(momentum(t, sites)) >= K) == keep_high)


@dataclass(frozen=True)
class NormContext:
    """Weights of the momentum-penalized majorant norm.

    s: angle analyticity width, r: amplitude radius, a_weight: momentum
    weight, a_space: spatial analyticity, p: Sobolev weight (> 1/2).
    """

    s: float = 0.5
    r: float = 0.5
    a_weight: float = 1.0
    a_space: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        if self.s <= 0 or self.r <= 0 or self.p <= 0.5:
            raise AlgebraError("need s > 0, r > 0, p > 1/2")
        if self.a_weight < 0 or self.a_space < 0:
            raise AlgebraError("weights must be nonnegative")

    def with_a_weight(self, a: float) -> "NormContext":
        return NormContext(self.s, self.r, a, self.a_space, self.p)


def _bracket_j(j: int) -> float:
    return float(max(1, abs(j)))


def term_weight(t: Monomial, sites: SiteSet, ctx: NormContext) -> float:
    """Majorant weight of one term: coefficient modulus times the extremal
    value of the monomial over the weighted analytic ball, times the dual
    weight of the target component."""
    w = abs(t.coeff)
    w *= math.exp(ctx.a_weight * abs(momentum(t, sites)))
    w *= math.exp(ctx.s * t.k_order)
    w *= ctx.r ** (2 * sum(t.i))
    for j, e in t.alpha + t.beta:
        w *= (ctx.r * math.exp(-ctx.a_space * abs(j)) * _bracket_j(j) ** (-ctx.p)) ** e
    kind, j = t.comp
    if kind == "x":
        w /= ctx.s
    elif kind == "y":
        w /= ctx.r ** 2
    else:
        w *= math.exp(ctx.a_space * abs(j)) * _bracket_j(j) ** ctx.p / ctx.r
    return w


def majorant_norm(X: VectorField, ctx: NormContext) -> float:
    """Computable majorant of the weighted vector-field norm.

    Sum of per-term weights; monotone under term removal and satisfying
    the momentum-penalization inequality

        majorant_norm(high part, a') <= exp(-K (a - a')) * majorant_norm(X, a)

    exactly, for 0 <= a' <= a and the projection onto |momentum| >= K.
    """
    return sum(term_weight(t, X.sites, ctx) for t in X)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    """Evaluation point: angles x (real), actions y (complex), sparse normal modes."""

    x: tuple[float, ...]
    y: tuple[complex, ...]
    z: dict
    zbar: dict


@dataclass
class Tangent:
    x: list
    y: list
    z: dict
    zbar: dict

    def max_abs_delta(self, other: "Tangent") -> float:
        dev = max((abs(a - b) for a, b in zip(self.x, other.x)), default=0.0)
        dev = max(dev, max((abs(a - b) for a, b in zip(self.y, other.y)), default=0.0))
        for mine, theirs in ((self.z, other.z), (self.zbar, other.zbar)):
            for j in set(mine) | set(theirs):
                dev = max(dev, abs(mine.get(j, 0j) - theirs.get(j, 0j)))
        return dev


def _term_value(t: Monomial, pt: Point) -> complex:
    val = t.coeff
    phase = sum(t.k[l] * pt.x[l] for l in range(len(t.k)))
    if phase:
        val *= complex(math.cos(phase), math.sin(phase))
    for l, e in enumerate(t.i):
        if e:
            val *= pt.y[l] ** e
    for j, e in t.alpha:
        val *= pt.z.get(j, 0j) ** e
        if val == 0:
            return 0j
    for j, e in t.beta:
        val *= pt.zbar.get(j, 0j) ** e
        if val == 0:
            return 0j
    return val


def evaluate(X: VectorField, pt: Point) -> Tangent:
    """Sum the terms of X at a point into per-component slots."""
    n = X.sites.n
    if len(pt.x) != n or len(pt.y) != n:
        raise AlgebraError("point does not match the site enumeration")
    out = Tangent(x=[0j] * n, y=[0j] * n, z={}, zbar={})
    slot = X.sites.slot
    for t in X:
        v = _term_value(t, pt)
        if v == 0:
            continue
        kind, j = t.comp
        if kind == "x":
            out.x[slot(j)] += v
        elif kind == "y":
            out.y[slot(j)] += v
        elif kind == "z":
            out.z[j] = out.z.get(j, 0j) + v
        else:
            out.zbar[j] = out.zbar.get(j, 0j) + v
    return out
