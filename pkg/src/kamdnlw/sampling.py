"""Seeded random monomials, vector fields and phase-space points.

Used by the property suites (tests, `algebra-check` CLI command).  All
sampling goes through ``numpy.random.Generator`` so the suites are
reproducible from a single integer seed.
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import (
    Monomial,
    Point,
    SiteSet,
    Truncation,
    VectorField,
    apply_involution,
    monomial,
)


def random_monomial(rng: np.random.Generator, sites: SiteSet, trunc: Truncation,
                    comp_kinds=("x", "y", "z", "zbar"), max_k: int | None = None) -> Monomial:
    """One random monomial respecting the truncation bounds."""
    n = sites.n
    normal = [j for j in range(-trunc.j_max, trunc.j_max + 1) if j not in sites]
    kind = comp_kinds[rng.integers(len(comp_kinds))]
    if kind in ("x", "y"):
        comp = (kind, sites.ordering[rng.integers(n)])
    else:
        comp = (kind, normal[rng.integers(len(normal))])

    k_budget = trunc.k_max if max_k is None else max_k
    k = [0] * n
    for _ in range(int(rng.integers(0, k_budget + 1))):
        k[rng.integers(n)] += int(rng.choice((-1, 1)))
    if sum(abs(c) for c in k) > trunc.k_max:
        k = [0] * n

    deg = int(rng.integers(0, trunc.d_max + 1))
    i = [0] * n
    alpha: dict[int, int] = {}
    beta: dict[int, int] = {}
    for _ in range(deg):
        slot = rng.integers(3)
        if slot == 0:
            i[rng.integers(n)] += 1
        elif slot == 1:
            j = normal[rng.integers(len(normal))]
            alpha[j] = alpha.get(j, 0) + 1
        else:
            j = normal[rng.integers(len(normal))]
            beta[j] = beta.get(j, 0) + 1

    coeff = complex(rng.normal(), rng.normal())
    return monomial(coeff, comp, k=tuple(k), i=tuple(i), alpha=alpha, beta=beta)


def random_field(rng: np.random.Generator, sites: SiteSet, trunc: Truncation,
                 n_terms: int = 12, **kw) -> VectorField:
    return VectorField(sites, trunc,
                       (random_monomial(rng, sites, trunc, **kw) for _ in range(n_terms)))


def random_resonant_family_terms(rng: np.random.Generator, sites: SiteSet,
                                 trunc: Truncation, n_terms: int = 4) -> list[Monomial]:
    """Monomials from the non-averageable families with k in the resonant lattice."""
    normal = [j for j in range(-trunc.j_max, trunc.j_max + 1) if j not in sites]
    out = []
    for _ in range(n_terms):
        k = [0] * sites.n
        for m in range(len(sites.plus_sites)):
            c = int(rng.integers(-max(1, trunc.k_max // sites.n), max(1, trunc.k_max // sites.n) + 1))
            k[2 * m], k[2 * m + 1] = c, -c
        if sum(abs(c) for c in k) > trunc.k_max:
            k = [0] * sites.n
        coeff = complex(rng.normal(), rng.normal())
        shape = rng.integers(4)
        if shape == 0:
            out.append(monomial(coeff, ("x", sites.ordering[rng.integers(sites.n)]), k=tuple(k), sites=sites))
        elif shape == 1:
            i = [0] * sites.n
            if rng.random() < 0.7:
                i[rng.integers(sites.n)] = 1
            out.append(monomial(coeff, ("y", sites.ordering[rng.integers(sites.n)]),
                                k=tuple(k), i=tuple(i)))
        else:
            j = normal[rng.integers(len(normal))]
            sgn = int(rng.choice((1, -1)))
            if shape == 2:
                out.append(monomial(coeff, ("z", j), k=tuple(k), alpha={sgn * j: 1}, sites=sites))
            else:
                out.append(monomial(coeff, ("zbar", j), k=tuple(k), beta={sgn * j: 1}, sites=sites))
    return out


def make_reversible(X: VectorField) -> VectorField:
    """Project onto the reversible class: (X - S o X o S) / 2."""
    return (X - apply_involution(X)) * 0.5


def project_real_coefficients(X: VectorField) -> VectorField:
    """Project coefficients onto the real-coefficients class
    (real on angle components, imaginary elsewhere)."""
    terms = []
    for t in X:
        c = complex(t.coeff.real, 0.0) if t.comp[0] == "x" else complex(0.0, t.coeff.imag)
        if c != 0:
            terms.append(Monomial(c, t.k, t.i, t.alpha, t.beta, t.comp))
    return VectorField(X.sites, X.truncation, terms)


def random_reversible_field(rng: np.random.Generator, sites: SiteSet, trunc: Truncation,
                            n_terms: int = 12, real_coefficients: bool = False,
                            with_resonant: bool = True) -> VectorField:
    terms = [random_monomial(rng, sites, trunc) for _ in range(n_terms)]
    if with_resonant:
        terms += random_resonant_family_terms(rng, sites, trunc, max(2, n_terms // 3))
    X = VectorField(sites, trunc, terms)
    if real_coefficients:
        X = project_real_coefficients(X)
    return make_reversible(X)


def random_point(rng: np.random.Generator, sites: SiteSet, trunc: Truncation,
                 scale: float = 0.8) -> Point:
    n = sites.n
    x = tuple(rng.uniform(0, 2 * math.pi) for _ in range(n))
    y = tuple(complex(rng.normal(), rng.normal()) * scale / 2 for _ in range(n))
    z, zbar = {}, {}
    for j in range(-trunc.j_max, trunc.j_max + 1):
        if j in sites:
            continue
        z[j] = complex(rng.normal(), rng.normal()) * scale / 2
        zbar[j] = complex(rng.normal(), rng.normal()) * scale / 2
    return Point(x, y, z, zbar)


def random_even_point(rng: np.random.Generator, sites: SiteSet, trunc: Truncation,
                      scale: float = 0.8) -> Point:
    """Random point of the even subspace E: x, y, z, zbar symmetric under j -> -j."""
    pt = random_point(rng, sites, trunc, scale)
    x = list(pt.x)
    y = list(pt.y)
    for m in range(len(sites.plus_sites)):
        x[2 * m + 1] = x[2 * m]
        y[2 * m + 1] = y[2 * m]
    z = dict(pt.z)
    zbar = dict(pt.zbar)
    for j in list(z):
        if j > 0:
            z[-j] = z[j]
            zbar[-j] = zbar[j]
    return Point(tuple(x), tuple(y), z, zbar)
