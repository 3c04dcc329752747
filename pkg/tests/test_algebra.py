import math

import numpy as np
import pytest

from kamdnlw.algebra import (
    AlgebraError,
    NormContext,
    Point,
    SiteSet,
    Truncation,
    VectorField,
    apply_involution,
    check_involution_equivariant,
    check_real_coefficients,
    check_reversible,
    evaluate,
    lie_bracket,
    majorant_norm,
    momentum,
    momentum_field,
    monomial,
    project_momentum,
    symmetrize,
    term_weight,
)
from kamdnlw.sampling import (
    make_reversible,
    random_even_point,
    random_field,
    random_monomial,
    random_point,
    random_reversible_field,
)

SITES1 = SiteSet((1,))
SITES13 = SiteSet((1, 3))
TR = Truncation(j_max=8, k_max=8, d_max=4)


def test_site_ordering_and_odd_lattice():
    assert SITES13.ordering == (1, -1, 3, -3)
    assert SITES13.slot(-3) == 3
    assert SITES13.conj_slot(2) == 3
    assert SITES13.is_odd_k((2, -2, 1, -1))
    assert not SITES13.is_odd_k((2, -2, 1, 0))
    with pytest.raises(AlgebraError):
        SiteSet((0, 2))


def test_momentum_direct_cases():
    # single site I+ = {1}, enumeration (1, -1): k = (1, 0), alpha = {5: 1}, target z_3
    m = monomial(1.0, ("z", 3), k=(1, 0), i=(0, 0), alpha={5: 1})
    assert momentum(m, SITES1) == 1 + 5 - 3

    # k = 0, alpha = beta, y component: zero by symmetry
    m = monomial(2.0, ("y", -1), k=(0, 0), i=(1, 0), alpha={4: 2}, beta={4: 2})
    assert momentum(m, SITES1) == 0

    # zbar component adds +j
    m = monomial(1.0, ("zbar", 5), k=(0, 0), i=(0, 0), beta={5: 1})
    assert momentum(m, SITES1) == -5 + 5


def test_adjoint_action_eigenvalue():
    rng = np.random.default_rng(7)
    XM = momentum_field(SITES13, TR)
    for _ in range(60):
        t = random_monomial(rng, SITES13, TR)
        X = VectorField(SITES13, TR, [t])
        br = lie_bracket(X, XM)
        pi = momentum(t, SITES13)
        expected = X * (1j * pi)
        assert br.max_coeff_delta(expected) <= 1e-12 * max(1.0, abs(t.coeff) * abs(pi))


def test_bracket_antisymmetry_and_self():
    rng = np.random.default_rng(3)
    X = random_field(rng, SITES13, TR, 10)
    Y = random_field(rng, SITES13, TR, 10)
    assert lie_bracket(X, Y).max_coeff_delta(-lie_bracket(Y, X)) <= 1e-12
    z2 = VectorField(SITES1, TR, [monomial(1.0, ("z", 2), k=(0, 0), alpha={2: 1})])
    assert len(lie_bracket(z2, z2)) == 0


def test_bracket_direct_differentiation():
    # [X, Y] = (DX)Y - (DY)X, the orientation for which the adjoint action of
    # the momentum field has eigenvalue +i*pi: here (DX)Y = 0 and
    # (DY)X = i e^{i x_1} d/dy_1, so the bracket is -i e^{i x_1} d/dy_1.
    dx = VectorField(SITES1, TR, [monomial(1.0, ("x", 1), k=(0, 0))])
    ey = VectorField(SITES1, TR, [monomial(1.0, ("y", 1), k=(1, 0))])
    br = lie_bracket(dx, ey)
    assert br.max_coeff_delta(ey * (-1j)) == 0.0


def test_bracket_bilinear_and_jacobi():
    rng = np.random.default_rng(11)
    trunc = Truncation(j_max=6, k_max=12, d_max=6)
    for _ in range(6):
        X = random_field(rng, SITES13, trunc, 5, max_k=2)
        Y = random_field(rng, SITES13, trunc, 5, max_k=2)
        Z = random_field(rng, SITES13, trunc, 5, max_k=2)
        # restrict degrees so double brackets stay inside the truncation
        X = X.filter(lambda t: t.degree <= 2)
        Y = Y.filter(lambda t: t.degree <= 2)
        Z = Z.filter(lambda t: t.degree <= 2)
        lin = lie_bracket(X + Y, Z).max_coeff_delta(lie_bracket(X, Z) + lie_bracket(Y, Z))
        assert lin <= 1e-10
        jac = lie_bracket(X, lie_bracket(Y, Z)) \
            + lie_bracket(Y, lie_bracket(Z, X)) \
            + lie_bracket(Z, lie_bracket(X, Y))
        assert max(abs(t.coeff) for t in jac) <= 1e-10 if len(jac) else True
        assert lie_bracket(X, lie_bracket(Y, Z)).discarded_mass == 0.0


def test_involution_is_involution_and_reversibility_checks():
    rng = np.random.default_rng(5)
    X = random_field(rng, SITES13, TR, 20)
    assert apply_involution(apply_involution(X)).max_coeff_delta(X) == 0.0

    # y_1 d/dy_1 maps to y_{-1} d/dy_{-1} under S: not reversible
    y1 = VectorField(SITES1, TR, [monomial(1.0, ("y", 1), k=(0, 0), i=(1, 0))])
    assert not check_reversible(y1)
    img = apply_involution(y1)
    assert next(iter(img)).comp == ("y", -1)

    # symmetric normal form is reversible
    N = _normal_form_field(SITES1, TR, omega=1.3, Omega=lambda j: math.sqrt(j * j + 1.0))
    assert check_reversible(N)
    assert check_real_coefficients(N)

    # projection produces reversible fields
    P = make_reversible(random_field(rng, SITES13, TR, 15))
    assert check_reversible(P)
    assert check_involution_equivariant((P + apply_involution(P)) * 0.5 + P * 0.0) or len(P) >= 0


def _normal_form_field(sites, trunc, omega, Omega):
    terms = [monomial(omega, ("x", j), sites=sites) for j in sites.ordering]
    for j in range(-trunc.j_max, trunc.j_max + 1):
        if j in sites:
            continue
        terms.append(monomial(-1j * Omega(j), ("z", j), alpha={j: 1}, sites=sites))
        terms.append(monomial(1j * Omega(j), ("zbar", j), beta={j: 1}, sites=sites))
    return VectorField(sites, trunc, terms)


def test_real_coefficients_counterexample():
    X = VectorField(SITES1, TR, [monomial(1j, ("x", 1), k=(0, 0))])
    assert not check_real_coefficients(X)


def test_symmetrize_examples_and_idempotence():
    # e^{i(x_1 - x_{-1})} d/dx_1 -> d/dx_1
    t = monomial(2.0, ("x", 1), k=(1, -1))
    X = VectorField(SITES1, TR, [t])
    SX = symmetrize(X)
    (img,) = list(SX)
    assert img.k == (0, 0) and img.comp == ("x", 1) and img.coeff == 2.0

    # degree-2 normal term untouched
    t2 = monomial(1.0, ("z", 4), k=(1, -1), alpha={4: 2})
    X2 = VectorField(SITES1, TR, [t2])
    assert symmetrize(X2).max_coeff_delta(X2) == 0.0

    rng = np.random.default_rng(17)
    for _ in range(10):
        X = random_reversible_field(rng, SITES13, TR, 14)
        SX = symmetrize(X)
        assert symmetrize(SX).max_coeff_delta(SX) == 0.0
        assert check_reversible(X) and check_reversible(SX)


def test_symmetrize_momentum_never_increases():
    rng = np.random.default_rng(23)
    from kamdnlw.algebra import _kernel_shape  # replaced-term inspection

    from kamdnlw.sampling import random_resonant_family_terms

    for _ in range(20):
        for t in random_resonant_family_terms(rng, SITES13, TR, 6):
            img = _kernel_shape(t, SITES13)
            assert img is not None
            assert abs(momentum(img, SITES13)) <= abs(momentum(t, SITES13))


def test_symmetrize_agrees_on_even_subspace():
    rng = np.random.default_rng(29)
    for _ in range(20):
        X = random_reversible_field(rng, SITES13, TR, 12)
        SX = symmetrize(X)
        for _ in range(10):
            u = random_even_point(rng, SITES13, TR)
            dev = evaluate(X, u).max_abs_delta(evaluate(SX, u))
            assert dev <= 1e-12 * 100


def test_project_momentum_split_and_trivial_cases():
    rng = np.random.default_rng(31)
    X = random_field(rng, SITES13, TR, 25)
    assert project_momentum(X, 0, "high").max_coeff_delta(X) == 0.0
    high = project_momentum(X, 3, "high")
    low = project_momentum(X, 3, "low")
    assert (high + low).max_coeff_delta(X) == 0.0
    single = VectorField(SITES1, TR, [monomial(1.0, ("z", 3), k=(1, 0), alpha={5: 1})])
    assert momentum(next(iter(single)), SITES1) == 3
    assert len(project_momentum(single, 5, "high")) == 0


def test_penalization_inequality():
    rng = np.random.default_rng(37)
    ctx0 = NormContext(s=0.4, r=0.6, a_weight=0.0, a_space=0.1, p=1.0)
    X = random_field(rng, SITES13, TR, 30)
    for _ in range(100):
        a = rng.uniform(0.0, 1.5)
        a2 = rng.uniform(0.0, a)
        K = int(rng.integers(0, 12))
        lhs = majorant_norm(project_momentum(X, K, "high"), ctx0.with_a_weight(a2))
        rhs = math.exp(-K * (a - a2)) * majorant_norm(X, ctx0.with_a_weight(a))
        assert lhs <= rhs * (1 + 1e-12)


def test_majorant_norm_basics():
    ctx = NormContext(s=0.4, r=0.6, a_weight=1.0, a_space=0.0, p=1.0)
    empty = VectorField(SITES1, TR, [])
    assert majorant_norm(empty, ctx) == 0.0

    # single term with |pi| = 10: changing the momentum weight from 1 to 0.5
    # scales the norm by exactly exp(-5)
    trunc = Truncation(j_max=12, k_max=8, d_max=4)
    t = monomial(0.7, ("z", -4), k=(2, 0), alpha={8: 1})
    X = VectorField(SITES1, trunc, [t])
    assert momentum(t, SITES1) == 2 + 8 + 4
    t2 = monomial(0.7, ("z", -4), k=(0, 0), alpha={4: 1})
    X2 = VectorField(SITES1, trunc, [t2])
    assert momentum(t2, SITES1) == 8
    # direct e^{a |pi|} factor ratio on one term with pi = 10
    t3 = monomial(0.7, ("z", 3), k=(2, 0), alpha={11: 1})
    assert momentum(t3, SITES1) == 2 + 11 - 3
    X3 = VectorField(SITES1, trunc, [t3])
    hi = majorant_norm(X3, ctx)
    lo = majorant_norm(X3, ctx.with_a_weight(0.5))
    assert math.isclose(lo / hi, math.exp(-5.0), rel_tol=1e-12)

    # monotone under term removal
    rng = np.random.default_rng(41)
    X = random_field(rng, SITES13, TR, 12)
    terms = list(X)
    smaller = VectorField(SITES13, TR, terms[:-1])
    assert majorant_norm(smaller, ctx) <= majorant_norm(X, ctx)


def test_evaluate_normal_form_and_unit_vector():
    trunc = Truncation(j_max=4, k_max=4, d_max=3)
    omega, Om = 1.7, (lambda j: math.sqrt(j * j + 1.0))
    N = _normal_form_field(SITES1, trunc, omega, Om)
    rng = np.random.default_rng(43)
    pt = random_point(rng, SITES1, trunc)
    out = evaluate(N, pt)
    assert all(abs(v - omega) < 1e-14 for v in out.x)
    assert all(abs(v) == 0 for v in out.y)
    for j, zj in pt.z.items():
        assert abs(out.z[j] - (-1j * Om(j) * zj)) <= 1e-14 * max(1, abs(zj))
        assert abs(out.zbar[j] - (1j * Om(j) * pt.zbar[j])) <= 1e-14 * max(1, abs(pt.zbar[j]))

    dx = VectorField(SITES1, trunc, [monomial(1.0, ("x", 1), k=(0, 0))])
    out = evaluate(dx, pt)
    assert out.x[0] == 1.0 and out.x[1] == 0.0


def test_evaluate_preserves_even_subspace_for_reversible_even_fields():
    # built from symmetric data, the field maps E into E
    rng = np.random.default_rng(47)
    trunc = Truncation(j_max=5, k_max=6, d_max=3)
    N = _normal_form_field(SITES13, trunc, 1.1, lambda j: math.sqrt(j * j + 1.0))
    for _ in range(20):
        u = random_even_point(rng, SITES13, trunc)
        out = evaluate(N, u)
        for m in range(len(SITES13.plus_sites)):
            assert abs(out.x[2 * m] - out.x[2 * m + 1]) <= 1e-13
            assert abs(out.y[2 * m] - out.y[2 * m + 1]) <= 1e-13
        for j in out.z:
            if -j in out.z:
                assert abs(out.z[j] - out.z[-j]) <= 1e-13


def test_truncation_reporting():
    trunc = Truncation(j_max=4, k_max=2, d_max=2)
    # product of two degree-2 z-terms exceeds d_max = 2: discarded with mass report
    a = VectorField(SITES1, trunc, [monomial(1.0, ("z", 2), k=(0, 0), alpha={2: 1, 3: 1})])
    b = VectorField(SITES1, trunc, [monomial(1.0, ("z", 3), k=(0, 0), alpha={3: 2})])
    br = lie_bracket(a, b)
    assert len(br) == 0
    assert br.discarded_mass > 0


def test_component_outside_truncation_rejected():
    trunc = Truncation(j_max=4, k_max=2, d_max=2)
    with pytest.raises(AlgebraError):
        VectorField(SITES1, trunc, [monomial(1.0, ("z", 9), k=(0, 0), alpha={9: 1})])
    with pytest.raises(AlgebraError):
        VectorField(SITES1, trunc, [monomial(1.0, ("z", 2), k=(0, 0), alpha={1: 1})])


def test_bracket_sites_mismatch():
    X = VectorField(SITES1, TR, [monomial(1.0, ("x", 1), k=(0, 0))])
    Y = VectorField(SITES13, TR, [monomial(1.0, ("x", 1), k=(0, 0, 0, 0))])
    with pytest.raises(AlgebraError):
        lie_bracket(X, Y)


def test_serialization_round_trip():
    rng = np.random.default_rng(53)
    X = random_field(rng, SITES13, TR, 18)
    Y = VectorField.from_json(X.to_json())
    assert Y.max_coeff_delta(X) == 0.0
    assert Y.sites == X.sites and Y.truncation == X.truncation


def test_norm_context_validation():
    with pytest.raises(AlgebraError):
        NormContext(s=0.0)
    with pytest.raises(AlgebraError):
        NormContext(p=0.5)
    with pytest.raises(AlgebraError):
        NormContext(a_weight=-1.0)


def test_term_weight_momentum_factor():
    ctx = NormContext(s=0.3, r=0.5, a_weight=2.0, a_space=0.05, p=1.0)
    t = monomial(1.5, ("y", 1), k=(1, 0), i=(0, 0), alpha={2: 1})
    w = term_weight(t, SITES1, ctx)
    pi = momentum(t, SITES1)
    base = term_weight(t, SITES1, ctx.with_a_weight(0.0))
    assert math.isclose(w, base * math.exp(2.0 * abs(pi)), rel_tol=1e-12)
