from fractions import Fraction

import pytest

from hassewitt.errors import RingMismatchError
from hassewitt.fgl import (SeriesTuple, TruncatedSeries, check_fgl_axioms,
                           check_integrality, compose, denominator_primes,
                           functional_equation_witness, group_law,
                           identity_tuple, invert_series, logarithm)
from hassewitt.laurent import parse_poly


def geometric_law_coeff(exp, i, g, n):
    """Coefficient of the multiplicative law t_i + u_i - c t_i u_i with
    c = 1, at an exponent of the 2g-variable ring."""
    t = tuple(1 if j == i else 0 for j in range(2 * g))
    u = tuple(1 if j == g + i else 0 for j in range(2 * g))
    tu = tuple(a + b for a, b in zip(t, u))
    if exp == t or exp == u:
        return Fraction(1)
    if exp == tu:
        return Fraction(-1)
    return Fraction(0)


def test_series_arithmetic_by_hand():
    v = ("t", "u")
    a = TruncatedSeries.from_terms(v, 4, {(1, 0): Fraction(1),
                                          (0, 1): Fraction(2)})
    b = TruncatedSeries.from_terms(v, 4, {(1, 1): Fraction(3)})
    s = a + b
    assert s.coeff((1, 0)) == 1
    assert s.coeff((1, 1)) == 3
    prod = a * a
    assert prod.coeff((2, 0)) == 1
    assert prod.coeff((1, 1)) == 4
    assert prod.coeff((0, 2)) == 4
    # truncation: degree 5 term is dropped
    c = TruncatedSeries.from_terms(v, 4, {(2, 2): Fraction(1)})
    assert (c * a).is_zero()
    with pytest.raises(TypeError):
        hash(a)


def test_series_ring_mismatch():
    a = TruncatedSeries.from_terms(("t",), 4, {(1,): Fraction(1)})
    b = TruncatedSeries.from_terms(("t",), 5, {(1,): Fraction(1)})
    with pytest.raises(RingMismatchError):
        _ = a + b


def test_compose_by_hand():
    # outer(x) = x^2 over one variable; inner = t + u
    outer = TruncatedSeries.from_terms(("x",), 4, {(2,): Fraction(1)})
    inner = TruncatedSeries.from_terms(("t", "u"), 4, {(1, 0): Fraction(1),
                                                       (0, 1): Fraction(1)})
    out = compose(outer, [inner])
    assert out.coeff((2, 0)) == 1
    assert out.coeff((1, 1)) == 2
    assert out.coeff((0, 2)) == 1
    bad = TruncatedSeries.from_terms(("t", "u"), 4, {(0, 0): Fraction(1)})
    with pytest.raises(ValueError):
        compose(outer, [bad])


def test_logarithm_of_binomial_poly_closed_form():
    """f = 1 + x with all lattice points: every beta_m is the identity, so
    each logarithm component is sum_m tau^m / m, the -log(1 - tau) series.
    The betas are binomial coefficients C(m-1, m v - u), which vanish off
    the diagonal here; this is checkable by hand."""
    f = parse_poly("1 + x", ("x",))
    l = logarithm(f, 8, mode="all")
    assert l.g == 2
    for i, comp in enumerate(l):
        for e, c in comp.items():
            m = sum(e)
            pure = tuple(m if j == i else 0 for j in range(2))
            assert e == pure
            assert c == Fraction(1, m)


def test_group_law_binomial_poly_closed_form():
    """With every beta_m the identity the law must be the componentwise
    multiplicative one: G_i = t_i + u_i - t_i u_i exactly."""
    f = parse_poly("1 + x", ("x",))
    gl = group_law(f, 8, mode="all")
    g = gl.g
    assert g == 2
    for i, comp in enumerate(gl):
        for e, c in comp.items():
            assert c == geometric_law_coeff(e, i, g, 8), (i, e, c)
        # and the three defining coefficients are present
        t = tuple(1 if j == i else 0 for j in range(2 * g))
        u = tuple(1 if j == g + i else 0 for j in range(2 * g))
        tu = tuple(a + b for a, b in zip(t, u))
        assert comp.coeff(t) == 1
        assert comp.coeff(u) == 1
        assert comp.coeff(tu) == -1


def test_group_law_scaled_binomial_closed_form():
    """f = 2 + x has diagonal betas diag(2^(m-1), 1); the first component
    becomes t + u - 2tu (multiplicative with slope 2, from summing
    (2 tau)^m / (2m)), the second stays t + u - tu."""
    f = parse_poly("2 + x", ("x",))
    gl = group_law(f, 9, mode="all")
    for i, comp in enumerate(gl):
        scale = 2 if i == 0 else 1
        for e, c in comp.items():
            t = tuple(1 if j == i else 0 for j in range(4))
            u = tuple(1 if j == 2 + i else 0 for j in range(4))
            tu = tuple(a + b for a, b in zip(t, u))
            if e in (t, u):
                assert c == 1
            elif e == tu:
                assert c == -scale
            else:
                assert c == 0, (i, e, c)


def test_invert_series_round_trip():
    f = parse_poly("1 + x + x^3", ("x",))
    l = logarithm(f, 7)
    inv = invert_series(l, 7)
    composed = SeriesTuple(
        [compose(inv[i], list(l.components)) for i in range(l.g)])
    ident = identity_tuple(l.vars, 7, l.g)
    assert composed == SeriesTuple(ident.components)


def test_check_integrality_reports_violation():
    good = TruncatedSeries.from_terms(("t", "u"), 4, {(1, 0): Fraction(1),
                                                      (1, 1): Fraction(-7)})
    bad = TruncatedSeries.from_terms(("t", "u"), 4, {(1, 1): Fraction(1, 3)})
    rep = check_integrality(SeriesTuple([good]), 3)
    assert rep.passed and rep.defect_valuation == 0
    rep2 = check_integrality(SeriesTuple([good, bad]), 3)
    assert not rep2.passed
    assert rep2.defect_valuation == -1
    assert rep2.notes["violations"][0]["component"] == 1
    # the same denominator is invisible to other primes
    rep3 = check_integrality(SeriesTuple([good, bad]), 2)
    assert rep3.passed


def test_denominator_primes():
    s = TruncatedSeries.from_terms(("t",), 4, {(1,): Fraction(1, 12),
                                               (2,): Fraction(5, 7)})
    assert denominator_primes(SeriesTuple([s])) == [2, 3, 7]


def test_axiom_suite_on_generated_law():
    f = parse_poly("1 + x", ("x",))
    gl = group_law(f, 6, mode="all")
    out = check_fgl_axioms(gl)
    assert out["pass"]
    assert out["left_unit"] and out["right_unit"]
    assert out["commutative"] and out["associative"]


def test_axiom_suite_rejects_corrupted_law():
    # t + u + t^2 fails the left-unit axiom: G(0, u) = u + 0 but
    # G(t, 0) = t + t^2
    bad = TruncatedSeries.from_terms(("t", "u"), 5, {(1, 0): Fraction(1),
                                                     (0, 1): Fraction(1),
                                                     (2, 0): Fraction(1)})
    out = check_fgl_axioms(SeriesTuple([bad]), associativity=False)
    assert not out["pass"]


def test_functional_equation_witness_hand_case():
    """For f = 1 + x every beta is the identity and gamma_1 turns out to
    be the identity as well, so the first prime-power defect
    (1/p)(beta_p - gamma_1 beta_1) vanishes exactly."""
    f = parse_poly("1 + x", ("x",))
    for p in (2, 3, 5):
        rep = functional_equation_witness(f, p, 8, mode="all")
        assert rep.passed
        assert rep.defect_valuation >= 0
        assert rep.notes["first_prime_power_exactly_zero"] is True


def test_group_law_interior_mode_default(corpus):
    entry = corpus[0]
    gl = group_law(entry.f, 6)
    assert gl.g == entry.g_interior
    assert gl.labels is not None
