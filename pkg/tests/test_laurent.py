import random
import warnings

import pytest

import oracles
from hassewitt.errors import BudgetExceededError, ParseError
from hassewitt.laurent import (LaurentPoly, dilate, frobenius_poly,
                               lattice_points, newton_polytope, parse_poly,
                               poly_from_json, poly_to_json, pow_reduced)
from hassewitt.ring import ZZ, FrobeniusMap, ModRing, ParamRing


def rand_poly(rng, nvars=2, terms=5, bound=3, span=2):
    out = {}
    while len(out) < terms:
        e = tuple(rng.randint(-span, span) for _ in range(nvars))
        c = rng.choice([c for c in range(-bound, bound + 1) if c])
        out[e] = c
    return LaurentPoly(tuple("xy"[:nvars]), {e: ZZ.from_int(c)
                                             for e, c in out.items()}, ZZ)


def test_parse_and_print_round_trip():
    f = parse_poly("y^2 - x^5 - 2*x^2 - x - 1", ("x", "y"))
    assert f.coeff((0, 2)) == 1
    assert f.coeff((5, 0)) == -1
    assert f.coeff((2, 0)) == -2
    assert f.coeff((0, 0)) == -1
    again = parse_poly(f.to_text(), ("x", "y"))
    assert again == f
    g = parse_poly("x + y + x^-1*y^-1", ("x", "y"))
    assert g.coeff((-1, -1)) == 1


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse_poly("x + * y", ("x", "y"))
    assert err.value.pos == 4
    with pytest.raises(ParseError) as err2:
        parse_poly("z + x", ("x", "y"))
    assert err2.value.pos == 0


def test_parse_parameters():
    ring = ParamRing(ZZ, ("a", "b"))
    f = parse_poly("1 + a*x + b*x^2 + x^3", ("x",), params=("a", "b"))
    assert f.ring == ring
    assert f.coeff((1,)).data == {(1, 0): 1}
    assert f.coeff((3,)).data == {(0, 0): 1}


def test_mul_matches_naive_convolution():
    rng = random.Random(11)
    for _ in range(12):
        f = rand_poly(rng)
        g = rand_poly(rng)
        prod = f * g
        assert oracles.poly_terms(prod) == oracles.naive_mul(
            oracles.poly_terms(f), oracles.poly_terms(g))


def test_pow_reduced_matches_naive_power():
    rng = random.Random(23)
    for _ in range(6):
        f = rand_poly(rng, terms=4)
        for e in (0, 1, 2, 5):
            got = pow_reduced(f, e)
            want = oracles.naive_pow(oracles.poly_terms(f), e, 2)
            assert oracles.poly_terms(got) == want


def test_pow_reduced_modular_matches_reduced_naive():
    rng = random.Random(37)
    R = ModRing(5, 2)
    for _ in range(4):
        f = rand_poly(rng, terms=4)
        fm = f.change_ring(R)
        got = pow_reduced(fm, 6)
        want = oracles.naive_pow(oracles.poly_terms(f), 6, 2)
        for e, c in want.items():
            assert got.coeff(e) == c % 25
        for e in got.support():
            assert want.get(e, 0) % 25 == got.coeff(e)


def test_lattice_points_match_from_scratch_hull(corpus):
    for entry in corpus:
        f = entry.f
        poly = newton_polytope(f)
        supp = f.support()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            got_int = lattice_points(poly, "interior")
        got_all = lattice_points(poly, "all")
        assert got_int == oracles.oracle_lattice_points(supp, "interior")
        assert got_all == oracles.oracle_lattice_points(supp, "all")


def test_lattice_points_hand_cases():
    # unit box [0,2]^2: nine points, one interior
    f = parse_poly("1 + x^2 + y^2 + x^2*y^2", ("x", "y"))
    poly = newton_polytope(f)
    assert lattice_points(poly, "interior") == ((1, 1),)
    assert len(lattice_points(poly, "all")) == 9
    # the interval [0,3]: interior lattice points 1, 2
    g = parse_poly("1 + x + x^3", ("x",))
    assert lattice_points(newton_polytope(g), "interior") == ((1,), (2,))
    # a segment in the plane has a relative interior, with a warning
    h = parse_poly("x + y", ("x", "y"))
    with pytest.warns(UserWarning):
        pts = lattice_points(newton_polytope(h), "interior")
    assert pts == ()
    h2 = parse_poly("x^2 + y^2", ("x", "y"))
    with pytest.warns(UserWarning):
        pts2 = lattice_points(newton_polytope(h2), "interior")
    assert pts2 == ((1, 1),)


def test_dilate_matches_scaled_support(corpus):
    for entry in corpus[:8]:
        f = entry.f
        poly = dilate(newton_polytope(f), 3)
        supp = [tuple(3 * x for x in e) for e in f.support()]
        assert (lattice_points(poly, "all")
                == oracles.oracle_lattice_points(supp, "all"))


def test_frobenius_poly_dilates_exponents():
    R = ParamRing(ModRing(3, 2), ("t",), trunc=9)
    f = parse_poly("t*x + x^-1", ("x",), params=("t",), base=ModRing(3, 2),
                   trunc=9)
    sig = FrobeniusMap(R, 3)
    g = frobenius_poly(f, sig)
    # x -> x^3 on exponents, t -> t^3 on coefficients
    assert g.coeff((3,)).data == {(3,): 1}
    assert g.coeff((-3,)).data == {(0,): 1}


def test_budget_exceeded():
    f = parse_poly("1 + x + y + x*y + x^2*y + x*y^2", ("x", "y"))
    with pytest.raises(BudgetExceededError):
        pow_reduced(f, 40, budget=1000)


def test_json_round_trip(corpus):
    for entry in corpus[:6]:
        f = entry.f
        data = poly_to_json(f)
        back = poly_from_json(data)
        assert back == f
