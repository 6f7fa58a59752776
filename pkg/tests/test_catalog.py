import pytest

from hassewitt.catalog import (CUBIC_PARAMS, ELLIPTIC_MODELS,
                               cubic_discriminant, cubic_poly,
                               elliptic_discriminant, elliptic_poly,
                               frame_constant_factor, genus2_poly,
                               sylvester_resultant)
from hassewitt.ring import ZZ, ParamRing


def test_sylvester_resultant_hand_case():
    # res(x^2 - 1, x - 2) = (2 - 1)(2 + 1) = 3, by evaluating at the root
    R = ParamRing(ZZ, ())
    f = [R.from_int(-1), R.zero(), R.from_int(1)]
    g = [R.from_int(-2), R.from_int(1)]
    out = sylvester_resultant(f, g, R)
    assert out == R.from_int(3)


def test_cubic_discriminant_three_routes():
    """The stored discriminant, the resultant of f and f', and the
    classical closed formula 18bc - 4b^3 + b^2c^2 - 4c^3 - 27 for a monic
    cubic x^3 + c x^2 + b x + 1 must all agree."""
    R = ParamRing(ZZ, CUBIC_PARAMS)
    disc = cubic_discriminant()
    a = R.monomial((1, 0))
    b = R.monomial((0, 1))
    # classical discriminant of x^3 + b x^2 + a x + 1 (note the family
    # writes f = 1 + a x + b x^2 + x^3, so the quadratic coefficient is b)
    classical = R.zero()
    for coeff, term in ((18, R.mul(a, b)), (-4, R.pow(b, 3)),
                        (1, R.mul(R.pow(a, 2), R.pow(b, 2))),
                        (-4, R.pow(a, 3)), (-27, R.one())):
        classical = R.add(classical, {e: c * coeff
                                      for e, c in term.items()})
    assert disc == classical
    # resultant route: disc = -res(f, f') for monic cubic f
    f = [R.one(), a, b, R.one()]
    fp = [a, R.mul(R.from_int(2), b), R.from_int(3)]
    res = sylvester_resultant(f, fp, R)
    assert {e: -c for e, c in res.items()} == disc


def test_cubic_poly_shape():
    f = cubic_poly()
    assert f.vars == ("x",)
    assert f.ring.params == ("a", "b")
    ftr = cubic_poly(trunc=5)
    assert ftr.ring.trunc == 5


def test_frame_constant_factor_split_by_residue():
    assert frame_constant_factor(7).rows == ((1, 0), (0, 1))
    assert frame_constant_factor(13).rows == ((1, 0), (0, 1))
    assert frame_constant_factor(5).rows == ((0, -1), (-1, 0))
    assert frame_constant_factor(11).rows == ((0, -1), (-1, 0))
    with pytest.raises(ValueError):
        frame_constant_factor(3)


def test_genus2_poly_shape():
    f = genus2_poly()
    assert f.coeff((0, 2)) == 1
    assert f.coeff((5, 0)) == -1
    assert f.coeff((0, 0)) == -1


def test_elliptic_models_good_reduction():
    assert len(ELLIPTIC_MODELS) >= 3
    for _name, a, b in ELLIPTIC_MODELS:
        f = elliptic_poly(a, b)
        assert f.coeff((0, 2)) == 1
        assert f.coeff((3, 0)) == -1
        disc = elliptic_discriminant(a, b)
        assert disc == -16 * (4 * a ** 3 + 27 * b ** 2)
        for p in (5, 7):
            assert disc % p != 0, (a, b, p)
