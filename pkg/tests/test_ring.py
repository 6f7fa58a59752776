import math
from fractions import Fraction

import pytest

from hassewitt.errors import NotInvertibleModP, RingMismatchError
from hassewitt.ring import (INF, QQ, ZZ, DerivationMap, FrobeniusMap,
                            ModRing, ParamRing, RingElement, SquareMatrix,
                            gauss_inverse_mod_p, mat_inverse_mod_pk,
                            matrix_derivation, matrix_min_valuation,
                            matrix_sigma, p_valuation, padic_digits,
                            series_inverse, verify_frobenius_lift)


def test_mod_ring_matches_int_arithmetic():
    R = ModRing(7, 3)
    m = 7 ** 3
    for a in (0, 1, 5, 100, 342, m - 1):
        for b in (0, 2, 41, m - 2):
            assert R.add(a % m, b % m) == (a + b) % m
            assert R.sub(a % m, b % m) == (a - b) % m
            assert R.mul(a % m, b % m) == (a * b) % m
    assert R.inv(2) * 2 % m == 1
    with pytest.raises(NotInvertibleModP):
        R.inv(7)


def test_param_ring_multiplication_by_hand():
    R = ParamRing(ZZ, ("a", "b"), trunc=3)
    x = {(1, 0): 1, (0, 1): 2}            # a + 2b
    y = {(1, 0): 3, (0, 0): 1}            # 3a + 1
    # (a + 2b)(3a + 1) = 3a^2 + a + 6ab + 2b
    assert R.mul(x, y) == {(2, 0): 3, (1, 0): 1, (1, 1): 6, (0, 1): 2}
    # the truncation bound is inclusive: degree trunc survives,
    # trunc + 1 does not
    z = {(2, 0): 1}
    assert R.mul(z, y) == {(3, 0): 3, (2, 0): 1}
    assert R.mul(R.mul(z, x), x) == {}


def test_param_ring_partial_and_substitute():
    R = ParamRing(QQ, ("t",), trunc=5)
    # d/dt (3 t^4) = 12 t^3
    raw = {(4,): Fraction(3)}
    assert R.partial(raw, 0) == {(3,): Fraction(12)}
    val = R.substitute({(2,): Fraction(5), (0,): Fraction(1)},
                       [R.from_int(2)])
    assert val == {(0,): Fraction(21)}


def test_frobenius_map_standard_and_custom():
    R = ParamRing(ModRing(5, 2), ("t",), trunc=10)
    sig = FrobeniusMap(R, 5)
    assert sig.is_standard
    t = RingElement(R, R.monomial((1,)))
    assert sig.apply(t).data == {(5,): 1}
    assert sig.apply(t, 2).data == {}        # t^25 is beyond trunc
    # a custom (non-standard) image is representable but flagged
    bad = FrobeniusMap(R, 5, images=[R.monomial((1,))])
    assert not bad.is_standard
    assert verify_frobenius_lift(bad, [t]) is False
    assert verify_frobenius_lift(sig, [t, t + 1, t * t + 3]) is True


def test_derivation_map_coordinate():
    R = ParamRing(ZZ, ("a", "b"), trunc=6)
    D = DerivationMap.coordinate(R, "b")
    assert D.is_coordinate() == "b"
    ab2 = RingElement(R, {(1, 2): 4})       # 4 a b^2
    assert D.apply(ab2).data == {(1, 1): 8}
    with pytest.raises(ValueError):
        DerivationMap.coordinate(R, "c")


def test_square_matrix_det_trace_hand_values():
    m = SquareMatrix.from_lists(ZZ, [[1, 2], [3, 4]])
    assert m.det() == -2
    assert m.trace() == 5
    m3 = SquareMatrix.from_lists(ZZ, [[2, 0, 1], [1, 1, 0], [0, 3, 1]])
    # cofactor expansion by hand: 2(1*1-0*3) - 0 + 1(1*3-0) = 5
    assert m3.det() == 5
    ident = SquareMatrix.identity(ZZ, 3)
    assert (m3 * ident).rows == m3.rows


def test_matrix_inverse_mod_pk_round_trip():
    R = ModRing(3, 4)
    m = SquareMatrix.from_lists(R, [[2, 5], [1, 3]])
    inv = mat_inverse_mod_pk(m)
    assert (m * inv) == SquareMatrix.identity(R, 2)
    singular = SquareMatrix.from_lists(R, [[3, 0], [0, 1]])
    with pytest.raises(NotInvertibleModP):
        mat_inverse_mod_pk(singular)


def test_gauss_inverse_mod_p_agrees_with_lifted_inverse():
    rows = [[2, 5], [1, 3]]
    inv = gauss_inverse_mod_p(rows, 3)
    prod = [[sum(rows[i][k] * inv[k][j] for k in range(2)) % 3
             for j in range(2)] for i in range(2)]
    assert prod == [[1, 0], [0, 1]]


def test_matrix_sigma_and_derivation_entrywise():
    R = ParamRing(ZZ, ("t",), trunc=8)
    sig = FrobeniusMap(R, 2)
    mat = SquareMatrix(R, [[{(1,): 1}, {(0,): 3}],
                           [{}, {(2,): 1}]])
    twisted = matrix_sigma(mat, sig)
    assert twisted.rows[0][0] == {(2,): 1}
    assert twisted.rows[1][1] == {(4,): 1}
    D = DerivationMap.coordinate(R, "t")
    der = matrix_derivation(mat, D)
    assert der.rows[0][0] == {(0,): 1}
    assert der.rows[0][1] == {}
    assert der.rows[1][1] == {(1,): 2}


def test_p_valuation_cases():
    assert p_valuation(0, 5) == INF
    assert p_valuation(50, 5) == 2
    assert p_valuation(Fraction(3, 25), 5) == -2
    assert p_valuation(Fraction(0), 7) == INF
    R = ParamRing(ZZ, ("t",), trunc=4)
    elem = RingElement(R, {(0,): 9, (1,): 3})
    assert p_valuation(elem, 3) == 1
    mat = SquareMatrix.from_lists(ZZ, [[45, 9], [18, 27]])
    assert matrix_min_valuation(mat, 3) == 2


def test_padic_digits_text():
    # 271 = 7 + 2*11 + 2*121, checked by integer arithmetic
    assert 7 + 2 * 11 + 2 * 121 == 271
    assert padic_digits(271, 11, 3) == "7 + 2*11 + 2*11^2"
    assert padic_digits(0, 5, 3) == "0"
    assert padic_digits(19, 11, 2) == "8 + 1*11"


def test_series_inverse_round_trip():
    R = ParamRing(QQ, ("a", "b"), trunc=6)
    raw = {(0, 0): Fraction(1), (1, 0): Fraction(-2), (1, 1): Fraction(3)}
    inv = series_inverse(R, raw)
    assert R.mul(raw, inv) == R.one()
    with pytest.raises(ZeroDivisionError):
        series_inverse(R, {(1, 0): Fraction(1)})


def test_ring_element_coercion_and_mismatch():
    R = ParamRing(ZZ, ("t",), trunc=3)
    S = ParamRing(ZZ, ("u",), trunc=3)
    t = RingElement(R, R.monomial((1,)))
    assert (t + 1).data == {(1,): 1, (0,): 1}
    u = RingElement(S, S.monomial((1,)))
    with pytest.raises(RingMismatchError):
        _ = t + u
