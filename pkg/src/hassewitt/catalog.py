"""Worked fixtures: a one-dimensional cubic family, a fixed genus-2
hyperelliptic curve, and a few small elliptic models.

The cubic family f = 1 + a x + b x^2 + x^3 comes with its exact
connection matrices over rational parameter series, obtained by dividing
fixed polynomial matrices by the discriminant.  Everything here is built
from first principles (Sylvester resultants, series inversion), so tests
can cross-check the closed forms against independent routes.
"""

from __future__ import annotations

from fractions import Fraction

from .laurent import LaurentPoly, parse_poly
from .ring import (ZZ, QQ, DerivationMap, ParamRing, SquareMatrix,
                   series_inverse)


# ---------------------------------------------------------------------------
# resultants


def sylvester_resultant(fc, gc, ring):
    """Resultant of two univariate polynomials given by coefficient lists
    (constant term first) with entries raw in ``ring``."""
    fc = list(fc)
    gc = list(gc)
    while fc and ring.is_zero(fc[-1]):
        fc.pop()
    while gc and ring.is_zero(gc[-1]):
        gc.pop()
    m, n = len(fc) - 1, len(gc) - 1
    if m < 0 or n < 0:
        return ring.zero()
    size = m + n
    rows = []
    frev = fc[::-1]
    grev = gc[::-1]
    for i in range(n):
        row = [ring.zero()] * size
        for j, c in enumerate(frev):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [ring.zero()] * size
        for j, c in enumerate(grev):
            row[i + j] = c
        rows.append(row)
    return SquareMatrix(ring, rows).det().data


def monic_cubic_discriminant(ring, lin, quad):
    """Discriminant of x^3 + quad*x^2 + lin*x + constant-one, computed as
    minus the resultant with the derivative."""
    one = ring.one()
    three = ring.from_int(3)
    two = ring.from_int(2)
    fc = [one, lin, quad, one]
    gc = [lin, ring.mul(two, quad), three]
    res = sylvester_resultant(fc, gc, ring)
    return ring.neg(res)


# ---------------------------------------------------------------------------
# the cubic family


CUBIC_PARAMS = ("a", "b")


def cubic_poly(trunc=None):
    """f = 1 + a x + b x^2 + x^3 over integer parameter polynomials."""
    return parse_poly("1 + a*x + b*x^2 + x^3", ["x"], params=CUBIC_PARAMS,
                      trunc=trunc)


def cubic_discriminant(ring=None):
    """The family discriminant as raw data in ``ring`` (default: exact)."""
    if ring is None:
        ring = ParamRing(ZZ, CUBIC_PARAMS)
    a = ring.monomial((1, 0))
    b = ring.monomial((0, 1))
    return monic_cubic_discriminant(ring, a, b)


def _poly(ring, spec):
    """Raw parameter polynomial from {(i, j): integer} exponent data."""
    out = {}
    for e, c in spec.items():
        if c:
            out[e] = ring.base.from_int(c)
    return out


def cubic_connection_matrices(N):
    """Exact connection matrices of the family for d/da and d/db.

    Entries are rational parameter series truncated at degree N: a fixed
    polynomial matrix divided by the discriminant.
    """
    ring = ParamRing(QQ, CUBIC_PARAMS, N)
    disc = ring.convert(cubic_discriminant(), ParamRing(ZZ, CUBIC_PARAMS))
    inv = series_inverse(ring, disc)
    # numerators for d/da
    na = [
        [_poly(ring, {(0, 1): 3, (1, 2): 1, (2, 0): -4}),
         _poly(ring, {(1, 1): 1, (0, 0): -9})],
        [_poly(ring, {(1, 0): 6, (0, 2): -2}),
         _poly(ring, {(0, 1): 6, (2, 0): -2})],
    ]
    # numerators for d/db
    nb = [
        [_poly(ring, {(1, 0): 6, (0, 2): -2}),
         _poly(ring, {(0, 1): 6, (2, 0): -2})],
        [_poly(ring, {(1, 1): 1, (0, 0): -9}),
         _poly(ring, {(1, 0): 3, (2, 1): 1, (0, 2): -4})],
    ]
    scale = lambda rows: SquareMatrix(
        ring, [[ring.mul(inv, entry) for entry in row] for row in rows])
    da = DerivationMap.coordinate(ring, "a")
    db = DerivationMap.coordinate(ring, "b")
    return [(da, scale(na)), (db, scale(nb))]


def frame_constant_factor(p):
    """The constant matrix the frobenius ratio of the cubic family
    degenerates to at a = b = 0; depends on p mod 3."""
    if p == 3:
        raise ValueError("the family frame is singular at p = 3")
    if p % 3 == 1:
        rows = [[1, 0], [0, 1]]
    else:
        rows = [[0, -1], [-1, 0]]
    return SquareMatrix.from_lists(ZZ, rows)


# ---------------------------------------------------------------------------
# the genus-2 curve


GENUS2_H_COEFFS = (1, 1, 2, 0, 0, 1)   # h(x) = x^5 + 2 x^2 + x + 1
GENUS2_P = 11
GENUS2_NUMERATOR = (1, 3, 18, 33, 121)


def genus2_poly():
    """The plane model y^2 - h(x) of the fixed genus-2 curve."""
    return parse_poly("y^2 - x^5 - 2*x^2 - x - 1", ["x", "y"])


def genus2_curve():
    return {
        "poly": genus2_poly(),
        "h_coeffs": GENUS2_H_COEFFS,
        "p": GENUS2_P,
        "numerator": GENUS2_NUMERATOR,
    }


# ---------------------------------------------------------------------------
# small elliptic models


ELLIPTIC_MODELS = (
    ("short_a1_b1", 1, 1),
    ("short_am1_b1", -1, 1),
    ("short_a2_b1", 2, 1),
    ("short_a0_b1", 0, 1),
)


def elliptic_poly(a, b):
    """y^2 - x^3 - a x - b as a two-variable polynomial."""
    terms = {(0, 2): 1, (3, 0): -1, (1, 0): -a, (0, 0): -b}
    return LaurentPoly(("x", "y"), terms, ZZ)


def elliptic_discriminant(a, b):
    """Discriminant of the short Weierstrass model, -16(4a^3 + 27b^2)."""
    return -16 * (4 * a ** 3 + 27 * b ** 2)
