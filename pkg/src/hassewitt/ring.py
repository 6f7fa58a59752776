"""Exact coefficient rings and the maps acting on them.

Four kinds of ring are supported:

* ``IntegerRing``    -- arbitrary-precision integers,
* ``RationalRing``   -- exact rationals (``fractions.Fraction`` data),
* ``ModRing(p, K)``  -- canonical residues in ``[0, p^K)``,
* ``ParamRing``      -- polynomials in named parameters over one of the
  scalar rings above, optionally truncated at a total degree (which turns
  the ring into a truncated power-series ring).

Raw element data (int, Fraction, or exponent-dict) is immutable by
convention: no kernel ever mutates its inputs, so values can be shared
freely.  ``RingElement`` is a thin wrapper giving operator syntax; the
heavy inner loops elsewhere work on raw data through the ring kernels.

Frobenius endomorphisms fix scalar coefficients and send each parameter
to a configurable image (``t -> t^p`` by default).  Derivations are
scalar-linear combinations of the partials with respect to parameters.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import NotInvertibleModP, RingMismatchError

INF = math.inf


def _int_valuation(n, p):
    """Exact p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def invmod(a, m):
    """Inverse of a modulo m; raises NotInvertibleModP when gcd(a, m) != 1."""
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NotInvertibleModP(f"{a} is not a unit modulo {m}") from None


class Ring:
    """Common interface for raw-data kernels.  Subclasses are value-like:
    equal descriptions compare equal and hash alike."""

    kind = "?"
    params: tuple = ()

    def zero(self):
        raise NotImplementedError

    def one(self):
        return self.from_int(1)

    def from_int(self, n):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        raise NotImplementedError

    def is_zero(self, a):
        raise NotImplementedError

    def pow(self, a, e):
        if e < 0:
            raise ValueError("negative exponent in ring power")
        acc = self.one()
        base = a
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def to_text(self, a):
        raise NotImplementedError

    def convert(self, value, src):
        """Convert raw data from ring ``src`` into this ring."""
        raise NotImplementedError

    def element(self, value=0):
        if isinstance(value, RingElement):
            if value.ring == self:
                return value
            return RingElement(self, self.convert(value.data, value.ring))
        if isinstance(value, int):
            return RingElement(self, self.from_int(value))
        return RingElement(self, value)


class IntegerRing(Ring):
    kind = "INTEGERS"

    def zero(self):
        return 0

    def from_int(self, n):
        return int(n)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def is_zero(self, a):
        return a == 0

    def to_text(self, a):
        return str(a)

    def convert(self, value, src):
        if src.kind == "INTEGERS":
            return value
        if src.kind == "RATIONALS":
            if value.denominator != 1:
                raise RingMismatchError(f"{value} is not an integer")
            return int(value)
        raise RingMismatchError(f"cannot convert {src} data to integers")

    def __eq__(self, other):
        return isinstance(other, IntegerRing)

    def __hash__(self):
        return hash("INTEGERS")

    def __repr__(self):
        return "ZZ"


class RationalRing(Ring):
    kind = "RATIONALS"

    def zero(self):
        return Fraction(0)

    def from_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def is_zero(self, a):
        return a == 0

    def to_text(self, a):
        return str(a)

    def convert(self, value, src):
        if src.kind == "RATIONALS":
            return value
        if src.kind == "INTEGERS":
            return Fraction(value)
        raise RingMismatchError(f"cannot convert {src} data to rationals")

    def __eq__(self, other):
        return isinstance(other, RationalRing)

    def __hash__(self):
        return hash("RATIONALS")

    def __repr__(self):
        return "QQ"


class ModRing(Ring):
    """Residues modulo p^K stored as canonical representatives in [0, p^K)."""

    kind = "MOD_PK"

    def __init__(self, p, K):
        if p < 2 or K < 1:
            raise ValueError("need a prime p >= 2 and precision K >= 1")
        self.p = p
        self.K = K
        self.mod = p ** K

    def zero(self):
        return 0

    def from_int(self, n):
        return n % self.mod

    def add(self, a, b):
        return (a + b) % self.mod

    def neg(self, a):
        return (-a) % self.mod

    def sub(self, a, b):
        return (a - b) % self.mod

    def mul(self, a, b):
        return (a * b) % self.mod

    def is_zero(self, a):
        return a == 0

    def inv(self, a):
        return invmod(a, self.mod)

    def to_text(self, a):
        return str(a)

    def convert(self, value, src):
        if src.kind == "INTEGERS":
            return value % self.mod
        if src.kind == "MOD_PK":
            if src.p != self.p or src.K < self.K:
                raise RingMismatchError(f"cannot convert {src} data to {self}")
            return value % self.mod
        if src.kind == "RATIONALS":
            num = value.numerator % self.mod
            return (num * self.inv(value.denominator % self.mod)) % self.mod
        raise RingMismatchError(f"cannot convert {src} data to {self}")

    def __eq__(self, other):
        return isinstance(other, ModRing) and (self.p, self.K) == (other.p, other.K)

    def __hash__(self):
        return hash(("MOD_PK", self.p, self.K))

    def __repr__(self):
        return f"Z/{self.p}^{self.K}"


class ParamRing(Ring):
    """Polynomials in named parameters with coefficients in a scalar ring.

    Raw data: dict mapping exponent tuples (non-negative ints, one slot per
    parameter) to nonzero scalar raw data.  With ``trunc`` set, monomials of
    total degree above ``trunc`` are dropped by every operation, i.e. the
    ring behaves as the truncated power-series quotient.
    """

    kind = "PARAM_POLY"

    def __init__(self, base, params, trunc=None):
        if isinstance(base, ParamRing):
            raise ValueError("parameter rings do not nest")
        if len(set(params)) != len(params):
            raise ValueError("duplicate parameter names")
        self.base = base
        self.params = tuple(params)
        self.trunc = trunc
        self.nparams = len(self.params)

    def zero(self):
        return {}

    def from_int(self, n):
        c = self.base.from_int(n)
        if self.base.is_zero(c):
            return {}
        return {(0,) * self.nparams: c}

    def monomial(self, exps, coeff=1):
        exps = tuple(exps)
        if len(exps) != self.nparams or any(e < 0 for e in exps):
            raise ValueError("bad parameter exponent vector")
        if self.trunc is not None and sum(exps) > self.trunc:
            return {}
        c = self.base.from_int(coeff) if isinstance(coeff, int) else coeff
        if self.base.is_zero(c):
            return {}
        return {exps: c}

    def add(self, a, b):
        base = self.base
        out = dict(a)
        for e, c in b.items():
            prev = out.get(e)
            if prev is None:
                out[e] = c
            else:
                s = base.add(prev, c)
                if base.is_zero(s):
                    del out[e]
                else:
                    out[e] = s
        return out

    def neg(self, a):
        base = self.base
        return {e: base.neg(c) for e, c in a.items()}

    def mul(self, a, b):
        base = self.base
        tr = self.trunc
        out = {}
        if len(a) > len(b):
            a, b = b, a
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if tr is not None and sum(e) > tr:
                    continue
                c = base.mul(ca, cb)
                prev = out.get(e)
                if prev is None:
                    if not base.is_zero(c):
                        out[e] = c
                else:
                    s = base.add(prev, c)
                    if base.is_zero(s):
                        del out[e]
                    else:
                        out[e] = s
        return out

    def is_zero(self, a):
        return not a

    def truncate(self, a, deg):
        return {e: c for e, c in a.items() if sum(e) <= deg}

    def constant_coeff(self, a):
        return a.get((0,) * self.nparams, self.base.zero())

    def partial(self, a, i):
        """Raw partial derivative with respect to the i-th parameter."""
        base = self.base
        out = {}
        for e, c in a.items():
            if e[i] == 0:
                continue
            d = base.mul(c, base.from_int(e[i]))
            if base.is_zero(d):
                continue
            e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
            prev = out.get(e2)
            if prev is None:
                out[e2] = d
            else:
                s = base.add(prev, d)
                if base.is_zero(s):
                    del out[e2]
                else:
                    out[e2] = s
        return out

    def substitute(self, a, images):
        """Evaluate raw data at parameter images (raw data of this ring)."""
        out = {}
        for e, c in a.items():
            term = {(0,) * self.nparams: c}
            for i, ei in enumerate(e):
                if ei:
                    term = self.mul(term, self.pow(images[i], ei))
            out = self.add(out, term)
        return out

    def to_text(self, a):
        if not a:
            return "0"
        base = self.base
        pieces = []
        for e in sorted(a, reverse=True):
            c = a[e]
            mono = "*".join(
                f"{name}^{k}" if k != 1 else name
                for name, k in zip(self.params, e)
                if k
            )
            ctext = base.to_text(c)
            if not mono:
                pieces.append(ctext)
            elif ctext == "1":
                pieces.append(mono)
            elif ctext == "-1":
                pieces.append(f"-{mono}")
            else:
                pieces.append(f"{ctext}*{mono}")
        text = pieces[0]
        for piece in pieces[1:]:
            if piece.startswith("-"):
                text += f" - {piece[1:]}"
            else:
                text += f" + {piece}"
        return text

    def convert(self, value, src):
        if src.kind != "PARAM_POLY":
            # scalar into constant polynomial
            c = self.base.convert(value, src)
            return {} if self.base.is_zero(c) else {(0,) * self.nparams: c}
        if src.params != self.params:
            raise RingMismatchError(
                f"parameter mismatch: {src.params} vs {self.params}")
        out = {}
        for e, c in value.items():
            if self.trunc is not None and sum(e) > self.trunc:
                continue
            c2 = self.base.convert(c, src.base)
            if not self.base.is_zero(c2):
                out[e] = c2
        return out

    def __eq__(self, other):
        return (isinstance(other, ParamRing)
                and self.base == other.base
                and self.params == other.params
                and self.trunc == other.trunc)

    def __hash__(self):
        return hash(("PARAM_POLY", self.base, self.params, self.trunc))

    def __repr__(self):
        tr = f", trunc={self.trunc}" if self.trunc is not None else ""
        return f"{self.base!r}[{','.join(self.params)}{tr}]"


ZZ = IntegerRing()
QQ = RationalRing()


class RingElement:
    """Immutable wrapper pairing raw data with its ring."""

    __slots__ = ("ring", "data")

    def __init__(self, ring, data):
        self.ring = ring
        self.data = data

    def _coerce(self, other):
        if isinstance(other, RingElement):
            if other.ring == self.ring:
                return other.data
            return self.ring.convert(other.data, other.ring)
        if isinstance(other, int):
            return self.ring.from_int(other)
        raise RingMismatchError(f"cannot combine {other!r} with {self.ring!r} element")

    def __add__(self, other):
        return RingElement(self.ring, self.ring.add(self.data, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RingElement(self.ring, self.ring.sub(self.data, self._coerce(other)))

    def __rsub__(self, other):
        return RingElement(self.ring, self.ring.sub(self._coerce(other), self.data))

    def __mul__(self, other):
        return RingElement(self.ring, self.ring.mul(self.data, self._coerce(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.data))

    def __pow__(self, e):
        return RingElement(self.ring, self.ring.pow(self.data, e))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.data == self.ring.from_int(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        if other.ring == self.ring:
            return self.data == other.data
        try:
            return self.data == self._coerce(other)
        except RingMismatchError:
            return False

    def __hash__(self):
        data = self.data
        if isinstance(data, dict):
            data = frozenset(data.items())
        return hash((self.ring, data))

    def is_zero(self):
        return self.ring.is_zero(self.data)

    def to_text(self):
        return self.ring.to_text(self.data)

    def __repr__(self):
        return f"<{self.to_text()} in {self.ring!r}>"


class FrobeniusMap:
    """Lift of the p-th power Frobenius.

    Scalar rings carry the identity lift (the reduction of the identity on
    the integers, which satisfies sigma(r) = r^p mod p by Fermat).  On a
    parameter ring the map fixes scalar coefficients and substitutes each
    parameter by a configurable image, ``t -> t^p`` when none is given.
    Non-standard images are allowed so that bad lifts can be constructed
    and rejected by :func:`verify_frobenius_lift`.
    """

    def __init__(self, ring, p, images=None):
        self.ring = ring
        self.p = p
        self.images = None
        self._standard = True
        if isinstance(ring, ParamRing):
            if images is not None:
                imgs = []
                for img in images:
                    if isinstance(img, RingElement):
                        img = ring.convert(img.data, img.ring)
                    imgs.append(img)
                self.images = tuple(imgs)
                standard = []
                for i, name in enumerate(ring.params):
                    e = tuple(p if j == i else 0 for j in range(ring.nparams))
                    standard.append(self.images[i] == {e: ring.base.one()})
                self._standard = all(standard)
        elif images is not None:
            raise ValueError("scalar rings admit no parameter images")

    @property
    def is_standard(self):
        """True when every parameter maps to its own p-th power."""
        return self._standard

    def apply_raw(self, a, m=1):
        if m < 0:
            raise ValueError("negative Frobenius power")
        if m == 0 or not isinstance(self.ring, ParamRing):
            return a
        ring = self.ring
        if self._standard:
            q = self.p ** m
            tr = ring.trunc
            out = {}
            for e, c in a.items():
                e2 = tuple(x * q for x in e)
                if tr is not None and sum(e2) > tr:
                    continue
                out[e2] = c
            return out
        images = self.images
        if images is None:
            q = self.p
            images = tuple(
                {tuple(q if j == i else 0 for j in range(ring.nparams)): ring.base.one()}
                for i in range(ring.nparams))
        out = a
        for _ in range(m):
            out = ring.substitute(out, images)
        return out

    def apply(self, elem, m=1):
        if elem.ring != self.ring:
            raise RingMismatchError("element does not live in the map's ring")
        return RingElement(self.ring, self.apply_raw(elem.data, m))


class DerivationMap:
    """Derivation D = sum_i c_i * d/dt_i on a parameter ring.

    On scalar rings only the zero derivation exists (empty coefficients).
    """

    def __init__(self, ring, coeffs=()):
        self.ring = ring
        if isinstance(ring, ParamRing):
            table = {}
            if isinstance(coeffs, dict):
                items = coeffs.items()
            else:
                items = zip(ring.params, coeffs)
            for name, c in items:
                if name not in ring.params:
                    raise ValueError(f"unknown parameter {name!r}")
                if isinstance(c, RingElement):
                    c = ring.convert(c.data, c.ring)
                elif isinstance(c, int):
                    c = ring.from_int(c)
                table[ring.params.index(name)] = c
            self.coeffs = table
        else:
            if coeffs:
                raise ValueError("scalar rings admit only the zero derivation")
            self.coeffs = {}

    @classmethod
    def coordinate(cls, ring, name):
        """The plain partial derivative with respect to one parameter."""
        return cls(ring, {name: 1})

    def is_coordinate(self):
        """The parameter name when this is a plain partial derivative."""
        if len(self.coeffs) != 1:
            return None
        (i, c), = self.coeffs.items()
        if c == self.ring.from_int(1):
            return self.ring.params[i]
        return None

    def apply_raw(self, a):
        ring = self.ring
        if not self.coeffs:
            return ring.zero()
        out = ring.zero()
        for i, c in self.coeffs.items():
            out = ring.add(out, ring.mul(c, ring.partial(a, i)))
        return out

    def apply(self, elem):
        if elem.ring != self.ring:
            raise RingMismatchError("element does not live in the map's ring")
        return RingElement(self.ring, self.apply_raw(elem.data))


class SquareMatrix:
    """Dense square matrix over any ring, with optional row/column labels."""

    __slots__ = ("ring", "n", "rows", "labels")

    def __init__(self, ring, rows, labels=None):
        self.ring = ring
        self.rows = tuple(tuple(row) for row in rows)
        self.n = len(self.rows)
        for row in self.rows:
            if len(row) != self.n:
                raise ValueError("matrix is not square")
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def from_lists(cls, ring, lists, labels=None):
        rows = []
        for row in lists:
            raw = []
            for x in row:
                if isinstance(x, RingElement):
                    raw.append(ring.convert(x.data, x.ring))
                elif isinstance(x, int):
                    raw.append(ring.from_int(x))
                else:
                    raw.append(x)
            rows.append(raw)
        return cls(ring, rows, labels)

    @classmethod
    def identity(cls, ring, n, labels=None):
        one, zero = ring.one(), ring.zero()
        return cls(ring, [[one if i == j else zero for j in range(n)]
                          for i in range(n)], labels)

    @classmethod
    def zero(cls, ring, n, labels=None):
        z = ring.zero()
        return cls(ring, [[z] * n for _ in range(n)], labels)

    def entry(self, i, j):
        return RingElement(self.ring, self.rows[i][j])

    def _check(self, other):
        if not isinstance(other, SquareMatrix):
            raise RingMismatchError("expected a matrix operand")
        if other.ring != self.ring or other.n != self.n:
            raise RingMismatchError("matrix shapes or rings differ")

    def __add__(self, other):
        self._check(other)
        add = self.ring.add
        return SquareMatrix(self.ring,
                            [[add(a, b) for a, b in zip(ra, rb)]
                             for ra, rb in zip(self.rows, other.rows)],
                            self.labels)

    def __sub__(self, other):
        self._check(other)
        sub = self.ring.sub
        return SquareMatrix(self.ring,
                            [[sub(a, b) for a, b in zip(ra, rb)]
                             for ra, rb in zip(self.rows, other.rows)],
                            self.labels)

    def __neg__(self):
        neg = self.ring.neg
        return SquareMatrix(self.ring, [[neg(a) for a in row] for row in self.rows],
                            self.labels)

    def __mul__(self, other):
        if isinstance(other, SquareMatrix):
            self._check(other)
            ring = self.ring
            n = self.n
            cols = list(zip(*other.rows))
            out = []
            for row in self.rows:
                orow = []
                for col in cols:
                    acc = ring.zero()
                    for a, b in zip(row, col):
                        acc = ring.add(acc, ring.mul(a, b))
                    orow.append(acc)
                out.append(orow)
            return SquareMatrix(ring, out, self.labels)
        c = other.data if isinstance(other, RingElement) else self.ring.from_int(other)
        mul = self.ring.mul
        return SquareMatrix(self.ring, [[mul(a, c) for a in row] for row in self.rows],
                            self.labels)

    __rmul__ = __mul__

    def map_entries(self, fn):
        return SquareMatrix(self.ring, [[fn(a) for a in row] for row in self.rows],
                            self.labels)

    def change_ring(self, ring):
        conv = ring.convert
        src = self.ring
        return SquareMatrix(ring, [[conv(a, src) for a in row] for row in self.rows],
                            self.labels)

    def trace(self):
        acc = self.ring.zero()
        for i in range(self.n):
            acc = self.ring.add(acc, self.rows[i][i])
        return RingElement(self.ring, acc)

    def det(self):
        return RingElement(self.ring, _det_raw(self.ring, self.rows))

    def is_zero(self):
        return all(self.ring.is_zero(a) for row in self.rows for a in row)

    def __eq__(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        return (self.ring == other.ring and self.rows == other.rows)

    def __hash__(self):
        return hash((self.ring, self.n))

    def to_texts(self):
        return [[self.ring.to_text(a) for a in row] for row in self.rows]

    def __repr__(self):
        body = "; ".join(", ".join(row) for row in self.to_texts())
        return f"[{body}]"


def _det_raw(ring, rows):
    n = len(rows)
    if n == 0:
        return ring.one()
    if n == 1:
        return rows[0][0]
    acc = ring.zero()
    sign = 1
    minor_rows = rows[1:]
    for j in range(n):
        a = rows[0][j]
        if not ring.is_zero(a):
            minor = [[row[k] for k in range(n) if k != j] for row in minor_rows]
            term = ring.mul(a, _det_raw(ring, minor))
            acc = ring.add(acc, term if sign > 0 else ring.neg(term))
        sign = -sign
    return acc


# ---------------------------------------------------------------------------
# module-level operations


def frobenius_apply(elem, sigma, m=1):
    """Apply the m-th iterate of a Frobenius lift to a ring element."""
    return sigma.apply(elem, m)


def derivation_apply(elem, deriv):
    """Apply a derivation to a ring element."""
    return deriv.apply(elem)


def verify_frobenius_lift(sigma, samples, p=None):
    """Check sigma(r) == r^p mod p on each sample element.

    Returns True when every sample passes.  This is a sound rejection test
    for maps claimed to lift Frobenius; it cannot prove the property on the
    whole ring, only on the samples given.
    """
    if p is None:
        p = sigma.p
    ring = sigma.ring
    for r in samples:
        if isinstance(r, RingElement):
            if r.ring != ring:
                raise RingMismatchError("sample outside the map's ring")
            raw = r.data
        else:
            raw = r
        diff = ring.sub(sigma.apply_raw(raw), ring.pow(raw, p))
        if p_valuation(RingElement(ring, diff), p) < 1:
            return False
    return True


def mat_mul(a, b):
    return a * b


def matrix_sigma(mat, sigma, m=1):
    """Entrywise Frobenius action on a matrix."""
    return mat.map_entries(lambda x: sigma.apply_raw(x, m))


def matrix_derivation(mat, deriv):
    """Entrywise derivation action on a matrix."""
    return mat.map_entries(deriv.apply_raw)


def gauss_inverse_mod_p(rows, p):
    """Inverse of an integer matrix modulo a prime via Gaussian elimination.

    ``rows``: list of lists of ints.  Raises NotInvertibleModP if singular.
    """
    n = len(rows)
    a = [[x % p for x in row] + [1 if i == j else 0 for j in range(n)]
         for i, row in enumerate(rows)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col] % p:
                piv = r
                break
        if piv is None:
            raise NotInvertibleModP(f"matrix is singular mod {p}")
        a[col], a[piv] = a[piv], a[col]
        inv = invmod(a[col][col], p)
        a[col] = [(x * inv) % p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _constant_int_matrix(mat):
    """Entries of the matrix as plain integers (constant terms for params)."""
    ring = mat.ring
    out = []
    if isinstance(ring, ParamRing):
        for row in mat.rows:
            out.append([ring.constant_coeff(x) for x in row])
    else:
        out = [list(row) for row in mat.rows]
    return out


def mat_inverse_mod_pk(mat):
    """Inverse of a matrix over Z/p^K or over a truncated parameter ring on
    that base.

    The constant term is inverted mod p by Gaussian elimination, then the
    Newton iteration X <- X(2I - AX) lifts the inverse; each step doubles
    the correct p-adic precision and the correct parameter degree, so the
    iteration count is logarithmic in both.
    """
    ring = mat.ring
    if isinstance(ring, ModRing):
        p, K, extra = ring.p, ring.K, 0
    elif isinstance(ring, ParamRing) and isinstance(ring.base, ModRing):
        if ring.trunc is None:
            raise RingMismatchError(
                "parameter matrices are inverted in truncated rings only")
        p, K, extra = ring.base.p, ring.base.K, ring.trunc
    else:
        raise RingMismatchError(f"no modular inverse over {ring!r}")

    x0 = gauss_inverse_mod_p(_constant_int_matrix(mat), p)
    x = SquareMatrix.from_lists(ring, x0, mat.labels)
    ident = SquareMatrix.identity(ring, mat.n, mat.labels)
    two = ident + ident
    steps = max(1, math.ceil(math.log2(K + extra + 1)) + 1)
    for _ in range(steps):
        ax = mat * x
        if ax == ident:
            break
        x = x * (two - ax)
    if mat * x != ident:
        raise ArithmeticError("Newton inverse failed to converge")
    return x


def p_valuation(x, p):
    """p-adic valuation; math.inf for zero.

    For Z/p^K data a zero residue reports inf, meaning "at least K": callers
    asserting a congruence mod p^e must work at precision K >= e.  Rationals
    may have negative valuation.
    """
    if isinstance(x, RingElement):
        ring = x.ring
        if isinstance(ring, ParamRing):
            vals = [p_valuation(RingElement(ring.base, c), p) for c in x.data.values()]
            return min(vals, default=INF)
        x = x.data
    if isinstance(x, Fraction):
        if x == 0:
            return INF
        return _int_valuation(x.numerator, p) - _int_valuation(x.denominator, p)
    if isinstance(x, int):
        if x == 0:
            return INF
        return _int_valuation(x, p)
    raise TypeError(f"no p-adic valuation for {type(x).__name__}")


def matrix_min_valuation(mat, p):
    """Minimum entry valuation: the defect certificate for congruences."""
    vals = [p_valuation(RingElement(mat.ring, a), p)
            for row in mat.rows for a in row]
    return min(vals, default=INF)


def padic_digits(n, p, K):
    """Canonical digit expansion text, e.g. "8 + 1*11 + 1*11^2"."""
    n %= p ** K
    digits = []
    for i in range(K):
        digits.append(n % p)
        n //= p
    pieces = []
    for i, d in enumerate(digits):
        if i == 0:
            pieces.append(str(d))
        elif d:
            pieces.append(f"{d}*{p}" if i == 1 else f"{d}*{p}^{i}")
    return " + ".join(pieces) if pieces else "0"


def series_inverse(ring, raw):
    """Multiplicative inverse in a truncated parameter ring.

    Needs a truncation degree and an invertible constant term; Newton
    iteration doubles the correct degree each step.
    """
    if not isinstance(ring, ParamRing) or ring.trunc is None:
        raise RingMismatchError(
            "series inversion runs in truncated parameter rings only")
    base = ring.base
    c0 = ring.constant_coeff(raw)
    if isinstance(base, ModRing):
        inv0 = base.inv(c0)
    elif isinstance(base, RationalRing):
        if c0 == 0:
            raise ZeroDivisionError("constant term vanishes")
        inv0 = Fraction(1) / c0
    elif isinstance(base, IntegerRing):
        if c0 not in (1, -1):
            raise ZeroDivisionError(
                "integer series invert only with unit constant term")
        inv0 = c0
    else:
        raise RingMismatchError(f"no series inverse over base {base!r}")
    x = {(0,) * ring.nparams: inv0}
    two = ring.from_int(2)
    steps = max(1, math.ceil(math.log2(ring.trunc + 1)) + 1)
    for _ in range(steps):
        ax = ring.mul(raw, x)
        if ax == ring.one():
            break
        x = ring.mul(x, ring.sub(two, ax))
    if ring.mul(raw, x) != ring.one():
        raise ArithmeticError("series inverse failed to converge")
    return x
