"""Sparse multivariate Laurent polynomials, their Newton polytopes, and
exact lattice-point enumeration.

Terms are a dict from integer exponent tuples (negative entries allowed)
to raw coefficient data of some ring from :mod:`hassewitt.ring`.  All
polytope geometry is exact: rational Gaussian elimination for affine
hulls, brute-force facet enumeration over support subsets (fine for
supports up to a few dozen points in up to six variables), and bounding
box scans with exact membership tests for lattice points.
"""

from __future__ import annotations

import itertools
import math
import os
import warnings
from fractions import Fraction

from . import kron
from .errors import BudgetExceededError, EmptyLatticeError, ParseError, RingMismatchError
from .ring import ZZ, QQ, ModRing, ParamRing, RingElement, p_valuation

DEFAULT_TERM_BUDGET = 50_000_000


def default_budget():
    env = os.environ.get("HASSEWITT_TERM_BUDGET")
    if env:
        return int(env)
    return DEFAULT_TERM_BUDGET


class LaurentPoly:
    """A Laurent polynomial in named variables over a coefficient ring."""

    __slots__ = ("vars", "ring", "terms")

    def __init__(self, vars, terms, ring=ZZ):
        self.vars = tuple(vars)
        if isinstance(ring, ParamRing) and set(ring.params) & set(self.vars):
            raise ValueError("parameter names collide with variable names")
        self.ring = ring
        n = len(self.vars)
        clean = {}
        for e, c in terms.items():
            e = tuple(e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has wrong arity")
            if isinstance(c, RingElement):
                c = ring.convert(c.data, c.ring)
            elif isinstance(c, int) and not isinstance(ring, ParamRing):
                c = ring.from_int(c)
            elif isinstance(c, int):
                c = ring.from_int(c)
            if not ring.is_zero(c):
                clean[e] = c
        self.terms = clean

    # -- basic queries ----------------------------------------------------

    @property
    def nvars(self):
        return len(self.vars)

    def support(self):
        return set(self.terms)

    def is_zero(self):
        return not self.terms

    def coeff(self, exp):
        """Coefficient of the monomial with exponent vector ``exp``."""
        exp = tuple(exp)
        if len(exp) != self.nvars:
            raise ValueError("exponent arity mismatch")
        return RingElement(self.ring, self.terms.get(exp, self.ring.zero()))

    def constant_term(self):
        return self.coeff((0,) * self.nvars)

    # -- ring plumbing ----------------------------------------------------

    def change_ring(self, ring):
        if ring == self.ring:
            return self
        out = {}
        for e, c in self.terms.items():
            c2 = ring.convert(c, self.ring)
            if not ring.is_zero(c2):
                out[e] = c2
        return LaurentPoly(self.vars, out, ring)

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            if other.vars != self.vars:
                raise RingMismatchError("variable sets differ")
            if other.ring != self.ring:
                other = other.change_ring(self.ring)
            return other
        if isinstance(other, (int, RingElement)):
            c = other if isinstance(other, int) else other
            return LaurentPoly(self.vars, {(0,) * self.nvars: c}, self.ring)
        raise RingMismatchError(f"cannot combine {other!r} with a Laurent polynomial")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        ring = self.ring
        out = dict(self.terms)
        for e, c in other.terms.items():
            prev = out.get(e)
            if prev is None:
                out[e] = c
            else:
                s = ring.add(prev, c)
                if ring.is_zero(s):
                    del out[e]
                else:
                    out[e] = s
        return LaurentPoly(self.vars, out, ring)

    __radd__ = __add__

    def __neg__(self):
        neg = self.ring.neg
        return LaurentPoly(self.vars, {e: neg(c) for e, c in self.terms.items()},
                           self.ring)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, RingElement)):
            c = self.ring.from_int(other) if isinstance(other, int) else \
                self.ring.convert(other.data, other.ring)
            mul = self.ring.mul
            out = {}
            for e, v in self.terms.items():
                w = mul(v, c)
                if not self.ring.is_zero(w):
                    out[e] = w
            return LaurentPoly(self.vars, out, self.ring)
        other = self._coerce(other)
        out = _mul_terms(self.ring, self.terms, other.terms, default_budget())
        return LaurentPoly(self.vars, out, self.ring)

    __rmul__ = __mul__

    def __pow__(self, e):
        return pow_reduced(self, e)

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return (self.vars == other.vars and self.ring == other.ring
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.vars, self.ring, frozenset(self.terms)))

    # -- presentation -------------------------------------------------------

    def to_text(self):
        if not self.terms:
            return "0"
        ring = self.ring
        pieces = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                f"{v}^{k}" if k != 1 else v
                for v, k in zip(self.vars, e) if k)
            ctext = ring.to_text(c)
            composite = isinstance(ring, ParamRing) and len(c) > 1
            if composite:
                ctext = f"({ctext})"
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

    def __repr__(self):
        return f"<{self.to_text()}>"


def coeff(f, exp):
    return f.coeff(exp)


def _mul_terms(ring, ta, tb, budget):
    """Dict convolution with per-kind fast paths and a term budget."""
    if not ta or not tb:
        return {}
    if len(ta) > len(tb):
        ta, tb = tb, ta
    out = {}
    if isinstance(ring, ModRing):
        mod = ring.mod
        for ea, ca in ta.items():
            for eb, cb in tb.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = (out.get(e, 0) + ca * cb) % mod
        out = {e: c for e, c in out.items() if c}
    elif ring is ZZ or ring == ZZ:
        for ea, ca in ta.items():
            for eb, cb in tb.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        out = {e: c for e, c in out.items() if c}
    else:
        add, mul, is_zero = ring.add, ring.mul, ring.is_zero
        zero = ring.zero()
        for ea, ca in ta.items():
            for eb, cb in tb.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                c = mul(ca, cb)
                prev = out.get(e)
                out[e] = c if prev is None else add(prev, c)
        out = {e: c for e, c in out.items() if not is_zero(c)}
    if budget is not None and len(out) > budget:
        raise BudgetExceededError(
            f"product has {len(out)} terms, budget is {budget}")
    return out


# ---------------------------------------------------------------------------
# powering


def _grid_eligible(ring):
    if isinstance(ring, ModRing):
        return True
    return (isinstance(ring, ParamRing) and isinstance(ring.base, ModRing)
            and ring.trunc is not None)


def flatten_terms(f):
    """Spread parameter exponents onto extra grid axes.

    Returns (flat terms, total axis count, number of x axes, trunc, pk).
    """
    ring = f.ring
    nx = f.nvars
    if isinstance(ring, ModRing):
        return dict(f.terms), nx, nx, None, ring.mod
    base = ring.base
    flat = {}
    for e, cdict in f.terms.items():
        for pe, c in cdict.items():
            flat[e + pe] = c
    return flat, nx + ring.nparams, nx, ring.trunc, base.mod


def unflatten_terms(flat, nx, ring):
    if isinstance(ring, ModRing):
        return dict(flat)
    out = {}
    for e, c in flat.items():
        xe, pe = e[:nx], e[nx:]
        out.setdefault(xe, {})[pe] = c
    return out


def make_power_engine(f, budget=None):
    """A reusable binary-powering engine for a grid-eligible polynomial."""
    if not _grid_eligible(f.ring):
        raise RingMismatchError("power engine needs residue coefficients")
    flat, naxes, nx, trunc, pk = flatten_terms(f)
    if budget is None:
        budget = default_budget()
    return kron.PowerEngine(flat, naxes, pk, nx=nx, trunc=trunc, budget=budget)


def _pow_dict(f, e, budget):
    ring = f.ring
    acc = LaurentPoly(f.vars, {(0,) * f.nvars: ring.one()}, ring)
    base = f
    while e:
        if e & 1:
            acc = LaurentPoly(f.vars,
                              _mul_terms(ring, acc.terms, base.terms, budget),
                              ring)
        e >>= 1
        if e:
            base = LaurentPoly(f.vars,
                               _mul_terms(ring, base.terms, base.terms, budget),
                               ring)
    return acc


def pow_reduced(f, e, ring=None, budget=None):
    """f**e with coefficients reduced into ``ring`` after every product.

    Residue coefficients (scalar or truncated parameter polynomials over
    residues) go through the dense Kronecker engine; everything else uses
    dict convolution.  Both paths reduce after each multiplication, and
    both enforce the term budget.
    """
    if e < 0:
        raise ValueError("negative power of a Laurent polynomial")
    if ring is not None and ring != f.ring:
        f = f.change_ring(ring)
    if budget is None:
        budget = default_budget()
    if e == 0:
        return LaurentPoly(f.vars, {(0,) * f.nvars: f.ring.one()}, f.ring)
    if f.is_zero():
        return LaurentPoly(f.vars, {}, f.ring)
    if e == 1:
        return f
    if _grid_eligible(f.ring) and f.nvars + len(f.ring.params) >= 1:
        try:
            engine = make_power_engine(f, budget)
            grid = engine.power(e)
            flat = kron.grid_to_terms(grid)
            nx = f.nvars
            return LaurentPoly(f.vars, unflatten_terms(flat, nx, f.ring), f.ring)
        except kron.SlotOverflow:
            pass
    return _pow_dict(f, e, budget)


def frobenius_poly(f, sigma, m=1):
    """Apply a Frobenius lift to a polynomial: x^u -> x^(p^m u) on the
    variables, sigma^m on the coefficients."""
    if m < 0:
        raise ValueError("negative Frobenius power")
    if m == 0:
        return f
    q = sigma.p ** m
    ring = f.ring
    out = {}
    for e, c in f.terms.items():
        c2 = sigma.apply_raw(c, m)
        if not ring.is_zero(c2):
            out[tuple(x * q for x in e)] = c2
    return LaurentPoly(f.vars, out, ring)


def poly_min_valuation(f, p):
    vals = [p_valuation(RingElement(f.ring, c), p) for c in f.terms.values()]
    return min(vals, default=math.inf)


# ---------------------------------------------------------------------------
# exact rational linear algebra helpers


def _row_reduce(rows):
    """In-place rational row reduction; returns pivot column list."""
    rows = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _rank(rows):
    if not rows:
        return 0
    reduced, pivots = _row_reduce(rows)
    return len(pivots)


def _primitive(vec):
    """Scale a rational vector to a primitive integer vector."""
    den = 1
    for x in vec:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def _nullspace_int(rows, n):
    """Primitive integer basis of the right null space of a matrix."""
    if not rows:
        rows = [[Fraction(0)] * n]
    reduced, pivots = _row_reduce(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -reduced[r][fc]
        prim = _primitive(vec)
        # deterministic sign: first nonzero entry positive
        for x in prim:
            if x:
                if x < 0:
                    prim = tuple(-y for y in prim)
                break
        basis.append(prim)
    return basis


# ---------------------------------------------------------------------------
# Newton polytopes


class Polytope:
    """Convex hull of finitely many integer points, described exactly.

    ``facets`` are primitive integer inequalities a.x <= b valid on the
    hull and tight on a facet of its relative interior structure;
    ``hull_eqs`` are the integer equalities cutting out the affine hull.
    A polytope of less than full dimension has a nonempty ``hull_eqs``
    list and its "interior" means the relative interior.
    """

    __slots__ = ("n", "vertices", "facets", "hull_eqs")

    def __init__(self, n, vertices, facets, hull_eqs):
        self.n = n
        self.vertices = tuple(sorted(tuple(v) for v in vertices))
        self.facets = tuple(sorted(facets))
        self.hull_eqs = tuple(sorted(hull_eqs))

    @property
    def dim(self):
        return self.n - len(self.hull_eqs)

    def is_full_dimensional(self):
        return not self.hull_eqs

    def __eq__(self, other):
        if not isinstance(other, Polytope):
            return NotImplemented
        return (self.n, self.vertices, self.facets, self.hull_eqs) == \
               (other.n, other.vertices, other.facets, other.hull_eqs)

    def __hash__(self):
        return hash((self.n, self.vertices, self.facets, self.hull_eqs))

    def __repr__(self):
        return f"Polytope(dim={self.dim}, vertices={list(self.vertices)})"


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def newton_polytope(f):
    """Exact Newton polytope of a nonzero Laurent polynomial."""
    if f.is_zero():
        raise ValueError("the zero polynomial has no Newton polytope")
    pts = sorted(f.support())
    n = f.nvars
    return hull_of_points(pts, n)


def hull_of_points(pts, n):
    pts = sorted(set(tuple(p) for p in pts))
    x0 = pts[0]
    # affine hull: greedy independent difference basis
    dirs = []
    for q in pts[1:]:
        cand = tuple(a - b for a, b in zip(q, x0))
        if _rank(dirs + [cand]) > len(dirs):
            dirs.append(cand)
    d = len(dirs)
    hull_eqs = []
    for h in _nullspace_int([list(v) for v in dirs], n):
        hull_eqs.append((h, _dot(h, x0)))
    facets = set()
    if d > 0:
        for subset in itertools.combinations(pts, d):
            q0 = subset[0]
            diffs = [tuple(a - b for a, b in zip(q, q0)) for q in subset[1:]]
            # normal a = sum_j c_j dirs_j with a . diff == 0 for the subset
            mat = [[Fraction(_dot(dirs[j], diff)) for j in range(d)]
                   for diff in diffs]
            null = _nullspace_int(mat, d)
            if len(null) != 1:
                continue
            cvec = null[0]
            a = tuple(sum(cvec[j] * dirs[j][i] for j in range(d))
                      for i in range(n))
            a = _primitive([Fraction(x) for x in a])
            if all(x == 0 for x in a):
                continue
            vals = [_dot(a, q) for q in pts]
            b0 = _dot(a, q0)
            if max(vals) == b0:
                facets.add((a, b0))
            elif min(vals) == b0:
                facets.add((tuple(-x for x in a), -b0))
    facets = sorted(facets)
    vertices = []
    hull_normals = [list(h) for h, _ in hull_eqs]
    for pt in pts:
        tight = [list(a) for a, b in facets if _dot(a, pt) == b]
        if _rank(tight + hull_normals) == n:
            vertices.append(pt)
    if d == 0:
        vertices = [x0]
    return Polytope(n, vertices, facets, hull_eqs)


def contains(polytope, point, strict=False):
    """Exact membership; ``strict`` asks for the (relative) interior."""
    point = tuple(point)
    for h, c in polytope.hull_eqs:
        if _dot(h, point) != c:
            return False
    for a, b in polytope.facets:
        v = _dot(a, point)
        if strict:
            if v >= b:
                return False
        elif v > b:
            return False
    return True


def dilate(polytope, m):
    """The m-fold dilation m*P for a non-negative integer m."""
    if m < 0:
        raise ValueError("dilation factor must be non-negative")
    if m == 0:
        origin = (0,) * polytope.n
        return hull_of_points([origin], polytope.n)
    return Polytope(
        polytope.n,
        [tuple(m * x for x in v) for v in polytope.vertices],
        [(a, m * b) for a, b in polytope.facets],
        [(h, m * c) for h, c in polytope.hull_eqs],
    )


def lattice_points(polytope, mode="interior"):
    """All lattice points of the polytope, or of its relative interior,
    in lexicographic order.

    For a polytope of less than full dimension the interior mode means
    the relative interior; a warning notes the substitution.
    """
    if mode not in ("interior", "all"):
        raise ValueError("mode must be 'interior' or 'all'")
    strict = mode == "interior"
    if strict and not polytope.is_full_dimensional():
        warnings.warn(
            "polytope is not full-dimensional; using its relative interior",
            stacklevel=2)
    los = [min(v[i] for v in polytope.vertices) for i in range(polytope.n)]
    his = [max(v[i] for v in polytope.vertices) for i in range(polytope.n)]
    out = []
    for pt in itertools.product(*(range(lo, hi + 1)
                                  for lo, hi in zip(los, his))):
        if contains(polytope, pt, strict=strict):
            out.append(pt)
    return tuple(out)


# ---------------------------------------------------------------------------
# parsing and serialization


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.i = 0

    def _scan(self):
        text = self.text
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i
                while j < len(text) and text[j].isdigit():
                    j += 1
                self.tokens.append(("NUM", text[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("NAME", text[i:j], i))
                i = j
                continue
            if ch in "+-*^()":
                self.tokens.append((ch, ch, i))
                i += 1
                continue
            raise ParseError(f"unexpected character {ch!r}", i)
        self.tokens.append(("END", "", len(text)))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok


class _Parser:
    """Recursive descent over +, -, *, ^ with explicit multiplication only."""

    def __init__(self, text, vars, params, ring):
        self.sc = _Scanner(text)
        self.vars = tuple(vars)
        self.params = tuple(params)
        self.ring = ring
        self.n = len(self.vars)

    def parse(self):
        poly = self._expr()
        kind, val, pos = self.sc.peek()
        if kind != "END":
            raise ParseError(f"unexpected token {val!r}", pos)
        return poly

    def _expr(self):
        acc = self._term()
        while True:
            kind, _, _ = self.sc.peek()
            if kind == "+":
                self.sc.next()
                acc = acc + self._term()
            elif kind == "-":
                self.sc.next()
                acc = acc - self._term()
            else:
                return acc

    def _term(self):
        acc = self._factor()
        while True:
            kind, _, _ = self.sc.peek()
            if kind == "*":
                self.sc.next()
                acc = acc * self._factor()
            else:
                return acc

    def _factor(self):
        sign = 1
        while self.sc.peek()[0] in ("+", "-"):
            if self.sc.next()[0] == "-":
                sign = -sign
        poly = self._primary()
        return poly if sign > 0 else -poly

    def _signed_int(self):
        sign = 1
        kind, val, pos = self.sc.peek()
        if kind in ("+", "-"):
            self.sc.next()
            if kind == "-":
                sign = -1
            kind, val, pos = self.sc.peek()
        if kind != "NUM":
            raise ParseError("exponent must be an integer literal", pos)
        self.sc.next()
        return sign * int(val)

    def _mono(self, exp, coeff=None):
        ring = self.ring
        c = ring.one() if coeff is None else coeff
        return LaurentPoly(self.vars, {tuple(exp): c}, ring)

    def _primary(self):
        kind, val, pos = self.sc.next()
        if kind == "NUM":
            base = LaurentPoly(self.vars,
                               {(0,) * self.n: self.ring.from_int(int(val))},
                               self.ring)
            name_kind = None
        elif kind == "NAME":
            if val in self.vars:
                i = self.vars.index(val)
                exp = [0] * self.n
                exp[i] = 1
                base = self._mono(exp)
                name_kind = ("var", i)
            elif val in self.params:
                j = self.params.index(val)
                raw = self.ring.monomial(
                    tuple(1 if k == j else 0 for k in range(len(self.params))))
                base = LaurentPoly(self.vars, {(0,) * self.n: raw}, self.ring)
                name_kind = ("param", j)
            else:
                raise ParseError(f"unknown identifier {val!r}", pos)
        elif kind == "(":
            base = self._expr()
            kind2, val2, pos2 = self.sc.next()
            if kind2 != ")":
                raise ParseError("expected ')'", pos2)
            name_kind = None
        else:
            raise ParseError(f"unexpected token {val!r}", pos)

        kind, _, pos = self.sc.peek()
        if kind != "^":
            return base
        self.sc.next()
        e = self._signed_int()
        if e >= 0:
            if name_kind and name_kind[0] == "var":
                i = name_kind[1]
                exp = [0] * self.n
                exp[i] = e
                return self._mono(exp)
            return pow_reduced(base, e)
        if name_kind is None or name_kind[0] != "var":
            raise ParseError("negative exponents apply to variables only", pos)
        i = name_kind[1]
        exp = [0] * self.n
        exp[i] = e
        return self._mono(exp)


def parse_poly(text, vars, params=(), base=ZZ, trunc=None):
    """Parse an expression into a Laurent polynomial.

    ``vars`` may carry negative exponents; ``params`` become polynomial
    parameters of a ParamRing over ``base``.  Multiplication is always
    explicit and ``^`` takes an integer literal.
    """
    vars = tuple(vars)
    params = tuple(params)
    if set(vars) & set(params):
        raise ValueError("variable and parameter names overlap")
    ring = ParamRing(base, params, trunc) if params else base
    return _Parser(text, vars, params, ring).parse()


def parse_coefficient(text, ring):
    """Parse a serialized coefficient in the given ring."""
    if isinstance(ring, ParamRing):
        poly = _Parser(text, (), ring.params, ring).parse()
        return poly.terms.get((), ring.zero())
    text = text.strip()
    if ring is QQ or ring == QQ:
        return Fraction(text)
    return ring.from_int(int(text))


def poly_to_json(f):
    data = {
        "vars": list(f.vars),
        "params": list(f.ring.params),
        "terms": [
            {"exp": list(e),
             "coeff": f.ring.to_text(f.terms[e])}
            for e in sorted(f.terms)
        ],
    }
    return data


def poly_from_json(data, base=ZZ, trunc=None):
    vars = tuple(data["vars"])
    params = tuple(data.get("params", ()))
    ring = ParamRing(base, params, trunc) if params else base
    terms = {}
    for item in data["terms"]:
        exp = tuple(item["exp"])
        terms[exp] = parse_coefficient(item["coeff"], ring)
    return LaurentPoly(vars, terms, ring)
