"""Point counting over small finite fields and zeta-function cross-checks.

Counting is brute-force enumeration (with a quadratic-character shortcut
for hyperelliptic models), deliberately independent of the coefficient
matrices, so that unit-root factors and mod-p characteristic polynomials
can be compared against numerators derived purely from counts.

All zeta ops assume integer polynomial coefficients, i.e. prime-field
models whose Frobenius lift fixes scalars; extension coefficient fields
stay out of scope here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import (InconsistentCountsError, NonSimpleRootError,
                     PrecisionTooLowError)
from .hwmatrix import _make_report
from .ring import (ParamRing, SquareMatrix, matrix_min_valuation,
                   mat_inverse_mod_pk, mat_mul)

INF = math.inf


# ---------------------------------------------------------------------------
# finite fields F_{p^k}, small and explicit


def _polydiv_modp(num, den, p):
    """Remainder of num by den over F_p; coefficient lists, constant first."""
    num = [c % p for c in num]
    dd = len(den) - 1
    inv_lead = pow(den[-1], p - 2, p) if den[-1] != 1 else 1
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i] * inv_lead % p
        if c:
            for j in range(dd + 1):
                num[i - dd + j] = (num[i - dd + j] - c * den[j]) % p
    rem = num[:dd]
    while rem and rem[-1] == 0:
        rem.pop()
    return rem


def _irreducible_modp(coeffs, p):
    """Trial division by every lower-degree monic polynomial."""
    k = len(coeffs) - 1
    for d in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            den = list(tail) + [1]
            if not _polydiv_modp(coeffs, den, p):
                return False
    return True


class ExtField:
    """F_{p^k} as tuples of length k over the lexicographically least
    irreducible monic modulus (ordered by constant-first coefficients)."""

    def __init__(self, p, k):
        if k < 1:
            raise ValueError("extension degree must be positive")
        self.p = p
        self.k = k
        self.q = p ** k
        self.modulus = None
        if k > 1:
            for tail in itertools.product(range(p), repeat=k):
                cand = list(tail) + [1]
                if _irreducible_modp(cand, p):
                    self.modulus = tuple(tail)
                    break
            if self.modulus is None:
                raise ArithmeticError("no irreducible modulus found")
        self.zero = (0,) * k
        self.one = (1,) + (0,) * (k - 1)

    def elements(self):
        for t in itertools.product(range(self.p), repeat=self.k):
            yield t

    def from_int(self, n):
        return (n % self.p,) + (0,) * (self.k - 1)

    def add(self, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def neg(self, a):
        p = self.p
        return tuple((-x) % p for x in a)

    def mul(self, a, b):
        p, k = self.p, self.k
        if k == 1:
            return (a[0] * b[0] % p,)
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        mod = self.modulus
        for i in range(2 * k - 2, k - 1, -1):
            c = prod[i] % p
            if c:
                for j in range(k):
                    prod[i - k + j] -= c * mod[j]
        return tuple(c % p for c in prod[:k])

    def pow(self, a, e):
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a):
        if a == self.zero:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self.pow(a, self.q - 2)

    def squares(self):
        """The set of nonzero squares."""
        return {self.mul(a, a) for a in self.elements() if a != self.zero}


# ---------------------------------------------------------------------------
# point counting


TORUS = "torus"
AFFINE = "affine"
AFFINE_CURVE = "affine_curve"


def _hyperelliptic_shape(f):
    """Detect c*y^2 - h(x) with c = +-1; returns (c, h_coeffs) or None.

    h_coeffs is the dense coefficient list of h, constant first.
    """
    if f.nvars != 2:
        return None
    ysq = None
    hterms = {}
    for e, c in f.terms.items():
        if e[1] == 2 and e[0] == 0:
            ysq = c
        elif e[1] == 0:
            if e[0] < 0:
                return None
            hterms[e[0]] = c
        else:
            return None
    if ysq not in (1, -1) or not hterms:
        return None
    deg = max(hterms)
    h = [0] * (deg + 1)
    for d, c in hterms.items():
        h[d] = -c if ysq == 1 else c
    return ysq, h


def count_points(f, p, k=1, m=1, variety=TORUS):
    """Number of solutions of f = 0 in F_{q^m}^n for q = p^k.

    ``torus`` restricts to nonzero coordinates (negative exponents fine);
    ``affine`` and ``affine_curve`` need genuine polynomials.  The curve
    variety uses the quadratic-character shortcut when f is a
    hyperelliptic model in (x, y) and odd characteristic.
    """
    if f.ring.kind != "INTEGERS":
        raise ValueError("counting needs integer coefficients")
    field = ExtField(p, k * m)
    n = f.nvars
    if variety == AFFINE_CURVE and p != 2:
        shape = _hyperelliptic_shape(f)
        if shape is not None:
            _, h = shape
            return _count_hyperelliptic_affine(h, field)
    if variety in (AFFINE, AFFINE_CURVE):
        if any(e < 0 for exp in f.support() for e in exp):
            raise ValueError("negative exponents have no affine meaning")
        points = itertools.product(field.elements(), repeat=n)
    elif variety == TORUS:
        nonzero = [a for a in field.elements() if a != field.zero]
        points = itertools.product(nonzero, repeat=n)
    else:
        raise ValueError(f"unknown variety {variety!r}")

    terms = [(exp, field.from_int(c)) for exp, c in f.terms.items()]
    count = 0
    powcache = {}

    def monomial(pt, exp):
        acc = field.one
        for a, e in zip(pt, exp):
            if e:
                key = (a, e)
                v = powcache.get(key)
                if v is None:
                    v = field.pow(a, e)
                    powcache[key] = v
                acc = field.mul(acc, v)
        return acc

    for pt in points:
        total = field.zero
        for exp, c in terms:
            total = field.add(total, field.mul(c, monomial(pt, exp)))
        if total == field.zero:
            count += 1
    return count


def _count_hyperelliptic_affine(h, field):
    squares = field.squares()
    count = 0
    for x in field.elements():
        val = field.zero
        xp = field.one
        for c in h:
            if c % field.p:
                val = field.add(val, field.mul(field.from_int(c), xp))
            xp = field.mul(xp, x)
        if val == field.zero:
            count += 1
        elif val in squares:
            count += 2
    return count


def hyperelliptic_point_counts(f, p, degrees):
    """Projective point counts of an odd-degree hyperelliptic model over
    F_{p^m} for each m in degrees (one point at infinity)."""
    shape = _hyperelliptic_shape(f)
    if shape is None:
        raise ValueError("not a hyperelliptic model y^2 = h(x)")
    _, h = shape
    if (len(h) - 1) % 2 == 0:
        raise ValueError("even-degree models have two points at infinity")
    out = {}
    for m in degrees:
        out[m] = _count_hyperelliptic_affine(h, ExtField(p, m)) + 1
    return out


# ---------------------------------------------------------------------------
# zeta numerators from counts


@dataclass(frozen=True)
class ZetaNumerator:
    """Degree-2g numerator of a curve's zeta function, constant term 1."""

    coeffs: tuple
    q: int

    @property
    def genus(self):
        return len(self.coeffs) // 2

    def functional_equation_ok(self):
        g = self.genus
        return all(self.coeffs[g + i] == self.q ** i * self.coeffs[g - i]
                   for i in range(g + 1))

    def to_json(self):
        return {"coeffs": list(self.coeffs), "q": self.q}


def zeta_numerator_genus1(n1, q):
    """1 + c1 T + q T^2 from the projective point count over F_q."""
    c1 = n1 - (q + 1)
    return ZetaNumerator((1, c1, q), q)


def zeta_numerator_genus2(n1, n2, q, n3=None):
    """Numerator 1 + c1 T + c2 T^2 + q c1 T^3 + q^2 T^4 from projective
    counts over F_q and F_{q^2}.

    A count over F_{q^3}, when supplied, over-determines the coefficient
    q*c1 and must agree; disagreement means the counts are inconsistent.
    """
    s1 = q + 1 - n1
    s2 = q * q + 1 - n2
    e1 = s1
    if (s1 * s1 - s2) % 2:
        raise InconsistentCountsError(
            f"counts {n1}, {n2} give a non-integer quadratic coefficient")
    e2 = (s1 * s1 - s2) // 2
    c1 = -e1
    c2 = e2
    coeffs = (1, c1, c2, q * c1, q * q)
    if n3 is not None:
        s3 = q ** 3 + 1 - n3
        num = s3 - e1 * s2 + e2 * s1
        if num % 3:
            raise InconsistentCountsError(
                f"count {n3} over the cubic extension is inconsistent")
        e3 = num // 3
        if -e3 != q * c1:
            raise InconsistentCountsError(
                f"cubic-extension count {n3} contradicts the functional "
                f"equation: {-e3} != {q * c1}")
    return ZetaNumerator(coeffs, q)


def factor_quadratic_pair(numerator):
    """Split a genus-2 numerator into (1+uT+qT^2)(1+vT+qT^2) over the
    integers; None when no such factorization exists."""
    one, c1, c2, c3, c4 = numerator.coeffs
    q = numerator.q
    if one != 1 or c3 != q * c1 or c4 != q * q:
        return None
    disc = c1 * c1 - 4 * (c2 - 2 * q)
    if disc < 0:
        return None
    r = math.isqrt(disc)
    if r * r != disc or (c1 + r) % 2:
        return None
    u = (c1 + r) // 2
    v = (c1 - r) // 2
    return ((1, u, q), (1, v, q))


def reverse_poly(coeffs):
    """T^deg * P(1/T): send 1 + c1 T + ... to T^deg + c1 T^{deg-1} + ..."""
    return tuple(reversed(coeffs))


# ---------------------------------------------------------------------------
# characteristic polynomials and divisibility


def _det_one_minus_t(mat):
    """Coefficients of det(1 - T*M) over M's scalar ring, constant first."""
    base = mat.ring
    pring = ParamRing(base, ("T",), mat.n)
    rows = []
    for i in range(mat.n):
        row = []
        for j in range(mat.n):
            raw = {}
            if i == j:
                raw[(0,)] = base.one()
            off = base.neg(mat.rows[i][j])
            if not base.is_zero(off):
                raw[(1,)] = off
            row.append(raw)
        rows.append(row)
    det = SquareMatrix(pring, rows).det().data
    return tuple(det.get((i,), 0) for i in range(mat.n + 1))


def charpoly_hw_modp(ctx, k=1):
    """det(1 - T * B) mod p for B the k-fold twisted product of the
    reduced unit matrix; scalar coefficients make the twists trivial,
    so B is simply the k-th power."""
    hw = ctx.hasse_witt()
    b = hw
    for _ in range(k - 1):
        b = mat_mul(b, hw)
    return _det_one_minus_t(b)


def divides_mod(divisor, dividend, p, K=1):
    """Exact divisibility of coefficient sequences over Z/p^K; both are
    ascending lists and the divisor needs a unit constant term."""
    pk = p ** K
    div = [c % pk for c in divisor]
    rem = [c % pk for c in dividend]
    while div and div[-1] == 0:
        div.pop()
    if not div:
        raise ZeroDivisionError("zero divisor polynomial")
    if math.gcd(div[0], p) != 1:
        raise ValueError("divisor constant term is not a unit")
    inv0 = pow(div[0], -1, pk)
    steps = len(rem) - len(div) + 1
    if steps < 0:
        return all(c == 0 for c in rem)
    for i in range(steps):
        c = rem[i] * inv0 % pk
        if c:
            for j, d in enumerate(div):
                rem[i + j] = (rem[i + j] - c * d) % pk
    return all(c == 0 for c in rem)


def verify_charpoly_divides(ctx, numerator, k=1):
    """Report whether the mod-p unit characteristic polynomial divides
    the zeta numerator mod p."""
    cp = charpoly_hw_modp(ctx, k)
    ok = divides_mod(cp, numerator.coeffs, ctx.p, 1)
    return _make_report(
        "hw_charpoly_divides_numerator",
        {"p": ctx.p, "k": k}, ctx.p, 1,
        INF if ok else 0, 1,
        notes={"charpoly": list(cp), "numerator": list(numerator.coeffs)})


def rank_mod_p(mat, p):
    """Row-echelon rank of an integer-entried matrix over F_p."""
    rows = [[int(a) % p for a in row] for row in mat.rows]
    rank = 0
    col = 0
    n = mat.n
    while rank < n and col < n:
        piv = next((r for r in range(rank, n) if rows[r][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], p - 2, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for r in range(n):
            if r != rank and rows[r][col]:
                c = rows[r][col]
                rows[r] = [(x - c * y) % p
                           for x, y in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def unit_part_degree(coeffs, p):
    """Degree of the reduction mod p, i.e. the number of unit reciprocal
    roots of an integer polynomial with unit constant term."""
    deg = 0
    for i, c in enumerate(coeffs):
        if c % p:
            deg = i
    return deg


# ---------------------------------------------------------------------------
# unit-root factors and eigenvalues


def unit_root_factor(ctx, k=1, K=None):
    """det(1 - T * Phi) over Z/p^K for Phi = alpha_s alpha_{s-k}^{-1}
    with s = K + k - 1; Phi is the k-step unit transition matrix.

    Returns (coeffs, Phi).  Scalar coefficients only: the Frobenius twist
    fixes them, so no twisting is applied to alpha_{s-k}.
    """
    if K is None:
        K = ctx.K - (k - 1)
    s = K + k - 1
    if s > ctx.K:
        raise PrecisionTooLowError(
            f"need alpha_{s} at precision {s} but the context caps at "
            f"{ctx.K}")
    ring = ctx.reduction_ring(K)
    alpha_s = ctx.alpha(s).change_ring(ring)
    inv = mat_inverse_mod_pk(ctx.alpha(s - k).change_ring(ring))
    phi = mat_mul(alpha_s, inv)
    return _det_one_minus_t(phi), phi


def hensel_unit_roots(coeffs, p, K):
    """Unit roots of an integer polynomial to precision p^K, by lifting
    each simple nonzero root mod p with Newton steps."""
    def value(r, mod):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * r + c) % mod
        return acc

    def derivative(r, mod):
        acc = 0
        for i in range(len(coeffs) - 1, 0, -1):
            acc = (acc * r + i * coeffs[i]) % mod
        return acc

    roots = []
    for r0 in range(1, p):
        if value(r0, p) == 0:
            if derivative(r0, p) == 0:
                raise NonSimpleRootError(
                    f"root {r0} mod {p} is not simple; Newton lifting "
                    f"does not apply")
            r = r0
            prec = 1
            while prec < K:
                prec = min(2 * prec, K)
                mod = p ** prec
                r = (r - value(r, mod) * pow(derivative(r, mod), -1, mod)) % mod
            roots.append(r)
    return sorted(roots)


def verify_unit_eigenvalue_match(ctx, roots, K=None):
    """Trace and determinant of the unit transition matrix against the
    sum and product of unit reciprocal roots, mod p^K."""
    if K is None:
        K = ctx.K
    coeffs, phi = unit_root_factor(ctx, 1, K)
    ring = phi.ring
    pk = ctx.p ** K
    tr = phi.trace().data
    dt = phi.det().data
    want_tr = sum(roots) % pk
    want_dt = 1
    for r in roots:
        want_dt = want_dt * r % pk
    defect = min(
        _residue_valuation(tr - want_tr, ctx.p, K),
        _residue_valuation(dt - want_dt, ctx.p, K))
    return _make_report(
        "unit_eigenvalue_match", {"p": ctx.p, "roots": list(roots)},
        ctx.p, K, defect, K,
        notes={"trace": int(tr), "determinant": int(dt),
               "factor": [int(c) for c in coeffs]})


def _residue_valuation(n, p, K):
    n %= p ** K
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# coefficient-matrix congruences driven by the numerator


def asd_check(ctx, numerator, m_list, c=None):
    """Congruence family: the numerator convolved with the beta sequence
    at scaled indices vanishes to order ord_p(m) - c.

    With q = p, the m-th claim is that sum_i c_i beta_{m/p^i} (terms with
    p^i not dividing m dropped) has valuation at least ord_p(m) - c.
    Returns (reports, minimal_c): the smallest non-negative integer c
    making every tested claim hold; experimental, so reports are soft.
    """
    p = ctx.p
    coeffs = numerator.coeffs
    observed = []
    for m in m_list:
        ordm = 0
        mm = m
        while mm % p == 0:
            mm //= p
            ordm += 1
        acc = None
        for i, ci in enumerate(coeffs):
            if p ** i > m or m % (p ** i):
                continue
            term = ctx.beta(m // p ** i)
            if ci != 1:
                term = term.map_entries(
                    lambda a: term.ring.mul(a, term.ring.from_int(ci)))
            acc = term if acc is None else acc + term
        val = matrix_min_valuation(acc, p)
        observed.append((m, ordm, val))
    c_min = 0
    for m, ordm, val in observed:
        if val != INF:
            c_min = max(c_min, ordm - val)
    c_eff = c_min if c is None else c
    reports = []
    for m, ordm, val in observed:
        exponent = max(ordm - c_eff, 0)
        reports.append(_make_report(
            "numerator_beta_congruence", {"m": m, "c": c_eff}, p,
            exponent, val, ctx.K, soft=True))
    return reports, c_min
