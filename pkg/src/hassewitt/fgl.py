"""Formal group laws from coefficient-matrix sequences.

The logarithm is the tuple of pure-power series

    l_u = sum_m (1/m) sum_v (beta_m)_{u,v} tau_v^m,

whose linear part is the identity because beta_1 is.  The group law is
G = l^{-1}(l(tau) + l(tau')), solved degree by degree rather than through
a generic compositional inverse; an independent integrality witness for
the same primes comes from the functional-equation series h built out of
the decomposition matrices gamma_s.

All coefficients are exact rationals (or rational parameter polynomials),
so p-integrality is a statement about denominators, checked exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover
    _mpq = Fraction

from .errors import RingMismatchError
from .hwmatrix import (CongruenceReport, HWContext, _make_report,
                       beta_sequence_exact, delta_polynomials_exact)
from .laurent import lattice_points, newton_polytope
from .ring import (ZZ, QQ, FrobeniusMap, ParamRing, RingElement,
                   p_valuation)

INF = math.inf


# ---------------------------------------------------------------------------
# truncated multivariate power series


class TruncatedSeries:
    """Power series in named variables, truncated above total degree N.

    Terms are stored in per-degree buckets: {degree: {exponent: coeff}}.
    Coefficients are raw data of ``cring`` (exact rationals by default).
    """

    __slots__ = ("vars", "N", "cring", "buckets")

    def __init__(self, vars, N, cring=QQ, buckets=None):
        self.vars = tuple(vars)
        self.N = N
        self.cring = cring
        self.buckets = {}
        if buckets:
            for d, terms in buckets.items():
                if d > N:
                    continue
                clean = {e: c for e, c in terms.items()
                         if not cring.is_zero(c)}
                if clean:
                    self.buckets[d] = clean

    @classmethod
    def zero(cls, vars, N, cring=QQ):
        return cls(vars, N, cring)

    @classmethod
    def from_terms(cls, vars, N, terms, cring=QQ):
        buckets = {}
        for e, c in terms.items():
            buckets.setdefault(sum(e), {})[tuple(e)] = c
        return cls(vars, N, cring, buckets)

    @classmethod
    def variable(cls, vars, N, i, cring=QQ):
        e = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls(vars, N, cring, {1: {e: cring.one()}})

    # -- queries -------------------------------------------------------------

    def coeff(self, exp):
        exp = tuple(exp)
        return self.buckets.get(sum(exp), {}).get(exp, self.cring.zero())

    def graded(self, d):
        return dict(self.buckets.get(d, {}))

    def items(self):
        for d in sorted(self.buckets):
            for e in sorted(self.buckets[d]):
                yield e, self.buckets[d][e]

    def is_zero(self):
        return not self.buckets

    def constant_term(self):
        return self.buckets.get(0, {}).get((0,) * len(self.vars),
                                           self.cring.zero())

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.vars == other.vars and self.N == other.N
                and self.cring == other.cring
                and self.buckets == other.buckets)

    def __hash__(self):
        raise TypeError("truncated series are mutable-by-construction")

    # -- arithmetic ------------------------------------------------------------

    def _assert_compatible(self, other):
        if (self.vars != other.vars or self.N != other.N
                or self.cring != other.cring):
            raise RingMismatchError("series live in different rings")

    def __add__(self, other):
        self._assert_compatible(other)
        cring = self.cring
        out = {d: dict(t) for d, t in self.buckets.items()}
        for d, terms in other.buckets.items():
            dst = out.setdefault(d, {})
            for e, c in terms.items():
                prev = dst.get(e)
                s = c if prev is None else cring.add(prev, c)
                if cring.is_zero(s):
                    dst.pop(e, None)
                else:
                    dst[e] = s
            if not dst:
                del out[d]
        return TruncatedSeries(self.vars, self.N, cring, out)

    def __neg__(self):
        neg = self.cring.neg
        return TruncatedSeries(
            self.vars, self.N, self.cring,
            {d: {e: neg(c) for e, c in t.items()}
             for d, t in self.buckets.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._assert_compatible(other)
        cring = self.cring
        add, mul = cring.add, cring.mul
        out = {}
        for da, ta in self.buckets.items():
            for db, tb in other.buckets.items():
                d = da + db
                if d > self.N:
                    continue
                dst = out.setdefault(d, {})
                for ea, ca in ta.items():
                    for eb, cb in tb.items():
                        e = tuple(x + y for x, y in zip(ea, eb))
                        c = mul(ca, cb)
                        prev = dst.get(e)
                        dst[e] = c if prev is None else add(prev, c)
        for d in list(out):
            out[d] = {e: c for e, c in out[d].items()
                      if not cring.is_zero(c)}
            if not out[d]:
                del out[d]
        return TruncatedSeries(self.vars, self.N, cring, out)

    def scale(self, fr):
        """Multiply by an exact rational scalar."""
        cring = self.cring
        if isinstance(cring, ParamRing):
            op = lambda c: {e: x * fr for e, x in c.items()}
        else:
            op = lambda c: c * fr
        out = {}
        for d, t in self.buckets.items():
            nt = {}
            for e, c in t.items():
                c2 = op(c)
                if not cring.is_zero(c2):
                    nt[e] = c2
            if nt:
                out[d] = nt
        return TruncatedSeries(self.vars, self.N, cring, out)

    # -- presentation -----------------------------------------------------------

    def to_json(self):
        terms = []
        for e, c in self.items():
            if isinstance(self.cring, ParamRing):
                text = self.cring.to_text(c)
            else:
                text = str(c)
            terms.append({"exp": list(e), "coeff": text})
        return {"vars": list(self.vars), "N": self.N, "terms": terms}

    def to_text(self, limit=None):
        pieces = []
        for e, c in self.items():
            mono = "*".join(f"{v}^{k}" if k > 1 else v
                            for v, k in zip(self.vars, e) if k)
            ctext = (self.cring.to_text(c)
                     if isinstance(self.cring, ParamRing) else str(c))
            pieces.append(f"{ctext}*{mono}" if mono else ctext)
            if limit and len(pieces) >= limit:
                pieces.append("...")
                break
        return " + ".join(pieces) if pieces else "0"


class SeriesTuple:
    """A tuple of series over shared variables, labeled by lattice points."""

    __slots__ = ("components", "labels")

    def __init__(self, components, labels=None):
        self.components = tuple(components)
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != len(self.components):
                raise ValueError("label count mismatch")
        self.labels = labels

    @property
    def g(self):
        return len(self.components)

    @property
    def vars(self):
        return self.components[0].vars

    @property
    def N(self):
        return self.components[0].N

    @property
    def cring(self):
        return self.components[0].cring

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __eq__(self, other):
        if not isinstance(other, SeriesTuple):
            return NotImplemented
        return self.components == other.components

    def to_json(self):
        data = {"components": [s.to_json() for s in self.components]}
        if self.labels is not None:
            data["labels"] = [list(l) for l in self.labels]
        return data


def compose(outer, inners):
    """Substitute one series per outer variable; inners share a variable
    set and must have no constant term."""
    inners = list(inners)
    if len(inners) != len(outer.vars):
        raise ValueError("one inner series per outer variable")
    for s in inners:
        if not s.cring.is_zero(s.constant_term()):
            raise ValueError("inner series must vanish at the origin")
    vars, N, cring = inners[0].vars, inners[0].N, inners[0].cring
    one = TruncatedSeries(vars, N, cring,
                          {0: {(0,) * len(vars): cring.one()}})
    powers = {}

    def power(i, k):
        key = (i, k)
        if key not in powers:
            powers[key] = one if k == 0 else power(i, k - 1) * inners[i]
        return powers[key]

    acc = TruncatedSeries.zero(vars, N, cring)
    for e, c in outer.items():
        if sum(e) > N:
            continue
        term = None
        for i, k in enumerate(e):
            if k:
                pw = power(i, k)
                term = pw if term is None else term * pw
        if term is None:
            term = one
        acc = acc + _scale_raw(term, c, cring)
    return acc


def _scale_raw(series, raw, cring):
    """Multiply a series by one raw coefficient of its ring."""
    mul = cring.mul
    out = {}
    for d, t in series.buckets.items():
        nt = {}
        for e, c in t.items():
            c2 = mul(c, raw)
            if not cring.is_zero(c2):
                nt[e] = c2
        if nt:
            out[d] = nt
    return TruncatedSeries(series.vars, series.N, cring, out)


def compose_tuple(outer_tuple, inners):
    return SeriesTuple([compose(s, inners) for s in outer_tuple],
                       labels=outer_tuple.labels)


def identity_tuple(vars, N, g, offset=0, cring=QQ):
    return SeriesTuple([TruncatedSeries.variable(vars, N, offset + i, cring)
                        for i in range(g)])


# ---------------------------------------------------------------------------
# input plumbing


def _f_and_J(source, mode="interior"):
    if isinstance(source, HWContext):
        return source.f_exact, list(source.J)
    f = source
    J = list(lattice_points(newton_polytope(f), mode))
    if not J:
        raise ValueError("no lattice points index the series")
    return f, J


def _rational_cring(ring):
    if ring == ZZ or ring == QQ:
        return QQ
    if isinstance(ring, ParamRing):
        return ParamRing(QQ, ring.params, ring.trunc)
    raise RingMismatchError(f"no rational extension of {ring!r}")


def _beta_fractions(betas):
    """Matrix entries as rationals (or rational parameter data)."""
    src = betas[0].ring
    cring = _rational_cring(src)
    out = []
    for mat in betas:
        out.append([[cring.convert(a, src) for a in row] for row in mat.rows])
    return cring, out


# ---------------------------------------------------------------------------
# logarithm and group law


def logarithm(source, N, mode="interior"):
    """The tuple l with l_u = sum over m <= N and v of
    (beta_m)_{u,v} tau_v^m / m, over exact coefficients."""
    f, J = _f_and_J(source, mode)
    g = len(J)
    betas = beta_sequence_exact(f, J, N)
    cring, bq = _beta_fractions(betas)
    vars = tuple(f"t{i}" for i in range(g))
    comps = []
    for u in range(g):
        buckets = {}
        for m in range(1, N + 1):
            fr = Fraction(1, m)
            for v in range(g):
                raw = bq[m - 1][u][v]
                if cring.is_zero(raw):
                    continue
                if isinstance(cring, ParamRing):
                    coeff = {e: c * fr for e, c in raw.items()}
                else:
                    coeff = raw * fr
                e = tuple(m if j == v else 0 for j in range(g))
                buckets.setdefault(m, {})[e] = coeff
        comps.append(TruncatedSeries(vars, N, cring, buckets))
    return SeriesTuple(comps, labels=J)


def invert_series(l_tuple, N=None):
    """Compositional inverse of a tuple whose linear part is the identity."""
    if N is None:
        N = l_tuple.N
    g = l_tuple.g
    vars = l_tuple.vars
    cring = l_tuple.cring
    ident = identity_tuple(vars, N, g, cring=cring)
    for u in range(g):
        if l_tuple[u].graded(1) != ident[u].graded(1):
            raise ValueError("linear part is not the identity")
    inv = [ident[u] for u in range(g)]
    for d in range(2, N + 1):
        current = SeriesTuple(inv)
        comp = compose_tuple(current, list(l_tuple))
        for u in range(g):
            defect = comp[u].graded(d)
            if defect:
                neg = {e: cring.neg(c) for e, c in defect.items()}
                inv[u] = inv[u] + TruncatedSeries(vars, N, cring, {d: neg})
    result = SeriesTuple(inv, labels=l_tuple.labels)
    check = compose_tuple(result, list(l_tuple))
    for u in range(g):
        if check[u] != ident[u]:
            raise ArithmeticError("series inversion failed to verify")
    return result


def group_law(source, N, mode="interior"):
    """G = l^{-1}(l(tau) + l(tau')) in 2g variables, solved degree by
    degree from l(G) = l(tau) + l(tau') and re-verified by composition."""
    f, J = _f_and_J(source, mode)
    betas = beta_sequence_exact(f, J, N)
    return group_law_from_betas(betas, N, labels=J)


def group_law_from_betas(betas, N, labels=None):
    g = betas[0].n
    src = betas[0].ring
    if src != ZZ and src != QQ:
        raise RingMismatchError(
            "group laws are built over scalar rational coefficients")
    # hot path runs on gmpy2 rationals; results are stored as Fractions
    bq = [[[_mpq(a) for a in row] for row in mat.rows] for mat in betas]
    vars = tuple(f"t{i}" for i in range(g)) + tuple(f"u{i}" for i in range(g))
    nv = 2 * g

    def pure_power(slot, m):
        return tuple(m if j == slot else 0 for j in range(nv))

    rhs = []
    for u in range(g):
        buckets = {}
        for m in range(1, N + 1):
            fr = _mpq(1, m)
            for v in range(g):
                c = bq[m - 1][u][v] * fr
                if c == 0:
                    continue
                bucket = buckets.setdefault(m, {})
                for e in (pure_power(v, m), pure_power(g + v, m)):
                    bucket[e] = bucket.get(e, 0) + c
        rhs.append(TruncatedSeries(vars, N, QQ, buckets))

    comps = []
    for u in range(g):
        lin = {pure_power(u, 1): _mpq(1),
               pure_power(g + u, 1): _mpq(1)}
        comps.append(TruncatedSeries(vars, N, QQ, {1: lin}))

    for d in range(2, N + 1):
        # powers of the partial solutions, complete through degree d
        contrib = [dict(rhs[u].graded(d)) for u in range(g)]
        for v in range(g):
            power = comps[v]
            for m in range(2, d + 1):
                power = power * comps[v]
                part = power.graded(d)
                if not part:
                    continue
                fr = _mpq(1, m)
                for u in range(g):
                    c = bq[m - 1][u][v] * fr
                    if c == 0:
                        continue
                    dst = contrib[u]
                    for e, x in part.items():
                        val = dst.get(e, 0) - c * x
                        if val:
                            dst[e] = val
                        else:
                            dst.pop(e, None)
        for u in range(g):
            if contrib[u]:
                comps[u] = comps[u] + TruncatedSeries(vars, N, QQ,
                                                      {d: contrib[u]})

    # independent verification: l(G) must reproduce l(tau) + l(tau')
    lser = []
    for u in range(g):
        buckets = {}
        for m in range(1, N + 1):
            fr = _mpq(1, m)
            for v in range(g):
                c = bq[m - 1][u][v] * fr
                if c != 0:
                    e = tuple(m if j == v else 0 for j in range(g))
                    buckets.setdefault(m, {})[e] = c
        lser.append(TruncatedSeries(tuple(f"t{i}" for i in range(g)), N,
                                    QQ, buckets))
    lofg = compose_tuple(SeriesTuple(lser), comps)
    for u in range(g):
        if lofg[u].buckets != rhs[u].buckets:
            raise ArithmeticError("group law failed its defining equation")
    return SeriesTuple([_fractionize(s) for s in comps], labels=labels)


def _fractionize(series):
    out = {}
    for d, terms in series.buckets.items():
        out[d] = {e: c if isinstance(c, Fraction)
                  else Fraction(int(c.numerator), int(c.denominator))
                  for e, c in terms.items()}
    return TruncatedSeries(series.vars, series.N, QQ, out)


# ---------------------------------------------------------------------------
# certificates


def check_integrality(gtuple, p, max_violations=10):
    """Report the minimum p-adic valuation over all coefficients."""
    minval = INF
    violations = []
    for u, series in enumerate(gtuple):
        cring = series.cring
        for e, c in series.items():
            v = p_valuation(RingElement(cring, c), p)
            if v < minval:
                minval = v
            if v < 0 and len(violations) < max_violations:
                violations.append({"component": u, "exp": list(e),
                                   "coeff": str(c)})
    return _make_report(
        "group_law_integrality", {"p": p}, p, 0,
        0 if minval == INF else minval, None,
        notes={"violations": violations})


def denominator_primes(gtuple, bound=10 ** 6):
    """All primes dividing any coefficient denominator (trial division)."""
    den = 1
    for series in gtuple:
        for _, c in series.items():
            if isinstance(c, Fraction):
                den = den * c.denominator // math.gcd(den, c.denominator)
            else:
                for x in c.values():
                    den = den * x.denominator // math.gcd(den, x.denominator)
    primes = set()
    d = den
    q = 2
    while q * q <= d and q <= bound:
        if d % q == 0:
            primes.add(q)
            while d % q == 0:
                d //= q
        q += 1
    if d > 1:
        primes.add(d)
    return sorted(primes)


def check_fgl_axioms(gtuple, associativity=True):
    """Unit laws, commutativity, and (optionally) associativity, checked
    by exact composition to the series' truncation degree."""
    g = gtuple.g
    N = gtuple.N
    cring = gtuple.cring
    vars2 = gtuple.vars
    zero2 = TruncatedSeries.zero(vars2, N, cring)
    tvars = [TruncatedSeries.variable(vars2, N, i, cring)
             for i in range(2 * g)]

    left_unit = compose_tuple(gtuple, tvars[:g] + [zero2] * g)
    right_unit = compose_tuple(gtuple, [zero2] * g + tvars[g:])
    ok_left = all(left_unit[u] == tvars[u] for u in range(g))
    ok_right = all(right_unit[u] == tvars[g + u] for u in range(g))

    swapped = compose_tuple(gtuple, tvars[g:] + tvars[:g])
    ok_comm = all(swapped[u] == gtuple[u] for u in range(g))

    result = {"left_unit": ok_left, "right_unit": ok_right,
              "commutative": ok_comm}
    if associativity:
        vars3 = (tuple(f"x{i}" for i in range(g))
                 + tuple(f"y{i}" for i in range(g))
                 + tuple(f"z{i}" for i in range(g)))
        w = [TruncatedSeries.variable(vars3, N, i, cring)
             for i in range(3 * g)]
        gxy = [compose(gtuple[u], w[:2 * g]) for u in range(g)]
        gyz = [compose(gtuple[u], w[g:]) for u in range(g)]
        lhs = [compose(gtuple[u], gxy + w[2 * g:]) for u in range(g)]
        rhs = [compose(gtuple[u], w[:g] + gyz) for u in range(g)]
        result["associative"] = all(lhs[u] == rhs[u] for u in range(g))
    result["pass"] = all(v for k, v in result.items() if k != "pass")
    return result


def functional_equation_witness(source, p, N, mode="interior"):
    """Integrality certificate for h = l - sum_s gamma_s / p^s applied to
    the p-power-twisted logarithm.

    The coefficient of tau_v^k in h_u is (1/k) times the entry of
    beta_k - sum_{s <= ord_p(k)} gamma_s beta_{k/p^s}, so non-negative
    valuations here certify the decomposition congruence family and, by
    the functional-equation criterion, group-law integrality at p.
    """
    f, J = _f_and_J(source, mode)
    if isinstance(f.ring, ParamRing):
        raise RingMismatchError(
            "the functional-equation witness runs over scalar integers")
    g = len(J)
    betas = beta_sequence_exact(f, J, N)
    s_max = 0
    while p ** (s_max + 1) <= N:
        s_max += 1
    deltas = delta_polynomials_exact(f, p, s_max) if s_max else []
    gammas = []
    for s, dpoly in enumerate(deltas, start=1):
        q = p ** s
        rows = []
        for u in J:
            rows.append([dpoly.terms.get(
                tuple(q * vi - ui for vi, ui in zip(v, u)), 0) for v in J])
        gammas.append(rows)

    minval = INF
    zero_at_p = None
    for k in range(1, N + 1):
        r = 0
        kk = k
        while kk % p == 0:
            kk //= p
            r += 1
        defect = [[betas[k - 1].rows[i][j] for j in range(g)]
                  for i in range(g)]
        for s in range(1, r + 1):
            bprev = betas[k // p ** s - 1].rows
            gm = gammas[s - 1]
            for i in range(g):
                for j in range(g):
                    defect[i][j] -= sum(gm[i][t] * bprev[t][j]
                                        for t in range(g))
        vals = []
        for i in range(g):
            for j in range(g):
                c = Fraction(defect[i][j], k)
                vals.append(p_valuation(c, p))
        vk = min(vals) if vals else INF
        if k == p:
            zero_at_p = all(defect[i][j] == 0 for i in range(g)
                            for j in range(g))
        if vk < minval:
            minval = vk
    return _make_report(
        "functional_equation_witness", {"p": p, "degree": N}, p, 0,
        0 if minval == INF else minval, None,
        notes={"first_prime_power_exactly_zero": zero_at_p})
