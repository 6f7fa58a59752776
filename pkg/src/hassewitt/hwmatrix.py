"""Higher Hasse-Witt matrices and their p-adic congruence certificates.

The central object is :class:`HWContext`: a Laurent polynomial f with
integer (or integer-parameter) coefficients, a prime p, a working residue
precision p^K, and the lattice-point index set J drawn from the Newton
polytope of f.  From it we build the coefficient matrices

    (beta_m)_{u,v} = coefficient of x^(m v - u) in f^(m-1),

their prime-power subsequence alpha_s = beta_{p^s}, and the auxiliary
decomposition polynomials delta_s with coefficient matrices gamma_s.  The
verify_* functions turn the congruences these satisfy into checkable
reports carrying the observed p-adic valuation of each defect.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kron
from .errors import (DivisibilityError, EmptyLatticeError, IntegrabilityError,
                     PrecisionTooLowError, RingMismatchError)
from .laurent import (LaurentPoly, default_budget, dilate, frobenius_poly,
                      lattice_points, make_power_engine, newton_polytope,
                      pow_reduced, unflatten_terms)
from .ring import (ZZ, QQ, DerivationMap, FrobeniusMap, ModRing, ParamRing,
                   RingElement, SquareMatrix, mat_inverse_mod_pk,
                   matrix_derivation, matrix_min_valuation, matrix_sigma,
                   p_valuation)

INF = math.inf


# ---------------------------------------------------------------------------
# reports


@dataclass
class CongruenceReport:
    """Outcome of one congruence check.

    ``defect_valuation`` is the minimum p-adic valuation over the entries of
    the defect (difference of the two sides); ``math.inf`` means the defect
    vanished at the working precision.  ``passed`` holds exactly when the
    valuation reaches ``exponent``.  ``precision`` is the residue precision
    K the defect was measured at (None for exact arithmetic), so an infinite
    valuation certifies the congruence modulo p^K only.  Soft reports mark
    empirical observations rather than guaranteed identities.
    """

    claim: str
    params: dict
    p: int
    exponent: int
    defect_valuation: float
    precision: int | None
    passed: bool
    soft: bool = False
    notes: dict = field(default_factory=dict)

    @property
    def modulus(self):
        return f"{self.p}^{self.exponent}"

    def to_json(self):
        dv = self.defect_valuation
        return {
            "claim": self.claim,
            "params": dict(sorted(self.params.items())),
            "p": self.p,
            "exponent": self.exponent,
            "modulus": self.modulus,
            "defect_valuation": "inf" if dv == INF else int(dv),
            "precision": self.precision,
            "passed": bool(self.passed),
            "soft": bool(self.soft),
            "notes": dict(sorted(self.notes.items())),
        }

    def one_line(self):
        dv = self.defect_valuation
        dvtext = "inf" if dv == INF else str(int(dv))
        ps = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        tag = "PASS" if self.passed else "FAIL"
        soft = " (soft)" if self.soft else ""
        return (f"{tag}{soft} {self.claim} [{ps}] needs val >= {self.exponent}"
                f" mod {self.modulus}, observed {dvtext}")


def _make_report(claim, params, p, exponent, defect_val, precision,
                 soft=False, notes=None):
    return CongruenceReport(
        claim=claim, params=params, p=p, exponent=exponent,
        defect_valuation=defect_val, precision=precision,
        passed=bool(defect_val >= exponent), soft=soft, notes=notes or {})


@dataclass
class LimitResult:
    """A p-adic limit matrix reported at finite precision, together with
    the index of the approximant used and the modulus it is valid to."""

    matrix: SquareMatrix
    claim: str
    meta: dict


# ---------------------------------------------------------------------------
# dense-grid helpers (residue coefficients only)


def _grid_coeff_raw(grid, xexp, nx, ring):
    """Raw work-ring coefficient of the x-monomial ``xexp`` in a grid."""
    offs = grid.offs
    shape = grid.arr.shape
    idx = tuple(e - o for e, o in zip(xexp, offs[:nx]))
    if any(i < 0 or i >= s for i, s in zip(idx, shape[:nx])):
        return ring.zero()
    block = grid.arr[idx]
    if not isinstance(ring, ParamRing):
        return int(block)
    if ring.nparams == 0:
        v = int(block)
        return {(): v} if v else {}
    out = {}
    for pidx in np.argwhere(block):
        out[tuple(int(i) for i in pidx)] = int(block[tuple(pidx)])
    return out


def _frobenius_grid(grid, q, nx, trunc):
    """Scale every exponent by q (monomial part of a Frobenius power)."""
    arr = grid.arr
    shape = tuple((s - 1) * q + 1 for s in arr.shape)
    out = np.zeros(shape, dtype=arr.dtype)
    out[tuple(slice(None, None, q) for _ in arr.shape)] = arr
    if trunc is not None and len(shape) > nx:
        out = kron._apply_param_trunc(out, nx, trunc)
    return kron.Grid(tuple(o * q for o in grid.offs), out)


def _combine_grids(a, b, pk, sub=False):
    """Aligned sum or difference of two grids with residues mod pk."""
    naxes = len(a.offs)
    los = [min(a.offs[i], b.offs[i]) for i in range(naxes)]
    his = [max(a.offs[i] + a.arr.shape[i], b.offs[i] + b.arr.shape[i])
           for i in range(naxes)]
    out = np.zeros(tuple(h - l for l, h in zip(los, his)), dtype=a.arr.dtype)
    sl_a = tuple(slice(a.offs[i] - los[i], a.offs[i] - los[i] + a.arr.shape[i])
                 for i in range(naxes))
    out[sl_a] = a.arr
    sl_b = tuple(slice(b.offs[i] - los[i], b.offs[i] - los[i] + b.arr.shape[i])
                 for i in range(naxes))
    if sub:
        out[sl_b] = (out[sl_b] + (pk - b.arr) % pk) % pk
    else:
        out[sl_b] = (out[sl_b] + b.arr) % pk
    return kron.Grid(tuple(los), out)


def _grid_min_valuation(grid, p, K):
    """Largest v with p^v dividing every residue; inf when all vanish."""
    arr = grid.arr
    if not arr.any():
        return INF
    v = 0
    m = p
    while v < K and not (arr % m).any():
        v += 1
        m *= p
    return v


def _grid_support_inside(grid, polytope, nx):
    """Vectorized check that all nonzero x-exponents lie in the polytope."""
    idx = np.argwhere(grid.arr)
    if idx.size == 0:
        return True
    exps = idx[:, :nx].astype(np.int64) + np.asarray(grid.offs[:nx],
                                                     dtype=np.int64)
    for h, c in polytope.hull_eqs:
        if (exps @ np.asarray(h, dtype=np.int64) != c).any():
            return False
    for a, b in polytope.facets:
        if (exps @ np.asarray(a, dtype=np.int64) > b).any():
            return False
    return True


# ---------------------------------------------------------------------------
# context


class HWContext:
    """A polynomial, a prime, a precision, and the matrices built from them.

    f must have integer coefficients, possibly polynomial in named
    parameters; arithmetic runs mod p^K, with parameter polynomials
    truncated at total degree ``trunc``.  ``mode`` selects which lattice
    points of the Newton polytope index the matrices: its interior points
    (the default) or all of them.  All cached data is behind one lock, so
    a context can be shared between threads.
    """

    def __init__(self, f, p, K, mode="interior", trunc=None, sigma=None,
                 budget=None):
        if p < 2 or any(p % q == 0 for q in range(2, min(p, 1000))
                        if q * q <= p):
            raise ValueError(f"p = {p} is not prime")
        if K < 1:
            raise ValueError("precision K must be at least 1")
        base = f.ring.base if isinstance(f.ring, ParamRing) else f.ring
        if base != ZZ:
            raise RingMismatchError(
                "context polynomials take integer coefficients")
        self.f_exact = f
        self.p = p
        self.K = K
        self.mode = mode
        self.params = f.ring.params
        if self.params:
            if trunc is None:
                trunc = f.ring.trunc
            if trunc is None:
                raise PrecisionTooLowError(
                    "parameter coefficients need a truncation degree")
        self.trunc = trunc
        scalar = ModRing(p, K)
        self.ring = (ParamRing(scalar, self.params, trunc) if self.params
                     else scalar)
        self.fw = f.change_ring(self.ring)
        self.budget = budget if budget is not None else default_budget()

        self.polytope = newton_polytope(f)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            self.J = lattice_points(self.polytope, mode)
        self.meta = {
            "relative_interior": any("relative interior" in str(w.message)
                                     for w in caught),
        }
        if not self.J:
            raise EmptyLatticeError(
                "no lattice points index the matrices; the polytope interior "
                "is empty (mode='all' uses every lattice point instead)")
        self.g = len(self.J)

        if sigma is None:
            sigma = FrobeniusMap(self.ring, p)
        else:
            if sigma.ring != self.ring or sigma.p != p:
                raise RingMismatchError(
                    "Frobenius map does not act on the working ring")
        self.sigma = sigma

        self._lock = threading.RLock()
        self._engine = None
        self._beta = {}
        self._alpha_inv = {}
        self._delta = {}
        self._delta_poly = {}
        self._delta_reports = {}

    # -- power cache -------------------------------------------------------

    def _power_grid(self, e):
        with self._lock:
            if self._engine is None:
                self._engine = make_power_engine(self.fw, self.budget)
            return self._engine.power(e)

    @property
    def _nx(self):
        return self.f_exact.nvars

    # -- matrices ----------------------------------------------------------

    def beta(self, m):
        """(beta_m)_{u,v} = coefficient of x^(m v - u) in f^(m-1)."""
        if m < 1:
            raise ValueError("beta index must be positive")
        with self._lock:
            cached = self._beta.get(m)
            if cached is not None:
                return cached
            grid = self._power_grid(m - 1)
            nx = self._nx
            rows = []
            for u in self.J:
                row = []
                for v in self.J:
                    exp = tuple(m * vi - ui for vi, ui in zip(v, u))
                    row.append(_grid_coeff_raw(grid, exp, nx, self.ring))
                rows.append(row)
            mat = SquareMatrix(self.ring, rows, labels=self.J)
            self._beta[m] = mat
            return mat

    def alpha(self, s):
        """alpha_s = beta_{p^s}; alpha_0 is the identity."""
        if s < 0:
            raise ValueError("alpha index must be non-negative")
        return self.beta(self.p ** s)

    def alpha_inverse(self, s):
        with self._lock:
            if s not in self._alpha_inv:
                self._alpha_inv[s] = mat_inverse_mod_pk(self.alpha(s))
            return self._alpha_inv[s]

    def reduction_ring(self, K, trunc=None):
        scalar = ModRing(self.p, K)
        if not self.params:
            return scalar
        return ParamRing(scalar, self.params,
                         self.trunc if trunc is None else trunc)

    def hasse_witt(self):
        """alpha_1 reduced mod p."""
        return self.alpha(1).change_ring(self.reduction_ring(1))

    def hasse_witt_invertible(self):
        try:
            mat_inverse_mod_pk(self.hasse_witt())
            return True
        except Exception:
            return False

    # -- decomposition polynomials ------------------------------------------

    def _delta_grid(self, s):
        """delta_s as a residue grid; requires the standard Frobenius."""
        with self._lock:
            cached = self._delta.get(s)
            if cached is not None:
                return cached
            if self.K < s:
                raise PrecisionTooLowError(
                    f"precision K={self.K} cannot observe the divisibility "
                    f"of the level-{s} decomposition (needs K >= {s})")
            p = self.p
            pk = (self.ring.mod if isinstance(self.ring, ModRing)
                  else self.ring.base.mod)
            nx = self._nx
            acc = self._power_grid(p ** s - 1)
            for i in range(1, s):
                di = self._delta_grid(i)
                pj = self._power_grid(p ** (s - i) - 1)
                fj = _frobenius_grid(pj, p ** i, nx, self.trunc)
                prod = kron.mul_grids(di, fj, pk, nx, trunc=self.trunc,
                                      budget=self.budget)
                acc = _combine_grids(acc, prod, pk, sub=True)
            v = _grid_min_valuation(acc, p, self.K)
            if v < s - 1:
                raise DivisibilityError(
                    f"level-{s} decomposition polynomial has valuation {v}, "
                    f"expected at least {s - 1}")
            bound = dilate(self.polytope, p ** s - 1)
            if not _grid_support_inside(acc, bound, nx):
                raise DivisibilityError(
                    f"level-{s} decomposition polynomial escapes the "
                    f"dilated polytope bound")
            self._delta_reports[s] = _make_report(
                "decomposition_divisibility", {"s": s}, p, s - 1, v, self.K,
                notes={"support_inside_dilated_polytope": True})
            self._delta[s] = acc
            return acc

    def _delta_laurent(self, s):
        """delta_s via generic polynomial arithmetic (any Frobenius lift)."""
        with self._lock:
            cached = self._delta_poly.get(s)
            if cached is not None:
                return cached
            p = self.p
            acc = pow_reduced(self.fw, p ** s - 1, budget=self.budget)
            for i in range(1, s):
                di = self._delta_laurent(i)
                pj = pow_reduced(self.fw, p ** (s - i) - 1, budget=self.budget)
                acc = acc - di * frobenius_poly(pj, self.sigma, i)
            self._delta_poly[s] = acc
            return acc

    def delta_polynomial(self, s):
        if s < 1:
            raise ValueError("decomposition level must be positive")
        if self.sigma.is_standard:
            grid = self._delta_grid(s)
            flat = kron.grid_to_terms(grid)
            return LaurentPoly(self.f_exact.vars,
                               unflatten_terms(flat, self._nx, self.ring),
                               self.ring)
        return self._delta_laurent(s)

    def delta_sequence(self, S):
        """delta_1 .. delta_S with divisibility and support checks applied."""
        if self.K < S:
            raise PrecisionTooLowError(
                f"precision K={self.K} is too low for level {S} "
                f"(needs K >= {S})")
        return [self.delta_polynomial(s) for s in range(1, S + 1)]

    def delta_reports(self):
        with self._lock:
            return [self._delta_reports[s] for s in sorted(self._delta_reports)]

    def gamma(self, s):
        """(gamma_s)_{u,v} = coefficient of x^(p^s v - u) in delta_s."""
        if s < 1:
            raise ValueError("gamma index must be positive")
        q = self.p ** s
        nx = self._nx
        if self.sigma.is_standard:
            grid = self._delta_grid(s)
            get = lambda exp: _grid_coeff_raw(grid, exp, nx, self.ring)
        else:
            poly = self._delta_laurent(s)
            get = lambda exp: poly.terms.get(exp, self.ring.zero())
        rows = []
        for u in self.J:
            row = []
            for v in self.J:
                row.append(get(tuple(q * vi - ui for vi, ui in zip(v, u))))
            rows.append(row)
        return SquareMatrix(self.ring, rows, labels=self.J)


def gamma_matrices(ctx, S):
    """gamma_1 .. gamma_S, with their divisibility and the exact
    reconstruction of alpha_s from lower levels both enforced."""
    if ctx.K < S:
        raise PrecisionTooLowError(
            f"precision K={ctx.K} is too low for level {S}")
    gammas = [ctx.gamma(s) for s in range(1, S + 1)]
    checks = []
    for s in range(1, S + 1):
        gm = gammas[s - 1]
        v = matrix_min_valuation(gm, ctx.p)
        if v < s - 1:
            raise DivisibilityError(
                f"gamma at level {s} has valuation {v}, expected >= {s - 1}")
        total = SquareMatrix.zero(ctx.ring, ctx.g, labels=ctx.J)
        for i in range(1, s + 1):
            total = total + gammas[i - 1] * matrix_sigma(ctx.alpha(s - i),
                                                         ctx.sigma, i)
        defect = ctx.alpha(s) - total
        exact = defect.is_zero()
        if not exact:
            raise DivisibilityError(
                f"alpha at level {s} does not match its decomposition "
                f"(defect valuation {matrix_min_valuation(defect, ctx.p)})")
        checks.append(_make_report(
            "gamma_divisibility_and_reconstruction", {"s": s}, ctx.p,
            s - 1, v, ctx.K, notes={"reconstruction_exact": True}))
    ctx.meta["gamma_checks"] = [c.to_json() for c in checks]
    return gammas


# ---------------------------------------------------------------------------
# exact (unreduced) variants for small inputs


def beta_sequence_exact(f, J, m_max, budget=None):
    """beta_1 .. beta_{m_max} over f's own exact coefficient ring."""
    ring = f.ring
    J = list(J)
    power = LaurentPoly(f.vars, {(0,) * f.nvars: ring.one()}, ring)
    out = []
    for m in range(1, m_max + 1):
        rows = []
        for u in J:
            row = []
            for v in J:
                exp = tuple(m * vi - ui for vi, ui in zip(v, u))
                row.append(power.terms.get(exp, ring.zero()))
            rows.append(row)
        out.append(SquareMatrix(ring, rows, labels=J))
        if m < m_max:
            power = power * f
    return out


def delta_polynomials_exact(f, p, S, sigma=None, budget=None):
    """delta_1 .. delta_S over f's exact ring (Frobenius defaults to the
    identity on coefficients, which is the right map for scalar rings)."""
    if sigma is None:
        sigma = FrobeniusMap(f.ring, p)
    out = []
    for s in range(1, S + 1):
        acc = pow_reduced(f, p ** s - 1, budget=budget)
        for i in range(1, s):
            pj = pow_reduced(f, p ** (s - i) - 1, budget=budget)
            acc = acc - out[i - 1] * frobenius_poly(pj, sigma, i)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# congruence verifiers


def verify_product_congruence(ctx, s_max):
    """alpha_s against the twisted product of s copies of alpha_1, mod p."""
    reports = []
    prod = ctx.alpha(1)
    for s in range(1, s_max + 1):
        if s > 1:
            prod = prod * matrix_sigma(ctx.alpha(1), ctx.sigma, s - 1)
        defect = ctx.alpha(s) - prod
        v = matrix_min_valuation(defect, ctx.p)
        reports.append(_make_report(
            "alpha_twisted_product", {"s": s}, ctx.p, 1, v, ctx.K))
    return reports


def verify_ratio_congruence(ctx, s_max):
    """Successive quotients alpha_{s+1} sigma(alpha_s)^{-1} stabilize mod
    p^s; requires the mod-p matrix to be invertible."""
    if ctx.K < s_max:
        raise PrecisionTooLowError(
            f"precision K={ctx.K} cannot certify a congruence mod "
            f"p^{s_max}")
    reports = []
    prev = ctx.alpha(1)
    for s in range(1, s_max + 1):
        cur = ctx.alpha(s + 1) * matrix_sigma(ctx.alpha_inverse(s),
                                              ctx.sigma)
        defect = cur - prev
        v = matrix_min_valuation(defect, ctx.p)
        reports.append(_make_report(
            "alpha_ratio_stabilizes", {"s": s}, ctx.p, s, v, ctx.K))
        prev = cur
    return reports


def verify_logderiv_congruence(ctx, D, s_max, m_max=0):
    """Logarithmic derivatives of twisted alpha matrices stabilize with an
    extra power of p per Frobenius twist.

    Derivatives of degree-``trunc`` data are only valid to degree
    ``trunc - 1``, so defects are measured after truncating to that degree.
    """
    if not isinstance(ctx.ring, ParamRing):
        raise RingMismatchError(
            "logarithmic-derivative checks need parameter coefficients")
    if ctx.K < s_max + m_max:
        raise PrecisionTooLowError(
            f"precision K={ctx.K} cannot certify a congruence mod "
            f"p^{s_max + m_max}")
    valid_degree = ctx.trunc - 1
    shrunk = ctx.reduction_ring(ctx.K, trunc=valid_degree)
    reports = []
    for m in range(0, m_max + 1):
        def logderiv(s):
            a = matrix_sigma(ctx.alpha(s), ctx.sigma, m)
            return matrix_derivation(a, D) * mat_inverse_mod_pk(a)

        prev = logderiv(1)
        for s in range(1, s_max + 1):
            cur = logderiv(s + 1)
            defect = (cur - prev).change_ring(shrunk)
            v = matrix_min_valuation(defect, ctx.p)
            reports.append(_make_report(
                "logderiv_stabilizes", {"s": s, "m": m}, ctx.p, s + m, v,
                ctx.K, notes={"valid_degree": valid_degree}))
            prev = cur
    return reports


def verify_beta_decomposition(ctx, m_list, s_max):
    """beta_{m p^s} against its reconstruction from the decomposition
    matrices, mod p^s for every m in m_list."""
    if ctx.K < s_max:
        raise PrecisionTooLowError(
            f"precision K={ctx.K} cannot certify a congruence mod "
            f"p^{s_max}")
    reports = []
    gammas = [ctx.gamma(s) for s in range(1, s_max + 1)]
    for m in m_list:
        if m < 1:
            raise ValueError("beta indices are positive")
        for s in range(1, s_max + 1):
            total = SquareMatrix.zero(ctx.ring, ctx.g, labels=ctx.J)
            for i in range(1, s + 1):
                total = total + gammas[i - 1] * matrix_sigma(
                    ctx.beta(m * ctx.p ** (s - i)), ctx.sigma, i)
            defect = ctx.beta(m * ctx.p ** s) - total
            v = matrix_min_valuation(defect, ctx.p)
            reports.append(_make_report(
                "beta_decomposition", {"m": m, "s": s}, ctx.p, s, v, ctx.K))
    return reports


def verify_derivation_frobenius(sigma, D, samples, m_max, p=None):
    """val_p(D(sigma^m(a))) >= m on each sample element."""
    if p is None:
        p = sigma.p
    ring = sigma.ring
    base = ring.base if isinstance(ring, ParamRing) else ring
    precision = base.K if isinstance(base, ModRing) else None
    reports = []
    for idx, a in enumerate(samples):
        if not isinstance(a, RingElement):
            a = ring.element(a)
        for m in range(1, m_max + 1):
            img = D.apply(sigma.apply(a, m))
            v = p_valuation(img, p)
            reports.append(_make_report(
                "derivation_after_frobenius", {"sample": idx, "m": m}, p, m,
                v, precision, notes={"element": a.to_text()}))
    return reports


# ---------------------------------------------------------------------------
# p-adic limits


def frobenius_limit(ctx, e):
    """The limit of alpha_{s+1} sigma(alpha_s)^{-1}, reported mod p^e.

    The stabilization congruence makes the s = e approximant already
    correct mod p^e, so that is the one computed.
    """
    if e < 1:
        raise ValueError("precision must be positive")
    if ctx.K < e:
        raise PrecisionTooLowError(
            f"context precision K={ctx.K} is below the requested "
            f"modulus exponent {e}")
    approx = ctx.alpha(e) * matrix_sigma(ctx.alpha_inverse(e - 1), ctx.sigma)
    mat = approx.change_ring(ctx.reduction_ring(e))
    return LimitResult(mat, "frobenius_limit",
                       {"s": e, "modulus": f"{ctx.p}^{e}"})


def connection_limit(ctx, D, e, degree=None):
    """The limit of -D(alpha_s) alpha_s^{-1}, reported mod p^e and
    truncated to the stated parameter degree.

    A derivative of data truncated at degree T is valid to T - 1, so the
    maximum reportable degree is ctx.trunc - 1.
    """
    if not isinstance(ctx.ring, ParamRing):
        raise RingMismatchError(
            "connection limits need parameter coefficients")
    if e < 1:
        raise ValueError("precision must be positive")
    if ctx.K < e:
        raise PrecisionTooLowError(
            f"context precision K={ctx.K} is below the requested "
            f"modulus exponent {e}")
    valid_degree = ctx.trunc - 1
    if degree is None:
        degree = valid_degree
    if degree > valid_degree:
        raise PrecisionTooLowError(
            f"degree {degree} exceeds the derivative-valid degree "
            f"{valid_degree} of this context")
    a = ctx.alpha(e)
    mat = -(matrix_derivation(a, D) * mat_inverse_mod_pk(a))
    mat = mat.change_ring(ctx.reduction_ring(e, trunc=degree))
    return LimitResult(mat, "connection_limit",
                       {"s": e, "modulus": f"{ctx.p}^{e}", "degree": degree})


# ---------------------------------------------------------------------------
# horizontal frame


def _graded_part(ring, raw, d):
    return {e: c for e, c in raw.items() if sum(e) == d}


def horizontal_frame(family, params, N, allowed_primes=None):
    """Solve D(U) + N_D U = 0 for all derivations at once, U(0) = I.

    ``family`` lists (coordinate derivation, connection matrix) pairs with
    matrices over rational parameter polynomials truncated at degree >= N.
    The solution is built degree by degree from the scaling identity
    d * U_d = sum_i t_i (dU/dt_i)_d, then every equation is re-checked to
    degree N-1; a failure there means the family is not integrable and
    raises with the offending defect.  When ``allowed_primes`` is given,
    every denominator of U must factor over it.
    """
    params = tuple(params)
    ring = ParamRing(QQ, params, N)
    n = None
    pairs = []
    for D, mat in family:
        if not D.is_coordinate():
            raise RingMismatchError(
                "frame solving needs coordinate derivations")
        name = D.is_coordinate()
        if name not in params:
            raise RingMismatchError(f"derivation coordinate {name!r} is not "
                                    f"a parameter")
        i = params.index(name)
        mat = mat.change_ring(ring)
        if n is None:
            n = mat.n
        elif mat.n != n:
            raise RingMismatchError("connection matrices differ in size")
        pairs.append((i, mat))

    ident = SquareMatrix.identity(ring, n)
    u = ident
    for d in range(1, N + 1):
        # d * U_d = - sum_i t_i * (N_i U)_{d-1}
        acc = SquareMatrix.zero(ring, n)
        for i, nmat in pairs:
            prod = nmat * u
            mono = tuple(1 if j == i else 0 for j in range(len(params)))
            lift = prod.map_entries(
                lambda raw: ring.mul(ring.monomial(mono),
                                     _graded_part(ring, raw, d - 1)))
            acc = acc + lift
        scale = -Fraction(1, d)
        ud = acc.map_entries(
            lambda raw: {e: c * scale for e, c in raw.items()})
        u = u + ud
    # consistency: every equation must hold to degree N - 1
    check_ring = ParamRing(QQ, params, N - 1)
    for i, nmat in pairs:
        deriv = DerivationMap.coordinate(ring, params[i])
        defect = (matrix_derivation(u, deriv) + nmat * u).change_ring(
            check_ring)
        if not defect.is_zero():
            raise IntegrabilityError(
                f"connection family is not integrable: the equation for "
                f"parameter {params[i]!r} fails below degree {N}")
    if allowed_primes is not None:
        allowed = set(allowed_primes)
        for row in u.rows:
            for raw in row:
                for c in raw.values():
                    den = c.denominator
                    for q in allowed:
                        while den % q == 0:
                            den //= q
                    if den != 1:
                        raise DivisibilityError(
                            f"frame denominators need primes outside "
                            f"{sorted(allowed)}: {c}")
    return u


def verify_frame_factorization(ctx, u, f0, s, degree=None):
    """Empirical check that the ratio alpha_s sigma(alpha_{s-1})^{-1}
    factors as U F0 sigma(U)^{-1} mod p^s at the working degree."""
    if not isinstance(ctx.ring, ParamRing):
        raise RingMismatchError("frame checks need parameter coefficients")
    if ctx.K < s:
        raise PrecisionTooLowError(
            f"context precision K={ctx.K} is below the requested "
            f"modulus exponent {s}")
    if degree is None:
        degree = min(ctx.trunc, u.ring.trunc)
    if degree > min(ctx.trunc, u.ring.trunc):
        raise PrecisionTooLowError("degree exceeds available truncations")
    ring = ctx.reduction_ring(s, trunc=degree)
    lhs = (ctx.alpha(s) * matrix_sigma(ctx.alpha_inverse(s - 1),
                                       ctx.sigma)).change_ring(ring)
    uu = u.change_ring(ring)
    f0w = f0.change_ring(ring) if f0.ring != ring else f0
    sig = FrobeniusMap(ring, ctx.p)
    rhs = uu * f0w * mat_inverse_mod_pk(matrix_sigma(uu, sig))
    # labels differ between the context matrices and the abstract frame
    rhs = SquareMatrix(ring, rhs.rows, labels=lhs.labels)
    defect = lhs - rhs
    v = matrix_min_valuation(defect, ctx.p)
    return _make_report(
        "frame_factorization", {"s": s, "degree": degree}, ctx.p, s, v,
        s, soft=True,
        notes={"constant_factor": [[str(x) for x in row]
                                   for row in f0.to_texts()]})


# ---------------------------------------------------------------------------
# serialization


def matrix_to_json(mat):
    return {
        "labels": [list(l) if isinstance(l, tuple) else l
                   for l in (mat.labels or range(mat.n))],
        "entries": mat.to_texts(),
    }
