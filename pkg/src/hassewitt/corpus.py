"""Seeded random Laurent polynomials for the property suites.

The generator is deterministic for a fixed seed and enforces, on top of
the size bounds, the structural guarantees the suites rely on: nonempty
interior lattice sets, unit-matrix invertibility coverage at each small
prime, and enough members whose full lattice set is small (so the
degree-12 group laws stay cheap in all-points mode).
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field

from .hwmatrix import HWContext
from .laurent import LaurentPoly, lattice_points, newton_polytope
from .ring import ZZ, ParamRing, RingElement

CORPUS_SEED = 271828
CORPUS_PRIMES = (2, 3, 5, 7)

BOX_EXPS_2D = tuple((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))


@dataclass
class CorpusEntry:
    index: int
    f: LaurentPoly
    g_interior: int
    g_all: int
    hw_invertible: dict = field(default_factory=dict)
    hw_invertible_all: dict = field(default_factory=dict)

    def to_json(self):
        from .laurent import poly_to_json
        return {"index": self.index, "poly": poly_to_json(self.f),
                "g_interior": self.g_interior, "g_all": self.g_all,
                "hw_invertible": {str(p): v
                                  for p, v in sorted(self.hw_invertible.items())},
                "hw_invertible_all": {
                    str(p): v
                    for p, v in sorted(self.hw_invertible_all.items())}}


def corpus_signature(f):
    return (f.vars, tuple(sorted((e, int(c)) for e, c in f.terms.items())))


def _random_poly(rng, max_support, coeff_bound):
    coeffs = [c for c in range(-coeff_bound, coeff_bound + 1) if c]
    if rng.random() < 0.3:
        # one-variable member with both endpoints, so 0 is interior
        terms = {(-1,): rng.choice(coeffs), (1,): rng.choice(coeffs)}
        if rng.random() < 0.7:
            terms[(0,)] = rng.choice(coeffs)
        return LaurentPoly(("x",), terms)
    size = rng.randint(3, max_support)
    exps = rng.sample(BOX_EXPS_2D, size)
    return LaurentPoly(("x", "y"), {e: rng.choice(coeffs) for e in exps})


def generate_corpus(count=24, seed=CORPUS_SEED, primes=CORPUS_PRIMES,
                    max_support=6, coeff_bound=3, min_per_prime=8,
                    min_small_all=5, small_all_bound=4, max_attempts=20000):
    """Deterministic corpus with per-prime invertibility quotas.

    Returns at least ``count`` entries; generation continues past the
    count until every prime has ``min_per_prime`` members with invertible
    unit matrix and ``min_small_all`` members have at most
    ``small_all_bound`` lattice points in all-points mode.
    """
    rng = random.Random(seed)
    entries = []
    seen = set()
    per_prime = {p: 0 for p in primes}
    small_all = 0
    attempts = 0
    while True:
        have_count = len(entries) >= count
        have_primes = all(v >= min_per_prime for v in per_prime.values())
        have_small = small_all >= min_small_all
        if have_count and have_primes and have_small:
            break
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("corpus quotas unreachable; loosen bounds")
        f = _random_poly(rng, max_support, coeff_bound)
        sig = corpus_signature(f)
        if sig in seen:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                poly = newton_polytope(f)
                interior = lattice_points(poly, "interior")
            except ValueError:
                continue
            if not interior:
                continue
            every = lattice_points(poly, "all")
            inv = {}
            inv_all = {}
            for p in primes:
                inv[p] = HWContext(f, p, 1).hasse_witt_invertible()
                inv_all[p] = HWContext(f, p, 1,
                                       mode="all").hasse_witt_invertible()
        if not any(inv.values()):
            continue
        seen.add(sig)
        entry = CorpusEntry(len(entries), f, len(interior), len(every),
                            inv, inv_all)
        entries.append(entry)
        for p in primes:
            if inv[p]:
                per_prime[p] += 1
        if len(every) <= small_all_bound:
            small_all += 1
    return entries


def entries_invertible_at(entries, p, mode="interior"):
    table = "hw_invertible" if mode == "interior" else "hw_invertible_all"
    return [e for e in entries if getattr(e, table).get(p)]


def entries_small_all(entries, bound=4):
    return [e for e in entries if e.g_all <= bound]


def param_variant(f, trunc, param="t"):
    """The same polynomial with the lexicographically first coefficient
    shifted by a formal parameter; at parameter zero it reduces to f, so
    unit-matrix invertibility survives the deformation."""
    if f.ring != ZZ:
        raise ValueError("variants deform integer polynomials")
    ring = ParamRing(ZZ, (param,), trunc)
    target = min(sorted(f.terms))
    terms = {}
    for e, c in f.terms.items():
        raw = {(0,): c}
        if e == target:
            raw[(1,)] = 1
        terms[e] = RingElement(ring, raw)
    return LaurentPoly(f.vars, terms, ring)
