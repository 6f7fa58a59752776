"""Command-line entry point.

Subcommands map onto the library layers: ``hw`` prints coefficient and
unit matrices, ``verify`` streams congruence reports, ``limits`` emits
the stabilized Frobenius and connection matrices, ``fgl`` builds formal
group laws and their integrality certificates, ``zeta`` runs the
point-counting cross-checks, and ``corpus`` regenerates the seeded
polynomial corpus.

Exit codes: 0 all checks pass, 1 a hard congruence check failed, 2 usage
or parse problem, 3 invertibility hypothesis violated, 4 budget
exhausted.  Soft (experimental) checks flip the exit code only under
``--strict``.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from . import catalog
from .corpus import CORPUS_SEED, generate_corpus
from .errors import (BudgetExceededError, DivisibilityError,
                     EmptyLatticeError, InconsistentCountsError,
                     IntegrabilityError, NonSimpleRootError,
                     NotInvertibleModP, ParseError, PrecisionTooLowError,
                     RingMismatchError)
from .fgl import (check_fgl_axioms, check_integrality,
                  functional_equation_witness, group_law, logarithm)
from .hwmatrix import (HWContext, beta_sequence_exact, connection_limit,
                       frobenius_limit, gamma_matrices, horizontal_frame,
                       matrix_to_json, verify_beta_decomposition,
                       verify_derivation_frobenius,
                       verify_frame_factorization,
                       verify_logderiv_congruence,
                       verify_product_congruence, verify_ratio_congruence)
from .laurent import (default_budget, lattice_points, newton_polytope,
                      parse_poly, poly_from_json)
from .ring import (ZZ, DerivationMap, FrobeniusMap, ModRing, ParamRing,
                   RingElement, padic_digits)
from .zeta import (asd_check, factor_quadratic_pair, hensel_unit_roots,
                   hyperelliptic_point_counts, reverse_poly,
                   unit_root_factor, verify_charpoly_divides,
                   verify_unit_eigenvalue_match, zeta_numerator_genus1,
                   zeta_numerator_genus2)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_INVERTIBLE = 3
EXIT_BUDGET = 4

_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class UsageFault(Exception):
    """Configuration problems detected after argparse."""


def _split_csv(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _infer_vars(text, params):
    names = sorted(set(_IDENT.findall(text)) - set(params))
    if not names:
        raise UsageFault("no variables found in the polynomial")
    return tuple(names)


def _load_poly(args, trunc=None):
    params = _split_csv(args.params) if getattr(args, "params", None) else ()
    if getattr(args, "file", None):
        with open(args.file, "r", encoding="utf-8") as fh:
            return poly_from_json(json.load(fh))
    text = getattr(args, "f", None)
    if not text:
        raise UsageFault("provide a polynomial with --f or --file")
    vars = (_split_csv(args.vars) if getattr(args, "vars", None)
            else _infer_vars(text, params))
    return parse_poly(text, vars, params=params, base=ZZ, trunc=trunc)


def _interior_lattice(f, mode):
    J = lattice_points(newton_polytope(f), mode)
    if not J:
        raise EmptyLatticeError("no lattice points are indexed")
    return J


def _matrix_lines(name, mat):
    lines = [f"{name} ="]
    for row in mat.to_texts():
        lines.append("  [" + ", ".join(row) + "]")
    return lines


def _coordinate_derivation(ring, spec):
    m = re.fullmatch(r"d/d([A-Za-z_][A-Za-z_0-9]*)", spec.strip())
    if not m:
        raise UsageFault(f"derivation {spec!r} is not of the form d/d<name>")
    return DerivationMap.coordinate(ring, m.group(1))


def _exit_from_reports(reports, strict):
    if any(not r.passed and not r.soft for r in reports):
        return EXIT_CHECK_FAILED
    if strict and any(not r.passed and r.soft for r in reports):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _report_lines(reports):
    return [r.one_line() for r in reports]


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_hw(args):
    n_actions = sum(x is not None
                    for x in (args.beta, args.alpha, args.gamma))
    n_actions += 1 if args.hasse_witt else 0
    if n_actions > 1:
        raise UsageFault(
            "pick one of --beta, --alpha, --hasse-witt, --gamma")
    trunc = args.N if args.params else None
    f = _load_poly(args, trunc=trunc)
    doc = {"command": "hw", "inputs": {"f": f.to_text(), "mode": args.mode},
           "results": {}}
    lines = []
    budget = args.budget or default_budget()

    if n_actions == 0:
        # describe the lattice data; empty J is a usage-level error
        polytope = newton_polytope(f)
        J = _interior_lattice(f, args.mode)
        doc["results"]["vertices"] = [list(v) for v in polytope.vertices]
        doc["results"]["lattice_points"] = [list(u) for u in J]
        lines.append(f"vertices: {list(polytope.vertices)}")
        lines.append(f"lattice points ({args.mode}): {J}")
        lines.append(f"g = {len(J)}")
        return EXIT_OK, doc, lines

    if args.beta is not None and args.p is None and args.K is None:
        J = _interior_lattice(f, args.mode)
        mats = beta_sequence_exact(f, J, args.beta, budget=budget)
        mat = mats[args.beta - 1]
        doc["results"]["beta"] = matrix_to_json(mat)
        doc["inputs"]["m"] = args.beta
        lines += _matrix_lines(f"beta_{args.beta} (exact)", mat)
        return EXIT_OK, doc, lines

    if args.p is None:
        raise UsageFault("this query needs --p")
    doc["inputs"]["p"] = args.p

    if args.hasse_witt:
        ctx = HWContext(f, args.p, 1, mode=args.mode, budget=budget)
        mat = ctx.hasse_witt()
        doc["results"]["hasse_witt"] = matrix_to_json(mat)
        doc["results"]["invertible"] = ctx.hasse_witt_invertible()
        lines += _matrix_lines(f"unit matrix mod {args.p}", mat)
        lines.append(f"invertible mod {args.p}: "
                     f"{ctx.hasse_witt_invertible()}")
        return EXIT_OK, doc, lines

    if args.alpha is not None:
        s = args.alpha
        doc["inputs"]["s"] = s
        if args.K is None:
            J = _interior_lattice(f, args.mode)
            mats = beta_sequence_exact(f, J, args.p ** s, budget=budget)
            mat = mats[args.p ** s - 1]
            doc["results"]["alpha"] = matrix_to_json(mat)
            lines += _matrix_lines(
                f"beta index {args.p}^{s} (exact)", mat)
        else:
            ctx = HWContext(f, args.p, args.K, mode=args.mode, budget=budget)
            mat = ctx.alpha(s)
            doc["results"]["alpha"] = matrix_to_json(mat)
            doc["inputs"]["K"] = args.K
            lines += _matrix_lines(
                f"beta index {args.p}^{s} mod {args.p}^{args.K}", mat)
        return EXIT_OK, doc, lines

    if args.gamma is not None:
        S = args.gamma
        K = args.K or S
        ctx = HWContext(f, args.p, K, mode=args.mode, budget=budget)
        gammas = gamma_matrices(ctx, S)
        doc["inputs"]["S"] = S
        doc["inputs"]["K"] = K
        doc["results"]["gamma"] = [matrix_to_json(g) for g in gammas]
        doc["reports"] = list(ctx.meta.get("gamma_checks", []))
        for s, g in enumerate(gammas, start=1):
            lines += _matrix_lines(
                f"gamma_{s} mod {args.p}^{K}", g)
        return EXIT_OK, doc, lines

    if args.beta is not None:
        K = args.K or 1
        ctx = HWContext(f, args.p, K, mode=args.mode, budget=budget)
        mat = ctx.beta(args.beta)
        doc["inputs"]["m"] = args.beta
        doc["inputs"]["K"] = K
        doc["results"]["beta"] = matrix_to_json(mat)
        lines += _matrix_lines(
            f"beta_{args.beta} mod {args.p}^{K}", mat)
        return EXIT_OK, doc, lines

    raise UsageFault("nothing to do")


def cmd_verify(args):
    reports = []
    lines = []
    doc = {"command": "verify", "inputs": {}, "results": {}}
    budget = args.budget or default_budget()
    chosen = [x for x in (args.congruence, "decomposition" if args.decomposition
                          else None, "delta" if args.delta else None,
                          "derivation" if args.derivation else None,
                          "frame" if args.frame else None,
                          "asd" if args.asd else None) if x]
    if len(chosen) != 1:
        raise UsageFault(
            "pick exactly one of --congruence, --decomposition, --delta, "
            "--derivation, --frame, --asd")
    kind = chosen[0]
    doc["inputs"]["check"] = kind

    if kind == "frame":
        p = args.p or 5
        s = args.s or 1
        N = args.N or 4
        doc["inputs"].update({"p": p, "s": s, "N": N})
        family = catalog.cubic_connection_matrices(N)
        u = horizontal_frame(family, catalog.CUBIC_PARAMS, N)
        f0 = catalog.frame_constant_factor(p)
        ctx = HWContext(catalog.cubic_poly(trunc=N), p, s, budget=budget)
        reports.append(verify_frame_factorization(ctx, u, f0, s))
        doc["results"]["constant_factor"] = f0.to_texts()
    elif kind == "asd":
        p = args.p or catalog.GENUS2_P
        K = args.K or 2
        curve = (parse_poly(args.curve, _infer_vars(args.curve, ()))
                 if args.curve else catalog.genus2_poly())
        counts = hyperelliptic_point_counts(curve, p, [1, 2])
        numerator = zeta_numerator_genus2(counts[1], counts[2], p)
        ctx = HWContext(curve, p, K, budget=budget)
        m_list = ([int(x) for x in _split_csv(args.m_list)]
                  if args.m_list else [2, 3, p, 2 * p])
        asd_reports, c_min = asd_check(ctx, numerator, m_list)
        reports += asd_reports
        doc["results"]["minimal_c"] = c_min
        doc["inputs"].update({"p": p, "K": K, "m_list": m_list})
        lines.append(f"minimal constant c: {c_min}")
    else:
        if args.p is None:
            raise UsageFault("this check needs --p")
        p = args.p
        s_max = args.smax or 2
        doc["inputs"].update({"p": p, "s_max": s_max})
        if kind == "product":
            K = args.K or 2
            f = _load_poly(args)
            ctx = HWContext(f, p, K, mode=args.mode, budget=budget)
            reports += verify_product_congruence(ctx, s_max)
        elif kind == "ratio":
            K = args.K or s_max
            f = _load_poly(args)
            ctx = HWContext(f, p, K, mode=args.mode, budget=budget)
            reports += verify_ratio_congruence(ctx, s_max)
        elif kind == "logderiv":
            m_max = args.m if args.m is not None else 1
            K = args.K or (s_max + m_max)
            N = args.N or 4
            if not args.params:
                raise UsageFault("--congruence logderiv needs --params")
            f = _load_poly(args, trunc=N)
            ctx = HWContext(f, p, K, mode=args.mode, budget=budget)
            D = _coordinate_derivation(ctx.ring, args.D or
                                       f"d/d{f.ring.params[0]}")
            reports += verify_logderiv_congruence(ctx, D, s_max, m_max)
            doc["inputs"]["N"] = N
        elif kind == "decomposition":
            K = args.K or (s_max + 1)
            f = _load_poly(args)
            ctx = HWContext(f, p, K, mode=args.mode, budget=budget)
            m_list = ([int(x) for x in _split_csv(args.m_list)]
                      if args.m_list else [2, 3])
            reports += verify_beta_decomposition(ctx, m_list, s_max)
        elif kind == "delta":
            K = args.K or s_max
            f = _load_poly(args)
            ctx = HWContext(f, p, K, mode=args.mode, budget=budget)
            ctx.delta_sequence(s_max)
            reports += ctx.delta_reports()
        elif kind == "derivation":
            m_max = args.m if args.m is not None else 2
            K = args.K or (m_max + 1)
            N = args.N or 4
            if not args.params:
                raise UsageFault("--derivation needs --params")
            f = _load_poly(args, trunc=N)
            ring = ParamRing(ModRing(p, K), f.ring.params, N)
            sigma = FrobeniusMap(ring, p)
            D = _coordinate_derivation(ring, args.D or
                                       f"d/d{f.ring.params[0]}")
            samples = [RingElement(ring, ring.convert(c, f.ring))
                       for c in f.terms.values()]
            reports += verify_derivation_frobenius(sigma, D, samples,
                                                   m_max, p)

    doc["reports"] = [r.to_json() for r in reports]
    lines = _report_lines(reports) + lines
    return _exit_from_reports(reports, args.strict), doc, lines


def cmd_limits(args):
    if args.p is None or args.e is None:
        raise UsageFault("limits need --p and --e")
    p, e = args.p, args.e
    budget = args.budget or default_budget()
    doc = {"command": "limits",
           "inputs": {"p": p, "e": e, "kind": args.limit}, "results": {}}
    lines = []
    if args.limit == "frobenius":
        f = _load_poly(args)
        ctx = HWContext(f, p, e, mode=args.mode, budget=budget)
        result = frobenius_limit(ctx, e)
        doc["results"]["matrix"] = matrix_to_json(result.matrix)
        doc["results"]["claim"] = result.claim
        lines += _matrix_lines(f"unit limit mod {p}^{e}", result.matrix)
        tr = result.matrix.trace().data
        if isinstance(tr, int):
            lines.append(f"trace: {padic_digits(tr, p, e)}")
            doc["results"]["trace_digits"] = padic_digits(tr, p, e)
    else:
        N = args.N or 4
        if not args.params:
            raise UsageFault("connection limits need --params")
        f = _load_poly(args, trunc=N + 1)
        ctx = HWContext(f, p, e, mode=args.mode, budget=budget)
        D = _coordinate_derivation(ctx.ring, args.D or
                                   f"d/d{f.ring.params[0]}")
        result = connection_limit(ctx, D, e, degree=N)
        doc["results"]["matrix"] = matrix_to_json(result.matrix)
        doc["results"]["claim"] = result.claim
        doc["inputs"]["N"] = N
        lines += _matrix_lines(
            f"connection limit mod ({p}^{e}, degree {N})", result.matrix)
    return EXIT_OK, doc, lines


def cmd_fgl(args):
    if args.N is None:
        raise UsageFault("fgl needs --N")
    f = _load_poly(args)
    N = args.N
    doc = {"command": "fgl", "inputs": {"f": f.to_text(), "N": N,
                                        "mode": args.mode}, "results": {}}
    lines = []
    reports = []
    want_law = args.law or not (args.witness or args.log)

    if args.log:
        l = logarithm(f, N, args.mode)
        doc["results"]["logarithm"] = l.to_json()
        for i, comp in enumerate(l):
            lines.append(f"l[{i}] = {comp.to_text(limit=12)}")

    gtuple = None
    if want_law or args.check_integrality or args.axioms:
        gtuple = group_law(f, N, args.mode)
        doc["results"]["group_law"] = gtuple.to_json()
        for i, comp in enumerate(gtuple):
            lines.append(f"G[{i}] = {comp.to_text(limit=12)}")

    if args.check_integrality:
        primes = [int(x) for x in _split_csv(args.check_integrality)]
        for p in primes:
            reports.append(check_integrality(gtuple, p))
        doc["inputs"]["primes"] = primes

    if args.axioms:
        axioms = check_fgl_axioms(gtuple)
        doc["results"]["axioms"] = axioms
        lines.append(f"axioms: {axioms}")
        if not axioms["pass"]:
            doc["reports"] = [r.to_json() for r in reports]
            return EXIT_CHECK_FAILED, doc, lines + _report_lines(reports)

    if args.witness:
        if args.p is None:
            raise UsageFault("--witness needs --p")
        reports.append(functional_equation_witness(f, args.p, N, args.mode))
        doc["inputs"]["p"] = args.p

    doc["reports"] = [r.to_json() for r in reports]
    lines += _report_lines(reports)
    return _exit_from_reports(reports, args.strict), doc, lines


def cmd_zeta(args):
    p = args.p or catalog.GENUS2_P
    curve = (parse_poly(args.curve, _infer_vars(args.curve, ()))
             if args.curve else catalog.genus2_poly())
    budget = args.budget or default_budget()
    doc = {"command": "zeta",
           "inputs": {"curve": curve.to_text(), "p": p}, "results": {}}
    lines = []
    reports = []

    degrees = [1, 2, 3] if args.extended else [1, 2]
    counts = hyperelliptic_point_counts(curve, p, degrees)
    genus = (max(e[0] for e in curve.support()) - 1) // 2
    if genus == 1:
        numerator = zeta_numerator_genus1(counts[1], p)
    elif genus == 2:
        numerator = zeta_numerator_genus2(counts[1], counts[2], p,
                                          counts.get(3))
    else:
        raise UsageFault("only genus 1 and 2 models are wired up")
    doc["results"]["counts"] = {str(m): c for m, c in counts.items()}
    doc["results"]["numerator"] = numerator.to_json()
    terms = " + ".join(
        f"{c}*T^{i}" if i else str(c)
        for i, c in enumerate(numerator.coeffs) if c)
    lines.append(f"counts: {counts}")
    lines.append(f"numerator: {terms}")

    pair = factor_quadratic_pair(numerator) if genus == 2 else None
    if pair:
        doc["results"]["factors"] = [list(q) for q in pair]
        lines.append(f"factors: {pair[0]} * {pair[1]}")

    if args.unit_roots:
        K = args.K or 3
        doc["inputs"]["K"] = K
        targets = pair if pair else [numerator.coeffs]
        roots = []
        for q in targets:
            roots += hensel_unit_roots(list(reverse_poly(q)), p, K)
        doc["results"]["unit_roots"] = roots
        for r in roots:
            lines.append(f"unit root: {padic_digits(r, p, K)}")

    if args.charpoly:
        ctx = HWContext(curve, p, 1, budget=budget)
        reports.append(verify_charpoly_divides(ctx, numerator))

    if args.match_limits:
        K = args.K or 2
        doc["inputs"]["K"] = K
        targets = pair if pair else [numerator.coeffs]
        roots = []
        for q in targets:
            roots += hensel_unit_roots(list(reverse_poly(q)), p, K)
        ctx = HWContext(curve, p, K, budget=budget)
        rep = verify_unit_eigenvalue_match(ctx, roots, K)
        reports.append(rep)
        lines.append(
            f"trace: {padic_digits(rep.notes['trace'], p, K)}")
        lines.append(
            f"determinant: {padic_digits(rep.notes['determinant'], p, K)}")

    if args.asd:
        K = args.K or 2
        ctx = HWContext(curve, p, K, budget=budget)
        m_list = ([int(x) for x in _split_csv(args.m_list)]
                  if args.m_list else [2, 3, p, 2 * p])
        asd_reports, c_min = asd_check(ctx, numerator, m_list)
        reports += asd_reports
        doc["results"]["minimal_c"] = c_min
        lines.append(f"minimal constant c: {c_min}")

    doc["reports"] = [r.to_json() for r in reports]
    lines += _report_lines(reports)
    return _exit_from_reports(reports, args.strict), doc, lines


def cmd_corpus(args):
    entries = generate_corpus(count=args.count, seed=args.seed)
    doc = {"command": "corpus",
           "inputs": {"count": args.count, "seed": args.seed},
           "results": {"entries": [e.to_json() for e in entries]}}
    lines = []
    for e in entries:
        inv = ",".join(str(p) for p, ok in sorted(e.hw_invertible.items())
                       if ok)
        lines.append(f"[{e.index:2d}] {e.f.to_text()}  "
                     f"(g={e.g_interior}, g_all={e.g_all}, "
                     f"invertible at: {inv or 'none'})")
    return EXIT_OK, doc, lines


# ---------------------------------------------------------------------------
# parser


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hassewitt",
        description="Exact arithmetic for higher Hasse-Witt matrices")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, poly=True):
        sp.add_argument("--json", action="store_true",
                        help="emit one deterministic JSON document")
        sp.add_argument("--strict", action="store_true",
                        help="soft-check failures also flip the exit code")
        sp.add_argument("--threads", type=int,
                        default=int(os.environ.get("HASSEWITT_THREADS", "1")),
                        help="worker cap (current engines are serial; "
                             "accepted for forward compatibility)")
        sp.add_argument("--budget", type=int, default=None,
                        help="term budget for polynomial powering")
        if poly:
            sp.add_argument("--f", help="polynomial text, e.g. \"1+x*y\"")
            sp.add_argument("--file", help="polynomial JSON file")
            sp.add_argument("--vars",
                            help="comma-separated variables (default: "
                                 "inferred alphabetically)")
            sp.add_argument("--params",
                            help="comma-separated coefficient parameters")
            grp = sp.add_mutually_exclusive_group()
            grp.add_argument("--interior", dest="mode",
                             action="store_const", const="interior",
                             help="index by interior lattice points "
                                  "(default)")
            grp.add_argument("--all-points", dest="mode",
                             action="store_const", const="all",
                             help="index by all lattice points")
            sp.set_defaults(mode="interior")

    hw = sub.add_parser("hw", help="coefficient and unit matrices")
    common(hw)
    hw.add_argument("--p", type=int)
    hw.add_argument("--K", type=int, help="p-adic working precision")
    hw.add_argument("--N", type=int, help="parameter truncation degree")
    hw.add_argument("--beta", type=int, metavar="M",
                    help="coefficient matrix of the (M-1)-th power")
    hw.add_argument("--alpha", type=int, metavar="S",
                    help="coefficient matrix at index p^S")
    hw.add_argument("--hasse-witt", action="store_true",
                    help="unit matrix mod p with invertibility")
    hw.add_argument("--gamma", type=int, metavar="S",
                    help="decomposition matrices up to level S")

    ver = sub.add_parser("verify", help="congruence report streams")
    common(ver)
    ver.add_argument("--congruence",
                     choices=["product", "ratio", "logderiv"],
                     help="which stabilization family to check")
    ver.add_argument("--decomposition", action="store_true",
                     help="beta decomposition congruences")
    ver.add_argument("--delta", action="store_true",
                     help="divisibility and support of the delta sequence")
    ver.add_argument("--derivation", action="store_true",
                     help="derivation-of-twist divisibility")
    ver.add_argument("--frame", action="store_true",
                     help="horizontal frame factorization on the cubic "
                          "family (soft)")
    ver.add_argument("--asd", action="store_true",
                     help="Atkin-Swinnerton-Dyer style numerator "
                          "congruences (soft)")
    ver.add_argument("--curve", help="hyperelliptic model for --asd")
    ver.add_argument("--p", type=int)
    ver.add_argument("--K", type=int)
    ver.add_argument("--N", type=int)
    ver.add_argument("--smax", type=int, help="largest level to check")
    ver.add_argument("--m", type=int, help="largest twist order")
    ver.add_argument("--m-list", help="comma-separated matrix indices")
    ver.add_argument("--s", type=int, help="frame factorization level")
    ver.add_argument("--D", help="derivation, e.g. d/da")

    lim = sub.add_parser("limits", help="stabilized limit matrices")
    common(lim)
    lim.add_argument("--limit", choices=["frobenius", "connection"],
                     default="frobenius")
    lim.add_argument("--p", type=int)
    lim.add_argument("--e", type=int, help="p-adic accuracy of the limit")
    lim.add_argument("--N", type=int, help="parameter degree for "
                                           "connection limits")
    lim.add_argument("--D", help="derivation, e.g. d/da")

    fgl = sub.add_parser("fgl", help="formal group laws")
    common(fgl)
    fgl.add_argument("--N", type=int, help="series truncation degree")
    fgl.add_argument("--p", type=int)
    fgl.add_argument("--law", action="store_true",
                     help="print the group law series")
    fgl.add_argument("--log", action="store_true",
                     help="print the logarithm series")
    fgl.add_argument("--check-integrality", metavar="P1,P2,...",
                     help="denominator check at the given primes")
    fgl.add_argument("--witness", action="store_true",
                     help="functional-equation integrality witness")
    fgl.add_argument("--axioms", action="store_true",
                     help="unit, commutativity, associativity checks")

    zet = sub.add_parser("zeta", help="point counts and zeta cross-checks")
    common(zet, poly=False)
    zet.add_argument("--curve",
                     help="hyperelliptic model (default: built-in "
                          "genus-2 example)")
    zet.add_argument("--p", type=int)
    zet.add_argument("--K", type=int)
    zet.add_argument("--extended", action="store_true",
                     help="also count over the cubic extension and "
                          "cross-check the functional equation")
    zet.add_argument("--unit-roots", action="store_true",
                     help="Hensel-lift unit reciprocal roots")
    zet.add_argument("--charpoly", action="store_true",
                     help="mod-p characteristic polynomial divisibility")
    zet.add_argument("--match-limits", action="store_true",
                     help="trace/determinant against lifted roots")
    zet.add_argument("--asd", action="store_true",
                     help="numerator congruences (soft)")
    zet.add_argument("--m-list", help="comma-separated matrix indices")

    cor = sub.add_parser("corpus", help="seeded polynomial corpus")
    common(cor, poly=False)
    cor.add_argument("--count", type=int, default=24)
    cor.add_argument("--seed", type=int, default=CORPUS_SEED)

    return parser


HANDLERS = {
    "hw": cmd_hw,
    "verify": cmd_verify,
    "limits": cmd_limits,
    "fgl": cmd_fgl,
    "zeta": cmd_zeta,
    "corpus": cmd_corpus,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        code, doc, lines = HANDLERS[args.command](args)
    except EmptyLatticeError:
        print("empty J; consider --all-points", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageFault as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, PrecisionTooLowError, RingMismatchError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotInvertibleModP as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    except BudgetExceededError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DivisibilityError, IntegrabilityError, InconsistentCountsError,
            NonSimpleRootError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
