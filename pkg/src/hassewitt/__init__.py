"""Exact arithmetic for higher Hasse-Witt matrices.

Coefficient matrices of powers of a Laurent polynomial, their p-adic
congruence families, unit-root and connection limits, horizontal frame
factorizations, formal group laws with integrality certificates, and
point-counting cross-checks against zeta numerators.
"""

from .errors import (BudgetExceededError, DivisibilityError,
                     EmptyLatticeError, HasseWittError,
                     InconsistentCountsError, IntegrabilityError,
                     NonSimpleRootError, NotInvertibleModP, ParseError,
                     PrecisionTooLowError, RingMismatchError)
from .ring import (ZZ, QQ, DerivationMap, FrobeniusMap, ModRing, ParamRing,
                   RingElement, SquareMatrix, gauss_inverse_mod_p,
                   mat_inverse_mod_pk, mat_mul, matrix_derivation,
                   matrix_min_valuation, matrix_sigma, p_valuation,
                   padic_digits, series_inverse)
from .laurent import (LaurentPoly, Polytope, coeff, dilate, lattice_points,
                      newton_polytope, parse_poly, poly_from_json,
                      poly_to_json, pow_reduced)
from .hwmatrix import (CongruenceReport, HWContext, LimitResult,
                       beta_sequence_exact, connection_limit,
                       delta_polynomials_exact, frobenius_limit,
                       gamma_matrices, horizontal_frame, matrix_to_json,
                       verify_beta_decomposition, verify_derivation_frobenius,
                       verify_frame_factorization, verify_logderiv_congruence,
                       verify_product_congruence, verify_ratio_congruence)
from .fgl import (SeriesTuple, TruncatedSeries, check_fgl_axioms,
                  check_integrality, compose, denominator_primes,
                  functional_equation_witness, group_law,
                  group_law_from_betas, invert_series, logarithm)
from .zeta import (ExtField, ZetaNumerator, asd_check, charpoly_hw_modp,
                   count_points, divides_mod, factor_quadratic_pair,
                   hensel_unit_roots, hyperelliptic_point_counts,
                   rank_mod_p, reverse_poly, unit_part_degree,
                   unit_root_factor, verify_charpoly_divides,
                   verify_unit_eigenvalue_match, zeta_numerator_genus1,
                   zeta_numerator_genus2)
from .corpus import CorpusEntry, generate_corpus, param_variant

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
