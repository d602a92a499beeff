"""Max-min allocation with one shared monotone submodular valuation.

Everything is exact: values are :class:`fractions.Fraction`, item sets are
bit masks internally, and LPs are solved by a rational simplex.
"""
from .configlp import (CertificateInvalid, DualCertificate, PrimalFeasible, PrimalInfeasible,
                       build_certificate_thm3, build_certificate_thm8, decide_configuration_lp,
                       greedy_pricing_heuristic, integrality_gap, lp_opt, solve_covering_lp,
                       verify_certificate, verify_primal_witness)
from .exact import BudgetExceeded, enumerate_configurations, opt_maxmin, opt_truncated_maxsum
from .greedy import (LEXICOGRAPHIC, ByPermutation, Lexicographic, TieBreakPolicy,
                     greedy_cardinality, greedy_with_threshold, preprocess_big_items,
                     solve_approx)
from .instances import (gen_gap_instance, gen_random, gen_sylvester_additive,
                        lift_to_submodular)
from .matroids import (DownwardClosed, Explicit, Partition, Uniform, is_common_independent,
                       is_independent)
from .model import Allocation, Instance
from .valuation import (Additive, Augmented, Coverage, DisjointSum, Table, Truncated,
                        check_submodular_monotone, evaluate, marginal, marginal_set,
                        parse_value, remove_marginal, render_value)

__all__ = [
    "CertificateInvalid", "DualCertificate", "PrimalFeasible", "PrimalInfeasible",
    "build_certificate_thm3", "build_certificate_thm8", "decide_configuration_lp",
    "greedy_pricing_heuristic", "integrality_gap", "lp_opt", "solve_covering_lp",
    "verify_certificate", "verify_primal_witness", "BudgetExceeded",
    "enumerate_configurations", "opt_maxmin", "opt_truncated_maxsum", "LEXICOGRAPHIC",
    "ByPermutation", "Lexicographic", "TieBreakPolicy", "greedy_cardinality",
    "greedy_with_threshold", "preprocess_big_items", "solve_approx", "gen_gap_instance",
    "gen_random", "gen_sylvester_additive", "lift_to_submodular", "DownwardClosed", "Explicit",
    "Partition", "Uniform", "is_common_independent", "is_independent", "Allocation",
    "Instance", "Additive", "Augmented", "Coverage", "DisjointSum", "Table", "Truncated",
    "check_submodular_monotone", "evaluate", "marginal", "marginal_set", "parse_value",
    "remove_marginal", "render_value",
]

__version__ = "0.1.0"
