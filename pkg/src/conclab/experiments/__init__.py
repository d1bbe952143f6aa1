"""Monte Carlo experiments comparing empirical tails with certified bounds."""
from .checks import (run_curvature_check, run_moment_check, run_resolvent_suite, run_semicircle_check,
                     semicircle_grid)
from .matrix import (run_local_law, run_max_weight_tails, run_sudakov_pointwise, run_sudakov_tails,
                     weighted_stieltjes)
from .results import (LocalLawResult, TailExperimentResult, dumps_json, empirical_tail, isotonic_tail,
                      parallel_map, resolve_threads, rows_to_csv, tail_result)
from .sphere import (LIPSCHITZ_FUNCTIONS, SMOOTH_FUNCTIONS, ElementaryPolynomial, LsqCheckResult,
                     PolynomialResult, entropy_estimate, lipschitz_function, polynomial_exchangeability,
                     polynomial_std_scaling, run_hanson_wright, run_lipschitz_tails, run_lsq_empirical,
                     run_polynomial_tails, smooth_function)
from .symmetric import (FAMILIES, EdgeworthResult, SymmetricFunctionFamily, check_family_properties,
                        cos_rademacher_family, monte_carlo_family, quartic_rademacher_family,
                        run_edgeworth, run_symmetric_tails)

__all__ = [
    "run_curvature_check", "run_moment_check", "run_resolvent_suite", "run_semicircle_check",
    "semicircle_grid", "run_local_law", "run_max_weight_tails", "run_sudakov_pointwise",
    "run_sudakov_tails", "weighted_stieltjes", "LocalLawResult", "TailExperimentResult", "dumps_json",
    "empirical_tail", "isotonic_tail", "parallel_map", "resolve_threads", "rows_to_csv", "tail_result",
    "LIPSCHITZ_FUNCTIONS", "SMOOTH_FUNCTIONS", "ElementaryPolynomial", "LsqCheckResult",
    "PolynomialResult", "entropy_estimate", "lipschitz_function", "polynomial_exchangeability",
    "polynomial_std_scaling", "run_hanson_wright", "run_lipschitz_tails", "run_lsq_empirical",
    "run_polynomial_tails", "smooth_function", "FAMILIES", "EdgeworthResult", "SymmetricFunctionFamily",
    "check_family_properties", "cos_rademacher_family", "monte_carlo_family",
    "quartic_rademacher_family", "run_edgeworth", "run_symmetric_tails",
]
