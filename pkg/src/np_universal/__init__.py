"""Discrete-alphabet Neyman-Pearson classification toolkit.

Universal and baseline classifiers on empirical types, error-exponent
solvers, critical training-ratio bounds, sequential tests, and a
reproducible Monte Carlo experiment harness.
"""

from .distributions import (
    Distribution,
    EmpiricalType,
    RandomStream,
    Sample,
    empirical_type,
    gjs_divergence,
    kl_divergence,
    perturb_type,
    renyi_divergence,
    sample_iid,
    tilted_geometric,
)
from .errors import BudgetError, ConfigError, DomainError
from .exponents import (
    TiltSolution,
    TradeoffPoint,
    alpha_star_numeric,
    mismatched_exponent,
    optimal_tradeoff,
    r_critical,
    solve_tilt_hyperplane,
    solve_tilt_radius,
    stein_exponents,
    threshold_gamma,
    worst_case_exponent,
)
from .bounds import (
    AlphaBounds,
    SymmetricMatrix,
    alpha_bounds,
    alpha_lower,
    alpha_lower_simplified,
    alpha_upper,
    hessian_matrix,
    jacobi_eigenvalues,
    min_eigen_symmetric,
)
from .classifiers import (
    Decision,
    ErrorPair,
    FixedClassifierConfig,
    Rule,
    compositions,
    exact_error_probs,
    glrt_decide,
    gutman_decide,
    interp_decide,
    lrt_decide,
    make_rule,
)
from .sequential import (
    ArraySource,
    IIDStream,
    SequentialConfig,
    SequentialOutcome,
    SequentialResult,
    seq_classifier_run,
    seq_simulate,
    sprt_run,
)
from .simulation import (
    ExperimentConfig,
    ExperimentResult,
    RuleSeriesPoint,
    prefactor_diagnostic,
    result_to_csv,
    run_alpha_sweep,
    run_fixed_experiment,
    sweep_to_csv,
)
from .special import chi2_quantile, clopper_pearson_upper

__version__ = "0.1.0"
