"""Weighted Lasso estimation for additive hazard rates on right-censored
data, plus Monte Carlo harnesses that audit the estimator's finite-sample
guarantees (slow and fast oracle inequalities, data-driven deviation
bound for the martingale noise).

The numerical core (coordinate descent sweeps) prefers a compiled kernel
and falls back to a pure-Python twin with identical arithmetic; see
``hazlasso.solver.active_kernel()``.
"""

from .bernstein import (
    PAPER_NUMERIC,
    PRESETS,
    BernsteinConstants,
    BernsteinReport,
    bound_empirical,
    classical_bound,
    noise_process_terminal,
    run_mc,
    wilson_interval,
    zeta,
)
from .dictionary import DictionaryMatrix, linear_dictionary, load_dictionary, sup_norms
from .errors import ConfigError, DataValidationError, HazLassoError
from .gram import (
    GramSystem,
    build_gram,
    cross_products,
    dump_gram,
    empirical_inner_fn,
    empirical_norm_sq,
    empirical_norm_sq_fn,
    objective,
)
from .oracle import (
    ConeSearchResult,
    OracleReport,
    fast_oracle_check,
    guarantee_level,
    identity_gram_check,
    mu3_search,
    re_constant,
    run_oracle_mc,
    slow_oracle_check,
)
from .simulate import (
    SimulatedTruth,
    SimulationConfig,
    default_config,
    load_config,
    noise_vector,
    predictable_variation,
    simulate,
)
from .solver import LassoFit, active_kernel, fit, fit_path, kkt_check
from .survival import (
    RiskSetTimeline,
    StepFunction,
    SurvivalDataset,
    build_timeline,
    check_orthogonality,
    integrate_product,
    load_dataset,
    risk_set_mean,
    write_dataset,
)
from .weights import DEFAULT_X, WeightVector, compute_weights, empirical_variance

__version__ = "0.1.0"

__all__ = [
    "BernsteinConstants",
    "BernsteinReport",
    "ConeSearchResult",
    "ConfigError",
    "DEFAULT_X",
    "DataValidationError",
    "DictionaryMatrix",
    "GramSystem",
    "HazLassoError",
    "LassoFit",
    "OracleReport",
    "PAPER_NUMERIC",
    "PRESETS",
    "RiskSetTimeline",
    "SimulatedTruth",
    "SimulationConfig",
    "StepFunction",
    "SurvivalDataset",
    "WeightVector",
    "active_kernel",
    "bound_empirical",
    "build_gram",
    "build_timeline",
    "check_orthogonality",
    "classical_bound",
    "compute_weights",
    "cross_products",
    "default_config",
    "dump_gram",
    "empirical_inner_fn",
    "empirical_norm_sq",
    "empirical_norm_sq_fn",
    "empirical_variance",
    "fast_oracle_check",
    "fit",
    "fit_path",
    "guarantee_level",
    "identity_gram_check",
    "integrate_product",
    "kkt_check",
    "linear_dictionary",
    "load_config",
    "load_dataset",
    "load_dictionary",
    "mu3_search",
    "noise_process_terminal",
    "noise_vector",
    "objective",
    "predictable_variation",
    "re_constant",
    "risk_set_mean",
    "run_mc",
    "run_oracle_mc",
    "simulate",
    "slow_oracle_check",
    "sup_norms",
    "wilson_interval",
    "write_dataset",
    "zeta",
]
