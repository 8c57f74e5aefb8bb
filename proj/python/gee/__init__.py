"""Python bindings for the gee identity-testing toolkit."""

from ._gee import (
    GeeError,
    __version__,
    biuniform_worst_case,
    chi_square_functional,
    equalizing_tau,
    estimate_errors,
    estimate_exponent,
    evaluate,
    exact_distribution,
    exact_error_probs,
    exact_expectation,
    f_divergence,
    jf_star,
    jm_star,
    kappa_bar,
    occupancy,
    rate_function,
    region_curve,
    sweep,
    threshold,
    tv_distance,
    uniform,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
