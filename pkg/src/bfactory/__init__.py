"""Multivariate linear Bernoulli factories.

Given coins with unknown biases p_1..p_k that can only be flipped, and known
constants C_1..C_k, the factories here emit a single exact Bernoulli draw
whose mean is a prescribed function of r = C_1 p_1 + ... + C_k p_k — most
importantly Bernoulli(r) itself.  The package pairs the algorithms with
closed-form oracles for their output laws and expected flip costs, and a
Monte Carlo harness that verifies one against the other.
"""

from .coins import CoinEnsemble, CoinSource, FlipLedger
from .factories import (Budget, BudgetExceededError, FactoryParams,
                        InvocationStats, high_power_logistic_factory,
                        linear_factory, linear_params, logistic_factory,
                        residual_factory, small_r_factory,
                        walk_to_zero_factory)
from .harness import (TrialSummary, Verdict, bind_factory, judge,
                      proportion_z, run_trials, run_trials_with,
                      wilson_interval)
from .oracle import (FactoryKind, FlipBound, PreconditionError,
                     absorption_probability, equivalent_flip_lower_bound,
                     exact_output_mean, expected_absorption_time,
                     expected_flip_bound, geometric_sum)
from .rng import AliasTable, RngStream, build_alias_table

__version__ = "0.1.0"

__all__ = [
    "AliasTable", "Budget", "BudgetExceededError", "CoinEnsemble",
    "CoinSource", "FactoryKind", "FactoryParams", "FlipBound", "FlipLedger",
    "InvocationStats", "PreconditionError", "RngStream", "TrialSummary",
    "Verdict", "absorption_probability", "bind_factory", "build_alias_table",
    "equivalent_flip_lower_bound", "exact_output_mean",
    "expected_absorption_time", "expected_flip_bound", "geometric_sum",
    "high_power_logistic_factory", "judge", "linear_factory", "linear_params",
    "logistic_factory", "proportion_z", "residual_factory", "run_trials",
    "run_trials_with", "small_r_factory", "walk_to_zero_factory",
    "wilson_interval",
]
