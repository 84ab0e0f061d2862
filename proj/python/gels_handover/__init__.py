"""Hysteresis handover simulation and optimization (C++ core)."""

from ._core import (
    ConfigError,
    NumericalError,
    accuracy_study,
    approx1,
    approx2_bounds,
    approx3_upper,
    config,
    decide,
    exact_prob,
    handover_probabilities,
    ls_fit,
    optimal_profile,
    simulate,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "accuracy_study",
    "approx1",
    "approx2_bounds",
    "approx3_upper",
    "config",
    "decide",
    "exact_prob",
    "handover_probabilities",
    "ls_fit",
    "optimal_profile",
    "simulate",
]
