"""Robust adaptive beamforming for a two-ring flexible conformal array."""

from ._core import (
    METHODS,
    ConfigError,
    DomainError,
    NumericalError,
    ParseError,
    capon_weights,
    example_scenario,
    noise_power_estimate,
    run,
    sinr_csv,
    solve_p1,
    steering_vector,
    validate_scenario,
)

__all__ = [
    "METHODS",
    "ConfigError",
    "DomainError",
    "NumericalError",
    "ParseError",
    "capon_weights",
    "example_scenario",
    "noise_power_estimate",
    "run",
    "sinr_csv",
    "solve_p1",
    "steering_vector",
    "validate_scenario",
]
