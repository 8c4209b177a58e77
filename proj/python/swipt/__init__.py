"""Power allocation for SWIPT OFDMA uplink/downlink systems."""

from ._core import (
    ConfigError,
    SolverError,
    generate,
    optimize,
    oracle_check,
    preset_names,
    simulate_lifetime,
    solve_at_rho,
    sweep_csv,
    water_fill,
)

__all__ = [
    "ConfigError",
    "SolverError",
    "generate",
    "optimize",
    "oracle_check",
    "preset_names",
    "simulate_lifetime",
    "solve_at_rho",
    "sweep_csv",
    "water_fill",
]
