"""Kerr nonlinearity of Rydberg excitons: forward model and interferometric analysis."""

from ._rydkerr import (
    BlockadeVariant,
    Config,
    FitResult,
    chi1,
    chi3,
    default_config,
    demodulate_phase,
    exciton_energy,
    extract_n2,
    extract_phase_curve,
    fit_powerlaw,
    fit_saturable,
    kerr_coefficient,
    linear_absorption,
    load_config,
    oscillator_strength,
    parse_config,
    phase_shift,
    run_cli,
    saturable_model,
    saturation_intensity,
    transmission,
    unwrap_phase,
)

__all__ = [
    "BlockadeVariant",
    "Config",
    "FitResult",
    "chi1",
    "chi3",
    "default_config",
    "demodulate_phase",
    "exciton_energy",
    "extract_n2",
    "extract_phase_curve",
    "fit_powerlaw",
    "fit_saturable",
    "kerr_coefficient",
    "linear_absorption",
    "load_config",
    "oscillator_strength",
    "parse_config",
    "phase_shift",
    "run_cli",
    "saturable_model",
    "saturation_intensity",
    "transmission",
    "unwrap_phase",
]
