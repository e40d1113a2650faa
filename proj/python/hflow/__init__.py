"""Harmonic power flow and quasi-static time-series engine."""

from ._hflow import (
    HflowError,
    eddy_current_loss,
    extract_spectrum,
    frequency_scan,
    resonant_frequency,
    run_cli,
    synthesize_waveform,
    thd,
)

__all__ = [
    "HflowError",
    "eddy_current_loss",
    "extract_spectrum",
    "frequency_scan",
    "resonant_frequency",
    "run_cli",
    "synthesize_waveform",
    "thd",
]
