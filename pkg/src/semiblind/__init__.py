"""Semi-blind MIMO-OFDM channel estimation: LMS training plus decision-directed
or adaptive-Bussgang blind refinement, with Monte Carlo tooling, an HTTP
service, and a CLI."""

__version__ = "0.1.0"

from .channel import ChannelTaps, FadingParams, apply_channel, evolve_taps, gen_taps
from .detector import BPSK, QPSK, Modulation, get_modulation, hard_detect
from .estimator import (BlindMode, EstimatorState, init_state, ls_estimate,
                        run_frame)
from .harness import (MODES, AggregateRow, ConfigError, MetricsRecord,
                      SimConfig, aggregate, channel_mse, csv_text, run_scenario,
                      run_sweep, self_check, write_csv)
from .ofdm import OfdmFrame, demodulate, freq_response, modulate

__all__ = [
    "__version__",
    "ChannelTaps", "FadingParams", "apply_channel", "evolve_taps", "gen_taps",
    "BPSK", "QPSK", "Modulation", "get_modulation", "hard_detect",
    "BlindMode", "EstimatorState", "init_state", "ls_estimate", "run_frame",
    "MODES", "AggregateRow", "ConfigError", "MetricsRecord", "SimConfig",
    "aggregate", "channel_mse", "csv_text", "run_scenario", "run_sweep",
    "self_check", "write_csv",
    "OfdmFrame", "demodulate", "freq_response", "modulate",
]
