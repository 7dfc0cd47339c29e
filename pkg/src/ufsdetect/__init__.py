"""Pilot contamination attack detection with uncoordinated frequency shifts.

Bob splits his training sequence into segments and applies an independent
random frequency offset in each. A single-user receiver undoes the offset
with an ML CFO estimate, while an attacker who replays the public pilot
cannot match the random offsets and shows up as an extra source in the
per-segment sample autocorrelation.
"""
from .analytics import (
    Bound,
    MissBoundInput,
    first_order_channel_mse,
    lemma1_cfo_mse,
    lemma1_channel_mse,
    miss_prob_bound,
    miss_prob_lower_bound,
    pilot_correlation_det,
    power_threshold,
    rho,
    sync_benchmark_mse,
)
from .detection import DetectionOutcome, SegmentSpectrum, detect_attack, estimate_subspace_dim, mdl_score
from .errors import InvalidParameterError, NumericalFailure, UnsupportedConfigurationError
from .estimation import CfoEstimate, GridSearchConfig, estimate_cfo, estimate_channel
from .montecarlo import ExperimentConfig, SweepResult, run_sweep, wilson_interval
from .rng import RngStream
from .signal_model import ReceivedTraining, TrainingScenario, synthesize_received
from .srs import SrsConfig

__version__ = "0.1.0"
