"""Smart pilot assignment for multi-cell massive MIMO uplinks."""

from .airlink import (
    ChannelEstimates,
    PilotBook,
    SinrReport,
    asymptotic_sinr,
    capacity,
    dft_pilots,
    estimate_channels,
    finite_m_sinr,
    pair_sinr_matrix,
    residual_power,
)
from .assignment import (
    AssignmentMetrics,
    conventional,
    exhaustive_p,
    exhaustive_pprime,
    metrics,
    random_assignment,
    sequential_iterate,
    spa,
)
from .errors import ConfigurationError, DimensionError, ExhaustiveLimitError
from .experiment import Scenario, convergence_trace, run_experiment, run_trial
from .fading import ChannelSet, SystemConfig, draw_channels, large_scale
from .geometry import CellularLayout, UserDrop, build_hex_layout, distances, drop_users

__version__ = "0.1.0"
