"""Massive MIMO link-level simulation with per-element embedded antenna gains."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ArrayGainError,
    ConfigError,
    DegenerateChannelError,
    PatternTableError,
    ValidationError,
)
from .geometry import ArrayGeometry, Direction, element_positions, steering_vector  # noqa: E402
from .patterns import (  # noqa: E402
    SyntheticPattern,
    TabulatedPattern,
    UniformPattern,
    builtin_pattern,
    gain_amplitudes,
    load_pattern_table,
    synthesize_pattern,
)
from .channel import ClusterSpec, UserSpec, apply_uplink, los_channel, multipath_channel  # noqa: E402
from .detectors import (  # noqa: E402
    ergodic_rate,
    instantaneous_rates,
    mrc_sinr,
    pairwise_sir,
    zf_power_bound,
    zf_sinr,
)
from .linkbudget import LinkBudget, budget_breakdown, free_space_factor, friis_received_power  # noqa: E402
from .experiment import ScenarioConfig, emit_results, load_config, run_scenario  # noqa: E402
