"""B-localizability of cellular-connected UAVs by Monte Carlo simulation."""

from uavloc.channel import (
    ChannelParams,
    LinkState,
    los_probability,
    path_loss_los,
    path_loss_nlos,
    sample_link,
    shadowing_std,
)
from uavloc.errors import ConfigError, DomainError
from uavloc.geometry import (
    NetworkLayout,
    UavPosition,
    build_hex_layout,
    link_distances,
    sample_uav_position,
)
from uavloc.localizability import (
    GainResult,
    LocalizabilityCurve,
    SimConfig,
    estimate_pb,
    psi,
    required_processing_gain,
    sweep_pb,
)
from uavloc.sinr import (
    ActivityDraw,
    RadioParams,
    RankedSnapshot,
    draw_activity,
    noise_power,
    rank_by_mean_power,
    sinr_for_target,
)

__version__ = "0.1.0"
