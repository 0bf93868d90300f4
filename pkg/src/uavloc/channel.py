"""3GPP UMa-AV air-to-ground channel: LOS probability, path loss, shadowing.

All functions accept scalars or numpy arrays. Distances are in metres, the
carrier frequency in GHz and losses in dB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from uavloc.errors import DomainError


@dataclass(frozen=True)
class ChannelParams:
    fc_ghz: float = 2.0
    los_shadow_std_a_db: float = 4.64
    los_shadow_std_b_per_m: float = 0.0066
    nlos_shadow_std_db: float = 6.0

    def __post_init__(self):
        if not self.fc_ghz > 0:
            raise DomainError(f"channel.fc_ghz must be positive, got {self.fc_ghz!r}")
        for name in ("los_shadow_std_a_db", "los_shadow_std_b_per_m", "nlos_shadow_std_db"):
            if getattr(self, name) < 0:
                raise DomainError(f"channel.{name} must be non-negative")


@dataclass(frozen=True)
class LinkState:
    d2d: float
    d3d: float
    los: bool
    path_loss_db: float
    shadowing_db: float


def _finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def los_breakpoint(h_ut):
    """Distance ``d1`` below which the link is always LOS."""
    return np.maximum(460.0 * np.log10(h_ut) - 700.0, 18.0)


def los_decay(h_ut):
    """Exponential decay length ``p1`` of the LOS probability."""
    return 4300.0 * np.log10(h_ut) - 3800.0


def los_probability(d2d, h_ut):
    """Probability of a LOS link at ground distance ``d2d`` for UAV altitude ``h_ut``.

    No clamp is applied above 100 m; the same expression is used up to 120 m.
    """
    d2d = _finite("d2d", d2d)
    h_ut = _finite("h_ut", h_ut)
    if np.any(d2d < 0):
        raise DomainError("d2d must be non-negative")
    if np.any(h_ut <= 0):
        raise DomainError("h_ut must be positive")
    d1 = los_breakpoint(h_ut)
    p1 = los_decay(h_ut)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = d1 / d2d
        far = ratio + np.exp(-d2d / p1) * (1.0 - ratio)
    prob = np.where(d2d <= d1, 1.0, far)
    return _scalar_or_array(np.clip(prob, 0.0, 1.0))


def path_loss_los(d3d, fc_ghz):
    d3d = _finite("d3d", d3d)
    if np.any(d3d < 1.0):
        raise DomainError("d3d must be at least 1 m")
    if not np.all(np.asarray(fc_ghz) > 0):
        raise DomainError("fc_ghz must be positive")
    return _scalar_or_array(28.0 + 22.0 * np.log10(d3d) + 20.0 * np.log10(fc_ghz))


def path_loss_nlos(d3d, h_ut, fc_ghz):
    d3d = _finite("d3d", d3d)
    h_ut = _finite("h_ut", h_ut)
    if np.any(d3d < 1.0):
        raise DomainError("d3d must be at least 1 m")
    if np.any(h_ut <= 1.0):
        raise DomainError("h_ut must exceed 1 m")
    if not np.all(np.asarray(fc_ghz) > 0):
        raise DomainError("fc_ghz must be positive")
    loss = (
        -17.5
        + (46.0 - 7.0 * np.log10(h_ut)) * np.log10(d3d)
        + 20.0 * np.log10(40.0 * np.pi * fc_ghz / 3.0)
    )
    return _scalar_or_array(loss)


def shadowing_std(h_ut, los, params: ChannelParams = ChannelParams()):
    """Shadow-fading standard deviation in dB (the altitude law applies to LOS only)."""
    h_ut = np.asarray(h_ut, dtype=float)
    los_std = params.los_shadow_std_a_db * np.exp(-params.los_shadow_std_b_per_m * h_ut)
    return _scalar_or_array(np.where(los, los_std, params.nlos_shadow_std_db))


def path_loss(d3d, h_ut, los, fc_ghz):
    """Path loss for a given LOS/NLOS condition (array-friendly)."""
    return np.where(los, path_loss_los(d3d, fc_ghz), path_loss_nlos(d3d, h_ut, fc_ghz))


def sample_link(d2d, d3d, h_ut, params: ChannelParams, rng: np.random.Generator) -> LinkState:
    """Draw the LOS state and shadowing of one UAV-BS link.

    Consumes one uniform (LOS) and then one standard normal (shadowing).
    """
    p_los = los_probability(d2d, h_ut)
    los = bool(rng.random() < p_los)
    loss = path_loss_los(d3d, params.fc_ghz) if los else path_loss_nlos(d3d, h_ut, params.fc_ghz)
    shadow = rng.standard_normal() * shadowing_std(h_ut, los, params)
    return LinkState(float(d2d), float(d3d), los, float(loss), float(shadow))
