"""SINR of each localization signal under the participating/non-participating split.

Power arithmetic is done in linear milliwatts; dBm and dB appear only at
the interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from uavloc.channel import LinkState
from uavloc.errors import ConfigError

THERMAL_NOISE_DBM_PER_HZ = -174.0


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(lin)


def noise_power(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Thermal noise power in dBm over ``bandwidth_hz`` for a receiver noise figure."""
    if not bandwidth_hz > 0:
        raise ConfigError(f"radio.bandwidth_hz must be positive, got {bandwidth_hz!r}")
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


@dataclass(frozen=True)
class RadioParams:
    tx_power_dbm: float = 46.0
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 9.0

    @property
    def noise_power_dbm(self) -> float:
        return float(noise_power(self.bandwidth_hz, self.noise_figure_db))

    @property
    def noise_power_mw(self) -> float:
        return float(db_to_linear(self.noise_power_dbm))


@dataclass(frozen=True)
class ActivityDraw:
    """Transmit indicators of the other BSs while one localization signal is sent.

    ``r[k]`` belongs to the k-th participating BS and ``s[j]`` to the j-th
    non-participating one, both in rank order.
    """

    r: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class RankedSnapshot:
    links: tuple[LinkState, ...]
    order: np.ndarray

    @property
    def n_sites(self) -> int:
        return len(self.links)

    def rx_power_mw(self, radio: RadioParams) -> np.ndarray:
        """Received powers (shadowing included) in rank order."""
        rx_dbm = [radio.tx_power_dbm - link.path_loss_db + link.shadowing_db for link in self.links]
        return db_to_linear(np.asarray(rx_dbm)[self.order])


def rank_by_mean_power(links, radio: RadioParams) -> RankedSnapshot:
    """Order BSs by received power without shadowing, strongest first.

    Ties keep the lower BS index first.
    """
    links = tuple(links)
    if not links:
        raise ValueError("need at least one link")
    mean_rx = np.array([radio.tx_power_dbm - link.path_loss_db for link in links])
    order = np.argsort(-mean_rx, kind="stable")
    return RankedSnapshot(links=links, order=order)


def _check_activity_params(b, t, p, q):
    if not 1 <= b <= t:
        raise ConfigError(f"B must be in [1, {t}], got {b!r}")
    for name, value in (("p", p), ("q", q)):
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{name} must be in [0, 1], got {value!r}")


def draw_activity(b: int, t: int, p: float, q: float, rng: np.random.Generator) -> ActivityDraw:
    """Bernoulli(p) indicators for the ``b`` participants, Bernoulli(q) for the rest.

    Consumes exactly ``t`` uniforms, thresholded against ``p`` or ``q``, so
    the same stream gives coupled draws for different activity factors.
    """
    _check_activity_params(b, t, p, q)
    u = rng.random(t)
    return ActivityDraw(r=u[:b] < p, s=u[b:] < q)


def sinr_for_target(
    target_rank: int,
    b: int,
    snapshot: RankedSnapshot,
    activity: ActivityDraw,
    radio: RadioParams,
) -> float:
    """Linear SINR of the ``target_rank``-th strongest BS (1-based) with ``b`` participants."""
    t = snapshot.n_sites
    if not 1 <= b <= t:
        raise ValueError(f"B must be in [1, {t}], got {b}")
    if not 1 <= target_rank <= b:
        raise ValueError(f"target rank must be in [1, {b}], got {target_rank}")
    if len(activity.r) != b or len(activity.s) != t - b:
        raise ValueError("activity draw does not match B and T")
    rx = snapshot.rx_power_mw(radio)
    i = target_rank - 1
    participating = activity.r.astype(float)
    participating[i] = 0.0
    i1 = float(np.dot(participating, rx[:b]))
    i2 = float(np.dot(activity.s.astype(float), rx[b:])) if b < t else 0.0
    return float(rx[i] / (i1 + i2 + radio.noise_power_mw))


def critical_sinr_db(rx_mw: np.ndarray, noise_mw: float, p: float, q: float, rng: np.random.Generator):
    """Worst SINR among the top-B signals, for every B, over a batch of snapshots.

    ``rx_mw`` has shape ``(n, T)`` with columns in rank order. Entry
    ``[n, B-1]`` of the result is ``min_i SINR_i(B)`` in dB, so all B
    signals clear a threshold ``alpha`` exactly when it is ``>= alpha``.

    Activity is drawn afresh for every (target, B) pair. For each B the
    stream yields a ``(n, B, T)`` block of uniforms; with ``n == 1`` this is
    the same sequence of :func:`draw_activity` calls made target by target.
    When ``p`` and ``q`` are both 0 or 1 the outcome does not depend on the
    uniforms and none are drawn.
    """
    rx_mw = np.asarray(rx_mw, dtype=float)
    n, t = rx_mw.shape
    _check_activity_params(1, t, p, q)
    deterministic = p in (0.0, 1.0) and q in (0.0, 1.0)
    crit = np.empty((n, t))
    for b in range(1, t + 1):
        thresh = np.where(np.arange(t) < b, p, q)
        if deterministic:
            active = np.broadcast_to(thresh >= 1.0, (n, b, t)).copy()
        else:
            active = rng.random((n, b, t)) < thresh
        idx = np.arange(b)
        active[:, idx, idx] = False
        interference = np.einsum("nbt,nt->nb", active.astype(float), rx_mw)
        sinr = rx_mw[:, :b] / (interference + noise_mw)
        crit[:, b - 1] = sinr.min(axis=1)
    return linear_to_db(crit)
