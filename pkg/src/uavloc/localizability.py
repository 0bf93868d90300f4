"""Monte Carlo estimation of B-localizability and the processing-gain solver.

Snapshots are simulated in fixed-size blocks. Block ``k`` draws from a
Philox stream keyed by ``(seed, k)``, so results depend only on the config
and seed, never on how blocks are spread over workers. Within a block the
stream is consumed in a fixed order (UAV positions, LOS uniforms, shadowing
normals, activity uniforms) that does not depend on ``alpha``, ``p`` or
``q``; sweeps over those parameters therefore share common random numbers.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from uavloc.channel import ChannelParams, los_probability, path_loss, sample_link, shadowing_std
from uavloc.errors import ConfigError
from uavloc.geometry import (
    NetworkLayout,
    build_hex_layout,
    link_distances,
    sample_uav_position,
    sample_uav_positions,
)
from uavloc.sinr import (
    RadioParams,
    RankedSnapshot,
    critical_sinr_db,
    db_to_linear,
    draw_activity,
    rank_by_mean_power,
    sinr_for_target,
)

BLOCK_SIZE = 1000
WILSON_Z = 1.959963984540054
ALPHA_SEARCH_RANGE = (-60.0, 0.0)
ALPHA_TOLERANCE_DB = 0.1

SWEEP_FIELDS = {"alpha": "alpha_db", "h_ut": "h_ut_m", "p": "p", "q": "q"}


@dataclass(frozen=True)
class SimConfig:
    isd_m: float = 500.0
    tiers: int = 2
    h_bs_m: float = 25.0
    channel: ChannelParams = field(default_factory=ChannelParams)
    radio: RadioParams = field(default_factory=RadioParams)
    h_ut_m: float = 30.0
    alpha_db: float = -16.0
    p: float = 1.0
    q: float = 1.0
    b_max: int | None = None
    n_snapshots: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.tiers not in (0, 1, 2):
            raise ConfigError(f"layout.tiers must be 0, 1 or 2, got {self.tiers!r}")
        if not self.isd_m > 0:
            raise ConfigError(f"layout.isd_m must be positive, got {self.isd_m!r}")
        if not self.h_ut_m > 1:
            raise ConfigError(f"sim.h_ut_m must exceed 1 m, got {self.h_ut_m!r}")
        if not math.isfinite(self.alpha_db):
            raise ConfigError("sim.alpha_db must be finite")
        for name in ("p", "q"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"sim.{name} must be in [0, 1], got {getattr(self, name)!r}")
        if int(self.n_snapshots) != self.n_snapshots or self.n_snapshots < 1:
            raise ConfigError(f"sim.n_snapshots must be a positive integer, got {self.n_snapshots!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"sim.seed must fit in 64 bits, got {self.seed!r}")
        if self.b_max is not None and not 1 <= self.b_max <= self.n_sites:
            raise ConfigError(f"sim.b_max must be in [1, {self.n_sites}], got {self.b_max!r}")

    @property
    def n_sites(self) -> int:
        return 1 + 3 * self.tiers * (self.tiers + 1)

    def layout(self) -> NetworkLayout:
        return build_hex_layout(self.isd_m, self.tiers, self.h_bs_m)

    def replace(self, **changes) -> SimConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class LocalizabilityCurve:
    """``pb[v, b]`` estimates P(Psi >= b_list[b]) at ``values[v]`` of ``param``."""

    param: str
    values: list
    b_list: list[int]
    pb: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_snapshots: int
    seed: int
    configs: list[SimConfig]

    @property
    def ci_half_width(self) -> np.ndarray:
        return (self.ci_high - self.ci_low) / 2.0

    def at(self, value, b: int) -> float:
        return float(self.pb[self.values.index(value), self.b_list.index(b)])

    def rows(self):
        for v, cfg in enumerate(self.configs):
            for j, b in enumerate(self.b_list):
                yield {
                    "alpha_db": cfg.alpha_db,
                    "h_ut_m": cfg.h_ut_m,
                    "B": b,
                    "p": cfg.p,
                    "q": cfg.q,
                    "pb": float(self.pb[v, j]),
                    "ci_low": float(self.ci_low[v, j]),
                    "ci_high": float(self.ci_high[v, j]),
                    "n_snapshots": self.n_snapshots,
                }


@dataclass(frozen=True)
class GainResult:
    """Outcome of the gain solver; ``alpha_star_db`` is None when no solution exists."""

    b: int
    beta_db: float
    target_pb: float
    alpha_star_db: float | None
    gamma_db: float | None
    message: str = ""

    @property
    def found(self) -> bool:
        return self.alpha_star_db is not None


def wilson_interval(successes, n: int, z: float = WILSON_Z):
    """Wilson score interval for a binomial proportion."""
    successes = np.asarray(successes, dtype=float)
    phat = successes / n
    denom = 1.0 + z**2 / n
    centre = (phat + z**2 / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z**2 / (4 * n**2)) / denom
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def draw_channels(config: SimConfig, layout: NetworkLayout, count: int, rng: np.random.Generator):
    """Positions, LOS flags, path losses and shadowing (dB) for ``count`` snapshots."""
    h = config.h_ut_m
    t = layout.n_sites
    xy = sample_uav_positions(layout, count, rng)
    d2d, d3d = link_distances(layout, xy, h)
    los = rng.random((count, t)) < los_probability(d2d, h)
    loss = path_loss(d3d, h, los, config.channel.fc_ghz)
    shadow = rng.standard_normal((count, t)) * shadowing_std(h, los, config.channel)
    return xy, los, loss, shadow


def simulate_block(config: SimConfig, layout: NetworkLayout, block: int, count: int) -> np.ndarray:
    """Critical SINRs (see :func:`critical_sinr_db`) for ``count`` snapshots of one block."""
    rng = block_rng(config.seed, block)
    _, _, loss, shadow = draw_channels(config, layout, count, rng)
    # rank on mean power (no shadowing); equal tx power so this is ascending loss
    order = np.argsort(loss, axis=1, kind="stable")
    rx = db_to_linear(config.radio.tx_power_dbm - loss + shadow)
    rx = np.take_along_axis(rx, order, axis=1)
    return critical_sinr_db(rx, config.radio.noise_power_mw, config.p, config.q, rng)


def _run_block(args):
    return simulate_block(*args)


def simulate_critical(config: SimConfig, workers: int = 1, layout: NetworkLayout | None = None) -> np.ndarray:
    """Critical-SINR matrix of shape ``(n_snapshots, T)`` in dB.

    ``layout`` overrides the hexagonal layout built from the config (used for
    small test networks).
    """
    layout = layout if layout is not None else config.layout()
    n = config.n_snapshots
    jobs = [
        (config, layout, k, min(BLOCK_SIZE, n - k * BLOCK_SIZE))
        for k in range(math.ceil(n / BLOCK_SIZE))
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(job) for job in jobs]
    return np.concatenate(parts)


def psi_from_critical(crit: np.ndarray, alpha_db: float) -> np.ndarray:
    """Largest B whose top-B signals all clear ``alpha_db``; 0 when there is none.

    Every B is checked; the all-clear condition need not be monotone in B.
    """
    ok = crit >= alpha_db
    t = crit.shape[1]
    last = t - np.argmax(ok[:, ::-1], axis=1)
    return np.where(ok.any(axis=1), last, 0)


def pb_counts(crit: np.ndarray, alpha_db: float, b_list) -> np.ndarray:
    psi_values = psi_from_critical(crit, alpha_db)
    return np.array([np.count_nonzero(psi_values >= b) for b in b_list])


def _check_b_list(config: SimConfig, b_list):
    b_list = [int(b) for b in b_list]
    if not b_list:
        raise ConfigError("B list must be non-empty")
    limit = config.b_max if config.b_max is not None else config.n_sites
    for b in b_list:
        if not 1 <= b <= limit:
            raise ConfigError(f"B must be in [1, {limit}], got {b}")
    return b_list


def _curve(param, values, b_list, counts, config, configs):
    counts = np.asarray(counts, dtype=float).reshape(len(values), len(b_list))
    n = config.n_snapshots
    low, high = wilson_interval(counts, n)
    return LocalizabilityCurve(
        param=param,
        values=list(values),
        b_list=list(b_list),
        pb=counts / n,
        ci_low=low,
        ci_high=high,
        n_snapshots=n,
        seed=config.seed,
        configs=list(configs),
    )


def estimate_pb(config: SimConfig, b_list, workers: int = 1, layout: NetworkLayout | None = None):
    """P(Psi >= B) for each B in ``b_list`` at the config's threshold."""
    b_list = _check_b_list(config, b_list)
    crit = simulate_critical(config, workers, layout)
    return _curve("alpha", [config.alpha_db], b_list, pb_counts(crit, config.alpha_db, b_list), config, [config])


def sweep_pb(config: SimConfig, param: str, values, b_list, workers: int = 1) -> LocalizabilityCurve:
    """Sweep one of ``alpha``, ``h_ut``, ``p``, ``q`` or ``B``.

    All points use the same seed. An ``alpha`` sweep reuses one set of
    snapshots for every threshold.
    """
    values = list(values)
    if not values:
        raise ConfigError("sweep.values must be non-empty")
    if param == "B":
        return estimate_pb(config, values, workers)
    if param not in SWEEP_FIELDS:
        raise ConfigError(f"sweep.param must be one of alpha, h_ut, p, q, B; got {param!r}")
    b_list = _check_b_list(config, b_list)
    name = SWEEP_FIELDS[param]
    configs = [config.replace(**{name: float(v)}) for v in values]
    if param == "alpha":
        crit = simulate_critical(config, workers)
        counts = [pb_counts(crit, c.alpha_db, b_list) for c in configs]
    else:
        counts = [pb_counts(simulate_critical(c, workers), c.alpha_db, b_list) for c in configs]
    return _curve(param, values, b_list, counts, config, configs)


def solve_alpha(crit: np.ndarray, b: int, target_pb: float,
                search=ALPHA_SEARCH_RANGE, tol: float = ALPHA_TOLERANCE_DB):
    """Bisect for the threshold where the empirical P_B crosses ``target_pb``.

    Returns ``None`` when the crossing is not inside ``search``.
    """
    n = crit.shape[0]

    def pb(alpha):
        return np.count_nonzero(psi_from_critical(crit, alpha) >= b) / n

    lo, hi = search
    if pb(lo) < target_pb or pb(hi) >= target_pb:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pb(mid) >= target_pb:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def required_processing_gain(config: SimConfig, beta_db: float, target_pb: float, b: int,
                             workers: int = 1, crit: np.ndarray | None = None) -> GainResult:
    """Processing gain ``beta - alpha*`` (dB) so that P_B reaches ``target_pb``.

    The threshold search reuses one set of snapshots (``config.n_snapshots``)
    for every evaluation. A precomputed critical-SINR matrix may be passed to
    share snapshots across several B.
    """
    if not 0.0 < target_pb < 1.0:
        raise ConfigError(f"target_pb must be in (0, 1), got {target_pb!r}")
    (b,) = _check_b_list(config, [b])
    if crit is None:
        crit = simulate_critical(config, workers)
    alpha_star = solve_alpha(crit, b, target_pb)
    if alpha_star is None:
        lo, hi = ALPHA_SEARCH_RANGE
        return GainResult(b, beta_db, target_pb, None, None,
                          f"P_{b} = {target_pb} not reached for alpha in [{lo}, {hi}] dB")
    return GainResult(b, beta_db, target_pb, alpha_star, beta_db - alpha_star)


# Scalar reference path, one snapshot at a time.

def sample_snapshot(config: SimConfig, layout: NetworkLayout, rng: np.random.Generator):
    """One snapshot built link by link: ``(UavPosition, RankedSnapshot)``."""
    uav = sample_uav_position(layout, config.h_ut_m, rng)
    d2d, d3d = link_distances(layout, uav)
    links = [sample_link(a, b, config.h_ut_m, config.channel, rng) for a, b in zip(d2d, d3d)]
    return uav, rank_by_mean_power(links, config.radio)


def psi(snapshot: RankedSnapshot, alpha_db: float, p: float, q: float,
        radio: RadioParams, rng: np.random.Generator) -> int:
    """Largest B for which the B strongest signals all reach ``alpha_db``.

    Draws one activity vector per (B, target) pair, B ascending, target
    ascending, and returns 0 when no B qualifies.
    """
    t = snapshot.n_sites
    best = 0
    for b in range(1, t + 1):
        passed = True
        for i in range(1, b + 1):
            activity = draw_activity(b, t, p, q, rng)
            sinr = sinr_for_target(i, b, snapshot, activity, radio)
            # keep drawing so the stream layout is independent of the outcome
            passed &= 10.0 * math.log10(sinr) >= alpha_db
        if passed:
            best = b
    return best
