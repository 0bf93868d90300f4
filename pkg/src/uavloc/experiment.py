"""Experiment spec files, sweep orchestration and CSV/metadata output.

A spec file is TOML written as flat dotted keys::

    experiment.kind = "simulate"
    sim.h_ut_m = 30
    sweep.param = "alpha"
    sweep.range = [-50, 0, 1]
    series.param = "h_ut"
    series.values = [30, 60, 90, 120]

``sweep`` is the x axis; the optional ``series`` adds one curve per value.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from uavloc.channel import ChannelParams
from uavloc.errors import ConfigError
from uavloc.localizability import (
    ALPHA_SEARCH_RANGE,
    ALPHA_TOLERANCE_DB,
    BLOCK_SIZE,
    SWEEP_FIELDS,
    GainResult,
    SimConfig,
    required_processing_gain,
    simulate_critical,
    sweep_pb,
)
from uavloc.sinr import RadioParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5")

SIMULATE_COLUMNS = ["alpha_db", "h_ut_m", "B", "p", "q", "pb", "ci_low", "ci_high", "n_snapshots"]
GAIN_COLUMNS = ["h_ut_m", "p", "q", "B", "beta_db", "target_pb", "alpha_star_db", "gamma_db", "n_snapshots"]

# dotted key -> (section, field, type)
_CONFIG_KEYS = {
    "layout.isd_m": (None, "isd_m", float),
    "layout.tiers": (None, "tiers", int),
    "layout.h_bs_m": (None, "h_bs_m", float),
    "channel.fc_ghz": ("channel", "fc_ghz", float),
    "channel.los_shadow_std_a_db": ("channel", "los_shadow_std_a_db", float),
    "channel.los_shadow_std_b_per_m": ("channel", "los_shadow_std_b_per_m", float),
    "channel.nlos_shadow_std_db": ("channel", "nlos_shadow_std_db", float),
    "radio.tx_power_dbm": ("radio", "tx_power_dbm", float),
    "radio.bandwidth_hz": ("radio", "bandwidth_hz", float),
    "radio.noise_figure_db": ("radio", "noise_figure_db", float),
    "sim.h_ut_m": (None, "h_ut_m", float),
    "sim.alpha_db": (None, "alpha_db", float),
    "sim.p": (None, "p", float),
    "sim.q": (None, "q", float),
    "sim.b_max": (None, "b_max", int),
    "sim.n_snapshots": (None, "n_snapshots", int),
    "sim.seed": (None, "seed", int),
}
_OTHER_KEYS = {
    "experiment.kind", "experiment.name", "sim.b_list",
    "sweep.param", "sweep.values", "sweep.range",
    "series.param", "series.values", "series.range",
    "gain.beta_db", "gain.target_pb",
    "output.path", "output.format",
}
_SWEEPABLE = set(SWEEP_FIELDS) | {"B"}


@dataclass
class ExperimentSpec:
    base: SimConfig
    kind: str = "simulate"
    name: str = ""
    b_list: list[int] = field(default_factory=lambda: [4])
    sweep_param: str = "alpha"
    sweep_values: list = field(default_factory=list)
    series_param: str | None = None
    series_values: list = field(default_factory=lambda: [None])
    beta_db: float | None = None
    target_pb: float | None = None
    output: Path = Path("results.csv")
    format: str = "csv"

    def validate(self):
        if self.kind not in ("simulate", "gain"):
            raise ConfigError(f"experiment.kind must be 'simulate' or 'gain', got {self.kind!r}")
        if self.format != "csv":
            raise ConfigError(f"output.format must be 'csv', got {self.format!r}")
        _check_axis("sweep", self.sweep_param, self.sweep_values)
        if self.series_param is not None:
            _check_axis("series", self.series_param, self.series_values)
            if self.series_param == self.sweep_param:
                raise ConfigError("series.param must differ from sweep.param")
        for point in self.points():
            try:
                _check_b(point[0], point[1])
            except ConfigError as exc:
                raise ConfigError(f"sweep.values: {exc}") from None
        if self.kind == "gain":
            if self.beta_db is None or not math.isfinite(self.beta_db):
                raise ConfigError("gain.beta_db must be a finite number")
            if self.target_pb is None or not 0.0 < self.target_pb < 1.0:
                raise ConfigError(
                    f"gain.target_pb must be in the open interval (0, 1), got {self.target_pb!r}"
                )
            if "alpha" in (self.sweep_param, self.series_param):
                raise ConfigError("gain experiments cannot sweep alpha")

    def points(self):
        """Yield ``(config, b_list, sweep_value, series_value)`` for every grid point."""
        for s in self.series_values:
            cfg = self.base
            b_list = self.b_list
            if self.series_param is not None:
                cfg, b_list = _apply(cfg, b_list, self.series_param, s, "series")
            for v in self.sweep_values:
                point_cfg, point_b = _apply(cfg, b_list, self.sweep_param, v, "sweep")
                yield point_cfg, point_b, v, s

    def with_overrides(self, seed=None, snapshots=None, out=None, beta=None, target=None):
        changes = {}
        if seed is not None:
            changes["seed"] = seed
        if snapshots is not None:
            changes["n_snapshots"] = snapshots
        spec = dataclasses.replace(self, base=_replace_config(self.base, "sim", **changes))
        if out is not None:
            spec.output = Path(out)
        if beta is not None:
            spec.beta_db = beta
        if target is not None:
            spec.target_pb = target
        spec.validate()
        return spec


def _replace_config(cfg, key_prefix, **changes):
    try:
        return cfg.replace(**changes)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key_prefix}: {exc}") from None


def _apply(cfg, b_list, param, value, axis):
    if param == "B":
        return cfg, [int(value)]
    try:
        return cfg.replace(**{SWEEP_FIELDS[param]: float(value)}), b_list
    except ConfigError as exc:
        raise ConfigError(f"{axis}.values: {exc}") from None


def _check_axis(axis, param, values):
    if param not in _SWEEPABLE:
        raise ConfigError(f"{axis}.param must be one of {sorted(_SWEEPABLE)}, got {param!r}")
    if not values:
        raise ConfigError(f"{axis}.values must be non-empty")


def _check_b(cfg, b_list):
    limit = cfg.b_max if cfg.b_max is not None else cfg.n_sites
    if not b_list:
        raise ConfigError("sim.b_list must be non-empty")
    for b in b_list:
        if int(b) != b or not 1 <= b <= limit:
            raise ConfigError(f"B must be an integer in [1, {limit}], got {b!r}")


def _flatten(table, prefix=""):
    flat = {}
    for key, value in table.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, dotted + "."))
        else:
            flat[dotted] = value
    return flat


def _grid(key, value):
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{key} must be [start, stop, step]")
    start, stop, step = (float(v) for v in value)
    if step <= 0 or stop < start:
        raise ConfigError(f"{key} needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [_tidy(start + k * step) for k in range(count)]


def _tidy(x):
    # 1 dB grids should print as -16.0, not -15.999999999999998
    return float(round(x, 10))


def _axis_values(flat, axis):
    has_values = f"{axis}.values" in flat
    has_range = f"{axis}.range" in flat
    if has_values and has_range:
        raise ConfigError(f"give only one of {axis}.values and {axis}.range")
    if has_range:
        return _grid(f"{axis}.range", flat[f"{axis}.range"])
    values = flat.get(f"{axis}.values", [])
    if not isinstance(values, list):
        raise ConfigError(f"{axis}.values must be a list")
    return list(values)


def parse_spec(text: str, source: str = "<string>") -> ExperimentSpec:
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: cannot parse spec: {exc}") from None
    flat = _flatten(table)
    unknown = sorted(set(flat) - set(_CONFIG_KEYS) - _OTHER_KEYS)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]}")

    top, sections = {}, {"channel": {}, "radio": {}}
    for key, (section, name, kind) in _CONFIG_KEYS.items():
        if key not in flat:
            continue
        raw = flat[key]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{key} must be a number, got {raw!r}")
        if kind is int and int(raw) != raw:
            raise ConfigError(f"{key} must be an integer, got {raw!r}")
        value = kind(raw)
        (sections[section] if section else top)[name] = value
    try:
        base = SimConfig(
            channel=ChannelParams(**sections["channel"]),
            radio=RadioParams(**sections["radio"]),
            **top,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    b_list = flat.get("sim.b_list", [4])
    if not isinstance(b_list, list) or not all(isinstance(b, int) for b in b_list):
        raise ConfigError("sim.b_list must be a list of integers")

    series_param = flat.get("series.param")
    spec = ExperimentSpec(
        base=base,
        kind=flat.get("experiment.kind", "simulate"),
        name=flat.get("experiment.name", ""),
        b_list=b_list,
        sweep_param=flat.get("sweep.param", "alpha"),
        sweep_values=_axis_values(flat, "sweep"),
        series_param=series_param,
        series_values=_axis_values(flat, "series") if series_param else [None],
        beta_db=flat.get("gain.beta_db"),
        target_pb=flat.get("gain.target_pb"),
        output=Path(flat.get("output.path", "results.csv")),
        format=flat.get("output.format", "csv"),
    )
    spec.validate()
    return spec


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read spec {path}: {exc.strerror}") from None
    return parse_spec(text, str(path))


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("uavloc.presets").joinpath(f"{name}.toml").read_text(encoding="utf-8")


def load_preset(name: str) -> ExperimentSpec:
    return parse_spec(preset_text(name), f"preset {name}")


# Running

def _sim_key(cfg: SimConfig):
    """Fields that change the simulated snapshots (alpha does not)."""
    return cfg.replace(alpha_db=0.0)


def run_simulation(spec: ExperimentSpec, workers: int = 1) -> list[dict]:
    rows = []
    # group points that share snapshots so alpha sweeps use common random numbers
    for s in spec.series_values:
        base = spec.base
        b_list = spec.b_list
        if spec.series_param is not None:
            base, b_list = _apply(base, b_list, spec.series_param, s, "series")
        if spec.sweep_param == "B":
            curve = sweep_pb(base, "B", [int(v) for v in spec.sweep_values], None, workers)
        else:
            curve = sweep_pb(base, spec.sweep_param, spec.sweep_values, b_list, workers)
        rows.extend(curve.rows())
    return rows


def run_gain(spec: ExperimentSpec, workers: int = 1) -> list[dict]:
    rows = []
    cache = {}
    for cfg, b_list, _, _ in spec.points():
        key = _sim_key(cfg)
        if key not in cache:
            cache[key] = simulate_critical(cfg, workers)
        for b in b_list:
            res: GainResult = required_processing_gain(
                cfg, spec.beta_db, spec.target_pb, b, crit=cache[key]
            )
            rows.append({
                "h_ut_m": cfg.h_ut_m,
                "p": cfg.p,
                "q": cfg.q,
                "B": b,
                "beta_db": float(spec.beta_db),
                "target_pb": float(spec.target_pb),
                "alpha_star_db": res.alpha_star_db,
                "gamma_db": res.gamma_db,
                "n_snapshots": cfg.n_snapshots,
            })
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # repr gives the shortest string that round-trips
    return repr(float(value))


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def metadata(spec: ExperimentSpec, command: str, source: str) -> dict:
    from uavloc import __version__

    meta = {
        "tool": "uavloc",
        "version": __version__,
        "command": command,
        "spec": source,
        "experiment": {
            "kind": spec.kind,
            "name": spec.name,
            "sweep": {"param": spec.sweep_param, "values": spec.sweep_values},
            "series": {"param": spec.series_param, "values": spec.series_values}
            if spec.series_param else None,
            "b_list": spec.b_list,
        },
        "config": spec.base.to_dict(),
        "seed": spec.base.seed,
        "n_snapshots": spec.base.n_snapshots,
        "rng": f"Philox keyed by SeedSequence(seed, spawn_key=(block,)), block size {BLOCK_SIZE}",
        "common_random_numbers": "all points of a sweep share the seed; alpha sweeps reuse one set of snapshots",
        "noise_power_dbm": spec.base.radio.noise_power_dbm,
    }
    if spec.kind == "gain":
        meta["gain"] = {
            "beta_db": spec.beta_db,
            "target_pb": spec.target_pb,
            "alpha_search_db": list(ALPHA_SEARCH_RANGE),
            "alpha_tolerance_db": ALPHA_TOLERANCE_DB,
        }
    if "alpha" in (spec.sweep_param, spec.series_param):
        meta["alpha_grid_db"] = spec.sweep_values if spec.sweep_param == "alpha" else spec.series_values
    return meta


def write_outputs(spec: ExperimentSpec, rows, meta) -> Path:
    columns = SIMULATE_COLUMNS if spec.kind == "simulate" else GAIN_COLUMNS
    out = spec.output
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows, columns))
        meta_path = out.with_name(out.name + ".meta")
        meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"output.path: cannot write {out}: {exc.strerror}") from None
    return out
