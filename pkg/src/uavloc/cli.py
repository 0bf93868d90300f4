"""Command-line front end: ``uavloc simulate|gain|preset``."""

from __future__ import annotations

import time

import click

from uavloc.errors import ConfigError
from uavloc.experiment import (
    PRESETS,
    load_preset,
    load_spec,
    metadata,
    preset_text,
    run_gain,
    run_simulation,
    write_outputs,
)

_common = [
    click.option("--seed", type=int, default=None, help="Override sim.seed."),
    click.option("--snapshots", type=int, default=None, help="Override sim.n_snapshots."),
    click.option("--workers", type=int, default=1, show_default=True,
                 help="Worker processes; results do not depend on it."),
    click.option("--out", type=click.Path(dir_okay=False), default=None, help="Override output.path."),
]


def common_options(fn):
    for option in reversed(_common):
        fn = option(fn)
    return fn


def _execute(spec, command, source, workers):
    if workers < 1:
        raise ConfigError("--workers must be at least 1")
    started = time.perf_counter()
    rows = run_simulation(spec, workers) if spec.kind == "simulate" else run_gain(spec, workers)
    out = write_outputs(spec, rows, metadata(spec, command, source))
    elapsed = time.perf_counter() - started
    click.echo(f"{spec.name or source}: {len(rows)} rows, {spec.base.n_snapshots} snapshots/point, "
               f"seed {spec.base.seed}, {elapsed:.1f}s")
    if spec.kind == "simulate":
        for row in rows[:: max(1, len(rows) // 8)]:
            click.echo(f"  alpha={row['alpha_db']:g} dB h={row['h_ut_m']:g} m p={row['p']:g} "
                       f"q={row['q']:g} B={row['B']}: P_B={row['pb']:.4f}")
    else:
        for row in rows:
            gamma = "no solution" if row["gamma_db"] is None else f"{row['gamma_db']:.2f} dB"
            click.echo(f"  h={row['h_ut_m']:g} m B={row['B']}: gamma={gamma}")
    click.echo(f"wrote {out} (+ .meta)")


def _guard(fn, *args):
    try:
        fn(*args)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from None


@click.group()
@click.version_option(package_name="artifact", prog_name="uavloc")
def main():
    """B-localizability of cellular-connected UAVs (Monte Carlo)."""


@main.command()
@click.argument("spec_file", type=click.Path(dir_okay=False))
@common_options
def simulate(spec_file, seed, snapshots, workers, out):
    """Estimate P_B over the sweep in SPEC_FILE and write a CSV table."""

    def go():
        spec = load_spec(spec_file).with_overrides(seed=seed, snapshots=snapshots, out=out)
        if spec.kind != "simulate":
            raise ConfigError("experiment.kind is 'gain'; use the gain command")
        _execute(spec, "simulate", spec_file, workers)

    _guard(go)


@main.command()
@click.argument("spec_file", type=click.Path(dir_okay=False))
@click.option("--beta", type=float, required=True, help="Post-processing SINR threshold (dB).")
@click.option("--target", type=float, required=True, help="Target P_B in (0, 1).")
@common_options
def gain(spec_file, beta, target, seed, snapshots, workers, out):
    """Solve for the processing gain reaching P_B = TARGET at each sweep point."""

    def go():
        spec = load_spec(spec_file)
        spec.kind = "gain"
        spec = spec.with_overrides(seed=seed, snapshots=snapshots, out=out, beta=beta, target=target)
        _execute(spec, "gain", spec_file, workers)

    _guard(go)


@main.command()
@click.argument("name", type=click.Choice(PRESETS))
@click.option("--show", is_flag=True, help="Print the preset spec instead of running it.")
@common_options
def preset(name, show, seed, snapshots, workers, out):
    """Run one of the figure presets (fig1..fig5)."""

    def go():
        if show:
            click.echo(preset_text(name), nl=False)
            return
        spec = load_preset(name).with_overrides(seed=seed, snapshots=snapshots, out=out)
        _execute(spec, f"preset {name}", f"preset:{name}", workers)

    _guard(go)


if __name__ == "__main__":
    main()
