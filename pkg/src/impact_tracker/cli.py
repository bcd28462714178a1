"""Command-line entry point.

`impact-tracker run -- <cmd>` wraps any workload as a child process and
samples it externally, so the tracked program needs no code changes. The
remaining subcommands turn logs into statements, appendices, leaderboards,
and rough estimates. Exit code 120 is reserved for wrapper-internal
failures; the workload's own exit code always passes through.
"""

import json
import signal
import subprocess
import sys

import click

from .carbon import (
    HttpGeolocationProvider,
    RegionDatabase,
    SccDatabase,
    compute_emissions,
    geolocate,
)
from .errors import (
    EmptyInput,
    GeolocationUnavailable,
    ImpactTrackerError,
    LaunchFailure,
    NoRegion,
    UnknownCountry,
    UnknownGpuModel,
)
from .estimation import (
    estimate_gpu_hours_method,
    estimate_pflops_method,
    estimate_tdp_method,
    lookup_gpu,
)
from .htmlgen import LeaderboardEntry, generate_appendix, generate_leaderboard
from .monitor import MonitorConfig, launch_monitor
from .reporting import (
    generate_impact_statement,
    load_summaries,
    region_emissions_report,
)

WRAPPER_FAILURE_EXIT = 120


@click.group()
def cli():
    """Measure, attribute, and report workload energy and carbon impact."""


@cli.command(context_settings={"ignore_unknown_options": True})
@click.option("--log-dir", required=True, type=click.Path())
@click.option("--poll-interval", default=1.0, show_default=True,
              help="Power sampling cadence in seconds.")
@click.option("--pue", default=1.58, show_default=True,
              help="Power usage effectiveness multiplier.")
@click.option("--region", default=None, help="Region id override (skips geolocation).")
@click.option("--sensor-backend", default="system", show_default=True,
              help="'system' or 'replay:TRACE_PATH'.")
@click.option("--realtime-interval", default=300.0, show_default=True,
              help="Realtime intensity poll cadence in seconds.")
@click.option("--offline", is_flag=True, default=False,
              help="Disable all network access (geolocation, realtime intensity).")
@click.argument("workload", nargs=-1, type=click.UNPROCESSED)
def run(log_dir, poll_interval, pue, region, sensor_backend,
        realtime_interval, offline, workload):
    """Run WORKLOAD (after --) under energy/carbon monitoring."""
    if not workload:
        raise click.UsageError("no workload given; pass it after `--`")

    backend = "system"
    trace_path = None
    if sensor_backend.startswith("replay:"):
        backend = "replay"
        trace_path = sensor_backend.split(":", 1)[1]
    elif sensor_backend != "system":
        raise click.UsageError("unknown sensor backend %r" % sensor_backend)

    try:
        child = subprocess.Popen(list(workload))
    except OSError as e:
        click.echo("failed to start workload: %s" % e, err=True)
        sys.exit(WRAPPER_FAILURE_EXIT)

    try:
        config = MonitorConfig(
            log_dir=log_dir,
            poll_interval_s=poll_interval,
            pue=pue,
            region_override=region,
            realtime_poll_interval_s=realtime_interval,
            sensor_backend=backend,
            replay_trace_path=trace_path,
            offline=offline,
            geolocation_provider=None if offline else HttpGeolocationProvider(),
        )
        handle = launch_monitor(config, child.pid)
    except (LaunchFailure, ImpactTrackerError, OSError) as e:
        child.kill()
        child.wait()
        click.echo("monitor launch failed: %s" % e, err=True)
        sys.exit(WRAPPER_FAILURE_EXIT)

    def _forward(signum, frame):
        child.terminate()

    signal.signal(signal.SIGTERM, _forward)
    signal.signal(signal.SIGINT, _forward)

    exit_code = child.wait()
    try:
        summary = handle.shutdown()
        click.echo(
            "impact-tracker: %.3f kWh%s (log: %s)"
            % (
                summary.kwh,
                ", %.3f kgCO2eq" % summary.kg_co2eq
                if summary.kg_co2eq is not None
                else "",
                handle.log_path,
            ),
            err=True,
        )
    except Exception as e:
        # sampler problems never alter the workload's exit code
        click.echo("impact-tracker: finalization problem: %s" % e, err=True)
    sys.exit(exit_code)


@cli.command()
@click.argument("log_dirs", nargs=-1, type=click.Path(exists=True))
@click.option("--country", required=True, help="ISO3 country code for the SCC.")
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "json"]))
def statement(log_dirs, country, fmt):
    """Print a carbon impact statement for one or more run logs."""
    try:
        summaries = load_summaries(list(log_dirs))
        text = generate_impact_statement(summaries, country)
    except (UnknownCountry, EmptyInput, ImpactTrackerError) as e:
        raise click.ClickException(str(e))
    if fmt == "json":
        total_kwh = sum(s.kwh for s in summaries)
        total_kg = sum(s.kg_co2eq or 0.0 for s in summaries)
        click.echo(json.dumps(
            {"statement": text, "kwh": total_kwh, "kg_co2eq": total_kg,
             "country": country, "runs": len(summaries)},
            sort_keys=True,
        ))
    else:
        click.echo(text)


@cli.command()
@click.argument("log_dirs", nargs=-1, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--no-timestamp", is_flag=True, default=False,
              help="Omit the generation timestamp (for reproducible output).")
def appendix(log_dirs, out, no_timestamp):
    """Generate a static HTML appendix from run logs."""
    try:
        generate_appendix(list(log_dirs), out,
                          include_timestamp=not no_timestamp)
    except ImpactTrackerError as e:
        raise click.ClickException(str(e))
    click.echo("appendix written to %s" % out)


@cli.command()
@click.option("--entries", required=True, type=click.Path(exists=True),
              help="JSON file with leaderboard entries.")
@click.option("--out", required=True, type=click.Path())
@click.option("--no-timestamp", is_flag=True, default=False)
def leaderboard(entries, out, no_timestamp):
    """Generate an energy leaderboard site ranked by performance per kWh."""
    with open(entries) as f:
        rows = json.load(f)
    try:
        parsed = [
            LeaderboardEntry(
                algorithm=r["algorithm"],
                environment=r["environment"],
                performance_metric=r["performance_metric"],
                kwh=r["kwh"],
                runs=r.get("runs", 1),
            )
            for r in rows
        ]
        generate_leaderboard(parsed, out, include_timestamp=not no_timestamp)
    except (ImpactTrackerError, ValueError, KeyError) as e:
        raise click.ClickException(str(e))
    click.echo("leaderboard written to %s" % out)


@cli.command()
@click.option("--cloud-only", is_flag=True, default=False)
@click.option("--data", "data_file", default=None, type=click.Path(exists=True),
              help="Alternate region data file.")
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "json"]))
def regions(cloud_only, data_file, fmt):
    """List grid regions sorted by carbon intensity (cleanest first)."""
    db = (RegionDatabase.from_file(data_file) if data_file
          else RegionDatabase.load_bundled())
    rows = region_emissions_report(db.regions, cloud_only=cloud_only)
    if fmt == "json":
        click.echo(json.dumps(
            [{"id": r.id, "display_name": r.display_name,
              "intensity_g_per_kwh": r.intensity_g_per_kwh,
              "source": r.source, "year": r.year, "cloud": r.cloud}
             for r in rows],
            sort_keys=True,
        ))
        return
    click.echo("%-8s %-28s %10s  %s" % ("id", "region", "gCO2/kWh", "source"))
    for r in rows:
        click.echo("%-8s %-28s %10.1f  %s (%d)"
                   % (r.id, r.display_name, r.intensity_g_per_kwh,
                      r.source, r.year))


@cli.command()
@click.option("--gpu", required=True, help="GPU model id from the bundled spec table.")
@click.option("--count", default=1, show_default=True)
@click.option("--hours", required=True, type=float)
@click.option("--util", default=1.0, show_default=True,
              help="Utilization factor (e.g. 0.33 or 1.0).")
@click.option("--pflops-hr", default=None, type=float,
              help="Optional PFLOPs-hr for the throughput-based method.")
@click.option("--region", "region_id", default=None)
@click.option("--ip", default=None, help="Geolocate this IP to pick a region.")
@click.option("--offline", is_flag=True, default=False)
@click.option("--format", "fmt", default="text",
              type=click.Choice(["text", "json"]))
def estimate(gpu, count, hours, util, pflops_hr, region_id, ip, offline, fmt):
    """Rough energy/carbon estimates from partial information."""
    try:
        spec = lookup_gpu(gpu)
    except UnknownGpuModel as e:
        raise click.ClickException(str(e))

    db = RegionDatabase.load_bundled()
    region = None
    try:
        if region_id:
            region = db.get(region_id)
        elif ip and not offline:
            located = geolocate(ip=ip, provider=HttpGeolocationProvider())
            region = (db.get(located) if isinstance(located, str)
                      else db.resolve(located))
    except (NoRegion, GeolocationUnavailable) as e:
        raise click.ClickException(str(e))

    results = {
        "tdp_time_util": estimate_tdp_method(count, spec, hours, util),
        "gpu_hours_tdp": estimate_gpu_hours_method(count * hours, spec),
    }
    if pflops_hr is not None:
        results["pflops_hr"] = estimate_pflops_method(pflops_hr, spec)

    intensity = region.avg_intensity_g_per_kwh if region else None
    if fmt == "json":
        out = {
            "gpu": spec.model,
            "region": region.id if region else None,
            "methods": {
                m: {
                    "kwh": kwh,
                    "kg_co2eq": (compute_emissions(kwh, intensity)
                                 if intensity is not None else None),
                }
                for m, kwh in results.items()
            },
        }
        click.echo(json.dumps(out, sort_keys=True))
        return
    for m, kwh in results.items():
        line = "%-14s %.3f kWh" % (m, kwh)
        if intensity is not None:
            line += "  %.3f kgCO2eq (%s)" % (
                compute_emissions(kwh, intensity), region.id
            )
        click.echo(line)


def main():
    cli(prog_name="impact-tracker")


if __name__ == "__main__":
    main()
