"""Static HTML appendix and leaderboard generation.

Output is archivable: plots are embedded SVG, no external assets. With the
generation timestamp suppressed, identical inputs produce byte-identical
sites, which keeps golden tests honest.
"""

import html
import io
import json
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import EmptyInput
from .reporting import RunReport, aggregate_experiments, load_run

_SVG_HASHSALT = "impact-tracker"

RANKING_FOOTER = (
    "Ranking metric: mean performance divided by total kWh per entry "
    "(higher is better)."
)


@dataclass
class LeaderboardEntry:
    algorithm: str
    environment: str
    performance_metric: float
    kwh: float
    runs: int = 1

    def __post_init__(self):
        if self.kwh <= 0:
            raise ValueError("ranked entries need kwh > 0")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    @property
    def ratio(self) -> float:
        return self.performance_metric / self.kwh


def _render_svg(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _plot_power(report: RunReport) -> Optional[str]:
    times, watts = [], []
    prev_t = None
    for t, payload in report.samples:
        sys = payload.get("sys", {})
        gpu_w = sum(sys.get("gpu_power_w", []))
        cpu_w = 0.0
        if prev_t is not None and t > prev_t:
            cpu_w = (
                sys.get("cpu_energy_j", 0.0) + sys.get("dram_energy_j", 0.0)
            ) / (t - prev_t)
        times.append(t - report.header.start_time)
        watts.append(gpu_w + cpu_w)
        prev_t = t
    if len(times) < 2:
        return None
    with plt.rc_context({"svg.hashsalt": _SVG_HASHSALT}):
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.plot(times, watts)
        ax.set_xlabel("seconds since start")
        ax.set_ylabel("system power draw (W)")
        ax.set_title("Power over time")
        fig.tight_layout()
        return _render_svg(fig)


def _plot_intensity(report: RunReport) -> Optional[str]:
    if not report.intensity_points:
        return None
    times = [t - report.header.start_time for t, _ in report.intensity_points]
    values = [v for _, v in report.intensity_points]
    with plt.rc_context({"svg.hashsalt": _SVG_HASHSALT}):
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.step(times, values, where="post")
        ax.set_xlabel("seconds since start")
        ax.set_ylabel("carbon intensity (gCO2eq/kWh)")
        ax.set_title("Realtime carbon intensity")
        fig.tight_layout()
        return _render_svg(fig)


def _manifest_table(title: str, rows) -> str:
    body = "".join(
        "<tr><td>%s</td><td>%s</td></tr>"
        % (html.escape(str(k)), html.escape(str(v)))
        for k, v in rows
    )
    return "<h3>%s</h3><table>%s</table>" % (html.escape(title), body)


def _page(title: str, body: str, footer: str = "") -> str:
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        "<title>%s</title>"
        "<style>body{font-family:sans-serif;margin:2em}"
        "table{border-collapse:collapse}"
        "td,th{border:1px solid #999;padding:4px 8px}</style>"
        "</head><body><h1>%s</h1>\n%s\n<footer><p>%s</p></footer>"
        "</body></html>\n"
        % (html.escape(title), html.escape(title), body, html.escape(footer))
    )


def _run_page(report: RunReport) -> str:
    s = report.summary
    rows = [
        ("total energy (kWh)", "%.3f" % s.kwh),
        ("emissions (kgCO2eq)",
         "%.3f" % s.kg_co2eq if s.kg_co2eq is not None else "n/a"),
        ("region", s.region_id or "unknown"),
        ("duration (s)", "%.1f" % s.duration_s),
        ("PUE", report.header.pue),
        ("samples", len(report.samples)),
        ("sampler exceptions", len(report.exceptions)),
    ]
    if s.scc_usd is not None:
        rows.append(
            ("social cost of carbon (USD)",
             "$%.2f ($%.2f, $%.2f)" % tuple(s.scc_usd))
        )
    body = _manifest_table("Totals", rows)
    power_svg = _plot_power(report)
    if power_svg:
        body += "<h3>Power</h3>" + power_svg
    intensity_svg = _plot_intensity(report)
    if intensity_svg:
        body += "<h3>Realtime intensity</h3>" + intensity_svg
    body += _manifest_table("Hardware", report.header.hardware_manifest)
    body += _manifest_table("Environment", report.header.environment_manifest)
    return _page("Run %s" % report.run_id, body)


def generate_appendix(
    log_dirs: Sequence[str], out_dir: str, include_timestamp: bool = True
) -> str:
    """Render an index page plus one page per run. Returns out_dir."""
    if not log_dirs:
        raise EmptyInput("no log directories given")
    reports = [load_run(d) for d in log_dirs]

    os.makedirs(os.path.join(out_dir, "data"), exist_ok=True)
    run_rows = []
    for report in reports:
        run_dir = os.path.join(out_dir, "runs", report.run_id)
        os.makedirs(run_dir, exist_ok=True)
        with open(os.path.join(run_dir, "index.html"), "w") as f:
            f.write(_run_page(report))
        with open(
            os.path.join(out_dir, "data", "%s.summary" % report.run_id), "w"
        ) as f:
            json.dump(report.summary.to_dict(), f, sort_keys=True, indent=2)
            f.write("\n")
        s = report.summary
        run_rows.append(
            "<tr><td><a href=\"runs/%s/index.html\">%s</a></td>"
            "<td>%.3f</td><td>%s</td><td>%.1f</td></tr>"
            % (
                html.escape(report.run_id),
                html.escape(report.run_id),
                s.kwh,
                "%.3f" % s.kg_co2eq if s.kg_co2eq is not None else "n/a",
                s.duration_s,
            )
        )

    kwh_values = [r.summary.kwh for r in reports]
    mean_kwh, se_kwh = aggregate_experiments(kwh_values)
    kg_values = [
        r.summary.kg_co2eq for r in reports if r.summary.kg_co2eq is not None
    ]
    aggregate_html = (
        "<h3>Across runs (mean &plusmn; standard error)</h3>"
        "<table><tr><th>metric</th><th>mean</th><th>SE</th><th>n</th></tr>"
        "<tr><td>kWh</td><td>%.6f</td><td>%.6f</td><td>%d</td></tr>"
        % (mean_kwh, se_kwh, len(kwh_values))
    )
    if kg_values:
        mean_kg, se_kg = aggregate_experiments(kg_values)
        aggregate_html += (
            "<tr><td>kgCO2eq</td><td>%.6f</td><td>%.6f</td><td>%d</td></tr>"
            % (mean_kg, se_kg, len(kg_values))
        )
    aggregate_html += "</table>"

    body = (
        "<h3>Runs</h3><table><tr><th>run</th><th>kWh</th>"
        "<th>kgCO2eq</th><th>duration (s)</th></tr>%s</table>%s"
        % ("".join(run_rows), aggregate_html)
    )
    footer = ""
    if include_timestamp:
        import time

        footer = "Generated %s." % time.strftime("%Y-%m-%d %H:%M:%S UTC",
                                                 time.gmtime())
    with open(os.path.join(out_dir, "index.html"), "w") as f:
        f.write(_page("Compute appendix", body, footer))
    return out_dir


def rank_entries(entries: Sequence[LeaderboardEntry]) -> dict:
    """Per environment, entries sorted descending by performance per kWh."""
    by_env: dict = {}
    for e in entries:
        by_env.setdefault(e.environment, []).append(e)
    for env in by_env:
        by_env[env].sort(key=lambda e: (-e.ratio, e.algorithm))
    return by_env


def generate_leaderboard(
    entries: Sequence[LeaderboardEntry], out_dir: str,
    include_timestamp: bool = True,
) -> str:
    if not entries:
        raise EmptyInput("no leaderboard entries given")
    by_env = rank_entries(entries)
    os.makedirs(out_dir, exist_ok=True)
    body = ""
    for env in sorted(by_env):
        rows = "".join(
            "<tr><td>%d</td><td>%s</td><td>%.4g</td><td>%.4g</td>"
            "<td>%.4g</td><td>%d</td></tr>"
            % (i + 1, html.escape(e.algorithm), e.performance_metric,
               e.kwh, e.ratio, e.runs)
            for i, e in enumerate(by_env[env])
        )
        body += (
            "<h3>%s</h3><table><tr><th>rank</th><th>algorithm</th>"
            "<th>performance</th><th>kWh</th><th>performance/kWh</th>"
            "<th>runs</th></tr>%s</table>" % (html.escape(env), rows)
        )
    footer = RANKING_FOOTER
    if include_timestamp:
        import time

        footer += " Generated %s." % time.strftime(
            "%Y-%m-%d %H:%M:%S UTC", time.gmtime()
        )
    with open(os.path.join(out_dir, "index.html"), "w") as f:
        f.write(_page("Energy leaderboard", body, footer))
    return out_dir
