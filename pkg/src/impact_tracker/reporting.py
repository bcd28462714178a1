"""Impact statements, cross-run aggregation, and regional tables."""

import math
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .carbon import Region, SccDatabase, social_cost
from .errors import EmptyInput, ParseFailure
from .monitor import LOG_FILENAME
from .runlog import LogHeader, read_records
from .summary import ImpactSummary, round_half_even

STATEMENT_TEMPLATE = (
    "This work contributed {kg:.3f} kg of $CO_{{2eq}}$ to the atmosphere and "
    "used {kwh:.3f} kWh of electricity, having a {country}-specific social "
    "cost of carbon of ${m:.2f} (${l:.2f}, ${h:.2f})."
)


def generate_impact_statement(
    summaries: Sequence[ImpactSummary],
    country: str,
    scc_db: Optional[SccDatabase] = None,
) -> str:
    if not summaries:
        raise EmptyInput("at least one run summary is required")
    scc_db = scc_db or SccDatabase.load_bundled()
    total_kwh = sum(s.kwh for s in summaries)
    total_kg = sum(s.kg_co2eq or 0.0 for s in summaries)
    m, l, h = social_cost(total_kg, scc_db.get(country))
    return STATEMENT_TEMPLATE.format(
        kg=round_half_even(total_kg, 3),
        kwh=round_half_even(total_kwh, 3),
        country=country,
        m=m, l=l, h=h,
    )


def aggregate_experiments(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and standard error (sample stddev over sqrt(n); 0 when n == 1)."""
    if not values:
        raise EmptyInput("cannot aggregate zero values")
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var) / math.sqrt(n)


def compute_savings(runs: int, kwh_per_run_a: float, kwh_per_run_b: float) -> float:
    """Energy saved by choosing option A over option B across `runs` runs."""
    if runs < 0:
        raise ValueError("runs must be non-negative")
    return runs * (kwh_per_run_b - kwh_per_run_a)


@dataclass
class RegionReportRow:
    id: str
    display_name: str
    intensity_g_per_kwh: float
    source: str
    year: int
    cloud: bool


def region_emissions_report(
    regions: Sequence[Region], cloud_only: bool = False
) -> List[RegionReportRow]:
    rows = [
        RegionReportRow(
            id=r.id,
            display_name=r.display_name,
            intensity_g_per_kwh=r.avg_intensity_g_per_kwh,
            source=r.source,
            year=r.year,
            cloud=r.cloud,
        )
        for r in regions
        if r.cloud or not cloud_only
    ]
    rows.sort(key=lambda r: (r.intensity_g_per_kwh, r.id))
    return rows


# -- log loading -------------------------------------------------------------


@dataclass
class RunReport:
    """Everything the reporting layer needs from one run's log."""

    run_id: str
    header: LogHeader
    summary: ImpactSummary
    samples: list  # (t, payload) pairs
    intensity_points: list  # (t, g_per_kwh)
    exceptions: list
    warnings: int


def log_path_for(log_dir: str) -> str:
    if os.path.isdir(log_dir):
        return os.path.join(log_dir, LOG_FILENAME)
    return log_dir


def load_run(log_dir: str) -> RunReport:
    path = log_path_for(log_dir)
    records, warnings = read_records(path)
    header = LogHeader.from_payload(records[0].payload)
    summary = None
    samples = []
    intensity = []
    exceptions = []
    for rec in records[1:]:
        if rec.kind == "sample":
            samples.append((rec.timestamp, rec.payload))
        elif rec.kind == "intensity":
            intensity.append((rec.timestamp, rec.payload["g_per_kwh"]))
        elif rec.kind == "exception":
            exceptions.append(rec.payload)
        elif rec.kind == "final":
            summary = ImpactSummary.from_dict(rec.payload["summary"])
    if summary is None:
        raise ParseFailure("log %s has no final record" % path)
    return RunReport(
        run_id=summary.run_id,
        header=header,
        summary=summary,
        samples=samples,
        intensity_points=intensity,
        exceptions=exceptions,
        warnings=warnings,
    )


def load_summaries(log_dirs: Sequence[str]) -> List[ImpactSummary]:
    if not log_dirs:
        raise EmptyInput("no log directories given")
    return [load_run(d).summary for d in log_dirs]
