"""Partial-information energy estimators and deployment-scale extrapolation.

These reproduce the rough estimation methods people use when full telemetry
was never collected: TDP times wall time with a utilization factor, measured
GPU-hours times TDP, or PFLOPs-hr scaled by TDP over peak throughput. They
can then be compared against a full-tracking ledger.
"""

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional

from .attribution import EnergyLedger
from .carbon import Region
from .errors import UnknownGpuModel
from .realtime import IntensitySeries

UTIL_LOW = 1.0 / 3.0  # conventional utilization factor when none was measured


@dataclass
class GpuSpec:
    model: str
    tdp_w: float
    peak_pflops: float
    source: str = ""

    def __post_init__(self):
        if self.tdp_w <= 0 or self.peak_pflops <= 0:
            raise ValueError("tdp_w and peak_pflops must be positive")


@dataclass
class EstimateResult:
    method: str  # tdp_time_util | gpu_hours_tdp | pflops_hr | full_tracking
    kwh: float
    assumptions: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kwh < 0:
            raise ValueError("kwh must be non-negative")


def load_gpu_specs() -> Dict[str, GpuSpec]:
    obj = json.loads(
        resources.files("impact_tracker").joinpath("data", "gpus.json").read_text()
    )
    specs = {}
    for row in obj["gpus"]:
        specs[row["model"]] = GpuSpec(
            model=row["model"],
            tdp_w=row["tdp_w"],
            peak_pflops=row["peak_pflops"],
            source=row.get("source", ""),
        )
    return specs


def lookup_gpu(model: str) -> GpuSpec:
    specs = load_gpu_specs()
    try:
        return specs[model]
    except KeyError:
        raise UnknownGpuModel(
            "unknown GPU model %r (known: %s)" % (model, ", ".join(sorted(specs)))
        ) from None


def estimate_tdp_method(
    n_gpus: int, spec: GpuSpec, hours: float, util_factor: float = 1.0
) -> float:
    """kWh = n x TDP x hours x utilization / 1000."""
    if n_gpus <= 0 or hours < 0 or not 0 <= util_factor <= 1:
        raise ValueError("invalid estimator inputs")
    return n_gpus * spec.tdp_w * hours * util_factor / 1000.0


def estimate_gpu_hours_method(gpu_hours: float, spec: GpuSpec) -> float:
    """kWh = measured device-hours x TDP / 1000."""
    if gpu_hours < 0:
        raise ValueError("gpu_hours must be non-negative")
    return gpu_hours * spec.tdp_w / 1000.0


def estimate_pflops_method(pflops_hr: float, spec: GpuSpec) -> float:
    """kWh = PFLOPs-hr x TDP / peak PFLOPs / 1000."""
    if pflops_hr < 0:
        raise ValueError("pflops_hr must be non-negative")
    return pflops_hr * spec.tdp_w / spec.peak_pflops / 1000.0


@dataclass
class ComparisonRow:
    method: str
    kwh: float
    kg_by_basis: Dict[str, float]
    relative_error: float  # vs full tracking energy


@dataclass
class ComparisonTable:
    rows: List[ComparisonRow]
    baseline_method: str = "full_tracking"


def compare_estimates(
    full: EnergyLedger,
    estimates: List[EstimateResult],
    intensities: Dict[str, float],
    realtime_series: Optional[IntensitySeries] = None,
    realtime_kg: Optional[float] = None,
) -> ComparisonTable:
    """kWh and kgCO2eq per (method x intensity basis), with error vs full tracking.

    `intensities` maps basis name (e.g. "us_avg", "region_avg") to g/kWh.
    When a realtime integration result is supplied it appears as the
    "realtime" basis on the full-tracking row, the comparison's ground truth.
    """
    full_kwh = full.e_total_kwh
    rows = []
    all_results = [
        EstimateResult(method="full_tracking", kwh=full_kwh)
    ] + list(estimates)
    for est in all_results:
        kg = {
            basis: est.kwh * g / 1000.0 for basis, g in intensities.items()
        }
        if est.method == "full_tracking" and realtime_kg is not None:
            kg["realtime"] = realtime_kg
        rel = (est.kwh - full_kwh) / full_kwh if full_kwh > 0 else 0.0
        rows.append(
            ComparisonRow(
                method=est.method, kwh=est.kwh, kg_by_basis=kg, relative_error=rel
            )
        )
    return ComparisonTable(rows=rows)


def scale_inference_emissions(
    per_batch_kwh_delta: float, daily_multiplier: float, region: Region
) -> float:
    """kgCO2eq per day saved (or spent) at deployment scale."""
    if per_batch_kwh_delta < 0 or daily_multiplier < 0:
        raise ValueError("inputs must be non-negative")
    return (
        per_batch_kwh_delta
        * daily_multiplier
        * region.avg_intensity_g_per_kwh
        / 1000.0
    )
