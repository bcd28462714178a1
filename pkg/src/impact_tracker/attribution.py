"""Credit sampled energy to the tracked process tree.

Total energy is PUE times the sum over resources of the tree's usage share
times that resource's system-wide energy. CPU/DRAM energies arrive as
counter deltas (already integrals); GPU energy is integrated from power
samples with the trapezoidal rule.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

from .errors import NegativeInterval
from .sensors.base import PowerSample, ResourceShares
from .summary import ImpactSummary, round_half_even

J_PER_KWH = 3.6e6


@dataclass
class IntervalEnergy:
    t_start: float
    t_end: float
    e_cpu_j: float
    e_dram_j: float
    e_gpu_j: float
    credited_cpu_j: float
    credited_dram_j: float
    credited_gpu_j: float

    def __post_init__(self):
        for raw, credited in [
            (self.e_cpu_j, self.credited_cpu_j),
            (self.e_dram_j, self.credited_dram_j),
            (self.e_gpu_j, self.credited_gpu_j),
        ]:
            if raw < 0 or credited < 0:
                raise ValueError("energies must be non-negative")
            if credited > raw * (1 + 1e-12):
                raise ValueError("credited energy exceeds system energy")

    @property
    def credited_total_j(self) -> float:
        return self.credited_cpu_j + self.credited_dram_j + self.credited_gpu_j


def attribute_interval(
    prev: PowerSample, next: PowerSample, shares: ResourceShares
) -> IntervalEnergy:
    dt = next.timestamp - prev.timestamp
    if dt <= 0:
        raise NegativeInterval(
            "interval duration must be positive (got %r)" % (dt,)
        )
    e_cpu = next.cpu_energy_j
    e_dram = next.dram_energy_j

    e_gpu = 0.0
    credited_gpu = 0.0
    n_devices = min(len(prev.gpu_power_w), len(next.gpu_power_w))
    for d in range(n_devices):
        e_d = (prev.gpu_power_w[d] + next.gpu_power_w[d]) / 2.0 * dt
        e_gpu += e_d
        credited_gpu += shares.p_gpu.get(d, 0.0) * e_d

    return IntervalEnergy(
        t_start=prev.timestamp,
        t_end=next.timestamp,
        e_cpu_j=e_cpu,
        e_dram_j=e_dram,
        e_gpu_j=e_gpu,
        credited_cpu_j=shares.p_cpu * e_cpu,
        credited_dram_j=shares.p_dram * e_dram,
        credited_gpu_j=credited_gpu,
    )


@dataclass
class EnergyLedger:
    pue: float = 1.0
    raw_j: Dict[str, float] = field(
        default_factory=lambda: {"cpu": 0.0, "dram": 0.0, "gpu": 0.0}
    )
    credited_j: Dict[str, float] = field(
        default_factory=lambda: {"cpu": 0.0, "dram": 0.0, "gpu": 0.0}
    )

    def __post_init__(self):
        if self.pue < 1.0:
            raise ValueError("pue must be >= 1.0")

    @property
    def total_credited_j(self) -> float:
        return sum(self.credited_j.values())

    @property
    def e_total_kwh(self) -> float:
        return self.pue * self.total_credited_j / J_PER_KWH


def accumulate(ledger: EnergyLedger, interval: IntervalEnergy) -> EnergyLedger:
    ledger.raw_j["cpu"] += interval.e_cpu_j
    ledger.raw_j["dram"] += interval.e_dram_j
    ledger.raw_j["gpu"] += interval.e_gpu_j
    ledger.credited_j["cpu"] += interval.credited_cpu_j
    ledger.credited_j["dram"] += interval.credited_dram_j
    ledger.credited_j["gpu"] += interval.credited_gpu_j
    return ledger


@dataclass
class CarbonResult:
    kg_co2eq: Optional[float]
    scc_usd: Optional[tuple]  # (median, low, high)
    country: Optional[str]
    region_id: Optional[str]


def summarize(
    ledger: EnergyLedger, carbon: CarbonResult, duration_s: float, run_id: str
) -> ImpactSummary:
    kg = carbon.kg_co2eq
    scc = carbon.scc_usd
    return ImpactSummary(
        kwh=round_half_even(ledger.e_total_kwh, 3),
        kg_co2eq=round_half_even(kg, 3) if kg is not None else None,
        scc_usd=tuple(round_half_even(v, 2) for v in scc) if scc else None,
        country=carbon.country,
        region_id=carbon.region_id,
        duration_s=duration_s,
        run_id=run_id,
    )
