"""Run summary record shared between the monitor, log, and reporting layers."""

from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_EVEN
from typing import Optional, Tuple


def round_half_even(value: float, decimals: int) -> float:
    """Banker's rounding, used for all reported kWh/kg/dollar figures."""
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_EVEN))


@dataclass
class ImpactSummary:
    kwh: float
    kg_co2eq: Optional[float]  # None when no region could be resolved
    scc_usd: Optional[Tuple[float, float, float]]  # (median, low, high)
    country: Optional[str]
    region_id: Optional[str]
    duration_s: float
    run_id: str

    def to_dict(self) -> dict:
        return {
            "kwh": self.kwh,
            "kg_co2eq": self.kg_co2eq,
            "scc_usd": list(self.scc_usd) if self.scc_usd is not None else None,
            "country": self.country,
            "region_id": self.region_id,
            "duration_s": self.duration_s,
            "run_id": self.run_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImpactSummary":
        scc = d.get("scc_usd")
        return cls(
            kwh=d["kwh"],
            kg_co2eq=d.get("kg_co2eq"),
            scc_usd=tuple(scc) if scc is not None else None,
            country=d.get("country"),
            region_id=d.get("region_id"),
            duration_s=d["duration_s"],
            run_id=d["run_id"],
        )
