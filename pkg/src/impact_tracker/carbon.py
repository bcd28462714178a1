"""Grid regions, carbon intensity, emissions, and social cost of carbon.

Region and SCC data ship as versioned JSON files under data/; every row
carries its own source citation and vintage year so values can be audited
and updated independently.
"""

import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    DegeneratePolygon,
    GeolocationUnavailable,
    NoRegion,
    UnknownCountry,
)
from .summary import round_half_even

REGION_OVERRIDE_ENV = "IMPACT_REGION_OVERRIDE"

_EPS = 1e-12


@dataclass
class Region:
    id: str
    display_name: str
    country: str  # ISO3 code
    geometry: List[List[Tuple[float, float]]]  # polygons of (lat, lon)
    area_km2: float
    avg_intensity_g_per_kwh: float
    source: str
    year: int
    cloud: bool = False
    realtime_provider: Optional[str] = None

    def __post_init__(self):
        if self.area_km2 <= 0:
            raise ValueError("area must be positive")
        if self.avg_intensity_g_per_kwh < 0:
            raise ValueError("intensity must be non-negative")

    def contains(self, point: Tuple[float, float]) -> bool:
        return any(point_in_polygon(point, poly) for poly in self.geometry)


@dataclass
class SccEntry:
    country: str
    median_usd_per_tco2: float
    low_usd_per_tco2: float
    high_usd_per_tco2: float

    def __post_init__(self):
        if not (
            self.low_usd_per_tco2
            <= self.median_usd_per_tco2
            <= self.high_usd_per_tco2
        ):
            raise ValueError("SCC bounds must satisfy low <= median <= high")


@dataclass
class IntensityRecord:
    region_id: str
    g_per_kwh: float
    kind: str  # "average" or "realtime"
    timestamp: Optional[float] = None

    def __post_init__(self):
        if self.kind == "realtime" and self.timestamp is None:
            raise ValueError("realtime intensity records require a timestamp")


def _on_segment(p, a, b) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if abs(cross) > _EPS:
        return False
    return (
        min(a[0], b[0]) - _EPS <= p[0] <= max(a[0], b[0]) + _EPS
        and min(a[1], b[1]) - _EPS <= p[1] <= max(a[1], b[1]) + _EPS
    )


def point_in_polygon(point: Tuple[float, float], polygon: Sequence) -> bool:
    """Even-odd ray casting; points on the boundary count as inside."""
    if len(polygon) < 3:
        raise DegeneratePolygon("polygon needs at least 3 vertices")
    x, y = point[0], point[1]
    inside = False
    n = len(polygon)
    for i in range(n):
        a = polygon[i]
        b = polygon[(i + 1) % n]
        if _on_segment((x, y), a, b):
            return True
        ay, by = a[1], b[1]
        if (ay > y) != (by > y):
            x_cross = a[0] + (y - ay) * (b[0] - a[0]) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def resolve_region(point: Tuple[float, float], regions: List[Region]) -> Region:
    """Smallest-area region containing the point; ties break on id."""
    containing = [r for r in regions if r.contains(point)]
    if not containing:
        raise NoRegion("no region geometry contains %r" % (point,))
    return min(containing, key=lambda r: (r.area_km2, r.id))


def geolocate(ip=None, provider=None, override: Optional[str] = None):
    """Region id from an override, else a lat/lon point from the provider.

    The override (explicit argument or IMPACT_REGION_OVERRIDE environment
    variable) short-circuits any network access.
    """
    override = override or os.environ.get(REGION_OVERRIDE_ENV)
    if override:
        return override
    if provider is None:
        raise GeolocationUnavailable("no geolocation provider configured")
    try:
        return provider.locate(ip)
    except Exception as e:
        raise GeolocationUnavailable(str(e)) from e


class HttpGeolocationProvider:
    """IP-to-coordinates lookup against a JSON geolocation endpoint."""

    def __init__(self, url_template: str = "https://ipapi.co/{ip}/json/",
                 timeout_s: float = 10.0):
        self.url_template = url_template
        self.timeout_s = timeout_s

    def locate(self, ip) -> Tuple[float, float]:
        import requests

        url = self.url_template.format(ip=ip or "")
        resp = requests.get(url, timeout=self.timeout_s)
        resp.raise_for_status()
        obj = resp.json()
        return float(obj["latitude"]), float(obj["longitude"])


def compute_emissions(kwh: float, intensity_g_per_kwh: float) -> float:
    """kgCO2eq = kWh x (g/kWh) / 1000."""
    if kwh < 0 or intensity_g_per_kwh < 0:
        raise ValueError("inputs must be non-negative")
    return kwh * intensity_g_per_kwh / 1000.0


def social_cost(kg_co2eq: float, entry: SccEntry) -> Tuple[float, float, float]:
    """(median, low, high) dollars, rounded half-even to cents."""
    if kg_co2eq < 0:
        raise ValueError("kg must be non-negative")
    t = kg_co2eq / 1000.0
    return (
        round_half_even(t * entry.median_usd_per_tco2, 2),
        round_half_even(t * entry.low_usd_per_tco2, 2),
        round_half_even(t * entry.high_usd_per_tco2, 2),
    )


def _data_text(name: str) -> str:
    return resources.files("impact_tracker").joinpath("data", name).read_text()


class RegionDatabase:
    """Immutable after load; safe for concurrent reads."""

    def __init__(self, regions: List[Region]):
        self.regions = list(regions)
        self._by_id = {r.id: r for r in self.regions}

    @classmethod
    def load_bundled(cls) -> "RegionDatabase":
        return cls.from_obj(json.loads(_data_text("regions.json")))

    @classmethod
    def from_file(cls, path) -> "RegionDatabase":
        with open(path) as f:
            return cls.from_obj(json.load(f))

    @classmethod
    def from_obj(cls, obj: dict) -> "RegionDatabase":
        regions = []
        for row in obj["regions"]:
            regions.append(
                Region(
                    id=row["id"],
                    display_name=row["display_name"],
                    country=row["country"],
                    geometry=[
                        [tuple(v) for v in poly] for poly in row["geometry"]
                    ],
                    area_km2=row["area_km2"],
                    avg_intensity_g_per_kwh=row["intensity_g_per_kwh"],
                    source=row["source"],
                    year=row["year"],
                    cloud=row.get("cloud", False),
                    realtime_provider=row.get("realtime_provider"),
                )
            )
        return cls(regions)

    def get(self, region_id: str) -> Region:
        try:
            return self._by_id[region_id]
        except KeyError:
            raise NoRegion("unknown region id %r" % (region_id,)) from None

    def resolve(self, point: Tuple[float, float]) -> Region:
        return resolve_region(point, self.regions)


class SccDatabase:
    def __init__(self, entries: Dict[str, SccEntry]):
        self._entries = dict(entries)

    @classmethod
    def load_bundled(cls) -> "SccDatabase":
        obj = json.loads(_data_text("scc.json"))
        entries = {}
        for row in obj["countries"]:
            entries[row["country"]] = SccEntry(
                country=row["country"],
                median_usd_per_tco2=row["median_usd_per_tco2"],
                low_usd_per_tco2=row["low_usd_per_tco2"],
                high_usd_per_tco2=row["high_usd_per_tco2"],
            )
        return cls(entries)

    def get(self, country: str) -> SccEntry:
        try:
            return self._entries[country]
        except KeyError:
            raise UnknownCountry("no SCC entry for country %r" % (country,)) from None

    def countries(self) -> List[str]:
        return sorted(self._entries)
