"""Realtime grid intensity polling and time-varying emission integration."""

import bisect
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import requests

from .attribution import IntervalEnergy, J_PER_KWH
from .carbon import IntensityRecord
from .errors import ProviderUnavailable

DEFAULT_POLL_INTERVAL_S = 300.0
DEFAULT_TIMEOUT_S = 10.0


@dataclass
class IntensitySeries:
    region_id: str
    points: List[Tuple[float, float]] = field(default_factory=list)

    def add(self, timestamp: float, g_per_kwh: float) -> None:
        if g_per_kwh < 0:
            raise ValueError("intensity must be non-negative")
        if self.points and timestamp <= self.points[-1][0]:
            raise ValueError("intensity timestamps must be strictly increasing")
        self.points.append((timestamp, g_per_kwh))

    def value_at(self, t: float, fallback: float) -> float:
        """Most recent polled value at or before t; fallback before the first poll."""
        times = [p[0] for p in self.points]
        i = bisect.bisect_right(times, t)
        if i == 0:
            return fallback
        return self.points[i - 1][1]


class MockIntensityProvider:
    """Scripted provider for tests; a None value simulates an outage."""

    def __init__(self, values):
        self._values = list(values)
        self._i = 0
        self.calls = 0

    def fetch(self) -> float:
        self.calls += 1
        if self._i >= len(self._values):
            raise ProviderUnavailable("mock provider exhausted")
        v = self._values[self._i]
        self._i += 1
        if v is None:
            raise ProviderUnavailable("scripted provider outage")
        return float(v)


class HttpIntensityProvider:
    """Fetches a single g/kWh float from an HTTP endpoint.

    Shaped like the California grid operator feed: a GET returning JSON from
    which a configured key path selects the current intensity.
    """

    def __init__(self, url: str, json_path: Sequence = ("intensity",),
                 timeout_s: float = DEFAULT_TIMEOUT_S):
        self.url = url
        self.json_path = list(json_path)
        self.timeout_s = timeout_s

    def fetch(self) -> float:
        try:
            resp = requests.get(self.url, timeout=self.timeout_s)
            resp.raise_for_status()
            value = resp.json()
            for key in self.json_path:
                value = value[key]
            return float(value)
        except Exception as e:
            raise ProviderUnavailable(str(e)) from e


def poll_realtime_intensity(
    provider, region_id: str, timestamp: float
) -> IntensityRecord:
    """One poll; ProviderUnavailable propagates for the caller to log."""
    value = provider.fetch()
    return IntensityRecord(
        region_id=region_id, g_per_kwh=value, kind="realtime", timestamp=timestamp
    )


def integrate_time_varying_emissions(
    energy_intervals: List[IntervalEnergy],
    series: Optional[IntensitySeries],
    fallback_g_per_kwh: float,
    pue: float = 1.0,
) -> float:
    """Sum per-interval credited kWh times the step-function intensity.

    Each interval uses the intensity in force at its start (zero-order hold
    between polls); spans before the first poll use the fallback average.
    """
    total_kg = 0.0
    for iv in energy_intervals:
        kwh = pue * iv.credited_total_j / J_PER_KWH
        if series is not None and series.points:
            g = series.value_at(iv.t_start, fallback_g_per_kwh)
        else:
            g = fallback_g_per_kwh
        total_kg += kwh * g / 1000.0
    return total_kg
