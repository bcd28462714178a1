import pytest

from impact_tracker.attribution import IntervalEnergy, J_PER_KWH
from impact_tracker.errors import ProviderUnavailable
from impact_tracker.realtime import (
    IntensitySeries,
    MockIntensityProvider,
    integrate_time_varying_emissions,
    poll_realtime_intensity,
)


def interval(t0, t1, credited_j):
    return IntervalEnergy(
        t_start=t0, t_end=t1,
        e_cpu_j=credited_j, e_dram_j=0.0, e_gpu_j=0.0,
        credited_cpu_j=credited_j, credited_dram_j=0.0, credited_gpu_j=0.0,
    )


def uniform_intervals(t0, t1, n, total_kwh):
    total_j = total_kwh * J_PER_KWH
    dt = (t1 - t0) / n
    return [
        interval(t0 + i * dt, t0 + (i + 1) * dt, total_j / n) for i in range(n)
    ]


def test_poll_returns_record():
    provider = MockIntensityProvider([83.0])
    rec = poll_realtime_intensity(provider, "US-CA", timestamp=1000.0)
    assert rec.g_per_kwh == 83.0
    assert rec.kind == "realtime"
    assert rec.timestamp == 1000.0


def test_provider_outage_raises():
    provider = MockIntensityProvider([None])
    with pytest.raises(ProviderUnavailable):
        poll_realtime_intensity(provider, "US-CA", timestamp=0.0)


def test_two_hour_step_function():
    # 1 kWh spread over 2 h; intensity 100 then 200 -> 0.5*0.1 + 0.5*0.2 = 0.150 kg
    series = IntensitySeries(region_id="R")
    series.add(0.0, 100.0)
    series.add(3600.0, 200.0)
    intervals = uniform_intervals(0.0, 7200.0, 7200 // 300, total_kwh=1.0)
    kg = integrate_time_varying_emissions(intervals, series, fallback_g_per_kwh=999.0)
    assert kg == pytest.approx(0.150, abs=1e-12)


def test_constant_series_reduces_to_scalar():
    series = IntensitySeries(region_id="R")
    series.add(0.0, 250.0)
    intervals = uniform_intervals(0.0, 1000.0, 10, total_kwh=0.4)
    kg = integrate_time_varying_emissions(intervals, series, fallback_g_per_kwh=0.0)
    assert kg == pytest.approx(0.4 * 250.0 / 1000.0)


def test_empty_series_uses_fallback_exactly():
    intervals = uniform_intervals(0.0, 1000.0, 7, total_kwh=0.3)
    kg = integrate_time_varying_emissions(intervals, None, fallback_g_per_kwh=432.7)
    assert kg == pytest.approx(0.3 * 432.7 / 1000.0)


def test_fallback_covers_span_before_first_poll():
    series = IntensitySeries(region_id="R")
    series.add(500.0, 100.0)
    intervals = uniform_intervals(0.0, 1000.0, 2, total_kwh=1.0)
    # first interval starts at t=0 before any poll -> fallback 300
    kg = integrate_time_varying_emissions(intervals, series, fallback_g_per_kwh=300.0)
    assert kg == pytest.approx(0.5 * 0.3 + 0.5 * 0.1)


def test_gap_during_outage_covered_by_fallback():
    # poll at 0 ok, poll at 600 missed, poll at 1200 ok: the step function
    # simply holds the 0-poll value through the gap
    series = IntensitySeries(region_id="R")
    series.add(0.0, 100.0)
    series.add(1200.0, 400.0)
    intervals = uniform_intervals(0.0, 1800.0, 3, total_kwh=3.0)
    kg = integrate_time_varying_emissions(intervals, series, fallback_g_per_kwh=999.0)
    assert kg == pytest.approx(1.0 * 0.1 + 1.0 * 0.1 + 1.0 * 0.4)


def test_partition_additivity():
    series = IntensitySeries(region_id="R")
    series.add(0.0, 120.0)
    series.add(900.0, 90.0)
    coarse = uniform_intervals(0.0, 1800.0, 2, total_kwh=1.0)
    fine = uniform_intervals(0.0, 900.0, 3, total_kwh=0.5) + uniform_intervals(
        900.0, 1800.0, 3, total_kwh=0.5
    )
    a = integrate_time_varying_emissions(coarse, series, 0.0)
    b = integrate_time_varying_emissions(fine, series, 0.0)
    assert a == pytest.approx(b, rel=1e-12)


def test_result_bounded_by_series_extremes():
    series = IntensitySeries(region_id="R")
    for i, v in enumerate([80.0, 200.0, 140.0, 60.0]):
        series.add(i * 300.0, v)
    intervals = uniform_intervals(0.0, 1200.0, 24, total_kwh=2.0)
    kg = integrate_time_varying_emissions(intervals, series, fallback_g_per_kwh=100.0)
    assert 2.0 * 60.0 / 1000.0 <= kg <= 2.0 * 200.0 / 1000.0


def test_pue_scales_result():
    intervals = uniform_intervals(0.0, 100.0, 4, total_kwh=0.1)
    base = integrate_time_varying_emissions(intervals, None, 100.0, pue=1.0)
    assert integrate_time_varying_emissions(intervals, None, 100.0, pue=1.58) == (
        pytest.approx(1.58 * base)
    )


def test_series_rejects_non_increasing_timestamps():
    series = IntensitySeries(region_id="R")
    series.add(10.0, 100.0)
    with pytest.raises(ValueError):
        series.add(10.0, 120.0)
