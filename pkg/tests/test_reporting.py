import math

import pytest

from impact_tracker.carbon import RegionDatabase
from impact_tracker.errors import EmptyInput, ParseFailure
from impact_tracker.reporting import (
    STATEMENT_TEMPLATE,
    aggregate_experiments,
    compute_savings,
    generate_impact_statement,
    load_run,
    load_summaries,
    region_emissions_report,
)
from impact_tracker.sensors.replay import constant_power_trace
from impact_tracker.summary import ImpactSummary

GOLDEN_STATEMENT = (
    "This work contributed 8.021 kg of $CO_{2eq}$ to the atmosphere and "
    "used 24.344 kWh of electricity, having a USA-specific social cost of "
    "carbon of $0.38 ($0.00, $0.95)."
)


def summary(kwh, kg, run_id="r"):
    return ImpactSummary(kwh=kwh, kg_co2eq=kg, scc_usd=None, country="USA",
                         region_id="USA", duration_s=1.0, run_id=run_id)


class TestStatement:
    def test_golden_statement_byte_for_byte(self):
        text = generate_impact_statement([summary(24.344, 8.021)], "USA")
        assert text == GOLDEN_STATEMENT

    def test_totals_sum_across_runs(self):
        parts = [summary(10.0, 3.0), summary(14.344, 5.021)]
        assert generate_impact_statement(parts, "USA") == GOLDEN_STATEMENT

    def test_zero_run(self):
        text = generate_impact_statement([summary(0.0, 0.0)], "USA")
        assert "0.000 kg" in text
        assert "$0.00 ($0.00, $0.00)" in text

    def test_missing_emissions_counted_as_zero(self):
        runs = [summary(5.0, 1.0), summary(2.0, None)]
        text = generate_impact_statement(runs, "USA")
        assert "1.000 kg" in text
        assert "7.000 kWh" in text

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            generate_impact_statement([], "USA")

    def test_template_is_latex_friendly(self):
        assert "$CO_{{2eq}}$" in STATEMENT_TEMPLATE


class TestAggregation:
    def test_mean_and_standard_error(self):
        mean, se = aggregate_experiments([1.0, 2.0, 3.0])
        assert mean == pytest.approx(2.0)
        assert se == pytest.approx(1.0 / math.sqrt(3))

    def test_single_value_has_zero_se(self):
        assert aggregate_experiments([5.0]) == (5.0, 0.0)

    def test_identical_values_have_zero_se(self):
        mean, se = aggregate_experiments([4.0] * 10)
        assert (mean, se) == (4.0, 0.0)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            aggregate_experiments([])


class TestSavings:
    def test_published_magnitude(self):
        # 1175 runs at a 0.75574 kWh per-run difference
        assert compute_savings(1175, 0.0, 0.75574) == pytest.approx(888.0, abs=0.5)

    def test_negative_when_option_a_costs_more(self):
        assert compute_savings(10, 2.0, 1.0) == pytest.approx(-10.0)

    def test_zero_runs(self):
        assert compute_savings(0, 1.0, 2.0) == 0.0

    def test_negative_runs_rejected(self):
        with pytest.raises(ValueError):
            compute_savings(-1, 1.0, 2.0)


class TestRegionReport:
    def test_sorted_cleanest_first(self):
        rows = region_emissions_report(RegionDatabase.load_bundled().regions)
        intensities = [r.intensity_g_per_kwh for r in rows]
        assert intensities == sorted(intensities)
        ids = [r.id for r in rows]
        assert ids.index("CA-QC") < ids.index("EST")

    def test_cloud_only_filter(self):
        rows = region_emissions_report(
            RegionDatabase.load_bundled().regions, cloud_only=True
        )
        assert rows
        assert all(r.cloud for r in rows)
        assert "USA" not in [r.id for r in rows]

    def test_rows_cite_sources(self):
        for row in region_emissions_report(RegionDatabase.load_bundled().regions):
            assert row.source


class TestLogLoading:
    def test_load_run_round_trip(self, run_replay):
        monitor, summary = run_replay(
            constant_power_trace(4, gpu_power_w=100.0), region_override="EST"
        )
        report = load_run(monitor.config.log_dir)
        assert report.summary == summary
        assert len(report.samples) == 5
        assert report.header.pue == 1.0
        assert report.warnings == 0

    def test_load_run_requires_final_record(self, tmp_path):
        from impact_tracker.runlog import LogHeader, LogRecord, append_record

        path = tmp_path / "impact_log.jsonl"
        header = LogHeader(schema_version="1.0.0", tool_version="0.1.0",
                           start_time=1.0)
        append_record(path, LogRecord(kind="header", timestamp=1.0,
                                      payload=header.to_payload()))
        with pytest.raises(ParseFailure):
            load_run(str(tmp_path))

    def test_load_summaries_empty(self):
        with pytest.raises(EmptyInput):
            load_summaries([])
