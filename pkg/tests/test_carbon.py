import random

import pytest

from impact_tracker.carbon import (
    Region,
    RegionDatabase,
    SccDatabase,
    SccEntry,
    compute_emissions,
    geolocate,
    point_in_polygon,
    resolve_region,
    social_cost,
)
from impact_tracker.errors import (
    DegeneratePolygon,
    GeolocationUnavailable,
    NoRegion,
    UnknownCountry,
)

UNIT_SQUARE = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]


def make_region(id, lo, hi, area, intensity=100.0, country="USA"):
    (y0, x0), (y1, x1) = lo, hi
    return Region(
        id=id, display_name=id, country=country,
        geometry=[[(y0, x0), (y0, x1), (y1, x1), (y1, x0)]],
        area_km2=area, avg_intensity_g_per_kwh=intensity,
        source="test", year=2017,
    )


class TestPointInPolygon:
    def test_interior(self):
        assert point_in_polygon((0.5, 0.5), UNIT_SQUARE)

    def test_exterior(self):
        assert not point_in_polygon((2.0, 2.0), UNIT_SQUARE)

    def test_edge_counts_as_inside(self):
        assert point_in_polygon((0.0, 0.5), UNIT_SQUARE)

    def test_vertex_counts_as_inside(self):
        assert point_in_polygon((0.0, 0.0), UNIT_SQUARE)

    def test_degenerate_polygon(self):
        with pytest.raises(DegeneratePolygon):
            point_in_polygon((0.0, 0.0), [(0.0, 0.0), (1.0, 1.0)])

    def test_concave_polygon(self):
        # L-shape: unit square minus its upper-right quadrant
        l_shape = [(0, 0), (0, 1), (0.5, 1), (0.5, 0.5), (1, 0.5), (1, 0)]
        assert point_in_polygon((0.25, 0.75), l_shape)
        assert not point_in_polygon((0.75, 0.75), l_shape)

    def test_matches_matplotlib_oracle_on_random_points(self):
        from matplotlib.path import Path

        rng = random.Random(7)
        poly = [(0, 0), (0, 4), (2, 5), (4, 4), (3, 1)]
        oracle = Path([(x, y) for y, x in poly])
        for _ in range(500):
            # random continuous points almost surely avoid the boundary,
            # where the two implementations legitimately differ
            p = (rng.uniform(-1, 6), rng.uniform(-1, 6))
            assert point_in_polygon(p, poly) == bool(
                oracle.contains_point((p[1], p[0]))
            )


class TestResolveRegion:
    def test_nested_resolves_to_smallest(self):
        country = make_region("COUNTRY", (0, 0), (10, 10), area=100.0)
        state = make_region("STATE", (2, 2), (5, 5), area=9.0)
        assert resolve_region((3.0, 3.0), [country, state]).id == "STATE"

    def test_only_outer_contains(self):
        country = make_region("COUNTRY", (0, 0), (10, 10), area=100.0)
        state = make_region("STATE", (2, 2), (5, 5), area=9.0)
        assert resolve_region((8.0, 8.0), [country, state]).id == "COUNTRY"

    def test_no_region(self):
        with pytest.raises(NoRegion):
            resolve_region((50.0, 50.0),
                           [make_region("R", (0, 0), (10, 10), area=1.0)])

    def test_area_tie_breaks_on_id(self):
        a = make_region("AAA", (0, 0), (10, 10), area=5.0)
        b = make_region("BBB", (0, 0), (10, 10), area=5.0)
        assert resolve_region((1.0, 1.0), [b, a]).id == "AAA"

    def test_random_points_against_brute_force_scan(self):
        rng = random.Random(42)
        regions = [
            make_region("R%02d" % i,
                        (rng.uniform(0, 50), rng.uniform(0, 50)),
                        (rng.uniform(50, 100), rng.uniform(50, 100)),
                        area=rng.uniform(1, 1000))
            for i in range(12)
        ]
        for _ in range(1000):
            p = (rng.uniform(0, 100), rng.uniform(0, 100))
            containing = [r for r in regions if r.contains(p)]
            if not containing:
                with pytest.raises(NoRegion):
                    resolve_region(p, regions)
                continue
            got = resolve_region(p, regions)
            assert got.contains(p)
            best = min(containing, key=lambda r: (r.area_km2, r.id))
            assert got.id == best.id
            assert all(got.area_km2 <= r.area_km2 for r in containing)


class TestBundledData:
    def test_san_francisco_resolves_to_california(self):
        db = RegionDatabase.load_bundled()
        assert db.resolve((37.77, -122.42)).id == "US-CA"

    def test_kansas_resolves_to_usa(self):
        db = RegionDatabase.load_bundled()
        assert db.resolve((38.5, -98.0)).id == "USA"

    def test_mid_ocean_has_no_region(self):
        db = RegionDatabase.load_bundled()
        with pytest.raises(NoRegion):
            db.resolve((0.0, -30.0))

    def test_quebec_estonia_ratio(self):
        db = RegionDatabase.load_bundled()
        qc = db.get("CA-QC").avg_intensity_g_per_kwh
        ee = db.get("EST").avg_intensity_g_per_kwh
        assert qc * 30 <= ee * 1.1

    def test_every_region_cites_a_source(self):
        for r in RegionDatabase.load_bundled().regions:
            assert r.source
            assert r.year >= 2015


class TestEmissions:
    def test_coal_average(self):
        assert compute_emissions(1.0, 820.0) == pytest.approx(0.820)

    def test_hydro_average(self):
        assert compute_emissions(1.0, 24.0) == pytest.approx(0.024)

    def test_zero(self):
        assert compute_emissions(0.0, 500.0) == 0.0

    def test_linear_in_both_arguments(self):
        base = compute_emissions(2.0, 100.0)
        assert compute_emissions(4.0, 100.0) == pytest.approx(2 * base)
        assert compute_emissions(2.0, 300.0) == pytest.approx(3 * base)


class TestSocialCost:
    def test_paper_statement_values(self):
        # division oracle: 0.38 / 0.008021 t ~= 47.4 $/t median
        entry = SccDatabase.load_bundled().get("USA")
        assert entry.median_usd_per_tco2 == pytest.approx(
            0.38 / (8.021 / 1000.0), rel=0.01
        )
        assert social_cost(8.021, entry) == (0.38, 0.0, 0.95)

    def test_simple_arithmetic(self):
        entry = SccEntry(country="XXX", median_usd_per_tco2=48.0,
                         low_usd_per_tco2=10.0, high_usd_per_tco2=100.0)
        assert social_cost(1000.0, entry) == (48.0, 10.0, 100.0)

    def test_zero(self):
        entry = SccDatabase.load_bundled().get("USA")
        assert social_cost(0.0, entry) == (0.0, 0.0, 0.0)

    def test_ordering_preserved(self):
        for country in SccDatabase.load_bundled().countries():
            entry = SccDatabase.load_bundled().get(country)
            for kg in [0.0, 1.0, 123.456, 1e6]:
                m, l, h = social_cost(kg, entry)
                assert l <= m <= h

    def test_unknown_country(self):
        with pytest.raises(UnknownCountry):
            SccDatabase.load_bundled().get("ZZZ")


class TestGeolocate:
    def test_override_skips_provider(self):
        class ExplodingProvider:
            def locate(self, ip):
                raise AssertionError("must not be called")

        assert geolocate(provider=ExplodingProvider(), override="CA-QC") == "CA-QC"

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("IMPACT_REGION_OVERRIDE", "EST")
        assert geolocate() == "EST"

    def test_provider_passthrough(self):
        class StaticProvider:
            def locate(self, ip):
                return (37.77, -122.42)

        assert geolocate(provider=StaticProvider()) == (37.77, -122.42)

    def test_provider_failure_becomes_unavailable(self):
        class TimeoutProvider:
            def locate(self, ip):
                raise TimeoutError("timed out")

        with pytest.raises(GeolocationUnavailable):
            geolocate(provider=TimeoutProvider())

    def test_no_provider(self):
        with pytest.raises(GeolocationUnavailable):
            geolocate()
