import io
import math

import pytest

from cyclonecast import hurdat2
from cyclonecast.hurdat2 import (
    Hurdat2ParseError,
    parse_coordinate,
    parse_data_line,
    parse_file,
    parse_header,
    serialize,
)

# fixtures shaped like the NOAA format document's samples
HEADER_KATRINA = "AL122005,            KATRINA,     34,"
MODERN_LINE = (
    "20050829, 1100,  , HU, 29.5N,  89.6W, 110,  923,  130,  110,   80,"
    "  110,   70,   60,   40,   60,   45,   35,   20,   30,"
)
MODERN_LINE_RMW = (
    "20210829, 1655, L, HU, 29.1N,  90.2W, 130,  931,  130,  110,   80,"
    "  110,   70,   60,   40,   60,   45,   35,   20,   30,   10"
)
EARLY_LINE = "18510625, 0000,  , HU, 28.0N,  94.8W,  80, -999,"
SENTINEL_LINE = (
    "19700801, 1200,  , TS, 20.0N,  60.0W, -99, -999, -999, -999, -999,"
    " -999, -999, -999, -999, -999, -999, -999, -999, -999,"
)

TINY_FILE = "\n".join([
    "AL011851,            UNNAMED,      3,",
    "18510625, 0000,  , HU, 28.0N,  94.8W,  80, -999,",
    "18510625, 0600,  , HU, 28.0N,  95.4W,  80, -999,",
    "18510625, 1200,  , HU, 28.0N,  96.0W,  80, -999,",
    "AL122005,            KATRINA,      2,",
    MODERN_LINE,
    "20050829, 1200,  , HU, 29.9N,  89.6W, 105,  925,  150,  120,   80,"
    "  120,   80,   70,   40,   70,   50,   40,   25,   35,",
]) + "\n"


class TestParseHeader:
    def test_katrina_header(self):
        h = parse_header(HEADER_KATRINA)
        assert (h.basin, h.cyclone_number, h.year) == ("AL", 12, 2005)
        assert h.name == "KATRINA"
        assert h.declared_entries == 34
        assert h.storm_id == "AL122005"

    def test_bad_field_count(self):
        with pytest.raises(ValueError, match="3 fields"):
            parse_header("AL122005, KATRINA,")

    def test_bad_basin(self):
        with pytest.raises(ValueError, match="cyclone id"):
            parse_header("XX122005, KATRINA, 34,")


class TestParseCoordinate:
    def test_north(self):
        assert parse_coordinate("28.0N") == 28.0

    def test_west(self):
        assert parse_coordinate("94.8W") == -94.8

    def test_equator(self):
        assert parse_coordinate("0.0N") == 0.0

    def test_south_and_east(self):
        assert parse_coordinate("15.3S") == -15.3
        assert parse_coordinate("140.1E") == 140.1

    def test_antimeridian_folding(self):
        assert parse_coordinate("181.0W") == pytest.approx(179.0)
        assert parse_coordinate("180.0W") == pytest.approx(180.0)

    def test_missing_hemisphere(self):
        with pytest.raises(ValueError, match="hemisphere"):
            parse_coordinate("28.0")

    def test_latitude_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            parse_coordinate("91.0N")


class TestParseDataLine:
    def test_modern_line(self):
        p = parse_data_line(MODERN_LINE)
        assert p.status == "HU"
        assert p.max_wind == 110.0
        assert p.min_pressure == 923.0
        assert p.latitude == 29.5
        assert p.longitude == -89.6
        assert p.record_identifier is None
        assert all(r is not None for r in p.radii)
        assert p.radii[0] == 130.0 and p.radii[11] == 30.0
        assert p.max_wind_radius is None

    def test_rmw_vintage_line(self):
        p = parse_data_line(MODERN_LINE_RMW)
        assert p.record_identifier == "L"
        assert p.max_wind_radius == 10.0
        assert p.timestamp.hour == 16 and p.timestamp.minute == 55

    def test_early_era_8_fields(self):
        p = parse_data_line(EARLY_LINE)
        assert p.max_wind == 80.0
        assert p.min_pressure is None
        assert all(r is None for r in p.radii)

    def test_sentinels_become_missing(self):
        p = parse_data_line(SENTINEL_LINE)
        assert p.max_wind is None  # -99 early-era wind
        assert p.min_pressure is None
        assert all(r is None for r in p.radii)

    def test_no_sentinel_values_survive(self):
        for line in (MODERN_LINE, EARLY_LINE, SENTINEL_LINE, MODERN_LINE_RMW):
            p = parse_data_line(line)
            stored = [p.max_wind, p.min_pressure, p.max_wind_radius, *p.radii]
            assert all(v is None or v >= 0 for v in stored)

    def test_bad_field_count(self):
        with pytest.raises(ValueError, match="fields"):
            parse_data_line("20050829, 1100, , HU, 29.5N,")

    def test_non_numeric_measurement(self):
        bad = MODERN_LINE.replace(" 110, ", " abc, ")
        with pytest.raises(ValueError, match="non-numeric"):
            parse_data_line(bad)


class TestParseFile:
    def test_empty_input(self):
        assert parse_file("") == []

    def test_tiny_file(self):
        tracks = parse_file(TINY_FILE)
        assert [t.storm_id for t in tracks] == ["AL011851", "AL122005"]
        assert [len(t) for t in tracks] == [3, 2]

    def test_point_count_matches_declared(self, corpus_text, corpus_tracks):
        for t in corpus_tracks:
            assert len(t.points) == t.header.declared_entries

    def test_sum_of_points_equals_data_lines(self, corpus_text, corpus_tracks):
        n_lines = sum(1 for line in corpus_text.splitlines() if line.strip())
        assert hurdat2.total_points(corpus_tracks) + len(corpus_tracks) == n_lines

    def test_chronological_order(self, corpus_tracks):
        for t in corpus_tracks:
            stamps = [p.timestamp for p in t.points]
            assert stamps == sorted(stamps)

    def test_truncated_file_reports_line(self):
        truncated = "\n".join(TINY_FILE.splitlines()[:3]) + "\n"
        with pytest.raises(Hurdat2ParseError, match="line 4"):
            parse_file(truncated)

    def test_malformed_data_line_reports_line(self):
        bad = TINY_FILE.replace("18510625, 0600,  , HU, 28.0N,  95.4W,  80, -999,",
                                "18510625, 0600,  , HU, 28.0N")
        with pytest.raises(Hurdat2ParseError, match="line 3"):
            parse_file(bad)

    def test_stream_input(self):
        tracks = parse_file(io.StringIO(TINY_FILE))
        assert len(tracks) == 2


class TestRoundTrip:
    def test_typed_round_trip(self, corpus_text):
        tracks = parse_file(corpus_text)
        again = parse_file(serialize(tracks))
        assert len(again) == len(tracks)
        for a, b in zip(tracks, again):
            assert a.header == b.header
            assert a.points == b.points

    def test_round_trip_tiny(self):
        tracks = parse_file(TINY_FILE)
        again = parse_file(serialize(tracks))
        assert [t.header for t in tracks] == [t.header for t in again]
        assert [t.points for t in tracks] == [t.points for t in again]

    def test_round_trip_rmw(self):
        text = (
            "AL092021,                IDA,      1,\n" + MODERN_LINE_RMW + "\n"
        )
        tracks = parse_file(text)
        again = parse_file(serialize(tracks))
        assert tracks[0].points == again[0].points
        assert again[0].points[0].max_wind_radius == 10.0


class TestCsvExport:
    def test_export(self, tmp_path, corpus_tracks):
        out = tmp_path / "tracks.csv"
        hurdat2.export_tracks_csv(corpus_tracks, out)
        lines = out.read_text().splitlines()
        assert lines[0].split(",") == list(hurdat2.TRACK_CSV_COLUMNS)
        assert len(lines) == 1 + hurdat2.total_points(corpus_tracks)
        first = lines[1].split(",")
        assert first[0] == corpus_tracks[0].storm_id
        # ISO-8601 timestamp
        assert "T" in first[2]
