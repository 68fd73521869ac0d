"""Reader and writer for NOAA HURDAT2 best-track text files.

HURDAT2 files repeat a simple block structure: one header line per storm
followed by the declared number of observation lines.

Header line::

    AL122005,            KATRINA,     34,

    AL      - basin (AL = Atlantic, EP = Northeast Pacific, CP = North Central Pacific)
    12      - ATCF cyclone number for that year
    2005    - year
    KATRINA - name, or "UNNAMED"
    34      - number of best-track entries (rows) to follow

Observation line (2016 vintage, 20 fields; 2022+ vintages append a 21st
radius-of-maximum-wind field; some derivative files carry only the first 8)::

    20050829, 1100, L, HU, 29.5N, 89.6W, 110, 923, 130, 110, 80, 110, ...

    date, time, record identifier, status, latitude, longitude,
    max sustained wind (kt), min pressure (mb),
    then 12 wind radii (nmi): 34/50/64 kt thresholds x NE/SE/SW/NW quadrants.

Missing numeric values are encoded as -999 (and -99 for early-era winds);
they are surfaced as ``None``, never as numbers.
"""

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime

BASINS = frozenset({"AL", "EP", "CP"})

# The nine status codes the downstream pipeline recognizes; anything else is
# kept verbatim and filtered during cleaning.
KNOWN_STATUS_CODES = frozenset({"TD", "TS", "HU", "EX", "SD", "SS", "LO", "WV", "DB"})

RADII_COLUMNS = (
    "r34_ne", "r34_se", "r34_sw", "r34_nw",
    "r50_ne", "r50_se", "r50_sw", "r50_nw",
    "r64_ne", "r64_se", "r64_sw", "r64_nw",
)

TRACK_CSV_COLUMNS = (
    "storm_id", "name", "timestamp", "record_identifier", "status",
    "latitude", "longitude", "max_wind", "min_pressure",
) + RADII_COLUMNS + ("max_wind_radius",)


class Hurdat2ParseError(ValueError):
    """Raised on malformed HURDAT2 input; carries the offending line number."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class StormHeader:
    basin: str
    cyclone_number: int
    year: int
    name: str
    declared_entries: int

    @property
    def storm_id(self) -> str:
        return f"{self.basin}{self.cyclone_number:02d}{self.year:04d}"


@dataclass(frozen=True)
class TrackPoint:
    """One best-track observation; missing measurements are None."""

    timestamp: datetime
    record_identifier: str | None
    status: str
    latitude: float
    longitude: float
    max_wind: float | None
    min_pressure: float | None
    radii: tuple  # 12 entries of float | None, ordered as RADII_COLUMNS
    max_wind_radius: float | None = None

    def is_synoptic(self) -> bool:
        return self.timestamp.minute == 0 and self.timestamp.hour in (0, 6, 12, 18)

    def has_known_status(self) -> bool:
        return self.status in KNOWN_STATUS_CODES

    def is_complete(self) -> bool:
        """True when every measurement the pipeline needs is present."""
        return (
            self.max_wind is not None
            and self.min_pressure is not None
            and all(r is not None for r in self.radii)
        )


@dataclass
class StormTrack:
    header: StormHeader
    points: list = field(default_factory=list)

    @property
    def storm_id(self) -> str:
        return self.header.storm_id

    @property
    def name(self) -> str:
        return self.header.name

    def __len__(self):
        return len(self.points)


def parse_coordinate(token: str) -> float:
    """Parse a hemisphere-suffixed coordinate like ``28.0N`` or ``94.8W``.

    N/E map to positive, S/W to negative. Longitudes are normalized into
    (-180, 180] so Pacific tracks crossing the antimeridian stay continuous.
    """
    token = token.strip()
    if not token:
        raise ValueError("empty coordinate token")
    hemi = token[-1]
    if hemi not in "NSEW":
        raise ValueError(f"coordinate {token!r} lacks a hemisphere letter")
    try:
        magnitude = float(token[:-1])
    except ValueError:
        raise ValueError(f"coordinate {token!r} has a non-numeric magnitude") from None
    if magnitude < 0:
        raise ValueError(f"coordinate {token!r} has a negative magnitude")
    if hemi in "NS":
        if magnitude > 90.0:
            raise ValueError(f"latitude {token!r} out of range [-90, 90]")
        return magnitude if hemi == "N" else -magnitude
    if magnitude >= 360.0:
        raise ValueError(f"longitude {token!r} out of range")
    lon = magnitude if hemi == "E" else -magnitude
    # values like 194.5W occur in the Pacific file; fold into (-180, 180]
    if lon <= -180.0:
        lon += 360.0
    elif lon > 180.0:
        lon -= 360.0
    return lon


def _parse_measure(token: str) -> float | None:
    """Numeric field where negative sentinels (-99, -999) mean missing."""
    value = float(token)
    return None if value < 0 else value


def _split_fields(line: str) -> list:
    fields = [f.strip() for f in line.split(",")]
    if fields and fields[-1] == "":  # trailing comma
        fields.pop()
    return fields


def parse_header(line: str) -> StormHeader:
    fields = _split_fields(line)
    if len(fields) != 3:
        raise ValueError(f"header must have 3 fields, got {len(fields)}")
    cyclone_id, name, declared = fields
    if len(cyclone_id) != 8 or cyclone_id[:2] not in BASINS:
        raise ValueError(f"bad cyclone id {cyclone_id!r}")
    try:
        number = int(cyclone_id[2:4])
        year = int(cyclone_id[4:8])
        declared_entries = int(declared)
    except ValueError:
        raise ValueError(f"non-numeric header field in {line.strip()!r}") from None
    if declared_entries < 0:
        raise ValueError(f"negative entry count {declared_entries}")
    return StormHeader(
        basin=cyclone_id[:2],
        cyclone_number=number,
        year=year,
        name=name,
        declared_entries=declared_entries,
    )


def parse_data_line(line: str) -> TrackPoint:
    fields = _split_fields(line)
    # 8 = pre-radii era, 20 = 2016 vintage, 21 = 2022+ vintage (adds RMW)
    if len(fields) not in (8, 20, 21):
        raise ValueError(f"data line must have 8, 20 or 21 fields, got {len(fields)}")
    try:
        timestamp = datetime.strptime(fields[0] + fields[1], "%Y%m%d%H%M")
    except ValueError:
        raise ValueError(f"bad date/time {fields[0]!r} {fields[1]!r}") from None
    record_identifier = fields[2] or None
    status = fields[3]
    latitude = parse_coordinate(fields[4])
    longitude = parse_coordinate(fields[5])
    try:
        max_wind = _parse_measure(fields[6])
        min_pressure = _parse_measure(fields[7])
        if len(fields) >= 20:
            radii = tuple(_parse_measure(f) for f in fields[8:20])
        else:
            radii = (None,) * 12
        max_wind_radius = _parse_measure(fields[20]) if len(fields) == 21 else None
    except ValueError:
        raise ValueError(f"non-numeric measurement in {line.strip()!r}") from None
    return TrackPoint(
        timestamp=timestamp,
        record_identifier=record_identifier,
        status=status,
        latitude=latitude,
        longitude=longitude,
        max_wind=max_wind,
        min_pressure=min_pressure,
        radii=radii,
        max_wind_radius=max_wind_radius,
    )


def parse_file(stream) -> list:
    """Parse a HURDAT2 text stream into a list of StormTrack.

    Storms come back in file order with points in file (chronological) order;
    every storm's point count is checked against its declared entry count.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    tracks = []
    line_no = 0
    while True:
        header_line = stream.readline()
        if not header_line:
            break
        line_no += 1
        if not header_line.strip():
            continue
        try:
            header = parse_header(header_line)
        except ValueError as exc:
            raise Hurdat2ParseError(str(exc), line_no) from None
        points = []
        for _ in range(header.declared_entries):
            data_line = stream.readline()
            line_no += 1
            if not data_line:
                raise Hurdat2ParseError(
                    f"{header.storm_id}: file ended after "
                    f"{len(points)}/{header.declared_entries} entries",
                    line_no,
                )
            try:
                points.append(parse_data_line(data_line))
            except ValueError as exc:
                raise Hurdat2ParseError(str(exc), line_no) from None
        tracks.append(StormTrack(header=header, points=points))
    return tracks


def parse_path(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return parse_file(fh)


def _format_latitude(lat: float) -> str:
    hemi = "N" if lat >= 0 else "S"
    return f"{abs(lat):.1f}{hemi}"


def _format_longitude(lon: float) -> str:
    hemi = "E" if lon >= 0 else "W"
    return f"{abs(lon):.1f}{hemi}"


def _format_measure(value: float | None) -> str:
    return "-999" if value is None else f"{value:.0f}"


def serialize_track(track: StormTrack) -> str:
    """Render one storm back to HURDAT2 text (canonical 20/21-field lines)."""
    header = track.header
    lines = [
        f"{header.storm_id:>8},{header.name:>19},{len(track.points):>7},"
    ]
    with_rmw = any(p.max_wind_radius is not None for p in track.points)
    for p in track.points:
        fields = [
            p.timestamp.strftime("%Y%m%d"),
            f" {p.timestamp.strftime('%H%M')}",
            f"{p.record_identifier or '':>2}",
            f"{p.status:>3}",
            f"{_format_latitude(p.latitude):>6}",
            f"{_format_longitude(p.longitude):>7}",
            f"{_format_measure(p.max_wind):>4}",
            f"{_format_measure(p.min_pressure):>5}",
        ]
        fields.extend(f"{_format_measure(r):>5}" for r in p.radii)
        if with_rmw:
            fields.append(f"{_format_measure(p.max_wind_radius):>5}")
        lines.append(",".join(fields) + ",")
    return "\n".join(lines) + "\n"


def serialize(tracks) -> str:
    return "".join(serialize_track(t) for t in tracks)


def export_tracks_csv(tracks, path) -> None:
    """Normalized CSV export: one row per TrackPoint, ISO-8601 timestamps."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACK_CSV_COLUMNS)
        for track in tracks:
            for p in track.points:
                row = [
                    track.storm_id,
                    track.name,
                    p.timestamp.isoformat(),
                    p.record_identifier or "",
                    p.status,
                    f"{p.latitude:.1f}",
                    f"{p.longitude:.1f}",
                    "" if p.max_wind is None else f"{p.max_wind:.0f}",
                    "" if p.min_pressure is None else f"{p.min_pressure:.0f}",
                ]
                row.extend("" if r is None else f"{r:.0f}" for r in p.radii)
                row.append(
                    "" if p.max_wind_radius is None else f"{p.max_wind_radius:.0f}"
                )
                writer.writerow(row)


def total_points(tracks) -> int:
    return sum(len(t) for t in tracks)
