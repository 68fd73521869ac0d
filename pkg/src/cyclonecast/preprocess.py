"""Feature scaling, displacement geometry, and dataset cleaning.

Coordinates are mapped onto a normalized [0, 1] grid with fixed physical
bounds (longitude -180..180 -> x, latitude -90..90 -> y, month 1..12), wind,
pressure, and the 12 wind radii are standardized (z-scores, population std),
and per-step movement is expressed as a (length, direction) pair with the
direction measured clockwise from north in [0, 2pi).
"""

import csv
import math
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import hurdat2
from ._validation import check_is_fitted

LON_BOUNDS = (-180.0, 180.0)
LAT_BOUNDS = (-90.0, 90.0)
MONTH_BOUNDS = (1.0, 12.0)

SYNOPTIC_STEP = timedelta(hours=6)

#: km per normalized grid unit: 111.32 km/deg x the 180-degree latitude span
#: that one unit of the grid represents. Used to convert displacement-length
#: errors to km.
KM_PER_UNIT = 111.32 * 180.0

CLEAN_CSV_COLUMNS = (
    "storm_id", "timestamp", "x", "y", "month_norm", "wind_std", "pressure_std",
) + tuple(f"{c}_std" for c in hurdat2.RADII_COLUMNS) + (
    "length", "direction", "status",
)


class ConstantFeatureError(ValueError):
    """A feature column has zero variance and cannot be standardized."""


def minmax_normalize(x, lower, upper):
    """Map x linearly so that lower -> 0 and upper -> 1."""
    if not upper > lower:
        raise ValueError(f"max must exceed min, got [{lower}, {upper}]")
    return (np.asarray(x, dtype=float) - lower) / (upper - lower)


def standardize(x, mean, std):
    """z-score: remove the mean, scale to unit variance."""
    if not std > 0:
        raise ConstantFeatureError(f"standard deviation must be positive, got {std}")
    return (np.asarray(x, dtype=float) - mean) / std


def angle_between(a, b) -> float:
    """Unsigned angle in [0, pi] between two 2-vectors via the dot product."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = math.hypot(a[0], a[1])
    nb = math.hypot(b[0], b[1])
    if na == 0.0 or nb == 0.0:
        raise ValueError("angle_between requires non-zero vectors")
    cos = float(np.dot(a, b)) / (na * nb)
    cos = min(1.0, max(-1.0, cos))
    return math.acos(cos)


NORTH = (0.0, 1.0)


@dataclass(frozen=True)
class Displacement:
    """Per-step movement on the normalized grid.

    direction is measured clockwise from north in [0, 2pi); a zero-length
    displacement has direction 0 by convention.
    """

    length: float
    direction: float


def displacement_from(prev_xy, cur_xy) -> Displacement:
    dx = cur_xy[0] - prev_xy[0]
    dy = cur_xy[1] - prev_xy[1]
    length = math.hypot(dx, dy)
    if length == 0.0:
        return Displacement(0.0, 0.0)
    angle = angle_between((dx, dy), NORTH)
    # the arccos angle is unsigned; westward motion reflects to the
    # clockwise-from-north convention
    direction = (2.0 * math.pi - angle) if dx < 0 else angle
    if direction >= 2.0 * math.pi:
        direction -= 2.0 * math.pi
    return Displacement(length, direction)


class FixedMinMaxScaler(BaseEstimator, TransformerMixin):
    """Min-max scaler over a known physical range, so no fitting is needed.

    inverse_transform(transform(x)) == x to machine precision for in-range x.
    """

    def __init__(self, lower=0.0, upper=1.0):
        self.lower = lower
        self.upper = upper

    def fit(self, X=None, y=None):
        if not self.upper > self.lower:
            raise ValueError(f"max must exceed min, got [{self.lower}, {self.upper}]")
        return self

    def transform(self, X):
        return minmax_normalize(X, self.lower, self.upper)

    def inverse_transform(self, X):
        return np.asarray(X, dtype=float) * (self.upper - self.lower) + self.lower


class StandardScaler(BaseEstimator, TransformerMixin):
    """Column-wise z-score scaler using the population standard deviation."""

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[0] < 2:
            raise ValueError("need at least 2 rows to fit a standard scaler")
        self.mean_ = X.mean(axis=0)
        self.std_ = X.std(axis=0)
        bad = np.nonzero(self.std_ == 0)[0]
        if bad.size:
            raise ConstantFeatureError(
                f"constant column(s) at index {bad.tolist()} cannot be standardized"
            )
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = np.asarray(X, dtype=float)
        return (X - self.mean_) / self.std_

    def inverse_transform(self, X):
        check_is_fitted(self, "mean_")
        return np.asarray(X, dtype=float) * self.std_ + self.mean_


@dataclass(frozen=True)
class CleanPoint:
    """Fully populated, scaled view of one retained observation."""

    storm_id: str
    timestamp: object
    x: float
    y: float
    month_norm: float
    wind_std: float
    pressure_std: float
    radii_std: tuple
    displacement: Displacement
    status: str


@dataclass
class CleanTrack:
    """One maximal 6-hourly run of complete observations from a single storm.

    Physical wind/pressure/radii values are kept raw here; standardization is
    applied when feature matrices are materialized, using scalers fitted on
    the training split only.
    """

    storm_id: str
    name: str
    timestamps: list
    x: np.ndarray
    y: np.ndarray
    month_norm: np.ndarray
    wind: np.ndarray
    pressure: np.ndarray
    radii: np.ndarray  # (n, 12)
    length: np.ndarray
    direction: np.ndarray
    status: list = field(default_factory=list)

    def __len__(self):
        return len(self.timestamps)

    def points(self, scalers):
        """Yield CleanPoint views using the given fitted scalers."""
        wind_std = scalers.wind.transform(self.wind.reshape(-1, 1)).ravel()
        pressure_std = scalers.pressure.transform(self.pressure.reshape(-1, 1)).ravel()
        radii_std = scalers.radii.transform(self.radii)
        for i in range(len(self)):
            yield CleanPoint(
                storm_id=self.storm_id,
                timestamp=self.timestamps[i],
                x=float(self.x[i]),
                y=float(self.y[i]),
                month_norm=float(self.month_norm[i]),
                wind_std=float(wind_std[i]),
                pressure_std=float(pressure_std[i]),
                radii_std=tuple(radii_std[i]),
                displacement=Displacement(float(self.length[i]), float(self.direction[i])),
                status=self.status[i],
            )


def _make_run(track, points) -> CleanTrack:
    x_scaler = FixedMinMaxScaler(*LON_BOUNDS)
    y_scaler = FixedMinMaxScaler(*LAT_BOUNDS)
    month_scaler = FixedMinMaxScaler(*MONTH_BOUNDS)
    xs = x_scaler.transform([p.longitude for p in points])
    ys = y_scaler.transform([p.latitude for p in points])
    months = month_scaler.transform([p.timestamp.month for p in points])
    n = len(points)
    length = np.zeros(n)
    direction = np.zeros(n)
    for i in range(1, n):
        d = displacement_from((xs[i - 1], ys[i - 1]), (xs[i], ys[i]))
        length[i] = d.length
        direction[i] = d.direction
    return CleanTrack(
        storm_id=track.storm_id,
        name=track.name,
        timestamps=[p.timestamp for p in points],
        x=xs,
        y=ys,
        month_norm=months,
        wind=np.array([p.max_wind for p in points], dtype=float),
        pressure=np.array([p.min_pressure for p in points], dtype=float),
        radii=np.array([p.radii for p in points], dtype=float),
        length=length,
        direction=direction,
        status=[p.status for p in points],
    )


def clean(tracks, min_run_len=6) -> list:
    """Drop unusable rows and split each storm into 6-hourly runs.

    A row is retained when it sits on a synoptic hour (00/06/12/18Z), has a
    known status code, and has no missing measurement. Retained rows are then
    split wherever consecutive timestamps are not exactly 6 h apart, and runs
    shorter than ``min_run_len`` (window + target) are dropped entirely.

    The first point of each run carries the zero displacement (0, 0).
    """
    runs = []
    for track in tracks:
        kept = [
            p for p in track.points
            if p.is_synoptic() and p.has_known_status() and p.is_complete()
        ]
        if not kept:
            continue
        segment = [kept[0]]
        for p in kept[1:]:
            if p.timestamp - segment[-1].timestamp == SYNOPTIC_STEP:
                segment.append(p)
            else:
                if len(segment) >= min_run_len:
                    runs.append(_make_run(track, segment))
                segment = [p]
        if len(segment) >= min_run_len:
            runs.append(_make_run(track, segment))
    return runs


@dataclass
class FeatureScalers:
    """The full scaler set a trained model is bound to."""

    x: FixedMinMaxScaler
    y: FixedMinMaxScaler
    month: FixedMinMaxScaler
    wind: StandardScaler
    pressure: StandardScaler
    radii: StandardScaler


def fit_feature_scalers(wind, pressure, radii) -> FeatureScalers:
    """Fit the standard scalers from training-split values only.

    The min-max scalers use the fixed physical bounds and are not data
    dependent.
    """
    wind = np.asarray(wind, dtype=float).reshape(-1, 1)
    pressure = np.asarray(pressure, dtype=float).reshape(-1, 1)
    radii = np.asarray(radii, dtype=float)
    return FeatureScalers(
        x=FixedMinMaxScaler(*LON_BOUNDS).fit(),
        y=FixedMinMaxScaler(*LAT_BOUNDS).fit(),
        month=FixedMinMaxScaler(*MONTH_BOUNDS).fit(),
        wind=StandardScaler().fit(wind),
        pressure=StandardScaler().fit(pressure),
        radii=StandardScaler().fit(radii),
    )


def export_clean_csv(runs, scalers, path) -> None:
    """Write the cleaned dataset with the documented column order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CLEAN_CSV_COLUMNS)
        for run in runs:
            for p in run.points(scalers):
                row = [
                    p.storm_id,
                    p.timestamp.isoformat(),
                    f"{p.x:.10g}",
                    f"{p.y:.10g}",
                    f"{p.month_norm:.10g}",
                    f"{p.wind_std:.10g}",
                    f"{p.pressure_std:.10g}",
                ]
                row.extend(f"{r:.10g}" for r in p.radii_std)
                row.extend([
                    f"{p.displacement.length:.10g}",
                    f"{p.displacement.direction:.10g}",
                    p.status,
                ])
                writer.writerow(row)
