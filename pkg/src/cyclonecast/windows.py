"""Sliding-window sample construction and train/test splitting.

Window layouts (the contract every model and the forecast pipeline share):

* Regression, window size 5: for a run with points 0..n-1, each target index
  t in [5, n-1] yields one sample. Features are the 5 steps t-5..t-1 in
  chronological order (lag 4 .. lag 0), 16 values per step
  (x, y, wind_std, pressure_std, 12 radii_std), plus the lag-0 month_norm:
  81 features. Targets are step t's (wind_std, pressure_std, length,
  direction).

* Classification, window size 4: each labeled index t in [4, n-1] yields one
  sample. Features are the 4 steps t-3..t (lag 3 .. lag 0, so the labeled
  step's own values are the lag-0 entries), 4 values per step
  (wind_std, pressure_std, x, y), plus the labeled step's month_norm:
  17 features. The label is step t's status. At inference the lag-0 entries
  are swapped for the regressor's output; in training they are ground truth.

Windows never cross run (hence storm) boundaries, so a run with n points
yields max(0, n-5) regression and max(0, n-4) classification samples.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import hurdat2

REGRESSION_WINDOW = 5
CLASSIFICATION_WINDOW = 4

REG_STEP_FIELDS = ("x", "y", "wind_std", "pressure_std") + tuple(
    f"{c}_std" for c in hurdat2.RADII_COLUMNS
)
CLF_STEP_FIELDS = ("wind_std", "pressure_std", "x", "y")
TARGET_NAMES = ("wind_std", "pressure_std", "length", "direction")


def regression_feature_names(window=REGRESSION_WINDOW) -> list:
    names = []
    for lag in range(window - 1, -1, -1):
        names.extend(f"{f}_lag{lag}" for f in REG_STEP_FIELDS)
    names.append("month_norm")
    return names


def classification_feature_names(window=CLASSIFICATION_WINDOW) -> list:
    names = []
    for lag in range(window - 1, -1, -1):
        names.extend(f"{f}_lag{lag}" for f in CLF_STEP_FIELDS)
    names.append("month_norm")
    return names


@dataclass(frozen=True)
class WindowRef:
    """One sample: run index plus the target/labeled point index."""

    run: int
    t: int


def build_regression_windows(runs, window=REGRESSION_WINDOW) -> list:
    return [
        WindowRef(ri, t)
        for ri, run in enumerate(runs)
        for t in range(window, len(run))
    ]


def build_classification_windows(runs, window=CLASSIFICATION_WINDOW) -> list:
    return [
        WindowRef(ri, t)
        for ri, run in enumerate(runs)
        for t in range(window, len(run))
    ]


@dataclass
class SplitConfig:
    test_fraction: float = 0.20
    seed: int = 0
    mode: str = "sample"  # "sample" (paper's literal 80/20) or "storm"


def split_indices(n, config, groups=None):
    """Deterministic, disjoint, covering train/test index split.

    Sample mode permutes individual samples; storm mode keeps all samples of
    a storm on one side (requires ``groups``), trading the exact 80/20 count
    for leak-free evaluation.
    """
    if n < 5:
        raise ValueError(f"need at least 5 samples to split, got {n}")
    rng = np.random.default_rng(config.seed)
    if config.mode == "sample":
        perm = rng.permutation(n)
        n_test = int(round(n * config.test_fraction))
        n_test = min(max(n_test, 1), n - 1)
        test = np.sort(perm[:n_test])
        train = np.sort(perm[n_test:])
        return train, test
    if config.mode == "storm":
        if groups is None:
            raise ValueError("storm-level split requires per-sample groups")
        groups = np.asarray(groups)
        if groups.shape[0] != n:
            raise ValueError("groups length must match sample count")
        unique = np.unique(groups)
        order = rng.permutation(unique.shape[0])
        target = n * config.test_fraction
        test_groups = set()
        count = 0
        for gi in order:
            if count >= target:
                break
            test_groups.add(unique[gi])
            count += int((groups == unique[gi]).sum())
        mask = np.array([g in test_groups for g in groups])
        return np.nonzero(~mask)[0], np.nonzero(mask)[0]
    raise ValueError(f"unknown split mode {config.mode!r}")


def holdout_storm(storm_id, runs):
    """Remove every run of one storm so it contributes no samples anywhere."""
    held = [r for r in runs if r.storm_id == storm_id]
    if not held:
        raise KeyError(f"storm {storm_id!r} not present in the cleaned dataset")
    remaining = [r for r in runs if r.storm_id != storm_id]
    return remaining, held


def collect_training_values(runs, window_sets):
    """Raw wind/pressure/radii of every point referenced by a training window.

    Points are deduplicated so the standard scalers see each training
    observation once, regardless of how many windows cover it.
    """
    masks = [np.zeros(len(run), dtype=bool) for run in runs]
    for window_refs, window_size in window_sets:
        for ref in window_refs:
            masks[ref.run][ref.t - window_size: ref.t + 1] = True
    wind, pressure, radii = [], [], []
    for run, mask in zip(runs, masks):
        if mask.any():
            wind.append(run.wind[mask])
            pressure.append(run.pressure[mask])
            radii.append(run.radii[mask])
    if not wind:
        raise ValueError("no training points referenced by any window")
    return (
        np.concatenate(wind),
        np.concatenate(pressure),
        np.vstack(radii),
    )


def _scaled_run(run, scalers):
    wind_std = scalers.wind.transform(run.wind.reshape(-1, 1)).ravel()
    pressure_std = scalers.pressure.transform(run.pressure.reshape(-1, 1)).ravel()
    radii_std = scalers.radii.transform(run.radii)
    return wind_std, pressure_std, radii_std


def materialize_regression(runs, window_refs, scalers, window=REGRESSION_WINDOW):
    """Build (X, Y, meta) for regression windows; meta rows are
    (storm_id, target timestamp)."""
    n = len(window_refs)
    X = np.empty((n, len(REG_STEP_FIELDS) * window + 1))
    Y = np.empty((n, 4))
    meta = []
    cache = {}
    for i, ref in enumerate(window_refs):
        run = runs[ref.run]
        if ref.run not in cache:
            wind_std, pressure_std, radii_std = _scaled_run(run, scalers)
            cache[ref.run] = np.column_stack(
                [run.x, run.y, wind_std, pressure_std, radii_std]
            )
        steps = cache[ref.run]
        t = ref.t
        X[i, :-1] = steps[t - window: t].ravel()
        X[i, -1] = run.month_norm[t - 1]
        Y[i, 0] = steps[t, 2]  # wind_std
        Y[i, 1] = steps[t, 3]  # pressure_std
        Y[i, 2] = run.length[t]
        Y[i, 3] = run.direction[t]
        meta.append((run.storm_id, run.timestamps[t]))
    return X, Y, meta


def materialize_classification(runs, window_refs, scalers,
                               window=CLASSIFICATION_WINDOW):
    """Build (X, y, meta) for classification windows; labels are the status
    codes of the lag-0 step."""
    n = len(window_refs)
    X = np.empty((n, len(CLF_STEP_FIELDS) * window + 1))
    y = []
    meta = []
    cache = {}
    for i, ref in enumerate(window_refs):
        run = runs[ref.run]
        if ref.run not in cache:
            wind_std, pressure_std, radii_std = _scaled_run(run, scalers)
            cache[ref.run] = np.column_stack([wind_std, pressure_std, run.x, run.y])
        steps = cache[ref.run]
        t = ref.t
        X[i, :-1] = steps[t - window + 1: t + 1].ravel()
        X[i, -1] = run.month_norm[t]
        y.append(run.status[t])
        meta.append((run.storm_id, run.timestamps[t]))
    return X, np.array(y), meta


def classification_row(step_values, month_norm, window=CLASSIFICATION_WINDOW):
    """Assemble one classifier input from window x (wind_std, pressure_std,
    x, y) steps (oldest first) plus the current month. The forecast pipeline
    uses this so regressed features enter with the training layout."""
    steps = np.asarray(step_values, dtype=float)
    if steps.shape != (window, len(CLF_STEP_FIELDS)):
        raise ValueError(
            f"expected {(window, len(CLF_STEP_FIELDS))} step values, "
            f"got {steps.shape}"
        )
    return np.append(steps.ravel(), month_norm)


def export_windows_csv(path, X, names, targets=None, target_names=None, meta=None):
    """Windowed dataset export with one named column per lagged feature."""
    header = ["storm_id", "timestamp"] if meta is not None else []
    header += list(names)
    if targets is not None:
        header += list(target_names)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(X.shape[0]):
            row = []
            if meta is not None:
                row += [meta[i][0], meta[i][1].isoformat()]
            row += [f"{v:.10g}" for v in X[i]]
            if targets is not None:
                t = targets[i] if np.ndim(targets) > 1 else [targets[i]]
                row += [v if isinstance(v, str) else f"{v:.10g}" for v in t]
            writer.writerow(row)
