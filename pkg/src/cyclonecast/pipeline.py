"""Two-stage forecast orchestration: regress next-step cyclone features,
reconstruct the position from the predicted displacement, then classify the
storm status from the regressed features.

Default evaluation is one-step-ahead (every window is ground-truth history,
matching the per-point evaluation the tables report); closed-loop rollout is
available for exploration via ``rollout=True`` but is excluded from the
acceptance gate.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics as metrics_mod
from . import windows as windows_mod
from .ensemble import GradientBoostingRegressor, RandomForestClassifier
from .mlp import MLPClassifier
from .preprocess import KM_PER_UNIT
from .smote import SMOTE
from .svm import OneVsRestSVM

EARTH_RADIUS_KM = 6371.0

TWO_PI = 2.0 * math.pi

#: fixed derivation order of the per-component seeds
SEED_NAMES = ("split_reg", "split_clf", "gbr", "rf", "svm", "mlp", "smote")


def derive_seeds(root_seed) -> dict:
    state = np.random.SeedSequence(root_seed).generate_state(len(SEED_NAMES))
    seeds = {name: int(s) for name, s in zip(SEED_NAMES, state)}
    seeds["root"] = int(root_seed)
    return seeds


def _scalar_inverse(scaler, value) -> float:
    """Inverse-transform one value through a single-column standard scaler."""
    return float(np.asarray(scaler.inverse_transform(value)).reshape(-1)[0])


def wrap_direction(value):
    """Fold an angle into [0, 2pi)."""
    return float(value) % TWO_PI


def reconstruct_position(prev_xy, length, direction):
    """Inverse of displacement_from: step from prev_xy by ``length`` along
    the clockwise-from-north bearing ``direction``."""
    x, y = prev_xy
    return (
        x + length * math.sin(direction),
        y + length * math.cos(direction),
    )


def xy_to_lonlat(x, y, scalers):
    return (
        float(scalers.x.inverse_transform(x)),
        float(scalers.y.inverse_transform(y)),
    )


def equirectangular_km(lat1, lon1, lat2, lon2):
    """Flat-earth distance at the pair's mean latitude; <1% off haversine at
    6-hour cyclone step lengths."""
    phi = math.radians(0.5 * (lat1 + lat2))
    dlat = math.radians(lat2 - lat1)
    dlon = math.radians(lon2 - lon1)
    return EARTH_RADIUS_KM * math.hypot(dlat, dlon * math.cos(phi))


def haversine_km(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi = p2 - p1
    dlmb = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


@dataclass
class ForecastStep:
    index: int               # point index within the run (the predicted step)
    timestamp: object
    wind_std: float
    pressure_std: float
    length: float
    direction: float         # wrapped into [0, 2pi)
    x: float
    y: float
    latitude: float
    longitude: float
    statuses: dict           # classifier name -> predicted status code
    true_wind_std: float
    true_pressure_std: float
    true_length: float
    true_direction: float
    true_x: float
    true_y: float
    true_latitude: float
    true_longitude: float
    true_status: str

    def physical(self, scalers):
        return {
            "wind_kt": _scalar_inverse(scalers.wind, self.wind_std),
            "pressure_mb": _scalar_inverse(scalers.pressure, self.pressure_std),
            "latitude": self.latitude,
            "longitude": self.longitude,
            "direction_deg": math.degrees(self.direction),
            "length_km": self.length * KM_PER_UNIT,
        }


def _scaled_step_matrix(run, scalers):
    wind_std = scalers.wind.transform(run.wind.reshape(-1, 1)).ravel()
    pressure_std = scalers.pressure.transform(run.pressure.reshape(-1, 1)).ravel()
    return np.column_stack([wind_std, pressure_std, run.x, run.y])


def forecast_storm(models, scalers, run, window_config=None, rollout=False):
    """One ForecastStep per regression window of the run.

    ``models`` maps names to fitted classifiers plus the key "gbr" for the
    regressor. In rollout mode predicted wind/pressure/position replace the
    ground truth once available, and radii are held at the last observed
    values (the regressor does not predict them).
    """
    reg_w = (window_config or {}).get("regression", windows_mod.REGRESSION_WINDOW)
    clf_w = (window_config or {}).get("classification", windows_mod.CLASSIFICATION_WINDOW)
    if len(run) < reg_w + 1:
        raise ValueError(
            f"run has {len(run)} points; need at least {reg_w + 1} to forecast"
        )
    gbr = models["gbr"]
    classifiers = {k: m for k, m in models.items() if k != "gbr"}

    radii_std = scalers.radii.transform(run.radii)
    truth_clf = _scaled_step_matrix(run, scalers)  # (n, 4): wind, pressure, x, y
    # regression layout per step: x, y, wind_std, pressure_std, radii...
    truth_reg = np.column_stack(
        [truth_clf[:, 2], truth_clf[:, 3], truth_clf[:, 0], truth_clf[:, 1], radii_std]
    )
    # rollout state starts as truth and is overwritten by predictions
    state_clf = truth_clf.copy()
    state_reg = truth_reg.copy()

    steps = []
    for t in range(reg_w, len(run)):
        src_reg = state_reg if rollout else truth_reg
        src_clf = state_clf if rollout else truth_clf
        features = np.append(
            src_reg[t - reg_w: t].ravel(), run.month_norm[t - 1]
        )
        wind_p, pressure_p, length_p, direction_p = gbr.predict(
            features.reshape(1, -1)
        )[0]
        direction_p = wrap_direction(direction_p)
        length_p = float(length_p)
        prev_xy = (
            (state_clf[t - 1, 2], state_clf[t - 1, 3]) if rollout
            else (truth_clf[t - 1, 2], truth_clf[t - 1, 3])
        )
        x_p, y_p = reconstruct_position(prev_xy, length_p, direction_p)

        window_steps = np.vstack([
            src_clf[t - clf_w + 1: t],
            [wind_p, pressure_p, x_p, y_p],
        ])
        clf_row = windows_mod.classification_row(
            window_steps, run.month_norm[t], window=clf_w
        ).reshape(1, -1)
        statuses = {
            name: str(clf.predict(clf_row)[0]) for name, clf in classifiers.items()
        }

        lon_p, lat_p = xy_to_lonlat(x_p, y_p, scalers)
        lon_t, lat_t = xy_to_lonlat(run.x[t], run.y[t], scalers)
        steps.append(ForecastStep(
            index=t,
            timestamp=run.timestamps[t],
            wind_std=float(wind_p),
            pressure_std=float(pressure_p),
            length=length_p,
            direction=direction_p,
            x=float(x_p),
            y=float(y_p),
            latitude=lat_p,
            longitude=lon_p,
            statuses=statuses,
            true_wind_std=float(truth_clf[t, 0]),
            true_pressure_std=float(truth_clf[t, 1]),
            true_length=float(run.length[t]),
            true_direction=float(run.direction[t]),
            true_x=float(run.x[t]),
            true_y=float(run.y[t]),
            true_latitude=lat_t,
            true_longitude=lon_t,
            true_status=run.status[t],
        ))
        if rollout:
            state_clf[t] = [wind_p, pressure_p, x_p, y_p]
            state_reg[t] = np.concatenate(
                [[x_p, y_p, wind_p, pressure_p], state_reg[t - 1, 4:]]
            )
    return steps


def predict_next(models, scalers, run, window_config=None):
    """Forecast the step after the end of ``run`` (physical units).

    The run must supply at least one full regression window; the returned
    dict carries lat/lon in degrees, wind in kt, pressure in mb, and the
    status predicted by each classifier.
    """
    from datetime import timedelta

    reg_w = (window_config or {}).get("regression", windows_mod.REGRESSION_WINDOW)
    clf_w = (window_config or {}).get("classification", windows_mod.CLASSIFICATION_WINDOW)
    n = len(run)
    if n < reg_w:
        raise ValueError(f"prefix has {n} usable steps; need at least {reg_w}")
    gbr = models["gbr"]
    classifiers = {k: m for k, m in models.items() if k != "gbr"}

    radii_std = scalers.radii.transform(run.radii)
    step_clf = _scaled_step_matrix(run, scalers)
    step_reg = np.column_stack(
        [step_clf[:, 2], step_clf[:, 3], step_clf[:, 0], step_clf[:, 1], radii_std]
    )
    features = np.append(step_reg[n - reg_w: n].ravel(), run.month_norm[n - 1])
    wind_p, pressure_p, length_p, direction_p = gbr.predict(
        features.reshape(1, -1)
    )[0]
    direction_p = wrap_direction(direction_p)
    x_p, y_p = reconstruct_position(
        (step_clf[n - 1, 2], step_clf[n - 1, 3]), float(length_p), direction_p
    )
    next_ts = run.timestamps[-1] + timedelta(hours=6)
    month_norm = float(scalers.month.transform(next_ts.month))
    window_steps = np.vstack([
        step_clf[n - clf_w + 1: n],
        [wind_p, pressure_p, x_p, y_p],
    ])
    clf_row = windows_mod.classification_row(
        window_steps, month_norm, window=clf_w
    ).reshape(1, -1)
    lon_p, lat_p = xy_to_lonlat(x_p, y_p, scalers)
    return {
        "timestamp": next_ts.isoformat(),
        "latitude": round(lat_p, 4),
        "longitude": round(lon_p, 4),
        "wind_kt": round(_scalar_inverse(scalers.wind, wind_p), 2),
        "pressure_mb": round(_scalar_inverse(scalers.pressure, pressure_p), 2),
        "length_km": round(float(length_p) * KM_PER_UNIT, 2),
        "direction_deg": round(math.degrees(direction_p), 2),
        "status": {
            name: str(clf.predict(clf_row)[0])
            for name, clf in classifiers.items()
        },
    }


@dataclass
class CaseStudyReport:
    storm_id: str
    n_steps: int
    regression_mae: dict
    regression_r2: dict
    regression_mae_physical: dict
    mean_trajectory_error_km: float
    classifier_recall: dict     # name -> {weighted, macro}
    classifier_reports: dict    # name -> ClassificationReport dict
    confusions: dict            # name -> {classes, counts}

    def to_dict(self):
        return {
            "storm_id": self.storm_id,
            "n_steps": self.n_steps,
            "regression_mae": self.regression_mae,
            "regression_r2": self.regression_r2,
            "regression_mae_physical": self.regression_mae_physical,
            "mean_trajectory_error_km": self.mean_trajectory_error_km,
            "classifier_recall": self.classifier_recall,
            "classifier_reports": self.classifier_reports,
            "confusions": self.confusions,
        }


def evaluate_case(storm_id, steps, classes, scalers, distance="equirectangular"):
    """Score one forecast run: per-target regression errors, mean trajectory
    distance, and per-classifier recall with confusion matrices."""
    if not steps:
        raise ValueError("no forecast steps to evaluate")
    dist_fn = haversine_km if distance == "haversine" else equirectangular_km
    true = np.array([
        [s.true_wind_std, s.true_pressure_std, s.true_length, s.true_direction]
        for s in steps
    ])
    pred = np.array([
        [s.wind_std, s.pressure_std, s.length, s.direction] for s in steps
    ])
    maes = {
        name: metrics_mod.mae(true[:, i], pred[:, i])
        for i, name in enumerate(windows_mod.TARGET_NAMES)
    }
    r2 = {}
    for i, name in enumerate(windows_mod.TARGET_NAMES):
        try:
            r2[name] = metrics_mod.r_squared(true[:, i], pred[:, i])
        except ValueError:
            r2[name] = None  # constant target over this storm
    physical = metrics_mod.regression_errors_physical(
        [maes[n] for n in windows_mod.TARGET_NAMES], scalers
    )
    km = [
        dist_fn(s.true_latitude, s.true_longitude, s.latitude, s.longitude)
        for s in steps
    ]
    recalls, reports, confusions = {}, {}, {}
    names = sorted({n for s in steps for n in s.statuses})
    y_true = [s.true_status for s in steps]
    for name in names:
        y_pred = [s.statuses[name] for s in steps]
        report, cm = metrics_mod.classification_report(y_true, y_pred, classes)
        recalls[name] = {
            "weighted": report.weighted_recall,
            "macro": report.macro_recall,
        }
        reports[name] = report.to_dict()
        confusions[name] = {
            "classes": [str(c) for c in cm.classes],
            "counts": cm.counts.tolist(),
        }
    return CaseStudyReport(
        storm_id=storm_id,
        n_steps=len(steps),
        regression_mae=maes,
        regression_r2=r2,
        regression_mae_physical=physical,
        mean_trajectory_error_km=float(np.mean(km)),
        classifier_recall=recalls,
        classifier_reports=reports,
        confusions=confusions,
    )


def case_geojson(steps) -> dict:
    """FeatureCollection of true (red) and predicted (blue) track points."""
    features = []
    for kind, color in (("truth", "#ff0000"), ("predicted", "#0000ff")):
        for s in steps:
            truth = kind == "truth"
            features.append({
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [
                        s.true_longitude if truth else s.longitude,
                        s.true_latitude if truth else s.latitude,
                    ],
                },
                "properties": {
                    "step": s.index,
                    "kind": kind,
                    "status": s.true_status if truth else s.statuses,
                    "marker-color": color,
                },
            })
    return {"type": "FeatureCollection", "features": features}


def case_svg(steps, width=640, height=480, margin=40) -> str:
    """Plain scatter of true vs predicted positions; no basemap."""
    lons = [s.longitude for s in steps] + [s.true_longitude for s in steps]
    lats = [s.latitude for s in steps] + [s.true_latitude for s in steps]
    lo_x, hi_x = min(lons), max(lons)
    lo_y, hi_y = min(lats), max(lats)
    span_x = (hi_x - lo_x) or 1.0
    span_y = (hi_y - lo_y) or 1.0

    def sx(lon):
        return margin + (lon - lo_x) / span_x * (width - 2 * margin)

    def sy(lat):
        return height - margin - (lat - lo_y) / span_y * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for s in steps:
        parts.append(
            f'<circle cx="{sx(s.true_longitude):.2f}" cy="{sy(s.true_latitude):.2f}" '
            f'r="4" fill="red"><title>step {s.index} true {s.true_status}</title></circle>'
        )
    for s in steps:
        parts.append(
            f'<circle cx="{sx(s.longitude):.2f}" cy="{sy(s.latitude):.2f}" '
            f'r="4" fill="blue" fill-opacity="0.7">'
            f'<title>step {s.index} predicted</title></circle>'
        )
    parts.append(
        f'<text x="{margin}" y="20" font-size="13">red = recorded track, '
        f'blue = predicted</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


def case_steps_csv(steps, scalers, path):
    names = sorted({n for s in steps for n in s.statuses})
    header = [
        "step", "timestamp",
        "true_latitude", "true_longitude", "pred_latitude", "pred_longitude",
        "true_wind_kt", "pred_wind_kt", "true_pressure_mb", "pred_pressure_mb",
        "true_status",
    ] + [f"pred_status_{n}" for n in names] + ["trajectory_error_km"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in steps:
            wind_t = _scalar_inverse(scalers.wind, s.true_wind_std)
            wind_p = _scalar_inverse(scalers.wind, s.wind_std)
            pres_t = _scalar_inverse(scalers.pressure, s.true_pressure_std)
            pres_p = _scalar_inverse(scalers.pressure, s.pressure_std)
            err = equirectangular_km(
                s.true_latitude, s.true_longitude, s.latitude, s.longitude
            )
            writer.writerow([
                s.index, s.timestamp.isoformat(),
                f"{s.true_latitude:.4f}", f"{s.true_longitude:.4f}",
                f"{s.latitude:.4f}", f"{s.longitude:.4f}",
                f"{wind_t:.1f}", f"{wind_p:.1f}",
                f"{pres_t:.1f}", f"{pres_p:.1f}",
                s.true_status,
            ] + [s.statuses[n] for n in names] + [f"{err:.2f}"])


@dataclass
class TrainingResult:
    models: dict
    scalers: object
    seeds: dict
    window_config: dict
    report: dict
    classes: list = field(default_factory=list)


def run_training(runs, cfg) -> TrainingResult:
    """Fit the regressor and the three classifiers per the run configuration
    and evaluate them on the held-back test split."""
    seeds = derive_seeds(cfg.seed)
    reg_w, clf_w = cfg.windows.regression, cfg.windows.classification
    reg_windows = windows_mod.build_regression_windows(runs, reg_w)
    clf_windows = windows_mod.build_classification_windows(runs, clf_w)
    if not reg_windows or not clf_windows:
        raise ValueError("not enough cleaned data to build training windows")

    reg_groups = [runs[r.run].storm_id for r in reg_windows]
    clf_groups = [runs[r.run].storm_id for r in clf_windows]
    reg_train, reg_test = windows_mod.split_indices(
        len(reg_windows),
        windows_mod.SplitConfig(cfg.split.test_fraction, seeds["split_reg"], cfg.split.mode),
        groups=reg_groups,
    )
    clf_train, clf_test = windows_mod.split_indices(
        len(clf_windows),
        windows_mod.SplitConfig(cfg.split.test_fraction, seeds["split_clf"], cfg.split.mode),
        groups=clf_groups,
    )

    from .preprocess import fit_feature_scalers

    wind, pressure, radii = windows_mod.collect_training_values(
        runs,
        [
            ([reg_windows[i] for i in reg_train], reg_w),
            ([clf_windows[i] for i in clf_train], clf_w),
        ],
    )
    scalers = fit_feature_scalers(wind, pressure, radii)

    X_reg, Y_reg, _ = windows_mod.materialize_regression(
        runs, reg_windows, scalers, reg_w
    )
    X_clf, y_clf, _ = windows_mod.materialize_classification(
        runs, clf_windows, scalers, clf_w
    )

    X_train, Y_train = X_reg[reg_train], Y_reg[reg_train]
    X_test, Y_test = X_reg[reg_test], Y_reg[reg_test]
    Xc_train, yc_train = X_clf[clf_train], y_clf[clf_train]
    Xc_test, yc_test = X_clf[clf_test], y_clf[clf_test]

    if cfg.smote.enabled:
        smote = SMOTE(
            k_neighbors=cfg.smote.k_neighbors,
            target_count=cfg.smote.target_count,
            random_state=seeds["smote"],
        )
        Xc_train, yc_train = smote.fit_resample(Xc_train, yc_train)

    gbr = GradientBoostingRegressor(
        n_stages=cfg.models.gbr.n_stages,
        learning_rate=cfg.models.gbr.learning_rate,
        max_depth=cfg.models.gbr.max_depth,
        min_samples_leaf=cfg.models.gbr.min_samples_leaf,
        random_state=seeds["gbr"],
    ).fit(X_train, Y_train)

    rf = RandomForestClassifier(
        n_trees=cfg.models.rf.n_trees,
        max_features=cfg.models.rf.max_features,
        max_depth=cfg.models.rf.max_depth,
        min_samples_leaf=cfg.models.rf.min_samples_leaf,
        bootstrap=cfg.models.rf.bootstrap,
        subset_mode=cfg.models.rf.subset_mode,
        random_state=seeds["rf"],
        n_jobs=cfg.threads,
    ).fit(Xc_train, yc_train)

    svm = OneVsRestSVM(
        C=cfg.models.svm.C,
        kernel=cfg.models.svm.kernel,
        gamma=cfg.models.svm.gamma,
        tol=cfg.models.svm.tol,
        max_iter=cfg.models.svm.max_iter,
        random_state=seeds["svm"],
        n_jobs=cfg.threads,
    ).fit(Xc_train, yc_train)

    mlp = MLPClassifier(
        hidden_layers=cfg.models.mlp.hidden_layers,
        learning_rate=cfg.models.mlp.learning_rate,
        batch_size=cfg.models.mlp.batch_size,
        epochs=cfg.models.mlp.epochs,
        l2=cfg.models.mlp.l2,
        random_state=seeds["mlp"],
    ).fit(Xc_train, yc_train)

    classes = [str(c) for c in np.unique(y_clf)]
    pred = gbr.predict(X_test)
    pred[:, 3] = np.mod(pred[:, 3], TWO_PI)
    reg_mae = {
        name: metrics_mod.mae(Y_test[:, i], pred[:, i])
        for i, name in enumerate(windows_mod.TARGET_NAMES)
    }
    reg_r2 = {
        name: metrics_mod.r_squared(Y_test[:, i], pred[:, i])
        for i, name in enumerate(windows_mod.TARGET_NAMES)
    }
    physical = metrics_mod.regression_errors_physical(
        [reg_mae[n] for n in windows_mod.TARGET_NAMES], scalers
    )

    classifier_reports = {}
    for name, model in (("rf", rf), ("svm", svm), ("mlp", mlp)):
        y_pred = model.predict(Xc_test)
        report, cm = metrics_mod.classification_report(yc_test, y_pred, classes)
        classifier_reports[name] = {
            "report": report.to_dict(),
            "confusion": {
                "classes": [str(c) for c in cm.classes],
                "counts": cm.counts.tolist(),
            },
            "text": report.to_text(),
        }

    report = {
        "dataset": {
            "runs": len(runs),
            "points": int(sum(len(r) for r in runs)),
            "regression_samples": len(reg_windows),
            "classification_samples": len(clf_windows),
            "regression_train": int(reg_train.shape[0]),
            "regression_test": int(reg_test.shape[0]),
            "classification_train_after_smote": int(Xc_train.shape[0]),
            "classification_test": int(clf_test.shape[0]),
        },
        "seeds": seeds,
        "regression": {
            "mae": reg_mae,
            "r2": reg_r2,
            "mae_physical": physical,
        },
        "classifiers": classifier_reports,
    }
    window_config = {"regression": reg_w, "classification": clf_w}
    return TrainingResult(
        models={"gbr": gbr, "rf": rf, "svm": svm, "mlp": mlp},
        scalers=scalers,
        seeds=seeds,
        window_config=window_config,
        report=report,
        classes=[str(c) for c in classes],
    )


def report_as_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=str)
