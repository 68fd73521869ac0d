"""Command-line entry point: parse / train / case-study / predict.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
Dataset paths come from the config file; when absent, HURDAT2 files are
discovered under $CYCLONE_DATA_DIR.
"""

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime
from pathlib import Path

from . import artifacts as artifacts_mod
from . import hurdat2, pipeline, preprocess
from .config import ConfigError, RunConfig, load_config, save_config
from .windows import holdout_storm

MODEL_KINDS = ("gbr", "rf", "svm", "mlp")


class UsageError(ValueError):
    """Errors that map to exit code 2."""


def _resolve_datasets(cfg) -> list:
    paths = cfg.datasets.paths()
    if paths:
        missing = [p for p in paths if not os.path.isfile(p)]
        if missing:
            raise UsageError(f"dataset file(s) not found: {', '.join(missing)}")
        return paths
    data_dir = os.environ.get("CYCLONE_DATA_DIR")
    if data_dir:
        found = sorted(str(p) for p in Path(data_dir).glob("hurdat2*.txt"))
        if found:
            return found
    raise UsageError(
        "no dataset configured: set datasets.atlantic/pacific in the config "
        "or point CYCLONE_DATA_DIR at a directory with hurdat2*.txt files"
    )


def _load_tracks(paths) -> list:
    tracks = []
    for p in paths:
        tracks.extend(hurdat2.parse_path(p))
    return tracks


def _out_dir(arg) -> Path:
    if arg:
        out = Path(arg)
    else:
        out = Path("runs") / datetime.now().strftime("%Y%m%d-%H%M%S")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_parse(args) -> int:
    all_tracks = []
    for path in args.files:
        if not os.path.isfile(path):
            raise UsageError(f"file not found: {path}")
        tracks = hurdat2.parse_path(path)
        print(f"{path}: {len(tracks)} storms, {hurdat2.total_points(tracks)} points")
        all_tracks.extend(tracks)
    if len(args.files) > 1:
        print(
            f"total: {len(all_tracks)} storms, "
            f"{hurdat2.total_points(all_tracks)} points"
        )
    if args.export_csv:
        hurdat2.export_tracks_csv(all_tracks, args.export_csv)
        print(f"wrote {args.export_csv}")
    return 0


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if getattr(args, "holdout", None) is not None:
        cfg.holdout_storm = args.holdout or None
    if getattr(args, "split_mode", None) is not None:
        cfg.split.mode = args.split_mode
    return cfg


def _clean_runs(cfg, tracks):
    return preprocess.clean(tracks, min_run_len=cfg.windows.regression + 1)


def cmd_train(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = _out_dir(args.out)
    save_config(cfg, out / "config.json")

    started = time.time()
    tracks = _load_tracks(_resolve_datasets(cfg))
    runs = _clean_runs(cfg, tracks)
    print(
        f"parsed {len(tracks)} storms; {len(runs)} cleaned 6-hourly runs "
        f"({sum(len(r) for r in runs)} points)"
    )
    if cfg.holdout_storm:
        try:
            runs, held = holdout_storm(cfg.holdout_storm, runs)
        except KeyError as exc:
            raise UsageError(str(exc)) from None
        print(f"held out {cfg.holdout_storm}: {sum(len(r) for r in held)} points")

    result = pipeline.run_training(runs, cfg)
    print(f"training + evaluation took {time.time() - started:.1f}s")

    art_dir = out / "artifacts"
    art_dir.mkdir(exist_ok=True)
    for kind in MODEL_KINDS:
        artifacts_mod.save_artifact(
            art_dir / f"{kind}.json",
            kind,
            result.models[kind],
            result.scalers,
            result.window_config,
            result.seeds,
        )
    with open(art_dir / "mlp_loss.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for i, loss in enumerate(result.models["mlp"].loss_curve_):
            writer.writerow([i, f"{loss:.10g}"])

    with open(out / "report.json", "w") as fh:
        fh.write(pipeline.report_as_json(result.report))
    lines = []
    reg = result.report["regression"]
    lines.append("== regression (held-out test split) ==")
    for name in ("wind_std", "pressure_std", "length", "direction"):
        lines.append(
            f"  {name:13s} MAE {reg['mae'][name]:.5f}   R2 {reg['r2'][name]:.4f}"
        )
    phys = reg["mae_physical"]
    lines.append(
        f"  physical: wind {phys['wind_kt']:.2f} kt, "
        f"pressure {phys['pressure_mb']:.2f} mb, "
        f"length {phys['length_km']:.1f} km, "
        f"direction {phys['direction_deg']:.2f} deg"
    )
    for name in ("rf", "svm", "mlp"):
        lines.append(f"\n== {name} (held-out test split) ==")
        lines.append(result.report["classifiers"][name]["text"])
    text = "\n".join(lines)
    print(text)
    with open(out / "report.txt", "w") as fh:
        fh.write(text + "\n")
    print(f"artifacts and reports under {out}")
    return 0


def _load_artifacts(art_dir):
    art_dir = Path(art_dir)
    loaded = {}
    meta = None
    for kind in MODEL_KINDS:
        path = art_dir / f"{kind}.json"
        if not path.is_file():
            raise UsageError(f"missing artifact {path}")
        art = artifacts_mod.load_artifact(path)
        loaded[kind] = art.model
        meta = art
    return loaded, meta.scalers, meta.window_config


def cmd_case_study(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    models, scalers, window_config = _load_artifacts(args.artifacts)
    out = _out_dir(args.out)

    tracks = _load_tracks(_resolve_datasets(cfg))
    runs = _clean_runs(cfg, tracks)
    storm_runs = [r for r in runs if r.storm_id == args.storm]
    if not storm_runs:
        raise UsageError(
            f"storm {args.storm!r} not found in the cleaned dataset"
        )
    usable = [
        r for r in storm_runs if len(r) >= window_config["regression"] + 1
    ]
    if not usable:
        raise UsageError(
            f"storm {args.storm!r} is shorter than the regression window"
        )
    steps = []
    for run in usable:
        steps.extend(
            pipeline.forecast_storm(
                models, scalers, run, window_config, rollout=args.rollout
            )
        )
    classes = sorted(hurdat2.KNOWN_STATUS_CODES)
    report = pipeline.evaluate_case(
        args.storm, steps, classes, scalers,
        distance="haversine" if args.haversine else "equirectangular",
    )
    with open(out / "case_report.json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True, default=str)
    with open(out / "case_track.geojson", "w") as fh:
        json.dump(pipeline.case_geojson(steps), fh, indent=2)
    with open(out / "case_track.svg", "w") as fh:
        fh.write(pipeline.case_svg(steps))
    pipeline.case_steps_csv(steps, scalers, out / "case_steps.csv")

    print(f"{args.storm}: {report.n_steps} forecast steps")
    print(
        f"mean trajectory error {report.mean_trajectory_error_km:.1f} km; "
        f"wind MAE {report.regression_mae_physical['wind_kt']:.2f} kt; "
        f"pressure MAE {report.regression_mae_physical['pressure_mb']:.2f} mb"
    )
    for name, rec in sorted(report.classifier_recall.items()):
        print(
            f"{name}: weighted recall {rec['weighted']:.3f}, "
            f"macro recall {rec['macro']:.3f}"
        )
    print(f"case study written under {out}")
    return 0


def _read_prefix_csv(path):
    required = [
        "timestamp", "latitude", "longitude", "max_wind", "min_pressure",
        *hurdat2.RADII_COLUMNS, "status",
    ]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise UsageError(
                f"{path}: missing column(s) {', '.join(missing)}; expected the "
                f"track CSV schema produced by 'cyclonecast parse --export-csv'"
            )
        points = []
        for row in reader:
            try:
                def num(key):
                    return float(row[key]) if row[key] not in ("", None) else None

                points.append(hurdat2.TrackPoint(
                    timestamp=datetime.fromisoformat(row["timestamp"]),
                    record_identifier=None,
                    status=row["status"],
                    latitude=float(row["latitude"]),
                    longitude=float(row["longitude"]),
                    max_wind=num("max_wind"),
                    min_pressure=num("min_pressure"),
                    radii=tuple(num(c) for c in hurdat2.RADII_COLUMNS),
                ))
            except (ValueError, KeyError) as exc:
                raise UsageError(f"{path}: bad row {reader.line_num}: {exc}") from None
    if not points:
        raise UsageError(f"{path}: no data rows")
    header_obj = hurdat2.StormHeader("AL", 0, points[0].timestamp.year, "PREFIX", len(points))
    return hurdat2.StormTrack(header=header_obj, points=points)


def cmd_predict(args) -> int:
    models, scalers, window_config = _load_artifacts(args.artifacts)
    track = _read_prefix_csv(args.input)
    reg_w = window_config["regression"]
    runs = preprocess.clean([track], min_run_len=reg_w)
    if not runs:
        raise UsageError(
            f"input prefix has no {reg_w}-step 6-hourly run of complete rows"
        )
    run = runs[-1]
    forecast = pipeline.predict_next(models, scalers, run, window_config)
    print(json.dumps(forecast, indent=2, sort_keys=True, default=str))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclonecast",
        description=(
            "Cyclone feature regression and status classification over "
            "HURDAT2 best-track data"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse HURDAT2 files and print counts")
    p.add_argument("files", nargs="+", help="hurdat2-*.txt files")
    p.add_argument("--export-csv", metavar="PATH", help="write normalized CSV")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("train", help="train all four models and evaluate")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (default runs/<timestamp>)")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--threads", type=int, help="cap worker threads")
    p.add_argument("--holdout", help="override held-out storm id ('' disables)")
    p.add_argument("--split-mode", choices=["sample", "storm"],
                   help="override split mode")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("case-study", help="run the held-out storm end to end")
    p.add_argument("--storm", required=True, help="storm id, e.g. AL122005")
    p.add_argument("--config", required=True)
    p.add_argument("--artifacts", required=True, help="directory with *.json artifacts")
    p.add_argument("--out", help="output directory")
    p.add_argument("--rollout", action="store_true",
                   help="closed-loop rollout instead of one-step-ahead")
    p.add_argument("--haversine", action="store_true",
                   help="use exact haversine distances")
    p.add_argument("--seed", type=int, help=argparse.SUPPRESS)
    p.add_argument("--threads", type=int, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_case_study)

    p = sub.add_parser("predict", help="one-step forecast from a track prefix")
    p.add_argument("--artifacts", required=True)
    p.add_argument("--input", required=True, help="track CSV prefix (>= 5 rows)")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, hurdat2.Hurdat2ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
