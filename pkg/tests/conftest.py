import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synth  # noqa: E402

from cyclonecast import hurdat2, preprocess  # noqa: E402
from cyclonecast.config import RunConfig, config_from_dict  # noqa: E402


@pytest.fixture(scope="session")
def corpus_text():
    return synth.corpus(seed=7, n_storms=40)


@pytest.fixture(scope="session")
def corpus_tracks(corpus_text):
    return hurdat2.parse_file(corpus_text)


@pytest.fixture(scope="session")
def corpus_runs(corpus_tracks):
    return preprocess.clean(corpus_tracks)


def small_config(**overrides) -> RunConfig:
    """Config sized for the synthetic corpus so tests stay fast."""
    base = {
        "seed": 11,
        "holdout_storm": None,
        "models": {
            "gbr": {"n_stages": 40, "max_depth": 2},
            "rf": {"n_trees": 25},
            "svm": {"C": 1.0, "tol": 1e-3},
            "mlp": {"hidden_layers": [16, 8], "epochs": 60},
        },
        "smote": {"enabled": True},
    }
    base.update(overrides)
    return config_from_dict(base)


@pytest.fixture(scope="session")
def trained(corpus_runs):
    from cyclonecast.pipeline import run_training

    return run_training(corpus_runs, small_config())


def real_dataset_paths():
    """The actual NOAA best-track files, when present.

    Checked locations: $CYCLONE_DATA_DIR, then ./data. Atlantic and Pacific
    files are told apart by the 'nepac'/'nencpac' name fragment NHC uses.
    """
    candidates = []
    env = os.environ.get("CYCLONE_DATA_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parent.parent / "data")
    for root in candidates:
        if not root.is_dir():
            continue
        files = sorted(root.glob("hurdat2*.txt"))
        if not files:
            continue
        atlantic = [f for f in files if "pac" not in f.name.lower()]
        pacific = [f for f in files if "pac" in f.name.lower()]
        return {
            "atlantic": str(atlantic[0]) if atlantic else None,
            "pacific": str(pacific[0]) if pacific else None,
        }
    return None


def require_real_data():
    paths = real_dataset_paths()
    if paths is None:
        pytest.skip(
            "real HURDAT2 files not available (outbound network is blocked in "
            "this sandbox); set CYCLONE_DATA_DIR or place hurdat2*.txt under "
            "./data to run the paper-scale criteria"
        )
    return paths
