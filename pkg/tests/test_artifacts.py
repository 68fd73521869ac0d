import numpy as np
import pytest

from cyclonecast.artifacts import load_artifact, save_artifact
from cyclonecast.ensemble import GradientBoostingRegressor, RandomForestClassifier
from cyclonecast.mlp import MLPClassifier
from cyclonecast.preprocess import fit_feature_scalers
from cyclonecast.svm import OneVsRestSVM

WINDOWS = {"regression": 5, "classification": 4}
SEEDS = {"root": 0, "gbr": 1}


@pytest.fixture(scope="module")
def scalers():
    rng = np.random.default_rng(0)
    return fit_feature_scalers(
        rng.normal(60, 20, 200), rng.normal(990, 15, 200),
        rng.normal(40, 15, (200, 12)),
    )


def _blobs(rng, n_per=30):
    X2 = np.vstack([rng.normal((0, 0), 0.6, (n_per, 2)),
                    rng.normal((4, 4), 0.6, (n_per, 2))])
    X = np.column_stack([X2, rng.normal(size=2 * n_per)])
    y = np.array(["HU"] * n_per + ["TS"] * n_per)
    return X, y


class TestRoundTrips:
    def test_gbr(self, tmp_path, scalers):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(50, 4))
        Y = np.column_stack([X[:, 0], X[:, 1] ** 2])
        model = GradientBoostingRegressor(n_stages=8, random_state=0).fit(X, Y)
        path = tmp_path / "gbr.json"
        save_artifact(path, "gbr", model, scalers, WINDOWS, SEEDS)
        art = load_artifact(path)
        assert art.kind == "gbr"
        assert np.array_equal(art.model.predict(X), model.predict(X))
        assert np.array_equal(art.model.train_loss_, model.train_loss_)
        assert art.window_config == WINDOWS
        assert art.seeds == SEEDS

    def test_rf(self, tmp_path, scalers):
        rng = np.random.default_rng(2)
        X, y = _blobs(rng)
        model = RandomForestClassifier(n_trees=7, random_state=3).fit(X, y)
        path = tmp_path / "rf.json"
        save_artifact(path, "rf", model, scalers, WINDOWS, SEEDS)
        art = load_artifact(path)
        probe = rng.normal(2, 2, (40, 3))
        assert np.array_equal(art.model.predict(probe), model.predict(probe))
        assert np.array_equal(
            art.model.vote_fractions(probe), model.vote_fractions(probe)
        )
        assert list(art.model.classes_) == list(model.classes_)

    def test_svm(self, tmp_path, scalers):
        rng = np.random.default_rng(3)
        X, y = _blobs(rng)
        model = OneVsRestSVM(C=1.0, random_state=4).fit(X, y)
        path = tmp_path / "svm.json"
        save_artifact(path, "svm", model, scalers, WINDOWS, SEEDS)
        art = load_artifact(path)
        probe = rng.normal(2, 2, (40, 3))
        assert np.array_equal(
            art.model.decision_function(probe), model.decision_function(probe)
        )
        assert art.model.machines_[0].gamma_ == model.machines_[0].gamma_

    def test_mlp(self, tmp_path, scalers):
        rng = np.random.default_rng(4)
        X, y = _blobs(rng)
        model = MLPClassifier(hidden_layers=(8, 4), epochs=10,
                              random_state=5).fit(X, y)
        path = tmp_path / "mlp.json"
        save_artifact(path, "mlp", model, scalers, WINDOWS, SEEDS)
        art = load_artifact(path)
        probe = rng.normal(2, 2, (40, 3))
        assert np.array_equal(art.model.forward(probe), model.forward(probe))
        assert art.model.loss_curve_ == model.loss_curve_

    def test_scalers_round_trip(self, tmp_path, scalers):
        rng = np.random.default_rng(5)
        X, y = _blobs(rng)
        model = MLPClassifier(epochs=1, random_state=0).fit(X, y)
        path = tmp_path / "m.json"
        save_artifact(path, "mlp", model, scalers, WINDOWS, SEEDS)
        art = load_artifact(path)
        v = np.array([[55.0]])
        assert art.scalers.wind.transform(v) == pytest.approx(
            scalers.wind.transform(v)
        )
        assert art.scalers.x.transform(-180.0) == 0.0
        assert np.array_equal(art.scalers.radii.mean_, scalers.radii.mean_)


class TestByteDeterminism:
    def test_identical_fit_gives_identical_bytes(self, tmp_path, scalers):
        rng = np.random.default_rng(6)
        X, y = _blobs(rng)
        paths = []
        for i in range(2):
            model = RandomForestClassifier(n_trees=6, random_state=9).fit(X, y)
            p = tmp_path / f"rf{i}.json"
            save_artifact(p, "rf", model, scalers, WINDOWS, SEEDS)
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_thread_count_gives_identical_bytes(self, tmp_path, scalers):
        rng = np.random.default_rng(7)
        X, y = _blobs(rng)
        paths = []
        for i, jobs in enumerate((1, 4)):
            model = RandomForestClassifier(
                n_trees=6, random_state=10, n_jobs=jobs
            ).fit(X, y)
            p = tmp_path / f"rf_jobs{i}.json"
            save_artifact(p, "rf", model, scalers, WINDOWS, SEEDS)
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestValidation:
    def test_kind_mismatch(self, tmp_path, scalers):
        rng = np.random.default_rng(8)
        X, y = _blobs(rng)
        model = MLPClassifier(epochs=1, random_state=0).fit(X, y)
        with pytest.raises(TypeError, match="expects"):
            save_artifact(tmp_path / "x.json", "rf", model, scalers,
                          WINDOWS, SEEDS)

    def test_rejects_foreign_file(self, tmp_path):
        p = tmp_path / "foreign.json"
        p.write_text('{"hello": 1}')
        with pytest.raises(ValueError, match="not a cyclonecast-artifact"):
            load_artifact(p)

    def test_rejects_unknown_version(self, tmp_path, scalers):
        rng = np.random.default_rng(9)
        X, y = _blobs(rng)
        model = MLPClassifier(epochs=1, random_state=0).fit(X, y)
        p = tmp_path / "m.json"
        save_artifact(p, "mlp", model, scalers, WINDOWS, SEEDS)
        import json

        payload = json.loads(p.read_text())
        payload["version"] = 99
        p.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="version"):
            load_artifact(p)
