"""MLP tests. The core correctness check is the central finite-difference
gradient oracle applied to every parameter of a two-hidden-layer model."""

import math

import numpy as np
import pytest

from cyclonecast.mlp import MLPClassifier


def finite_difference_grads(model, X, onehot, step=1e-5):
    """Central differences of the training loss wrt every parameter."""
    grads_W = [np.zeros_like(W) for W in model.weights_]
    grads_b = [np.zeros_like(b) for b in model.biases_]
    for params, grads in ((model.weights_, grads_W), (model.biases_, grads_b)):
        for p, g in zip(params, grads):
            flat = p.ravel()
            gflat = g.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                hi = model.loss(X, onehot)
                flat[i] = orig - step
                lo = model.loss(X, onehot)
                flat[i] = orig
                gflat[i] = (hi - lo) / (2 * step)
    return grads_W, grads_b


def _setup_model(seed=0, n=10, d=4, k=3, hidden=(6, 5), l2=1e-4):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    codes = rng.integers(0, k, size=n)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), codes] = 1.0
    model = MLPClassifier(hidden_layers=hidden, l2=l2, random_state=seed)
    model._init_params(d, k, rng)
    model.n_features_in_ = d
    model.classes_ = np.arange(k)
    return model, X, onehot


class TestGradients:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_backward_matches_finite_differences(self, seed):
        model, X, onehot = _setup_model(seed=seed)
        gW, gb = model.backward(X, onehot)
        fW, fb = finite_difference_grads(model, X, onehot)
        for analytic, numeric in zip(gW + gb, fW + fb):
            denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
            rel = np.abs(analytic - numeric) / denom
            assert rel.max() <= 1e-4

    def test_l2_term_included_in_gradient(self):
        model, X, onehot = _setup_model(seed=3, l2=0.1)
        gW, _ = model.backward(X, onehot)
        model.l2 = 0.0
        gW0, _ = model.backward(X, onehot)
        for with_reg, without, W in zip(gW, gW0, model.weights_):
            assert with_reg == pytest.approx(without + 0.1 * W)

    def test_duplicated_batch_same_mean_gradient(self):
        model, X, onehot = _setup_model(seed=4)
        gW, gb = model.backward(X, onehot)
        gW2, gb2 = model.backward(np.repeat(X, 2, axis=0),
                                  np.repeat(onehot, 2, axis=0))
        for a, b in zip(gW + gb, gW2 + gb2):
            assert a == pytest.approx(b)


class TestForward:
    def test_zero_weights_give_uniform_probabilities(self):
        model, X, _ = _setup_model(seed=5, k=4)
        model.weights_ = [np.zeros_like(W) for W in model.weights_]
        model.biases_ = [np.zeros_like(b) for b in model.biases_]
        probs = model.forward(X)
        assert probs == pytest.approx(np.full_like(probs, 0.25))

    def test_probabilities_sum_to_one(self):
        model, X, _ = _setup_model(seed=6)
        probs = model.forward(X)
        assert probs.min() >= 0.0
        assert probs.sum(axis=1) == pytest.approx(np.ones(X.shape[0]), abs=1e-9)

    def test_hand_computed_2_2_2_network(self):
        model = MLPClassifier(hidden_layers=(2,))
        model.weights_ = [
            np.array([[0.5, -1.0], [0.25, 0.75]]),
            np.array([[1.0, -0.5], [0.2, 0.3]]),
        ]
        model.biases_ = [np.array([0.1, -0.2]), np.array([0.05, 0.0])]
        model.n_features_in_ = 2
        model.classes_ = np.array(["a", "b"])
        x = np.array([[1.0, 2.0]])
        # worked longhand:
        h1 = max(0.0, 1.0 * 0.5 + 2.0 * 0.25 + 0.1)        # 1.1
        h2 = max(0.0, 1.0 * -1.0 + 2.0 * 0.75 - 0.2)       # 0.3
        z1 = h1 * 1.0 + h2 * 0.2 + 0.05                    # 1.21
        z2 = h1 * -0.5 + h2 * 0.3 + 0.0                    # -0.46
        e1, e2 = math.exp(z1), math.exp(z2)
        expected = np.array([e1 / (e1 + e2), e2 / (e1 + e2)])
        assert model.forward(x)[0] == pytest.approx(expected, abs=1e-12)
        assert (h1, h2, z1, z2) == pytest.approx((1.1, 0.3, 1.21, -0.46))

    def test_inference_invariant_to_row_order(self):
        model, X, _ = _setup_model(seed=7)
        perm = np.random.default_rng(0).permutation(X.shape[0])
        assert model.forward(X)[perm] == pytest.approx(model.forward(X[perm]))

    def test_non_finite_input_rejected(self):
        model, X, _ = _setup_model(seed=8)
        X[0, 0] = np.nan
        with pytest.raises(ValueError, match="NaN"):
            model.forward(X)


def _separable_blobs(rng, n_per=60, spread=0.5):
    X = np.vstack([
        rng.normal((0, 0), spread, size=(n_per, 2)),
        rng.normal((3, 3), spread, size=(n_per, 2)),
    ])
    y = np.array(["neg"] * n_per + ["pos"] * n_per)
    return X, y


class TestFit:
    def test_separable_blobs_learned(self):
        rng = np.random.default_rng(9)
        X, y = _separable_blobs(rng)
        model = MLPClassifier(hidden_layers=(16,), epochs=200, batch_size=16,
                              learning_rate=0.05, random_state=0).fit(X, y)
        assert (model.predict(X) == y).mean() >= 0.98

    def test_initial_loss_near_log_k(self):
        # small-magnitude inputs keep the untrained softmax near uniform,
        # where the analytic cross-entropy is exactly ln(k)
        rng = np.random.default_rng(10)
        X = rng.normal(scale=0.01, size=(100, 5))
        y = np.array(list("ABC" * 34))[:100]
        model = MLPClassifier(hidden_layers=(8, 8), epochs=0,
                              random_state=1).fit(X, y)
        onehot = np.zeros((100, 3))
        for i, lab in enumerate(y):
            onehot[i, {"A": 0, "B": 1, "C": 2}[lab]] = 1.0
        model.l2 = 0.0
        assert model.loss(X, onehot) == pytest.approx(math.log(3), abs=0.05)

    def test_loss_decreases_over_first_ten_epochs(self):
        rng = np.random.default_rng(11)
        X, y = _separable_blobs(rng)
        model = MLPClassifier(hidden_layers=(16,), epochs=10, batch_size=16,
                              learning_rate=0.05, random_state=2).fit(X, y)
        assert model.loss_curve_[-1] < model.loss_curve_[0]

    def test_zero_learning_rate_keeps_parameters(self):
        rng = np.random.default_rng(12)
        X, y = _separable_blobs(rng, n_per=20)
        ref = MLPClassifier(hidden_layers=(4,), epochs=0, random_state=3).fit(X, y)
        frozen = MLPClassifier(hidden_layers=(4,), epochs=5, learning_rate=0.0,
                               random_state=3).fit(X, y)
        for a, b in zip(ref.weights_, frozen.weights_):
            assert np.array_equal(a, b)
        for a, b in zip(ref.biases_, frozen.biases_):
            assert np.array_equal(a, b)

    def test_same_seed_identical_parameters(self):
        rng = np.random.default_rng(13)
        X, y = _separable_blobs(rng, n_per=30)
        a = MLPClassifier(epochs=20, random_state=4).fit(X, y)
        b = MLPClassifier(epochs=20, random_state=4).fit(X, y)
        for wa, wb in zip(a.weights_, b.weights_):
            assert np.array_equal(wa, wb)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="single class"):
            MLPClassifier().fit(np.zeros((5, 2)), ["A"] * 5)

    def test_invalid_config(self):
        X = np.zeros((4, 2))
        y = ["A", "B", "A", "B"]
        with pytest.raises(ValueError):
            MLPClassifier(batch_size=0).fit(X, y)
        with pytest.raises(ValueError):
            MLPClassifier(learning_rate=-1.0).fit(X, y)
