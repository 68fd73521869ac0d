"""Feed-forward multi-layer perceptron classifier.

ReLU hidden layers, softmax output, mean cross-entropy loss with an L2
penalty on the weights (not the biases), trained by plain mini-batch SGD
with a constant learning rate. Initialization and batch shuffling are
seeded, so identical seeds give identical fitted parameters.
"""

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_array, check_is_fitted, check_n_features, check_X_y


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class MLPClassifier(BaseEstimator):
    """Parameters mirror the training loop: layer widths, constant learning
    rate, batch size, epoch count, L2 strength, and the RNG seed."""

    def __init__(self, hidden_layers=(64, 32), learning_rate=0.01,
                 batch_size=32, epochs=300, l2=1e-4, random_state=None):
        self.hidden_layers = hidden_layers
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.l2 = l2
        self.random_state = random_state

    def _init_params(self, n_features, n_classes, rng):
        sizes = [n_features, *self.hidden_layers, n_classes]
        self.weights_ = [
            rng.normal(0.0, np.sqrt(2.0 / sizes[i]), (sizes[i], sizes[i + 1]))
            for i in range(len(sizes) - 1)
        ]
        self.biases_ = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]

    def _forward(self, X):
        """Returns layer activations; the last entry is the softmax output."""
        activations = [X]
        a = X
        last = len(self.weights_) - 1
        for i, (W, c) in enumerate(zip(self.weights_, self.biases_)):
            z = a @ W + c
            a = _softmax(z) if i == last else np.maximum(z, 0.0)
            activations.append(a)
        return activations

    def forward(self, X):
        """Class-probability rows (non-negative, summing to 1)."""
        check_is_fitted(self, "weights_")
        X = check_array(X)
        check_n_features(self, X)
        return self._forward(X)[-1]

    def _loss_from_probs(self, probs, onehot):
        ce = -np.mean(np.log(np.sum(probs * onehot, axis=1) + 1e-300))
        reg = 0.5 * self.l2 * sum(float(np.sum(W * W)) for W in self.weights_)
        return ce + reg

    def loss(self, X, onehot):
        """Mean cross-entropy plus the L2 term, as optimized by fit."""
        return self._loss_from_probs(self._forward(X)[-1], onehot)

    def backward(self, X, onehot):
        """Gradients of loss(X, onehot) for every weight matrix and bias."""
        X = np.asarray(X, dtype=float)
        n = X.shape[0]
        if n == 0:
            raise ValueError("empty batch")
        activations = self._forward(X)
        delta = (activations[-1] - onehot) / n
        grads_W = [None] * len(self.weights_)
        grads_b = [None] * len(self.biases_)
        for i in range(len(self.weights_) - 1, -1, -1):
            grads_W[i] = activations[i].T @ delta + self.l2 * self.weights_[i]
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights_[i].T) * (activations[i] > 0)
        return grads_W, grads_b

    def fit(self, X, y):
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] < 2:
            raise ValueError("training data contains a single class")
        code_of = {c: i for i, c in enumerate(self.classes_)}
        codes = np.array([code_of[v] for v in y])
        onehot = np.zeros((X.shape[0], self.classes_.shape[0]))
        onehot[np.arange(X.shape[0]), codes] = 1.0

        rng = np.random.default_rng(self.random_state)
        self._init_params(X.shape[1], self.classes_.shape[0], rng)
        self.n_features_in_ = X.shape[1]
        self.loss_curve_ = []
        for _ in range(self.epochs):
            order = rng.permutation(X.shape[0])
            batch_losses = []
            for start in range(0, X.shape[0], self.batch_size):
                sel = order[start: start + self.batch_size]
                Xb, hb = X[sel], onehot[sel]
                probs = self._forward(Xb)[-1]
                batch_losses.append(self._loss_from_probs(probs, hb))
                grads_W, grads_b = self.backward(Xb, hb)
                for i in range(len(self.weights_)):
                    self.weights_[i] -= self.learning_rate * grads_W[i]
                    self.biases_[i] -= self.learning_rate * grads_b[i]
            self.loss_curve_.append(float(np.mean(batch_losses)))
        return self

    def predict_proba(self, X):
        return self.forward(X)

    def predict(self, X):
        return self.classes_[np.argmax(self.forward(X), axis=1)]
