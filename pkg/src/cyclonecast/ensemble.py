"""Tree ensembles: stage-wise gradient boosting and bootstrap-aggregated
random forests, both built on the CART trees in :mod:`cyclonecast.tree`.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_array, check_is_fitted, check_n_features, check_X_y
from .tree import DecisionTreeClassifier, DecisionTreeRegressor


class GradientBoostingRegressor(BaseEstimator):
    """Stage-wise additive boosting under squared-error loss.

    Each target column gets its own independent ensemble: the model starts
    from the target mean, and every stage fits a shallow tree to the current
    residuals (the negative gradient of the squared-error loss), added with
    shrinkage ``learning_rate``. Per-stage training MSE is recorded in
    ``train_loss_`` and is non-increasing by construction for
    learning_rate <= 2.

    Multi-target y of shape (n, k) is supported; 1-D y is treated as k=1.
    """

    def __init__(self, n_stages=300, learning_rate=0.1, max_depth=3,
                 min_samples_leaf=1, random_state=None):
        self.n_stages = n_stages
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state

    def fit(self, X, y):
        if self.n_stages < 0:
            raise ValueError(f"n_stages must be >= 0, got {self.n_stages}")
        if self.learning_rate <= 0:
            raise ValueError(
                f"learning_rate must be positive, got {self.learning_rate}"
            )
        X, y = check_X_y(X, y, y_numeric=True)
        self._single_target = y.ndim == 1
        Y = y.reshape(-1, 1) if self._single_target else y
        n, k = Y.shape
        self.init_ = Y.mean(axis=0)
        self.stages_ = [[] for _ in range(k)]
        self.train_loss_ = np.empty((k, self.n_stages))
        for target in range(k):
            pred = np.full(n, self.init_[target])
            for stage in range(self.n_stages):
                residual = Y[:, target] - pred
                tree = DecisionTreeRegressor(
                    max_depth=self.max_depth,
                    min_samples_leaf=self.min_samples_leaf,
                ).fit(X, residual)
                pred = pred + self.learning_rate * tree.predict(X)
                self.stages_[target].append(tree)
                self.train_loss_[target, stage] = float(
                    np.mean((Y[:, target] - pred) ** 2)
                )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "stages_")
        X = check_array(X)
        check_n_features(self, X)
        out = np.tile(self.init_, (X.shape[0], 1))
        for target, trees in enumerate(self.stages_):
            for tree in trees:
                out[:, target] += self.learning_rate * tree.predict(X)
        return out[:, 0] if self._single_target else out


def _fit_forest_tree(args):
    X, y, classes, params, seed, bootstrap = args
    rng = np.random.default_rng(seed)
    if bootstrap:
        idx = rng.integers(0, X.shape[0], X.shape[0])
        Xb, yb = X[idx], y[idx]
    else:
        Xb, yb = X, y
    tree = DecisionTreeClassifier(random_state=rng, **params)
    return tree.fit(Xb, yb, classes=classes)


class RandomForestClassifier(BaseEstimator):
    """Bootstrap-aggregated CART trees with random feature subsets.

    Each tree trains on a with-replacement resample the size of the training
    set and casts one hard vote; the forest predicts the vote majority, with
    ties resolved toward the lexicographically smallest class. Per-tree seeds
    are derived up front from ``random_state``, so fitted models are
    identical for any ``n_jobs``.

    subset_mode selects where the random feature subset is drawn: at every
    split (standard) or once per tree.
    """

    def __init__(self, n_trees=200, max_features="sqrt", max_depth=None,
                 min_samples_leaf=1, bootstrap=True, subset_mode="per_split",
                 random_state=None, n_jobs=1):
        self.n_trees = n_trees
        self.max_features = max_features
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap = bootstrap
        self.subset_mode = subset_mode
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] < 2:
            raise ValueError("training data contains a single class")
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_trees)
        params = dict(
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features,
            subset_mode=self.subset_mode,
        )
        jobs = [
            (X, y, self.classes_, params, seed, self.bootstrap) for seed in seeds
        ]
        if self.n_jobs and self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                self.trees_ = list(pool.map(_fit_forest_tree, jobs))
        else:
            self.trees_ = [_fit_forest_tree(job) for job in jobs]
        self.n_features_in_ = X.shape[1]
        return self

    def vote_fractions(self, X):
        """Fraction of trees voting for each class, rows summing to 1."""
        check_is_fitted(self, "trees_")
        X = check_array(X)
        check_n_features(self, X)
        votes = np.zeros((X.shape[0], self.classes_.shape[0]))
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            counts = tree.predict_counts(X)
            votes[rows, np.argmax(counts, axis=1)] += 1.0
        return votes / self.n_trees

    def predict_proba(self, X):
        return self.vote_fractions(X)

    def predict(self, X):
        return self.classes_[np.argmax(self.vote_fractions(X), axis=1)]

    @property
    def feature_importances_(self):
        """Mean impurity decrease per feature, normalized to sum to 1."""
        check_is_fitted(self, "trees_")
        total = np.mean(
            [tree.tree_.importance_gain for tree in self.trees_], axis=0
        )
        s = total.sum()
        if s <= 0:
            warnings.warn(
                "no split in any tree; feature importances are all zero",
                stacklevel=2,
            )
            return np.zeros_like(total)
        return total / s
