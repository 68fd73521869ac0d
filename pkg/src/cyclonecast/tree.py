"""CART decision trees: the weak learner under both ensembles.

Split search maximizes the absolute impurity decrease (sum-of-squares
reduction for regression, count-scaled Gini decrease for classification)
over midpoint thresholds between consecutive distinct feature values.
Ties are broken toward the lowest feature index, then the lowest threshold.

Because mathematically equal gains computed by different summation orders
differ at the 1e-16 level, comparisons use a tiny relative epsilon; the
exhaustive-split reference in the test-suite applies the same rule.
"""

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_array, check_is_fitted, check_n_features, check_X_y

_LEAF = -1


def _tie_eps(value):
    return 1e-12 * (1.0 + abs(value))


def _improves(gain, best):
    """Strictly-better test used for all split comparisons."""
    return gain > best + _tie_eps(best)


def _resolve_max_features(max_features, n_features):
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return int(np.ceil(np.sqrt(n_features)))
    m = int(max_features)
    if not 1 <= m <= n_features:
        raise ValueError(f"max_features {max_features!r} out of range")
    return m


def _best_split_for_feature(values, min_leaf, parent_score, score_fn):
    """Scan one feature's sorted candidates; return (gain, threshold) or None.

    ``score_fn(order, boundaries)`` turns the sort order and candidate
    left-block sizes into (left, right) impurity arrays, so regression and
    classification share this scan.
    """
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    sv = values[order]
    boundaries = np.nonzero(sv[1:] > sv[:-1])[0] + 1  # left-block sizes
    if min_leaf > 1:
        boundaries = boundaries[
            (boundaries >= min_leaf) & (boundaries <= n - min_leaf)
        ]
    if boundaries.size == 0:
        return None
    left_score, right_score = score_fn(order, boundaries)
    gains = parent_score - left_score - right_score
    best = np.argmax(gains)
    gmax = gains[best]
    first = np.nonzero(gains >= gmax - _tie_eps(gmax))[0][0]
    p = boundaries[first]
    threshold = 0.5 * (sv[p - 1] + sv[p])
    return float(gains[first]), float(threshold)


class _TreeBuilder:
    """Grows one tree into flat arrays (iteratively, so depth is unbounded)."""

    def __init__(self, X, max_depth, min_samples_leaf, max_features, rng,
                 subset_mode):
        self.X = X
        self.max_depth = max_depth
        self.min_leaf = min_samples_leaf
        self.n_features = X.shape[1]
        self.m = _resolve_max_features(max_features, self.n_features)
        self.rng = rng
        self.subset_mode = subset_mode
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.values = []
        self.importance_gain = np.zeros(self.n_features)
        if subset_mode not in ("per_split", "per_tree"):
            raise ValueError(f"unknown subset_mode {subset_mode!r}")
        if subset_mode == "per_tree" and self.m < self.n_features:
            self.tree_features = np.sort(
                self.rng.choice(self.n_features, self.m, replace=False)
            )
        else:
            self.tree_features = None

    def _candidate_features(self):
        if self.m >= self.n_features:
            return np.arange(self.n_features)
        if self.subset_mode == "per_tree":
            return self.tree_features
        return np.sort(self.rng.choice(self.n_features, self.m, replace=False))

    def build(self, idx, node_score, node_value, split_scan):
        """``split_scan(idx, features, parent_score)`` -> (gain, f, thr) or None;
        ``node_score(idx)`` is the node impurity; ``node_value(idx)`` the leaf
        payload."""
        stack = [(idx, 0, None, False)]  # indices, depth, parent slot, is_right
        while stack:
            node_idx, depth, parent, is_right = stack.pop()
            slot = len(self.feature)
            if parent is not None:
                if is_right:
                    self.right[parent] = slot
                else:
                    self.left[parent] = slot
            self.feature.append(_LEAF)
            self.threshold.append(0.0)
            self.left.append(_LEAF)
            self.right.append(_LEAF)
            self.values.append(node_value(node_idx))

            n = node_idx.shape[0]
            if (
                n < 2 * self.min_leaf
                or (self.max_depth is not None and depth >= self.max_depth)
            ):
                continue
            parent_score = node_score(node_idx)
            if parent_score <= _tie_eps(0.0):
                continue
            found = split_scan(node_idx, self._candidate_features(), parent_score)
            if found is None or found[0] <= _tie_eps(0.0):
                continue
            gain, f, thr = found
            go_left = self.X[node_idx, f] <= thr
            self.feature[slot] = f
            self.threshold[slot] = thr
            self.importance_gain[f] += gain
            # right pushed first so the left subtree is numbered first
            stack.append((node_idx[~go_left], depth + 1, slot, True))
            stack.append((node_idx[go_left], depth + 1, slot, False))
        return self


class _FittedTree:
    """Flat-array tree with vectorized routing."""

    def __init__(self, feature, threshold, left, right, values, importance_gain):
        self.feature = np.asarray(feature, dtype=np.intp)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.intp)
        self.right = np.asarray(right, dtype=np.intp)
        self.values = np.asarray(values, dtype=float)
        self.importance_gain = np.asarray(importance_gain, dtype=float)

    @classmethod
    def from_builder(cls, builder):
        return cls(
            builder.feature, builder.threshold, builder.left, builder.right,
            builder.values, builder.importance_gain,
        )

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    def apply(self, X):
        node = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            feat = self.feature[node]
            active = np.nonzero(feat != _LEAF)[0]
            if active.size == 0:
                return node
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])


def _scan_regression(X, y, min_leaf):
    y_sq = y * y
    total1 = float(y.sum())
    total2 = float(y_sq.sum())

    def node_score(idx):
        s1 = float(y[idx].sum())
        s2 = float(y_sq[idx].sum())
        return s2 - s1 * s1 / idx.shape[0]

    def split_scan(idx, features, parent_score):
        n = idx.shape[0]
        yi = y[idx]
        yi_sq = y_sq[idx]
        best = None
        for f in features:
            def score_fn(order, boundaries):
                c1 = np.cumsum(yi[order])
                c2 = np.cumsum(yi_sq[order])
                ls1 = c1[boundaries - 1]
                ls2 = c2[boundaries - 1]
                nl = boundaries
                nr = n - boundaries
                left = ls2 - ls1 * ls1 / nl
                right = (c2[-1] - ls2) - (c1[-1] - ls1) ** 2 / nr
                return left, right

            found = _best_split_for_feature(
                X[idx, f], min_leaf, parent_score, score_fn
            )
            if found is None:
                continue
            gain, thr = found
            if best is None or _improves(gain, best[0]):
                best = (gain, int(f), thr)
        return best

    return node_score, split_scan


def _scan_classification(X, codes, n_classes, min_leaf):
    onehot = np.zeros((codes.shape[0], n_classes))
    onehot[np.arange(codes.shape[0]), codes] = 1.0

    def node_score(idx):
        counts = np.bincount(codes[idx], minlength=n_classes).astype(float)
        n = idx.shape[0]
        return n - float(counts @ counts) / n

    def split_scan(idx, features, parent_score):
        n = idx.shape[0]
        oh = onehot[idx]
        best = None
        for f in features:
            def score_fn(order, boundaries):
                cum = np.cumsum(oh[order], axis=0)
                lc = cum[boundaries - 1]
                rc = cum[-1] - lc
                nl = boundaries.astype(float)
                nr = n - nl
                left = nl - np.einsum("ij,ij->i", lc, lc) / nl
                right = nr - np.einsum("ij,ij->i", rc, rc) / nr
                return left, right

            found = _best_split_for_feature(
                X[idx, f], min_leaf, parent_score, score_fn
            )
            if found is None:
                continue
            gain, thr = found
            if best is None or _improves(gain, best[0]):
                best = (gain, int(f), thr)
        return best

    return node_score, split_scan


class DecisionTreeRegressor(BaseEstimator):
    """CART regression tree minimizing within-leaf sum of squares."""

    def __init__(self, max_depth=None, min_samples_leaf=1, max_features=None,
                 subset_mode="per_split", random_state=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.subset_mode = subset_mode
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if y.ndim != 1:
            raise ValueError("regression tree expects a 1-D target")
        rng = np.random.default_rng(self.random_state)
        node_score, split_scan = _scan_regression(X, y, self.min_samples_leaf)
        builder = _TreeBuilder(
            X, self.max_depth, self.min_samples_leaf, self.max_features, rng,
            self.subset_mode,
        ).build(
            np.arange(X.shape[0], dtype=np.intp),
            node_score,
            lambda idx: float(y[idx].mean()),
            split_scan,
        )
        self.tree_ = _FittedTree.from_builder(builder)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "tree_")
        X = check_array(X)
        check_n_features(self, X)
        return self.tree_.values[self.tree_.apply(X)]


class DecisionTreeClassifier(BaseEstimator):
    """CART classification tree splitting on Gini impurity decrease.

    Leaves store per-class sample counts; predictions take the majority
    class, with count ties resolved toward the lexicographically smallest
    class label.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1, max_features=None,
                 subset_mode="per_split", random_state=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.subset_mode = subset_mode
        self.random_state = random_state

    def fit(self, X, y, classes=None):
        X, y = check_X_y(X, y)
        self.classes_ = np.asarray(classes) if classes is not None else np.unique(y)
        code_of = {c: i for i, c in enumerate(self.classes_)}
        try:
            codes = np.array([code_of[v] for v in y], dtype=np.intp)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in classes") from None
        rng = np.random.default_rng(self.random_state)
        k = self.classes_.shape[0]
        node_score, split_scan = _scan_classification(
            X, codes, k, self.min_samples_leaf
        )
        builder = _TreeBuilder(
            X, self.max_depth, self.min_samples_leaf, self.max_features, rng,
            self.subset_mode,
        ).build(
            np.arange(X.shape[0], dtype=np.intp),
            node_score,
            lambda idx: np.bincount(codes[idx], minlength=k).astype(float),
            split_scan,
        )
        self.tree_ = _FittedTree.from_builder(builder)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_counts(self, X):
        """Per-class sample counts of the leaf each row lands in."""
        check_is_fitted(self, "tree_")
        X = check_array(X)
        check_n_features(self, X)
        return self.tree_.values[self.tree_.apply(X)]

    def predict_proba(self, X):
        counts = self.predict_counts(X)
        return counts / counts.sum(axis=1, keepdims=True)

    def predict(self, X):
        counts = self.predict_counts(X)
        return self.classes_[np.argmax(counts, axis=1)]
