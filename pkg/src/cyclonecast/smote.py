"""Synthetic minority oversampling (SMOTE) for the classification split.

Each synthetic point is x + lambda * (neighbor - x) with lambda uniform in
[0, 1] and the neighbor drawn from x's k nearest same-class neighbors
(Euclidean, exact brute-force search). Originals are always preserved and
every class is topped up to the target count, so the output class histogram
is flat. Seeded and deterministic; classes are processed in sorted order
with per-class derived seeds.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_X_y


class SMOTE(BaseEstimator):
    """k_neighbors: neighbor pool size (shrunk to class_size - 1 for tiny
    classes; singleton classes are duplicated verbatim with a warning).
    target_count: per-class row count after resampling; None = majority."""

    def __init__(self, k_neighbors=5, target_count=None, random_state=None):
        self.k_neighbors = k_neighbors
        self.target_count = target_count
        self.random_state = random_state

    def fit_resample(self, X, y):
        if self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {self.k_neighbors}")
        X, y = check_X_y(X, y)
        classes, counts = np.unique(y, return_counts=True)
        target = self.target_count
        if target is None:
            target = int(counts.max())
        elif target < counts.max():
            raise ValueError(
                f"target_count {target} is below the largest class ({counts.max()})"
            )
        seeds = np.random.SeedSequence(self.random_state).spawn(classes.shape[0])
        new_X = [X.copy()]
        new_y = [y.copy()]
        for cls, count, seed in zip(classes, counts, seeds):
            need = target - int(count)
            if need == 0:
                continue
            rng = np.random.default_rng(seed)
            members = X[y == cls]
            if count == 1:
                warnings.warn(
                    f"class {cls!r} has a single sample; duplicating it "
                    f"verbatim {need} times",
                    stacklevel=2,
                )
                new_X.append(np.repeat(members, need, axis=0))
                new_y.append(np.repeat([cls], need))
                continue
            k = min(self.k_neighbors, int(count) - 1)
            neighbors = self._nearest_neighbors(members, k)
            base = rng.integers(0, count, need)
            pick = rng.integers(0, k, need)
            lam = rng.uniform(0.0, 1.0, need)
            anchor = members[base]
            partner = members[neighbors[base, pick]]
            new_X.append(anchor + lam[:, None] * (partner - anchor))
            new_y.append(np.repeat([cls], need))
        return np.vstack(new_X), np.concatenate(new_y)

    @staticmethod
    def _nearest_neighbors(members, k):
        """Indices of each row's k nearest same-class rows (self excluded),
        nearest first; distance ties resolve to the lower row index."""
        d2 = (
            np.sum(members * members, axis=1)[:, None]
            + np.sum(members * members, axis=1)[None, :]
            - 2.0 * (members @ members.T)
        )
        np.fill_diagonal(d2, np.inf)
        return np.argsort(d2, axis=1, kind="stable")[:, :k]
