"""Soft-margin kernel SVM trained with sequential minimal optimization,
lifted to multiclass with a one-vs-rest reduction.

The solver is Platt-style SMO: scan for a KKT violator (full passes
alternating with non-bound-only passes), pick the partner maximizing
|E1 - E2| among non-bound points, then fall back to seeded random sweeps.
Training ends only after a full pass finds no violator beyond ``tol``, which
is exactly the KKT condition within tolerance.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_array, check_is_fitted, check_n_features, check_X_y

_FULL_KERNEL_LIMIT = 3000  # precompute K only below this many rows (~70 MB)


def rbf_kernel(A, B, gamma):
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def linear_kernel(A, B):
    return A @ B.T


class _KernelRows:
    """Row-wise kernel access: full matrix when small, cached rows otherwise."""

    def __init__(self, X, kernel_fn, max_cached=512):
        self.X = X
        self.kernel_fn = kernel_fn
        n = X.shape[0]
        self.full = kernel_fn(X, X) if n <= _FULL_KERNEL_LIMIT else None
        self.cache = {}
        self.order = []
        self.max_cached = max_cached

    def row(self, i):
        if self.full is not None:
            return self.full[i]
        if i not in self.cache:
            if len(self.order) >= self.max_cached:
                self.cache.pop(self.order.pop(0))
            self.cache[i] = self.kernel_fn(self.X[i: i + 1], self.X).ravel()
            self.order.append(i)
        return self.cache[i]


def _resolve_gamma(gamma, X):
    if gamma == "scale":
        var = float(X.var())
        if var == 0.0:
            var = 1.0
        return 1.0 / (X.shape[1] * var)
    return float(gamma)


class BinarySVM(BaseEstimator):
    """Binary soft-margin SVM; labels must be -1/+1.

    Attributes after fit: ``support_vectors_``, ``dual_coef_`` (alpha_i y_i
    over support vectors), ``intercept_``, ``alpha_`` (full training alphas),
    and ``gamma_`` (the resolved RBF width).
    """

    def __init__(self, C=1.0, kernel="rbf", gamma="scale", tol=1e-3,
                 max_iter=200000, random_state=None):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def _kernel_fn(self):
        if self.kernel == "rbf":
            g = self.gamma_
            return lambda A, B: rbf_kernel(A, B, g)
        if self.kernel == "linear":
            return lambda A, B: linear_kernel(A, B)
        raise ValueError(f"unknown kernel {self.kernel!r}")

    def fit(self, X, y):
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")
        X, y = check_X_y(X, y, y_numeric=True)
        labels = np.unique(y)
        if not np.array_equal(labels, np.array([-1.0, 1.0])):
            raise ValueError(f"labels must be -1/+1 with both present, got {labels}")
        self.gamma_ = _resolve_gamma(self.gamma, X) if self.kernel == "rbf" else None
        kernel_fn = self._kernel_fn()
        rows = _KernelRows(X, kernel_fn)
        rng = np.random.default_rng(self.random_state)

        n = X.shape[0]
        C, tol = float(self.C), float(self.tol)
        alpha = np.zeros(n)
        b = 0.0
        E = -y.astype(float)  # f(x) - y with all alphas zero
        if self.kernel == "rbf":
            diag = np.ones(n)
        else:
            diag = np.sum(X * X, axis=1)

        def take_step(i, j):
            nonlocal b, E
            if i == j:
                return False
            ai, aj = alpha[i], alpha[j]
            yi, yj = y[i], y[j]
            Ei, Ej = E[i], E[j]
            if yi != yj:
                L, H = max(0.0, aj - ai), min(C, C + aj - ai)
            else:
                L, H = max(0.0, ai + aj - C), min(C, ai + aj)
            if H - L < 1e-12:
                return False
            Ki = rows.row(i)
            Kj = rows.row(j)
            eta = diag[i] + diag[j] - 2.0 * Ki[j]
            if eta <= 0:
                return False
            aj_new = aj + yj * (Ei - Ej) / eta
            aj_new = min(H, max(L, aj_new))
            if abs(aj_new - aj) < 1e-10:
                return False
            ai_new = ai + yi * yj * (aj - aj_new)
            # snap to the box so support vectors separate cleanly
            if ai_new < 1e-10:
                ai_new = 0.0
            elif ai_new > C - 1e-10:
                ai_new = C
            if aj_new < 1e-10:
                aj_new = 0.0
            elif aj_new > C - 1e-10:
                aj_new = C
            di = yi * (ai_new - ai)
            dj = yj * (aj_new - aj)
            b1 = b - Ei - di * diag[i] - dj * Ki[j]
            b2 = b - Ej - di * Ki[j] - dj * diag[j]
            if 0.0 < ai_new < C:
                b_new = b1
            elif 0.0 < aj_new < C:
                b_new = b2
            else:
                b_new = 0.5 * (b1 + b2)
            E += di * Ki + dj * Kj + (b_new - b)
            alpha[i], alpha[j] = ai_new, aj_new
            b = b_new
            return True

        def violates(i):
            r = y[i] * E[i]
            return (r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0)

        def examine(i):
            if not violates(i):
                return False
            nonbound = np.nonzero((alpha > 0) & (alpha < C))[0]
            if nonbound.size > 0:
                j = nonbound[np.argmax(np.abs(E[i] - E[nonbound]))]
                if take_step(i, int(j)):
                    return True
                start = rng.integers(nonbound.size)
                for j in np.roll(nonbound, -start):
                    if take_step(i, int(j)):
                        return True
            start = rng.integers(n)
            for j in np.roll(np.arange(n), -start):
                if take_step(i, int(j)):
                    return True
            return False

        steps = 0
        examine_all = True
        while steps < self.max_iter:
            changed = 0
            if examine_all:
                targets = range(n)
            else:
                targets = np.nonzero((alpha > 0) & (alpha < C))[0]
            for i in targets:
                changed += examine(int(i))
                steps += 1
                if steps >= self.max_iter:
                    break
            if examine_all:
                if changed == 0:
                    # full pass clean: recompute errors exactly and re-verify,
                    # guarding against drift in the incremental cache
                    E = self._decision_from(X, alpha, y, b, kernel_fn) - y
                    if not any(violates(i) for i in range(n)):
                        break
                else:
                    examine_all = False
            elif changed == 0:
                examine_all = True

        self.alpha_ = alpha
        self.intercept_ = float(b)
        sv = np.nonzero(alpha > 0)[0]
        self.support_ = sv
        self.support_vectors_ = X[sv].copy()
        self.dual_coef_ = alpha[sv] * y[sv]
        self.n_features_in_ = X.shape[1]
        self._fit_X = X
        self._fit_y = y
        return self

    @staticmethod
    def _decision_from(X, alpha, y, b, kernel_fn):
        sv = np.nonzero(alpha > 0)[0]
        if sv.size == 0:
            return np.full(X.shape[0], b)
        return kernel_fn(X, X[sv]) @ (alpha[sv] * y[sv]) + b

    def decision_function(self, X):
        check_is_fitted(self, "support_vectors_")
        X = check_array(X)
        check_n_features(self, X)
        if self.support_vectors_.shape[0] == 0:
            return np.full(X.shape[0], self.intercept_)
        K = self._kernel_fn()(X, self.support_vectors_)
        return K @ self.dual_coef_ + self.intercept_

    def predict(self, X):
        return np.where(self.decision_function(X) >= 0, 1.0, -1.0)

    def dual_objective(self):
        """W(alpha) = sum(alpha) - 1/2 alpha' (yy' o K) alpha over the
        training set (only support vectors contribute to the quadratic)."""
        check_is_fitted(self, "alpha_")
        sv = self.support_
        coef = self.alpha_[sv] * self._fit_y[sv]
        K = self._kernel_fn()(self._fit_X[sv], self._fit_X[sv])
        return float(self.alpha_.sum() - 0.5 * coef @ K @ coef)

    def kkt_violations(self, tol=None):
        """Margin-based KKT residuals over the training set, for auditing."""
        check_is_fitted(self, "alpha_")
        tol = self.tol if tol is None else tol
        margins = self._fit_y * self.decision_function(self._fit_X)
        res = np.zeros_like(margins)
        free = (self.alpha_ > 0) & (self.alpha_ < self.C)
        res[self.alpha_ == 0] = np.maximum(0.0, 1.0 - margins[self.alpha_ == 0])
        res[free] = np.abs(1.0 - margins[free])
        res[self.alpha_ == self.C] = np.maximum(
            0.0, margins[self.alpha_ == self.C] - 1.0
        )
        return res


def _fit_one_class(args):
    X, y, cls, params, seed = args
    y_bin = np.where(y == cls, 1.0, -1.0)
    return BinarySVM(random_state=seed, **params).fit(X, y_bin)


class OneVsRestSVM(BaseEstimator):
    """One binary machine per class; predict the argmax decision value,
    ties toward the lexicographically smallest class."""

    def __init__(self, C=1.0, kernel="rbf", gamma="scale", tol=1e-3,
                 max_iter=200000, random_state=None, n_jobs=1):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] < 2:
            raise ValueError("training data contains a single class")
        params = dict(
            C=self.C, kernel=self.kernel, gamma=self.gamma, tol=self.tol,
            max_iter=self.max_iter,
        )
        seeds = np.random.SeedSequence(self.random_state).spawn(
            self.classes_.shape[0]
        )
        jobs = [
            (X, y, cls, params, seed)
            for cls, seed in zip(self.classes_, seeds)
        ]
        if self.n_jobs and self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                self.machines_ = list(pool.map(_fit_one_class, jobs))
        else:
            self.machines_ = [_fit_one_class(job) for job in jobs]
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "machines_")
        X = check_array(X)
        check_n_features(self, X)
        return np.column_stack([m.decision_function(X) for m in self.machines_])

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
