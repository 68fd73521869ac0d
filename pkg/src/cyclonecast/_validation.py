"""Input validation helpers shared by the estimators."""

import numpy as np
from sklearn.exceptions import NotFittedError


def check_array(X, ensure_2d=True, dtype=np.float64, name="X"):
    """Coerce to a finite numpy array, rejecting NaN/inf and bad shapes."""
    arr = np.asarray(X, dtype=dtype)
    if ensure_2d:
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def check_X_y(X, y, y_numeric=False):
    """Validate a feature matrix and target vector/matrix of matching length."""
    X = check_array(X)
    if y_numeric:
        y = np.asarray(y, dtype=np.float64)
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains NaN or infinite values")
    else:
        y = np.asarray(y)
    if y.shape[0] != X.shape[0]:
        raise ValueError(
            f"X and y have inconsistent lengths: {X.shape[0]} vs {y.shape[0]}"
        )
    if y.shape[0] == 0:
        raise ValueError("y is empty")
    return X, y


def check_is_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )


def check_n_features(estimator, X, n_features_attr="n_features_in_"):
    expected = getattr(estimator, n_features_attr)
    if X.shape[1] != expected:
        raise ValueError(
            f"{type(estimator).__name__} was fitted with {expected} features "
            f"but got {X.shape[1]}"
        )
