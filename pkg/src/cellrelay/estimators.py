"""scikit-learn compatible wrappers around the allocator and the PER estimator.

:class:`BurstAllocator` maps rows of ``(per1, per2, target1, target2)`` to
burst splits, so a batch of link states can be pushed through a pipeline or a
parameter grid. :class:`LinkPerEstimator` learns a windowed PER from rows of
``(errored, sent)`` acknowledgment counts.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .allocation import DEFAULT_PER_FLOOR, floored_split, integerize, uniform_split
from .engine import INITIAL_PER_ESTIMATE, PerEstimator
from .exceptions import DegenerateDenominator

__all__ = ["BurstAllocator", "LinkPerEstimator", "check_link_array", "check_ack_array"]


def check_link_array(X):
    """Validate an ``(n, 4)`` array of ``per1, per2, target1, target2``."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 4:
        raise ValueError(f"expected 4 columns (per1, per2, target1, target2), got {X.shape[1]}")
    if np.any(X[:, :2] < 0) or np.any(X[:, :2] > 1):
        raise ValueError("link PERs must lie in [0, 1]")
    if np.any(X[:, 2:] <= 0) or np.any(X[:, 2:] > 1):
        raise ValueError("target PERs must lie in (0, 1]")
    return X


def check_ack_array(X):
    """Validate an ``(n, 2)`` integer array of ``errored, sent`` counts."""
    X = check_array(X, dtype=np.int64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (errored, sent), got {X.shape[1]}")
    if np.any(X[:, 0] < 0) or np.any(X[:, 0] > X[:, 1]):
        raise ValueError("each row needs 0 <= errored <= sent")
    return X


class BurstAllocator(TransformerMixin, BaseEstimator):
    """Split a ``k``-packet burst between two mobiles.

    Parameters
    ----------
    k : int
        Burst length.
    scheme : {"adaptive", "uniform"}
        Closed-form PER-driven split, or half the burst each.
    per_floor : float
        Lower bound applied to link PERs before splitting.

    ``transform`` returns the continuous split, ``predict`` the integer one.
    The mobile with the larger target PER wins rounding ties and the odd
    packet of a uniform split (mobile 1 on equal targets).
    """

    def __init__(self, k=10, scheme="adaptive", per_floor=DEFAULT_PER_FLOOR):
        self.k = k
        self.scheme = scheme
        self.per_floor = per_floor

    def _check_params(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if self.scheme not in ("adaptive", "uniform"):
            raise ValueError(f"scheme must be 'adaptive' or 'uniform', got {self.scheme!r}")
        if not 0 <= self.per_floor <= 1:
            raise ValueError("per_floor must lie in [0, 1]")

    def fit(self, X, y=None):
        self._check_params()
        X = check_link_array(X)
        self.n_features_in_ = X.shape[1]
        return self

    def _rows(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_link_array(X)
        for per1, per2, t1, t2 in X:
            yield per1, per2, t2 / t1, 1 if t1 >= t2 else 2

    def transform(self, X):
        out = []
        for per1, per2, a, winner in self._rows(X):
            if self.scheme == "uniform":
                out.append(uniform_split(self.k, winner))
                continue
            try:
                out.append(floored_split(per1, per2, a, self.k, self.per_floor))
            except DegenerateDenominator:
                out.append(uniform_split(self.k, winner))
        return np.asarray(out, dtype=np.float64).reshape(-1, 2)

    def predict(self, X):
        out = []
        for (per1, per2, a, winner), (n1, _) in zip(self._rows(X), self.transform(X)):
            if self.scheme == "uniform" or (per1 == 0 and per2 == 0):
                out.append(uniform_split(self.k, winner))
            else:
                out.append(integerize(n1, self.k, winner))
        return np.asarray(out, dtype=np.int64).reshape(-1, 2)


class LinkPerEstimator(BaseEstimator):
    """Windowed link PER learnt from per-burst acknowledgment counts.

    After fitting, ``estimate_`` holds the current estimate and
    ``estimates_`` the estimate after each row of the last batch.
    """

    def __init__(self, window_bursts=50, per_floor=DEFAULT_PER_FLOOR,
                 initial_estimate=INITIAL_PER_ESTIMATE):
        self.window_bursts = window_bursts
        self.per_floor = per_floor
        self.initial_estimate = initial_estimate

    def fit(self, X, y=None):
        self._state = PerEstimator(self.window_bursts, self.per_floor, self.initial_estimate)
        return self._fold(X)

    def partial_fit(self, X, y=None):
        if not hasattr(self, "_state"):
            self._state = PerEstimator(self.window_bursts, self.per_floor, self.initial_estimate)
        return self._fold(X)

    def _fold(self, X):
        X = check_ack_array(X)
        self.n_features_in_ = 2
        self.estimates_ = np.array([self._state.update(int(e), int(s)) for e, s in X])
        self.estimate_ = self._state.estimate
        return self
