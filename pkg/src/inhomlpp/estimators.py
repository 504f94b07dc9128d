"""scikit-learn style wrappers: targets in, shape values out.

``X`` is an (m, 2) array of macroscopic targets (x, y). ``fit`` only
validates and freezes the field; there is nothing to learn from data.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DomainError
from .harness import reference_shape
from .lpp_engine import EnvironmentSpec, passage_row, scaled_lattice_target
from .macro_shape import optimize_polyline
from .speed_field import as_field


def _targets(X):
    X = check_array(X, dtype=float, ensure_min_samples=1)
    if X.shape[1] != 2:
        raise DomainError(f"X must have two columns (x, y), got {X.shape[1]}")
    if np.any(X < 0):
        raise DomainError("targets must be nonnegative")
    return X


class ShapeFunctionEstimator(RegressorMixin, BaseEstimator):
    """Predicts Γ_c(x, y).

    Parameters
    ----------
    field : str or SpeedField
        Field spec, e.g. ``"corner-sqrt:r=2"``.
    method : {"auto", "closed", "numeric"}
        ``auto`` uses a closed form where one exists.
    multistart, free_waypoints, random_state
        Passed to the numeric optimizer.
    """

    def __init__(self, field="constant:r=1", method="auto", multistart=16, free_waypoints=0, random_state=0):
        self.field = field
        self.method = method
        self.multistart = multistart
        self.free_waypoints = free_waypoints
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.method not in ("auto", "closed", "numeric"):
            raise DomainError(f"unknown method {self.method!r}")
        self.field_ = as_field(self.field)
        if X is not None:
            self.n_features_in_ = _targets(X).shape[1]
        return self

    def _opt(self):
        return dict(multistart=self.multistart, free_waypoints=self.free_waypoints, rng_seed=self.random_state)

    def evaluate(self, X) -> list:
        """Full ShapeEval records for each target."""
        check_is_fitted(self, "field_")
        X = _targets(X)
        if self.method == "numeric":
            return [optimize_polyline(self.field_, (x, y), **self._opt()) for x, y in X]
        return [reference_shape(self.field_, x, y, optimizer=self._opt()) for x, y in X]

    def predict(self, X) -> np.ndarray:
        return np.array([ev.value for ev in self.evaluate(X)])


class PassagePercolationSimulator(BaseEstimator):
    """Predicts n^-1 G((0,0) -> (floor(nx), floor(ny))) for one environment.

    All targets share a single realisation; G is read off one DP sweep per
    distinct lattice row.
    """

    def __init__(self, field="constant:r=1", n=500, seed=0):
        self.field = field
        self.n = n
        self.seed = seed

    def fit(self, X=None, y=None):
        self.env_ = EnvironmentSpec(as_field(self.field), self.n, self.seed)
        if X is not None:
            self.n_features_in_ = _targets(X).shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "env_")
        X = _targets(X)
        n = self.env_.n
        lattice = [scaled_lattice_target(n, x, y) for x, y in X]
        out = np.empty(len(lattice))
        # one sweep per distinct row index, reading all targets on that row
        by_row: dict = {}
        for k, (i, j) in enumerate(lattice):
            by_row.setdefault(j, []).append((k, i))
        for j, items in by_row.items():
            imax = max(i for _, i in items)
            row = passage_row(self.env_, (0, 0), (imax, j))
            for k, i in items:
                out[k] = row[i] / n
        return out
