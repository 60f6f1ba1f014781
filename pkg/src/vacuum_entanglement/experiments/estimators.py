"""Estimator-style front end to the window search."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ..kernels import FieldModel
from .search import SweepSpec, WindowTemplate, optimize_window
from .studies import run_grid


class WindowSearch(BaseEstimator):
    """Per-separation window optimization with ``fit`` / ``predict``.

    ``fit(X)`` runs the seeded search at every separation in ``X`` (one
    column of ``L/T`` values, sorted internally); ``predict`` returns the
    best objective value found (negativity or margin), searching afresh for
    separations not seen during ``fit``.
    """

    def __init__(self, model="dirac_right", objective="negativity", budget=500, seed=0,
                 template=None, threads=1):
        self.model = model
        self.objective = objective
        self.budget = budget
        self.seed = seed
        self.template = template
        self.threads = threads

    def _spec(self, grid=()):
        return SweepSpec(grid=tuple(grid), model=FieldModel(self.model),
                         template=self.template or WindowTemplate(), budget=self.budget,
                         seed=self.seed, objective=self.objective)

    @staticmethod
    def _grid(X):
        X = check_array(np.asarray(X, dtype=float).reshape(len(X), -1))
        if X.shape[1] != 1:
            raise ValueError("X must have a single column of L/T values")
        return X[:, 0]

    def fit(self, X, y=None):
        grid = sorted(set(self._grid(X).tolist()))
        self.spec_ = self._spec(grid)
        self.results_ = {r.L_over_T: r for r in run_grid(self.spec_, self.threads)}
        self.n_features_in_ = 1
        return self

    def _value(self, r):
        return r.best.negativity if self.objective == "negativity" else r.best.margin

    def predict(self, X):
        check_is_fitted(self, "results_")
        out = []
        for x in self._grid(X):
            r = self.results_.get(float(x))
            if r is None:
                r = optimize_window(self.spec_, float(x))
                self.results_[float(x)] = r
            out.append(self._value(r))
        return np.array(out)
