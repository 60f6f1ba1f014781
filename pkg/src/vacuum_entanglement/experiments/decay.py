"""Stretched-exponential decay law ``log N = log A - c x^p`` fitted by least squares."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.metrics import r2_score
from sklearn.utils.validation import check_is_fitted, check_X_y, column_or_1d

P_BOUNDS = (1e-6, 10.0)
_P_STARTS = (0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class DecayFit:
    log_A: float
    c: float
    p: float
    residuals: tuple
    rms: float
    p_err: float = math.nan
    fixed_p2: tuple = (math.nan, math.nan, math.nan)  # (log_A, c, rms) with p pinned to 2
    n_points: int = 0

    def __post_init__(self):
        if not math.isfinite(self.p) or self.p <= 0:
            raise ValueError("decay exponent must be finite and positive")

    def predict_log(self, x):
        return self.log_A - self.c * np.asarray(x, dtype=float) ** self.p

    def to_dict(self) -> dict:
        return {"log_A": self.log_A, "c": self.c, "p": self.p, "p_err": self.p_err,
                "rms": self.rms, "residuals": list(self.residuals),
                "fixed_p2": {"log_A": self.fixed_p2[0], "c": self.fixed_p2[1],
                             "rms": self.fixed_p2[2]},
                "n_points": self.n_points}


def _fixed_p(x, y, p):
    A = np.column_stack([np.ones_like(x), -x ** p])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(r * r)))


def fit_decay_arrays(x, y_log) -> DecayFit:
    """Fit ``y_log = log A - c x^p`` with ``c > 0`` and ``p`` in ``P_BOUNDS``.

    Several deterministic starting exponents are tried and the lowest cost
    kept.  Needs at least three points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y_log, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and log-values must be 1-D arrays of equal length")
    if x.size < 3:
        raise ValueError("need at least three points to fit three parameters")
    if np.any(x <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("separations must be positive and log-values finite")

    def resid(theta):
        logA, c, p = theta
        return logA - c * x ** p - y

    best = None
    for p0 in _P_STARTS:
        a0, c0, _ = _fixed_p(x, y, p0)
        theta0 = [a0, max(c0, 1e-8), p0]
        sol = least_squares(resid, theta0, bounds=([-np.inf, 0.0, P_BOUNDS[0]],
                                                   [np.inf, np.inf, P_BOUNDS[1]]),
                            x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        if best is None or sol.cost < best.cost:
            best = sol
    logA, c, p = (float(v) for v in best.x)
    r = best.fun
    dof = max(1, x.size - 3)
    s2 = float(r @ r) / dof
    try:
        cov = np.linalg.inv(best.jac.T @ best.jac) * s2
        p_err = float(math.sqrt(max(cov[2, 2], 0.0)))
    except np.linalg.LinAlgError:
        p_err = math.inf
    return DecayFit(logA, c, p, tuple(float(v) for v in -r), float(np.sqrt(np.mean(r * r))),
                    p_err, _fixed_p(x, y, 2.0), int(x.size))


def fit_decay(table) -> DecayFit:
    """Fit rows carrying ``L_over_T`` and a positive ``negativity``.

    Rows whose negativity is not positive carry no information about the
    decay rate and are skipped.
    """
    pts = [(float(r["L_over_T"]), float(r["negativity"])) for r in table
           if float(r["negativity"]) > 0]
    if not pts:
        raise ValueError("no positive negativities to fit")
    x, n = map(np.array, zip(*pts))
    return fit_decay_arrays(x, np.log(n))


class DecayLawRegressor(RegressorMixin, BaseEstimator):
    """Estimator wrapper: ``X`` holds separations, ``y`` positive values.

    ``predict`` returns values on the original (not log) scale.
    """

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(len(X), -1), y,
                         ensure_min_samples=3, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("X must have a single feature (the separation)")
        if np.any(y <= 0):
            raise ValueError("y must be strictly positive")
        self.fit_ = fit_decay_arrays(X[:, 0], np.log(y))
        self.log_A_, self.c_, self.p_ = self.fit_.log_A, self.fit_.c, self.fit_.p
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        x = column_or_1d(np.asarray(X, dtype=float).reshape(len(X), -1)[:, 0])
        return np.exp(self.fit_.predict_log(x))

    def score(self, X, y, sample_weight=None):
        """Coefficient of determination on the log scale."""
        check_is_fitted(self, "fit_")
        x = np.asarray(X, dtype=float).reshape(len(X), -1)[:, 0]
        return r2_score(np.log(y), self.fit_.predict_log(x), sample_weight=sample_weight)
