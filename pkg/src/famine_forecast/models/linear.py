from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import _as_matrix

# condition number above which the normal equations get a ridge term
MAX_CONDITION = 1e12
RIDGE_SCALE = 1e-8


@dataclass(frozen=True, eq=False)
class LinearModel:
    intercept: float
    coefficients: np.ndarray
    warning: str | None = None

    @property
    def n_features(self) -> int:
        return len(self.coefficients)

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n_features)
        return self.intercept + X @ self.coefficients

    def same_as(self, other: "LinearModel") -> bool:
        return self.intercept == other.intercept and np.array_equal(self.coefficients, other.coefficients)


def fit_linear(X, y) -> LinearModel:
    """Ordinary least squares with an intercept, solved on centered data.

    Singular or ill-conditioned normal equations are refit with a ridge term
    of 1e-8 times the mean diagonal; the model then carries a warning.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if n == 0:
        raise ValueError("cannot fit a linear model on an empty matrix")
    if y.shape != (n,):
        raise ValueError("X and y row counts differ")
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    if p == 0:
        return LinearModel(y_mean, np.zeros(0))
    Xc = X - x_mean
    yc = y - y_mean
    gram = Xc.T @ Xc
    rhs = Xc.T @ yc

    warning = None
    coef = None
    cond = np.linalg.cond(gram) if np.all(np.isfinite(gram)) else np.inf
    if np.isfinite(cond) and cond <= MAX_CONDITION:
        try:
            coef = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            coef = None
    if coef is None:
        lam = RIDGE_SCALE * float(np.mean(np.abs(np.diag(gram))))
        warning = f"normal equations ill-conditioned (cond={cond:.3g}); ridge lambda={lam:.3g}"
        if lam > 0:
            coef = np.linalg.solve(gram + lam * np.eye(p), rhs)
        else:
            # every column is constant: nothing to explain beyond the mean
            coef = np.zeros(p)
    intercept = y_mean - float(x_mean @ coef)
    return LinearModel(intercept, coef, warning)
