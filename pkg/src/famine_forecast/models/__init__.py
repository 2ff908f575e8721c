"""From-scratch regression models: CART, random forest, least-squares boosting, OLS."""
from __future__ import annotations

import numpy as np

from .boosting import GradientBoostedModel, fit_gbt
from .forest import RandomForestModel, default_mtry, fit_random_forest, mdi_importance
from .linear import LinearModel, fit_linear
from .tree import RegressionTree, TreeParams, best_split, fit_tree

__all__ = [
    "GradientBoostedModel", "LinearModel", "RandomForestModel", "RegressionTree", "TreeParams",
    "best_split", "default_mtry", "fit_gbt", "fit_linear", "fit_random_forest", "fit_tree",
    "mdi_importance", "predict",
]


def predict(model, row) -> float:
    """Prediction of any fitted model for a single feature row."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ValueError("predict expects a single 1-d row")
    if row.shape[0] != model.n_features:
        raise ValueError(f"row has {row.shape[0]} values, model expects {model.n_features}")
    return float(model.predict(row[None, :])[0])
