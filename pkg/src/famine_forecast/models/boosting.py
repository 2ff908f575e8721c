from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import derive_seed, new_stream
from .tree import RegressionTree, TreeParams, _as_matrix, _grow_tree, _presort

DEFAULT_GBT_PARAMS = TreeParams(max_depth=4, min_samples_leaf=1)


@dataclass(frozen=True, eq=False)
class GradientBoostedModel:
    """Least-squares boosting: ``base_score + learning_rate * sum(tree(x))``."""

    base_score: float
    trees: tuple[RegressionTree, ...]
    learning_rate: float
    rounds: int
    params: TreeParams
    n_features: int

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n_features)
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict(X)
        return self.base_score + self.learning_rate * acc

    def staged_predict(self, X):
        """Predictions after 0, 1, ..., rounds trees."""
        X = _as_matrix(X, self.n_features)
        acc = np.zeros(X.shape[0])
        yield self.base_score + self.learning_rate * acc
        for tree in self.trees:
            acc += tree.predict(X)
            yield self.base_score + self.learning_rate * acc

    def same_as(self, other: "GradientBoostedModel") -> bool:
        return (self.base_score == other.base_score and self.learning_rate == other.learning_rate
                and len(self.trees) == len(other.trees)
                and all(a.same_as(b) for a, b in zip(self.trees, other.trees)))


def fit_gbt(X, y, rounds: int = 300, learning_rate: float = 0.1,
            tree_params: TreeParams = DEFAULT_GBT_PARAMS, seed: int = 0) -> GradientBoostedModel:
    """Fit ``rounds`` trees, each to the residuals of the ensemble so far.

    Leaf values are mean residuals, so for ``0 < learning_rate <= 1`` the
    training MSE never increases from one round to the next.
    """
    X = _as_matrix(X)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("cannot fit boosting on an empty matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("X and y row counts differ")
    if not 0 < learning_rate <= 1:
        raise ValueError("learning_rate must lie in (0, 1]")
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    if np.isnan(X).any() or np.isnan(y).any():
        raise ValueError("boosting requires complete data; impute first")

    base = float(y.mean())
    acc = np.zeros(X.shape[0])
    sample = np.arange(X.shape[0])
    presorted = _presort(X, sample)
    trees = []
    for k in range(rounds):
        residual = y - (base + learning_rate * acc)
        tree = _grow_tree(X, residual, sample, tree_params, new_stream(derive_seed(seed, k)), presorted)
        trees.append(tree)
        acc += tree.predict(X)
    return GradientBoostedModel(base, tuple(trees), learning_rate, rounds, tree_params, X.shape[1])
