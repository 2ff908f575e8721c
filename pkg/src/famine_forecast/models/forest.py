from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import derive_seed, new_stream, randbelow
from .tree import RegressionTree, TreeParams, _as_matrix, _grow_tree, _presort, _presort_sample


@njit(cache=True, nogil=True)
def _bootstrap(n, state):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = randbelow(state, n)
    return out


@dataclass(frozen=True, eq=False)
class RandomForestModel:
    trees: tuple[RegressionTree, ...]
    params: TreeParams
    n_trees: int
    importances: np.ndarray
    seed: int
    bootstrap: bool = True

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n_features)
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / self.n_trees

    def same_as(self, other: "RandomForestModel") -> bool:
        return (self.n_trees == other.n_trees and self.params == other.params
                and np.array_equal(self.importances, other.importances)
                and all(a.same_as(b) for a, b in zip(self.trees, other.trees)))


def default_mtry(n_features: int) -> int:
    return max(1, n_features // 3)


def _fit_member(X, y, params, seed, t, bootstrap, global_order):
    state = new_stream(derive_seed(seed, t))
    n = X.shape[0]
    sample = _bootstrap(n, state) if bootstrap else np.arange(n)
    return _grow_tree(X, y, sample, params, state, _presort_sample(global_order, sample, n))


def mdi_importance(trees, n_features: int | None = None) -> np.ndarray:
    """Mean decrease in impurity.

    Each tree's split gains are summed per feature and normalized to 1 (a
    tree without splits contributes zeros); the forest vector is the mean of
    the per-tree vectors, renormalized when nonzero.
    """
    if isinstance(trees, RandomForestModel):
        trees = trees.trees
    trees = list(trees)
    if n_features is None:
        n_features = trees[0].n_features
    total = np.zeros(n_features)
    for tree in trees:
        per_tree = tree.gain_by_feature()
        s = per_tree.sum()
        if s > 0:
            total += per_tree / s
    total /= len(trees)
    s = total.sum()
    return total / s if s > 0 else total


def fit_random_forest(X, y, n_trees: int = 300, params: TreeParams | None = None,
                      seed: int = 0, n_jobs: int = 1, bootstrap: bool = True) -> RandomForestModel:
    """Bagged CART ensemble.

    Tree ``t`` draws its bootstrap sample and its per-node feature subsets
    from the stream ``derive_seed(seed, t)``, so ``n_jobs`` has no effect on
    the fitted model. ``bootstrap=False`` trains every tree on all rows.
    """
    X = _as_matrix(X)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if n_trees <= 0:
        raise ValueError("n_trees must be positive")
    if X.shape[0] == 0:
        raise ValueError("cannot fit a forest on an empty matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("X and y row counts differ")
    if np.isnan(X).any() or np.isnan(y).any():
        raise ValueError("forest fitting requires complete data; impute first")
    if params is None:
        params = TreeParams(min_samples_leaf=2, mtry=default_mtry(X.shape[1]))

    global_order = _presort(X, np.arange(X.shape[0]))
    if n_jobs == 1:
        trees = [_fit_member(X, y, params, seed, t, bootstrap, global_order) for t in range(n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            # map() yields in submission order, whatever the completion order
            trees = list(pool.map(lambda t: _fit_member(X, y, params, seed, t, bootstrap, global_order),
                                  range(n_trees)))
    return RandomForestModel(tuple(trees), params, n_trees,
                             mdi_importance(trees, X.shape[1]), seed, bootstrap)
