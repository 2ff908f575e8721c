"""Independent reference implementations used only by the tests.

Everything here works in exact rational arithmetic and enumerates every
candidate, sharing no code with the package.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def _sse(values):
    """n * population variance, exactly."""
    if not values:
        return Fraction(0)
    vals = [Fraction(v) for v in values]
    mean = sum(vals) / len(vals)
    return sum((v - mean) ** 2 for v in vals)


def brute_force_split(X, y, candidates=None, min_leaf=1):
    """Enumerate every (feature, midpoint threshold); return the best or None."""
    X = [[Fraction(v) for v in row] for row in np.asarray(X).tolist()]
    y = [Fraction(v) for v in np.asarray(y).tolist()]
    n = len(y)
    p = len(X[0])
    feats = range(p) if candidates is None else sorted(set(candidates))
    parent = _sse(y)
    best = None
    for f in feats:
        distinct = sorted({row[f] for row in X})
        for a, b in zip(distinct, distinct[1:]):
            t = (a + b) / 2
            left = [y[i] for i in range(n) if X[i][f] <= t]
            right = [y[i] for i in range(n) if X[i][f] > t]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            gain = parent - _sse(left) - _sse(right)
            if gain <= 0:
                continue
            key = (-gain, f, t)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    g, f, t = best
    return f, float(t), float(-g)


def oracle_tree(X, y, min_leaf=1, max_depth=None, depth=0):
    """Exhaustive recursive CART as nested tuples: ('leaf', mean) or ('split', f, t, L, R)."""
    X = np.asarray(X)
    y = np.asarray(y)
    mean = sum(Fraction(v) for v in y.tolist()) / len(y)
    if (max_depth is not None and depth >= max_depth) or len(set(y.tolist())) == 1:
        return ("leaf", mean)
    split = brute_force_split(X, y, None, min_leaf)
    if split is None:
        return ("leaf", mean)
    f, t, _ = split
    mask = X[:, f] <= t
    return ("split", f, t,
            oracle_tree(X[mask], y[mask], min_leaf, max_depth, depth + 1),
            oracle_tree(X[~mask], y[~mask], min_leaf, max_depth, depth + 1))


def oracle_predict(node, row):
    while node[0] == "split":
        _, f, t, left, right = node
        node = left if row[f] <= t else right
    return float(node[1])


def pinv_ols_predictions(X, y, X_new):
    """Least-squares fit with intercept through the Moore-Penrose pseudoinverse."""
    A = np.column_stack([np.ones(len(X)), X])
    beta = np.linalg.pinv(A) @ y
    return np.column_stack([np.ones(len(X_new)), X_new]) @ beta
