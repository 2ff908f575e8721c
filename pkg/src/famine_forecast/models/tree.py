"""CART regression trees grown by exhaustive variance-reduction split search.

The growing and routing loops are compiled with numba; a fitted tree is a
set of flat node arrays in depth-first preorder (a node's left child is
always the next node).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import new_stream, randbelow

LEAF = -1


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_leaf: int = 1
    mtry: int = 0  # candidate features per node; 0 = all

    def __post_init__(self):
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.mtry < 0:
            raise ValueError("mtry must be >= 0")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")


@njit(cache=True, nogil=True)
def _presort(X, sample):
    """Per-feature sample positions ordered by feature value."""
    n = sample.shape[0]
    p = X.shape[1]
    order = np.empty((p, n), dtype=np.int64)
    vals = np.empty(n)
    for f in range(p):
        for i in range(n):
            vals[i] = X[sample[i], f]
        order[f] = np.argsort(vals, kind="mergesort")
    return order


@njit(cache=True, nogil=True)
def _presort_sample(global_order, sample, n_rows):
    """Presort for a resample, derived from the full-data presort without sorting.

    ``global_order`` is ``_presort(X, arange(n_rows))``; duplicated rows keep
    their positions in ascending order.
    """
    n = sample.shape[0]
    p = global_order.shape[0]
    starts = np.zeros(n_rows + 1, dtype=np.int64)
    for i in range(n):
        starts[sample[i] + 1] += 1
    for r in range(n_rows):
        starts[r + 1] += starts[r]
    fill = starts[:-1].copy()
    by_row = np.empty(n, dtype=np.int64)
    for i in range(n):
        r = sample[i]
        by_row[fill[r]] = i
        fill[r] += 1
    order = np.empty((p, n), dtype=np.int64)
    for f in range(p):
        k = 0
        for j in range(n_rows):
            r = global_order[f, j]
            for q in range(starts[r], starts[r + 1]):
                order[f, k] = by_row[q]
                k += 1
    return order


@njit(cache=True, nogil=True)
def _node_split(X, y, sample, order, start, end, cand, min_leaf):
    n = end - start
    fn = float(n)
    total = 0.0
    for i in range(start, end):
        total += y[sample[order[0, i]]]
    lo = min_leaf - 1
    hi = n - min_leaf
    best_f = -1
    best_t = 0.0
    best_g = 0.0
    for ci in range(cand.shape[0]):
        f = cand[ci]
        left_sum = 0.0
        v_next = X[sample[order[f, start]], f]
        for k in range(n - 1):
            left_sum += y[sample[order[f, start + k]]]
            v = v_next
            v_next = X[sample[order[f, start + k + 1]], f]
            if v == v_next or k < lo or k >= hi:
                continue
            n_left = float(k + 1)
            n_right = fn - n_left
            # n*Var(P) - n_L*Var(L) - n_R*Var(R) == (n_R*S_L - n_L*S_R)^2 / (n*n_L*n_R)
            d = n_right * left_sum - n_left * (total - left_sum)
            g = d * d / (fn * n_left * n_right)
            if g > best_g:
                t = (v + v_next) * 0.5
                if t >= v_next:
                    t = v
                best_f = f
                best_t = t
                best_g = g
    return best_f, best_t, best_g


@njit(cache=True, nogil=True)
def _is_constant(y, sample, order, start, end):
    first = y[sample[order[0, start]]]
    for i in range(start + 1, end):
        if y[sample[order[0, i]]] != first:
            return False
    return True


@njit(cache=True, nogil=True)
def _grow(X, y, sample, presorted, min_leaf, max_depth, mtry, state):
    n = sample.shape[0]
    p = X.shape[1]
    cap = 2 * n - 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    count = np.zeros(cap, dtype=np.int64)
    gain = np.zeros(cap)

    order = presorted.copy()
    buf = np.empty(n, dtype=np.int64)
    goes_left = np.zeros(n, dtype=np.bool_)
    pool = np.arange(p)
    all_feats = np.arange(p)
    use_subset = mtry > 0 and mtry < p

    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_parent = np.empty(cap, dtype=np.int64)
    st_left = np.empty(cap, dtype=np.bool_)
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    st_parent[0] = -1
    st_left[0] = True
    sp = 1
    n_nodes = 0

    while sp > 0:
        sp -= 1
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]
        parent = st_parent[sp]
        is_left = st_left[sp]

        nid = n_nodes
        n_nodes += 1
        if parent >= 0:
            if is_left:
                left[parent] = nid
            else:
                right[parent] = nid

        m = end - start
        s = 0.0
        for i in range(start, end):
            s += y[sample[order[0, i]]]
        value[nid] = s / m
        count[nid] = m

        if max_depth >= 0 and depth >= max_depth:
            continue
        if m < 2 * min_leaf or m < 2:
            continue
        if _is_constant(y, sample, order, start, end):
            continue

        if use_subset:
            for j in range(mtry):
                r = j + randbelow(state, p - j)
                tmp = pool[j]
                pool[j] = pool[r]
                pool[r] = tmp
            cand = np.sort(pool[:mtry])
        else:
            cand = all_feats
        f, t, g = _node_split(X, y, sample, order, start, end, cand, min_leaf)
        if f < 0:
            continue

        feature[nid] = f
        threshold[nid] = t
        gain[nid] = g
        for i in range(start, end):
            pos = order[0, i]
            goes_left[pos] = X[sample[pos], f] <= t
        # stable partition of every feature's ordering into left | right
        nl = 0
        for ff in range(p):
            nl = 0
            nr = 0
            for i in range(start, end):
                pos = order[ff, i]
                if goes_left[pos]:
                    order[ff, start + nl] = pos
                    nl += 1
                else:
                    buf[nr] = pos
                    nr += 1
            for i in range(nr):
                order[ff, start + nl + i] = buf[i]
        mid = start + nl

        st_start[sp] = mid
        st_end[sp] = end
        st_depth[sp] = depth + 1
        st_parent[sp] = nid
        st_left[sp] = False
        sp += 1
        st_start[sp] = start
        st_end[sp] = mid
        st_depth[sp] = depth + 1
        st_parent[sp] = nid
        st_left[sp] = True
        sp += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), count[:n_nodes].copy(),
            gain[:n_nodes].copy())


@njit(cache=True, nogil=True)
def _route(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] != -1:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Fitted tree. Internal nodes have ``feature >= 0``; leaves have ``feature == -1``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    gain: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    @property
    def n_splits(self) -> int:
        return self.n_nodes - self.n_leaves

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n_features)
        return _route(self.feature, self.threshold, self.left, self.right, self.value, X)

    def gain_by_feature(self) -> np.ndarray:
        acc = np.zeros(self.n_features)
        for f, g in zip(self.feature, self.gain):
            if f != LEAF:
                acc[f] += g
        return acc

    def same_as(self, other: "RegressionTree") -> bool:
        return self.n_features == other.n_features and all(
            np.array_equal(getattr(self, a), getattr(other, a))
            for a in ("feature", "threshold", "left", "right", "value", "n_samples", "gain"))


def _as_matrix(X, n_features: int | None = None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return X


def best_split(X, y, candidate_features=None, min_samples_leaf: int = 1):
    """Best variance-reduction split of the rows ``(X, y)``.

    Returns ``(feature, threshold, gain)`` or ``None`` when no split with
    positive gain leaves ``min_samples_leaf`` rows on both sides. Thresholds
    are midpoints of consecutive distinct values; ties go to the lower feature
    index, then the lower threshold.
    """
    X = _as_matrix(X)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("best_split needs at least 2 rows")
    if candidate_features is None:
        cand = np.arange(X.shape[1])
    else:
        cand = np.unique(np.asarray(candidate_features, dtype=np.int64))
    sample = np.arange(n)
    order = _presort(X, sample)
    if _is_constant(y, sample, order, 0, n):
        return None
    f, t, g = _node_split(X, y, sample, order, 0, n, cand, min_samples_leaf)
    if f < 0:
        return None
    return int(f), float(t), float(g)


def _grow_tree(X, y, sample, params: TreeParams, state, presorted=None) -> RegressionTree:
    if params.mtry > X.shape[1]:
        raise ValueError(f"mtry={params.mtry} exceeds the {X.shape[1]} available features")
    if presorted is None:
        presorted = _presort(X, sample)
    max_depth = -1 if params.max_depth is None else params.max_depth
    arrays = _grow(X, y, sample, presorted, params.min_samples_leaf, max_depth, params.mtry, state)
    return RegressionTree(*arrays, n_features=X.shape[1])


def fit_tree(X, y, params: TreeParams = TreeParams(), rng=0) -> RegressionTree:
    """Greedy recursive CART fit on all rows.

    ``rng`` is either an integer seed or a stream state from
    :func:`famine_forecast.models.rng.new_stream`; it is only consumed when
    ``params.mtry`` restricts the candidate features.
    """
    X = _as_matrix(X)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("X and y row counts differ")
    if np.isnan(X).any() or np.isnan(y).any():
        raise ValueError("tree fitting requires complete data; impute first")
    state = rng if isinstance(rng, np.ndarray) else new_stream(int(rng))
    return _grow_tree(X, y, np.arange(X.shape[0]), params, state)
