"""JSON dumps of fitted models for auditing.

Format (``format_version`` 1)::

    tree:   {"nodes": [{"id", "feature", "threshold", "left", "right", "gain", "n_samples"}
                       | {"id", "value", "n_samples"}]}
    forest: {"kind": "random_forest", "n_trees", "seed", "bootstrap", "params",
             "importances", "trees": [tree, ...]}
    gbt:    {"kind": "gradient_boosted", "base_score", "learning_rate", "rounds",
             "params", "trees": [tree, ...]}
    linear: {"kind": "linear", "intercept", "coefficients", "warning"}

Node ids are depth-first preorder indices; rows with ``x[feature] <= threshold``
go to ``left``.
"""
from __future__ import annotations

import json

from .boosting import GradientBoostedModel
from .forest import RandomForestModel
from .linear import LinearModel
from .tree import LEAF, RegressionTree, TreeParams

FORMAT_VERSION = 1


def _params(p: TreeParams) -> dict:
    return {"max_depth": p.max_depth, "min_samples_leaf": p.min_samples_leaf, "mtry": p.mtry}


def tree_to_dict(tree: RegressionTree) -> dict:
    nodes = []
    for i in range(tree.n_nodes):
        if tree.feature[i] == LEAF:
            nodes.append({"id": i, "value": float(tree.value[i]), "n_samples": int(tree.n_samples[i])})
        else:
            nodes.append({"id": i, "feature": int(tree.feature[i]),
                          "threshold": float(tree.threshold[i]),
                          "left": int(tree.left[i]), "right": int(tree.right[i]),
                          "gain": float(tree.gain[i]), "n_samples": int(tree.n_samples[i])})
    return {"nodes": nodes}


def model_to_dict(model, feature_names=None) -> dict:
    if isinstance(model, RandomForestModel):
        out = {"kind": "random_forest", "n_trees": model.n_trees, "seed": model.seed,
               "bootstrap": model.bootstrap, "params": _params(model.params),
               "importances": [float(v) for v in model.importances],
               "trees": [tree_to_dict(t) for t in model.trees]}
    elif isinstance(model, GradientBoostedModel):
        out = {"kind": "gradient_boosted", "base_score": model.base_score,
               "learning_rate": model.learning_rate, "rounds": model.rounds,
               "params": _params(model.params), "trees": [tree_to_dict(t) for t in model.trees]}
    elif isinstance(model, LinearModel):
        out = {"kind": "linear", "intercept": model.intercept,
               "coefficients": [float(c) for c in model.coefficients], "warning": model.warning}
    elif isinstance(model, RegressionTree):
        out = {"kind": "tree", **tree_to_dict(model)}
    else:
        raise TypeError(f"cannot dump {type(model).__name__}")
    out["format_version"] = FORMAT_VERSION
    if feature_names is not None:
        out["features"] = list(feature_names)
    return out


def dumps(model, feature_names=None) -> str:
    return json.dumps(model_to_dict(model, feature_names), indent=1, sort_keys=True) + "\n"
