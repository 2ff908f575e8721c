"""Fit the three model families per country and compare them by test MAE."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .models import (GradientBoostedModel, LinearModel, RandomForestModel, TreeParams,
                     default_mtry, fit_gbt, fit_linear, fit_random_forest)
from .models.rng import derive_seed, derive_seed_from_key
from .prepare import PreparedCountry, Skip


class ModelKind(str, enum.Enum):
    LINEAR = "Linear"
    RANDOM_FOREST = "RandomForest"
    GRADIENT_BOOSTED = "GradientBoosted"


# preference when test MAEs tie
TIE_ORDER = (ModelKind.RANDOM_FOREST, ModelKind.GRADIENT_BOOSTED, ModelKind.LINEAR)


class ModelFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    forest_trees: int = 300
    forest_mtry: int | None = None  # None = max(1, p // 3)
    forest_min_samples_leaf: int = 2
    forest_max_depth: int | None = None
    gbt_rounds: int = 300
    gbt_learning_rate: float = 0.1
    gbt_max_depth: int | None = 4
    gbt_min_samples_leaf: int = 1
    forest_jobs: int = 1

    def __post_init__(self):
        if self.forest_trees < 1:
            raise ValueError("forest_trees must be >= 1")
        if self.gbt_rounds < 0:
            raise ValueError("gbt_rounds must be >= 0")
        if not 0 < self.gbt_learning_rate <= 1:
            raise ValueError("gbt_learning_rate must lie in (0, 1]")
        if self.forest_min_samples_leaf < 1 or self.gbt_min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.forest_mtry is not None and self.forest_mtry < 1:
            raise ValueError("forest_mtry must be >= 1 or unset")

    def forest_params(self, n_features: int) -> TreeParams:
        mtry = default_mtry(n_features) if self.forest_mtry is None else min(self.forest_mtry, n_features)
        return TreeParams(self.forest_max_depth, self.forest_min_samples_leaf, mtry)

    def gbt_params(self) -> TreeParams:
        return TreeParams(self.gbt_max_depth, self.gbt_min_samples_leaf, 0)


@dataclass(frozen=True)
class CountryEvaluation:
    country: str
    n_train: int
    n_test: int
    mae: dict[ModelKind, float]
    best_model: ModelKind
    # (actual, predicted) on the test rows
    test_predictions: tuple[tuple[float, float], ...]
    rf_test_predictions: tuple[tuple[float, float], ...]
    importances: dict[str, float]  # random-forest MDI, selected-feature order
    selected_features: tuple[str, ...]
    dropped_features: tuple[tuple[str, str], ...] = ()
    models: dict = field(default=None, compare=False, repr=False)

    def sorted_importances(self) -> list[tuple[str, float]]:
        """Descending weight; equal weights keep selected-feature order."""
        return sorted(self.importances.items(), key=lambda kv: -kv[1])


@dataclass
class GlobalReport:
    evaluations: list[CountryEvaluation]
    skipped: list[tuple[str, str]]
    average_rf_mae: float
    average_mae_per_model: dict[ModelKind, float]
    comparison_points: list[tuple[str, float, float]]  # (country, rf_mae, gbt_mae)
    category_assignments: dict = field(default_factory=dict)
    category_scores: dict = field(default_factory=dict)
    importance_spread: object = None


def mae(predicted, actual) -> float:
    p = np.asarray(predicted, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError(f"length mismatch: {p.shape} vs {a.shape}")
    if p.size == 0:
        raise ValueError("mae of empty input")
    return float(np.mean(np.abs(p - a)))


def pick_best(maes: dict[ModelKind, float]) -> ModelKind:
    return min(TIE_ORDER, key=lambda k: (maes[k], TIE_ORDER.index(k)))


def model_seeds(seed: int, country: str) -> tuple[int, int]:
    base = derive_seed_from_key(seed, country)
    return derive_seed(base, 1), derive_seed(base, 2)


def evaluate_country(prepared: PreparedCountry, model_config: ModelConfig = ModelConfig(),
                     seed: int = 0, keep_models: bool = False) -> CountryEvaluation:
    """Fit Linear, RandomForest and GradientBoosted on the training rows and score each on test."""
    if prepared.n_test == 0:
        raise ValueError(f"{prepared.country}: empty test set")
    X, y = prepared.train_matrix, prepared.train_targets
    Xt, yt = prepared.test_matrix, prepared.test_targets
    rf_seed, gbt_seed = model_seeds(seed, prepared.country)
    p = X.shape[1]
    try:
        fitted = {
            ModelKind.LINEAR: fit_linear(X, y),
            ModelKind.RANDOM_FOREST: fit_random_forest(
                X, y, model_config.forest_trees, model_config.forest_params(p), rf_seed,
                n_jobs=model_config.forest_jobs),
            ModelKind.GRADIENT_BOOSTED: fit_gbt(
                X, y, model_config.gbt_rounds, model_config.gbt_learning_rate,
                model_config.gbt_params(), gbt_seed),
        }
    except Exception as exc:
        raise ModelFitError(f"{prepared.country}: model fitting failed: {exc}") from exc

    preds = {kind: m.predict(Xt) for kind, m in fitted.items()}
    maes = {kind: mae(preds[kind], yt) for kind in ModelKind}
    best = pick_best(maes)
    rf: RandomForestModel = fitted[ModelKind.RANDOM_FOREST]
    return CountryEvaluation(
        country=prepared.country,
        n_train=prepared.n_train,
        n_test=prepared.n_test,
        mae=maes,
        best_model=best,
        test_predictions=tuple(zip(yt.tolist(), preds[best].tolist())),
        rf_test_predictions=tuple(zip(yt.tolist(), preds[ModelKind.RANDOM_FOREST].tolist())),
        importances=dict(zip(prepared.selected_features, rf.importances.tolist())),
        selected_features=prepared.selected_features,
        dropped_features=prepared.dropped_features,
        models=fitted if keep_models else None,
    )


def aggregate(evaluations: Sequence[CountryEvaluation],
              skipped: Sequence[Skip | tuple[str, str]] = ()) -> GlobalReport:
    """Average MAE per model kind over evaluated countries, folded in country-code order."""
    if not evaluations:
        raise ValueError("no evaluable countries")
    evals = sorted(evaluations, key=lambda e: e.country)
    skips = sorted(((s.country, s.reason) if isinstance(s, Skip) else tuple(s) for s in skipped))
    n = len(evals)
    averages = {}
    for kind in ModelKind:
        total = 0.0
        for e in evals:
            total += e.mae[kind]
        averages[kind] = total / n
    return GlobalReport(
        evaluations=evals,
        skipped=skips,
        average_rf_mae=averages[ModelKind.RANDOM_FOREST],
        average_mae_per_model=averages,
        comparison_points=[(e.country, e.mae[ModelKind.RANDOM_FOREST],
                            e.mae[ModelKind.GRADIENT_BOOSTED]) for e in evals],
    )
