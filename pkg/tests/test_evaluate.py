import numpy as np
import pytest

from famine_forecast.evaluate import (TIE_ORDER, CountryEvaluation, ModelConfig, ModelKind, aggregate,
                                      evaluate_country, mae, pick_best)
from famine_forecast.prepare import PreparedCountry, Skip

FAST = ModelConfig(forest_trees=40, gbt_rounds=60)


def test_mae_examples():
    assert mae([1, 2, 3], [1, 2, 3]) == 0.0
    assert mae([1, 2], [1, 4]) == 1.0
    assert mae([1, 4], [1, 2]) == 1.0
    assert mae([0, 0], [1, 2]) == 1.5
    with pytest.raises(ValueError):
        mae([1], [1, 2])
    with pytest.raises(ValueError):
        mae([], [])


def test_tie_order_prefers_forest_then_boosting():
    assert TIE_ORDER == (ModelKind.RANDOM_FOREST, ModelKind.GRADIENT_BOOSTED, ModelKind.LINEAR)
    assert pick_best({k: 1.0 for k in ModelKind}) is ModelKind.RANDOM_FOREST
    assert pick_best({ModelKind.LINEAR: 1.0, ModelKind.GRADIENT_BOOSTED: 1.0,
                      ModelKind.RANDOM_FOREST: 2.0}) is ModelKind.GRADIENT_BOOSTED
    assert pick_best({ModelKind.LINEAR: 0.5, ModelKind.GRADIENT_BOOSTED: 1.0,
                      ModelKind.RANDOM_FOREST: 1.0}) is ModelKind.LINEAR


def _prepared(X, y, country="AAA", n_test=None):
    n_test = n_test or len(y) // 5
    names = tuple(f"f{j}" for j in range(X.shape[1]))
    return PreparedCountry(country, names, X[:-n_test], y[:-n_test], X[-n_test:], y[-n_test:],
                           np.zeros(X.shape[1]))


def test_planted_linear_target_selects_linear():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(150, 3))
    y = 50 + X @ [4.0, -2.0, 1.5]
    ev = evaluate_country(_prepared(X, y), FAST)
    assert ev.mae[ModelKind.LINEAR] <= 1e-6
    assert ev.best_model is ModelKind.LINEAR
    assert ev.n_train == 120 and ev.n_test == 30
    assert len(ev.test_predictions) == len(ev.rf_test_predictions) == 30
    assert abs(sum(ev.importances.values()) - 1) <= 1e-9


def test_interaction_target_favours_forest():
    wins = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-2, 2, size=(300, 2))
        y = X[:, 0] * X[:, 1] + 0.1 * rng.normal(size=300)
        ev = evaluate_country(_prepared(X, y), FAST, seed=seed)
        wins += ev.mae[ModelKind.RANDOM_FOREST] < ev.mae[ModelKind.LINEAR]
    assert wins >= 9


def test_evaluation_is_seed_deterministic():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(100, 4))
    y = np.abs(X[:, 0]) + X[:, 1]
    a = evaluate_country(_prepared(X, y), FAST, seed=3)
    b = evaluate_country(_prepared(X, y), FAST, seed=3)
    assert a == b


def _ev(country, rf, gbt=1.0, lin=1.0):
    maes = {ModelKind.RANDOM_FOREST: rf, ModelKind.GRADIENT_BOOSTED: gbt, ModelKind.LINEAR: lin}
    return CountryEvaluation(country, 8, 2, maes, pick_best(maes), (), (), {}, ())


def test_aggregate_averages():
    report = aggregate([_ev("BBB", 30.0, 3.0), _ev("AAA", 2.0, 1.0)], [Skip("CCC", "insufficient rows")])
    assert report.average_rf_mae == 16.0
    assert report.average_mae_per_model[ModelKind.GRADIENT_BOOSTED] == 2.0
    assert [e.country for e in report.evaluations] == ["AAA", "BBB"]
    assert report.skipped == [("CCC", "insufficient rows")]
    assert report.comparison_points == [("AAA", 2.0, 1.0), ("BBB", 30.0, 3.0)]
    assert aggregate([_ev("AAA", 4.5)]).average_rf_mae == 4.5


def test_aggregate_requires_an_evaluation():
    with pytest.raises(ValueError, match="no evaluable countries"):
        aggregate([], [Skip("AAA", "insufficient rows")])


def test_model_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(forest_trees=0)
    with pytest.raises(ValueError):
        ModelConfig(gbt_learning_rate=0)
    assert ModelConfig().forest_params(31).mtry == 10
    assert ModelConfig().forest_params(2).mtry == 1
