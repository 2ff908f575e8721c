from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famine_forecast.ingest import parse_dataset
from famine_forecast.prepare import (PrepareConfig, PreparedCountry, Skip, SplitMode, fit_imputer,
                                     holdout_size, impute, prepare_country, select_features,
                                     train_test_split)
from famine_forecast.synth import SynthSpec, generate_panel


def test_select_features_is_strict():
    assert select_features({"a": 0.7}, 0.5) == ["a"]
    assert select_features({"a": 0.5}, 0.5) == []
    assert select_features({"a": 0.01, "b": 0.0, "c": 1.0}, 0.0) == ["a", "c"]


@pytest.mark.parametrize("n, k", [(100, 20), (5, 1), (10, 2), (12, 2), (13, 3), (47, 9)])
def test_holdout_size_rounds_half_up(n, k):
    assert holdout_size(n, 0.2) == k


def test_eighty_twenty_split():
    dates = [date(2020, 1, 1)] * 100
    train, test = train_test_split(dates, 0.2, seed=1)
    assert (len(train), len(test)) == (80, 20)
    again = train_test_split(dates, 0.2, seed=1)
    assert np.array_equal(train, again[0]) and np.array_equal(test, again[1])
    assert not np.array_equal(test, train_test_split(dates, 0.2, seed=2)[1])


def test_five_rows_split_four_one():
    train, test = train_test_split([date(2020, 1, d) for d in range(1, 6)], 0.2)
    assert (len(train), len(test)) == (4, 1)


def test_chronological_split_takes_latest_dates():
    dates = [date(2020, 1, 1) + timedelta(days=d) for d in (5, 1, 9, 3, 7)]
    train, test = train_test_split(dates, 0.4, split_mode="chronological")
    assert test.tolist() == [2, 4]
    assert train.tolist() == [0, 1, 3]


def test_split_rejects_empty_partition():
    with pytest.raises(ValueError):
        train_test_split([date(2020, 1, 1)] * 3, 0.1)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 300), st.floats(0.05, 0.5), st.integers(0, 2**32),
       st.sampled_from(list(SplitMode)))
def test_split_is_a_disjoint_cover(n, frac, seed, mode):
    dates = [date(2020, 1, 1) + timedelta(days=(i * 7) % 31) for i in range(n)]
    k = holdout_size(n, frac)
    if k < 1 or k >= n:
        return
    train, test = train_test_split(dates, frac, seed, mode)
    assert len(test) == k
    assert sorted(train.tolist() + test.tolist()) == list(range(n))
    if mode is SplitMode.CHRONOLOGICAL:
        assert max(dates[i] for i in train) <= min(dates[i] for i in test)


def test_median_examples():
    medians, empty = fit_imputer([[1.0, 1], [np.nan, 2], [3, 3], [np.nan, 4]])
    assert medians.tolist() == [2.0, 2.5]
    assert not empty.any()
    _, empty = fit_imputer([[np.nan, 1.0]])
    assert empty.tolist() == [True, False]


def test_impute_examples():
    m = np.array([[1.0], [np.nan], [3.0]])
    assert impute(m, [2.0]).ravel().tolist() == [1.0, 2.0, 3.0]
    dense = np.arange(6.0).reshape(3, 2)
    assert np.array_equal(impute(dense, [9.0, 9.0]), dense)
    with pytest.raises(ValueError):
        impute(m, [np.nan])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.one_of(st.just(float("nan")), st.floats(-100, 100)), min_size=3,
                         max_size=3), min_size=1, max_size=20))
def test_imputation_fills_only_missing_cells(rows):
    m = np.array(rows)
    medians, empty = fit_imputer(m)
    keep = ~empty
    out = impute(m[:, keep], medians[keep])
    assert not np.isnan(out).any()
    observed = ~np.isnan(m[:, keep])
    assert np.array_equal(out[observed], m[:, keep][observed])


def _tiny_country(n, extra=""):
    header = "country,admin1,date,target,rainfall,food_inflation_value\n"
    lines = [f"AAA,,2020-01-{i % 28 + 1:02d},{i},{i},{extra or i}\n" for i in range(n)]
    return header + "".join(lines)


def test_small_country_is_skipped(small_catalog):
    ds = parse_dataset(_tiny_country(10), small_catalog)
    assert prepare_country(ds, "AAA") == Skip("AAA", "insufficient rows")


def test_dense_synthetic_country_prepares_cleanly():
    panel = generate_panel(SynthSpec(per_category={"natural": 1}, missing_rate=0.0, sparse_features=0))
    prep = prepare_country(panel.dataset, "XAA")
    assert isinstance(prep, PreparedCountry)
    assert (prep.n_train, prep.n_test) == (480, 120)
    assert not np.isnan(prep.train_matrix).any() and not np.isnan(prep.test_matrix).any()
    assert len(prep.selected_features) == 31 and prep.dropped_features == ()
    assert sorted(prep.train_rows.tolist() + prep.test_rows.tolist()) == list(range(600))


def test_feature_seen_only_in_test_rows_is_dropped(small_catalog):
    base = parse_dataset(_tiny_country(50), small_catalog)
    _, test = train_test_split([o.date for o in base.observations], 0.2, 0)
    header = "country,admin1,date,target,rainfall,food_inflation_value,ndvi\n"
    lines = []
    for i, obs in enumerate(base.observations):
        ndvi = "0.5" if i in set(test.tolist()) else ""
        lines.append(f"AAA,,{obs.date.isoformat()},{i},{i},{i},{ndvi}\n")
    ds = parse_dataset(header + "".join(lines), small_catalog)
    prep = prepare_country(ds, "AAA", PrepareConfig(availability_threshold=0.1))
    assert ("ndvi", "no training observations") in prep.dropped_features
    assert "ndvi" not in prep.selected_features
    assert ("battles", "below availability threshold") in prep.dropped_features


def test_training_medians_ignore_test_rows(small_catalog):
    header = "country,admin1,date,target,rainfall\n"
    ds = parse_dataset(header + "".join(f"AAA,,2020-01-01,1,{i if i % 3 else ''}\n" for i in range(60)),
                       small_catalog)
    prep = prepare_country(ds, "AAA")
    train_vals = [i for i in prep.train_rows.tolist() if i % 3]
    assert prep.medians[0] == np.median(train_vals)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.95))
def test_higher_threshold_never_adds_features(t):
    panel = generate_panel(SynthSpec(per_category={"economic": 1}, rows_per_country=60,
                                     missing_rate=0.3))
    lo = prepare_country(panel.dataset, "XAA", PrepareConfig(availability_threshold=t))
    hi = prepare_country(panel.dataset, "XAA", PrepareConfig(availability_threshold=min(1.0, t + 0.05)))
    lo_set = set(lo.selected_features) if isinstance(lo, PreparedCountry) else set()
    hi_set = set(hi.selected_features) if isinstance(hi, PreparedCountry) else set()
    assert hi_set <= lo_set


@pytest.mark.parametrize("kwargs", [dict(availability_threshold=1.5), dict(test_fraction=0.0),
                                    dict(test_fraction=1.0), dict(min_rows=1)])
def test_bad_prepare_config(kwargs):
    with pytest.raises(ValueError):
        PrepareConfig(**kwargs)
