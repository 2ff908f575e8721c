"""Acceptance criteria, one test each, at the stated tolerances.

Each test prints a single ``[ACCEPT n] PASS|FAIL|SKIP ...`` line. Criterion 7
needs the original supplementary panel; point ``FAMINE_REFERENCE_DATA`` at its
CSV (and optionally ``FAMINE_REFERENCE_CATALOG`` at a catalog) to run it.
"""
import json
import os
import time
import xml.etree.ElementTree as ET
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from famine_forecast.categorize import assign_category, category_scores
from famine_forecast.evaluate import ModelKind, evaluate_country
from famine_forecast.ingest import FamineCategory, dataset_to_csv, default_catalog
from famine_forecast.models import best_split, fit_gbt, fit_linear, fit_random_forest, fit_tree
from famine_forecast.pipeline import RunConfig, analyze, config_from_mapping, run
from famine_forecast.prepare import PreparedCountry
from famine_forecast.synth import SynthSpec, generate_panel

from oracles import brute_force_split
from test_categorize import HAITI


@pytest.fixture
def report_line(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[ACCEPT {n}] {'PASS' if ok else 'FAIL'} {detail}")
    return emit


@pytest.fixture(scope="module")
def panel():
    return generate_panel(SynthSpec())


@pytest.fixture(scope="module")
def synthetic_runs(panel, tmp_path_factory):
    root = tmp_path_factory.mktemp("accept")
    (root / "data.csv").write_text(dataset_to_csv(panel.dataset))
    bundles = {}
    for threads in (1, 8):
        cfg = config_from_mapping({"threads": threads, "out": root / f"out{threads}"})
        bundles[threads] = run(cfg, root / "data.csv")
    return root, bundles


def test_c1_split_search_matches_oracle(report_line):
    start = time.perf_counter()
    mismatches = 0
    seeds = 500
    for seed in range(seeds):
        rng = np.random.default_rng(10_000 + seed)
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, 4))
        X = rng.integers(0, 5, size=(n, p)).astype(float)
        y = rng.integers(-10, 11, size=n).astype(float)
        mismatches += best_split(X, y) != brute_force_split(X, y)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 10
    report_line(1, ok, f"{seeds} seeds, {mismatches} mismatches, {elapsed:.2f}s")
    assert mismatches == 0
    assert elapsed < 10


def test_c2_model_invariants(report_line):
    rng = np.random.default_rng(2)
    X = rng.normal(size=(150, 4))
    y = X[:, 0] ** 2 + X[:, 1] + 0.2 * rng.normal(size=150)
    checks = {}

    forest = fit_random_forest(X, y, n_trees=50, seed=1)
    mean = np.zeros(len(X))
    for tree in forest.trees:
        mean += tree.predict(X)
    checks["forest mean law"] = np.array_equal(forest.predict(X), mean / 50)
    checks["MDI sums to 1"] = abs(forest.importances.sum() - 1) <= 1e-9

    checks["full-depth interpolation"] = float(np.abs(fit_tree(X, y).predict(X) - y).mean()) == 0.0

    gbt = fit_gbt(X, y, rounds=300)
    mse = [float(np.mean((p - y) ** 2)) for p in gbt.staged_predict(X)]
    checks["boosting MSE monotone"] = all(b <= a for a, b in zip(mse, mse[1:]))

    x = np.arange(20.0)[:, None]
    line = fit_linear(x, 3 * x[:, 0] + 5)
    checks["OLS recovers (3, 5)"] = (abs(line.coefficients[0] - 3) <= 1e-8
                                    and abs(line.intercept - 5) <= 1e-8)
    ols = fit_linear(X, y)
    r = y - ols.predict(X)
    checks["OLS residual orthogonality"] = (abs(r.sum()) <= 1e-6
                                           and float(np.max(np.abs(X.T @ r))) <= 1e-6)

    failed = [k for k, v in checks.items() if not v]
    report_line(2, not failed, f"{len(checks) - len(failed)}/{len(checks)} invariants"
                + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert not failed


def test_c3_synthetic_end_to_end(panel, report_line):
    start = time.perf_counter()
    report = analyze(panel.dataset, RunConfig(threads=1))
    elapsed = time.perf_counter() - start
    correct = sum(report.category_assignments.get(c) is cat for c, cat in panel.truth.items())
    sigma = 3.0
    rf = {e.country: e.mae[ModelKind.RANDOM_FOREST] for e in report.evaluations}
    worst = max(rf.values())
    ok_a = correct >= 10
    ok_b = len(rf) == 12 and worst <= 1.5 * sigma
    ok_c = elapsed < 60
    report_line(3, ok_a and ok_b and ok_c,
                f"categories {correct}/12, worst RF MAE {worst:.3f} (limit {1.5 * sigma}), "
                f"{elapsed:.1f}s single-threaded")
    assert ok_a, report.category_assignments
    assert ok_b, rf
    assert ok_c


def test_c4_forest_beats_linear_on_interaction(report_line):
    wins = 0
    for seed in range(10):
        rng = np.random.default_rng(400 + seed)
        X = rng.uniform(-2, 2, size=(400, 2))
        y = X[:, 0] * X[:, 1] + 0.2 * rng.normal(size=400)
        prep = PreparedCountry("AAA", ("x0", "x1"), X[:320], y[:320], X[320:], y[320:], np.zeros(2))
        ev = evaluate_country(prep, seed=seed)
        wins += ev.mae[ModelKind.RANDOM_FOREST] < ev.mae[ModelKind.LINEAR]
    report_line(4, wins >= 9, f"random forest beat linear on {wins}/10 seeds")
    assert wins >= 9


def test_c5_thread_count_determinism(synthetic_runs, report_line):
    root, _ = synthetic_runs
    names = ["report.json", "per_country.csv", "spread.csv", "categories.json"]
    names += [p.relative_to(root / "out1").as_posix() for p in (root / "out1").rglob("*.csv")]
    names = sorted(set(names))
    differ = [n for n in names if (root / "out1" / n).read_bytes() != (root / "out8" / n).read_bytes()]
    report_line(5, not differ, f"{len(names)} files compared, {len(differ)} differ (threads 1 vs 8)")
    assert not differ


def test_c6_haiti_categorization(report_line):
    scores = category_scores(HAITI, default_catalog())
    econ = scores.scores[FamineCategory.ECONOMIC]
    cat = assign_category(scores)
    ok = cat is FamineCategory.ECONOMIC and abs(econ - 0.130) <= 1e-9
    report_line(6, ok, f"assigned {cat.value}, Economic score {econ!r}")
    assert ok


def test_c7_original_data_informational(tmp_path, report_line, capsys):
    if not os.environ.get("FAMINE_REFERENCE_DATA"):
        with capsys.disabled():
            print("\n[ACCEPT 7] SKIP original supplementary dataset not supplied (FAMINE_REFERENCE_DATA)")
        pytest.skip("original supplementary dataset not supplied")
    cfg = config_from_mapping({"out": tmp_path / "reference"})
    bundle = run(cfg, Path(os.environ["FAMINE_REFERENCE_DATA"]), os.environ.get("FAMINE_REFERENCE_CATALOG"))
    avg = bundle.report.average_rf_mae
    within = abs(avg - 10.6) <= 3
    # informational only: completing the run is the pass condition
    report_line(7, True, f"average RF MAE {avg:.3f} over {len(bundle.report.evaluations)} countries "
                f"({'within' if within else 'outside'} 10.6 +/- 3)")


def test_c8_report_contract(synthetic_runs, report_line):
    root, bundles = synthetic_runs
    out = root / "out1"
    schema = json.loads(resources.files("famine_forecast").joinpath("schemas/report.schema.json").read_text())
    doc = json.loads((out / "report.json").read_text())
    problems = []
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        problems.append(f"schema: {exc.message}")
    for c in doc["countries"]:
        lines = (out / "predictions" / f"{c['country']}.csv").read_text().splitlines()
        if len(lines) - 1 != c["n_test"]:
            problems.append(f"{c['country']} predictions rows {len(lines) - 1} != {c['n_test']}")
    svgs = sorted(out.rglob("*.svg"))
    for path in svgs:
        try:
            ET.parse(path)
        except ET.ParseError as exc:
            problems.append(f"{path.name}: {exc}")
    report_line(8, not problems, f"schema valid, {len(doc['countries'])} prediction files, "
                f"{len(svgs)} SVGs parsed" if not problems else "; ".join(problems))
    assert not problems
    assert len(doc["countries"]) == 12 and not doc["skipped"]
