"""File artifacts for a finished run.

All text output is byte-deterministic: floats use shortest round-trip
formatting and countries are emitted in code order. Every file is written
to a temporary sibling and moved into place with ``os.replace``, so a
failed run never leaves a truncated artifact behind (files already moved
stay; the stray temporary is deleted).
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import svg
from .categorize import category_proportions
from .evaluate import GlobalReport, ModelKind
from .ingest import format_number
from .models.dump import dumps as dump_model

SCHEMA_VERSION = 1
MODEL_KEYS = {ModelKind.LINEAR: "linear", ModelKind.RANDOM_FOREST: "random_forest",
              ModelKind.GRADIENT_BOOSTED: "gradient_boosted"}


@dataclass
class ReportBundle:
    report: GlobalReport
    out_dir: Path
    paths: list[Path] = field(default_factory=list)

    def relative(self) -> list[str]:
        return sorted(p.relative_to(self.out_dir).as_posix() for p in self.paths)


def _maes(d: dict) -> dict:
    return {MODEL_KEYS[k]: float(v) for k, v in d.items()}


def country_record(ev, report: GlobalReport) -> dict:
    scores = report.category_scores.get(ev.country)
    category = report.category_assignments.get(ev.country)
    return {
        "country": ev.country,
        "n_train": ev.n_train,
        "n_test": ev.n_test,
        "mae": _maes(ev.mae),
        "best_model": ev.best_model.value,
        "category": category.value if category is not None else None,
        "category_scores": ({c.value: float(v) for c, v in scores.scores.items()} if scores else {}),
        "selected_features": list(ev.selected_features),
        "dropped_features": [{"feature": f, "reason": r} for f, r in ev.dropped_features],
        "importances": [{"feature": f, "weight": float(w)} for f, w in ev.sorted_importances()],
    }


def report_to_dict(report: GlobalReport, *, seed: int = 0, config_echo: dict | None = None,
                   validation: dict | None = None) -> dict:
    proportions = (category_proportions(report.category_assignments)
                   if report.category_assignments else {})
    spread = report.importance_spread
    summary = {
        "n_countries": len(report.evaluations) + len(report.skipped),
        "n_evaluated": len(report.evaluations),
        "n_skipped": len(report.skipped),
        "average_rf_mae": float(report.average_rf_mae),
        "average_mae_per_model": _maes(report.average_mae_per_model),
        "best_model_counts": {k.value: sum(1 for e in report.evaluations if e.best_model is k)
                              for k in ModelKind},
        "category_proportions": {c.value: float(v) for c, v in proportions.items()},
    }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "summary": summary,
        "countries": [country_record(e, report) for e in report.evaluations],
        "categories": {c: cat.value for c, cat in sorted(report.category_assignments.items())},
        "spread": ([{"feature": f, "top5_count": t, "bottom4_count": b} for f, t, b in spread.rows()]
                   if spread is not None else []),
        "skipped": [{"country": c, "reason": r} for c, r in report.skipped],
        "comparison_points": [{"country": c, "random_forest": float(rf), "gradient_boosted": float(gb)}
                              for c, rf, gb in report.comparison_points],
        "config_echo": config_echo or {},
    }
    if validation is not None:
        doc["validation"] = validation
    return doc


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _num(v) -> str:
    return format_number(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_artifacts(report: GlobalReport, *, seed: int = 0, config_echo: dict | None = None,
                     validation: dict | None = None, models: dict | None = None) -> dict[str, str]:
    """Every artifact as ``{relative path: text}``."""
    files = {}
    doc = report_to_dict(report, seed=seed, config_echo=config_echo, validation=validation)
    files["report.json"] = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    kinds = list(ModelKind)
    rows = [["country", "n_train", "n_test"] + [f"mae_{MODEL_KEYS[k]}" for k in kinds]
            + ["best_model", "category"]]
    for e in report.evaluations:
        cat = report.category_assignments.get(e.country)
        rows.append([e.country, e.n_train, e.n_test] + [_num(e.mae[k]) for k in kinds]
                    + [e.best_model.value, cat.value if cat else ""])
    files["per_country.csv"] = _csv(rows)

    for e in report.evaluations:
        rows = [["actual", "predicted", "best_model_predicted"]]
        rows += [[_num(a), _num(p), _num(b)]
                 for (a, p), (_, b) in zip(e.rf_test_predictions, e.test_predictions)]
        files[f"predictions/{e.country}.csv"] = _csv(rows)
        rows = [["rank", "feature", "weight"]]
        rows += [[i, f, _num(w)] for i, (f, w) in enumerate(e.sorted_importances(), start=1)]
        files[f"importances/{e.country}.csv"] = _csv(rows)
        files[f"charts/actual_vs_predicted_{e.country}.svg"] = svg.scatter_identity(
            list(e.rf_test_predictions), f"Actual vs predicted, {e.country} (random forest)",
            "actual", "predicted")

    files["categories.json"] = json.dumps(doc["categories"], indent=2) + "\n"
    rows = [["feature", "top5_count", "bottom4_count"]]
    if report.importance_spread is not None:
        rows += [list(r) for r in report.importance_spread.rows()]
    files["spread.csv"] = _csv(rows)

    codes = [e.country for e in report.evaluations]
    files["charts/mae_by_country.svg"] = svg.bar_chart(
        codes, {k.value: [e.mae[k] for e in report.evaluations] for k in
                (ModelKind.RANDOM_FOREST, ModelKind.GRADIENT_BOOSTED, ModelKind.LINEAR)},
        "Mean absolute error by country", "test MAE")
    files["charts/rf_vs_gbt.svg"] = svg.scatter_identity(
        [(gb, rf) for _, rf, gb in report.comparison_points],
        "Random forest error vs gradient boosting error", "gradient boosting MAE", "random forest MAE",
        labels=[c for c, _, _ in report.comparison_points])

    for country, fitted in sorted((models or {}).items()):
        ev = next(e for e in report.evaluations if e.country == country)
        for kind, model in fitted.items():
            files[f"models/{country}/{MODEL_KEYS[kind]}.json"] = dump_model(model, ev.selected_features)
    return files


def emit_reports(report: GlobalReport, out_dir: str | Path, *, seed: int = 0,
                 config_echo: dict | None = None, validation: dict | None = None,
                 models: dict | None = None) -> ReportBundle:
    """Write all artifacts under ``out_dir`` and return their paths."""
    if not report.evaluations:
        raise ValueError("nothing to report: no evaluated countries")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    files = render_artifacts(report, seed=seed, config_echo=config_echo, validation=validation,
                             models=models)
    bundle = ReportBundle(report, out)
    for rel, text in files.items():
        path = out / rel
        _atomic_write(path, text)
        bundle.paths.append(path)
    return bundle
