"""End-to-end run: parse, validate, per-country prepare/evaluate, categorize, aggregate, emit."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

import yaml

from .categorize import ScoringMode, assign_category, category_scores, importance_spread
from .evaluate import GlobalReport, ModelConfig, aggregate, evaluate_country
from .ingest import (DataError, FeatureCatalog, PanelDataset, default_catalog, load_catalog,
                     load_dataset, validate)
from .prepare import PrepareConfig, Skip, SplitMode, prepare_country
from .report import ReportBundle, emit_reports

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


_PREPARE_KEYS = {f.name for f in fields(PrepareConfig)}
_MODEL_KEYS = {f.name for f in fields(ModelConfig)} - {"forest_jobs"}
_RUN_KEYS = {"target_min", "target_max", "category_scoring", "out", "threads", "dump_models"}


@dataclass(frozen=True)
class RunConfig:
    prepare: PrepareConfig = field(default_factory=PrepareConfig)
    models: ModelConfig = field(default_factory=ModelConfig)
    category_scoring: ScoringMode = ScoringMode.IMPORTANCE
    target_min: float = 0.0
    target_max: float = 112.0
    out: Path = Path("out")
    threads: int = 0  # 0 = one per CPU
    dump_models: bool = False

    def __post_init__(self):
        object.__setattr__(self, "category_scoring", ScoringMode.parse(self.category_scoring))
        object.__setattr__(self, "out", Path(self.out))
        if self.target_min > self.target_max:
            raise ConfigError("target_min exceeds target_max")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")

    @property
    def seed(self) -> int:
        return self.prepare.seed

    def worker_count(self) -> int:
        return self.threads or (os.cpu_count() or 1)

    def echo(self) -> dict:
        """Settings that determine results; thread count and output path are left out."""
        prep = asdict(self.prepare)
        prep["split_mode"] = self.prepare.split_mode.value
        models = asdict(self.models)
        models.pop("forest_jobs")
        return {**prep, **models, "category_scoring": self.category_scoring.value,
                "target_min": self.target_min, "target_max": self.target_max}


def config_from_mapping(doc: Mapping, base: RunConfig | None = None) -> RunConfig:
    """Overlay a flat key/value mapping on ``base`` (defaults when omitted)."""
    base = base or RunConfig()
    unknown = set(doc) - _PREPARE_KEYS - _MODEL_KEYS - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    try:
        prep = replace(base.prepare, **{k: v for k, v in doc.items() if k in _PREPARE_KEYS})
        models = replace(base.models, **{k: v for k, v in doc.items() if k in _MODEL_KEYS})
        run_kw = {k: v for k, v in doc.items() if k in _RUN_KEYS}
        return replace(base, prepare=prep, models=models, **run_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ConfigError(f"config {path} must be a key/value document")
    return config_from_mapping(doc)


def _country_job(dataset: PanelDataset, country: str, config: RunConfig):
    prepared = prepare_country(dataset, country, config.prepare)
    if isinstance(prepared, Skip):
        return prepared
    return evaluate_country(prepared, config.models, config.seed, keep_models=config.dump_models)


def analyze(dataset: PanelDataset, config: RunConfig = RunConfig()) -> GlobalReport:
    """Per-country work on a worker pool, folded in country-code order."""
    countries = list(dataset.countries)
    workers = min(config.worker_count(), len(countries))
    if workers <= 1:
        results = [_country_job(dataset, c, config) for c in countries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _country_job(dataset, c, config), countries))

    evaluations = [r for r in results if not isinstance(r, Skip)]
    skipped = [r for r in results if isinstance(r, Skip)]
    for s in skipped:
        log.info("skipping %s: %s", s.country, s.reason)
    if not evaluations:
        raise DataError("no evaluable countries")
    report = aggregate(evaluations, skipped)
    catalog = dataset.catalog
    for ev in report.evaluations:
        scores = category_scores(ev.importances, catalog, config.category_scoring)
        report.category_scores[ev.country] = scores
        if scores.scores:
            report.category_assignments[ev.country] = assign_category(scores)
    report.importance_spread = importance_spread(
        [(ev.country, ev.importances) for ev in report.evaluations], catalog)
    return report


def validation_summary(dataset: PanelDataset, config: RunConfig) -> dict:
    v = validate(dataset, (config.target_min, config.target_max))
    return {
        "clean": v.clean,
        "rows": len(dataset),
        "row_counts_per_country": v.row_counts_per_country,
        "target_range_violations": len(v.target_range_violations),
        "bound_violations": len(v.bound_violations),
        "duplicate_keys": len(v.duplicate_keys),
        "conflict_consistency_warnings": len(v.conflict_consistency_warnings),
    }


def run(config: RunConfig, data_path: str | Path, catalog_path: str | Path | None = None) -> ReportBundle:
    catalog: FeatureCatalog = load_catalog(catalog_path) if catalog_path else default_catalog()
    dataset = load_dataset(data_path, catalog)
    validation = validation_summary(dataset, config)
    if not validation["clean"]:
        log.warning("data quality findings: %s",
                    {k: validation[k] for k in ("target_range_violations", "bound_violations",
                                                "duplicate_keys", "conflict_consistency_warnings")})
    report = analyze(dataset, config)
    models = ({e.country: e.models for e in report.evaluations if e.models}
              if config.dump_models else None)
    return emit_reports(report, config.out, seed=config.seed, config_echo=config.echo(),
                        validation=validation, models=models)


__all__ = ["ConfigError", "RunConfig", "SplitMode", "analyze", "config_from_mapping", "load_config", "run"]
