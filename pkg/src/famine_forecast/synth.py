"""Synthetic panels with a planted famine driver per country, for tests and demos.

Each synthetic country draws every catalog feature at random; its target is
``50 + f(three features of one category) + N(0, noise^2)`` so the category
that should win the importance vote is known. Country codes come from the
ISO 3166 user-assigned block (``XAA``, ``XAB``, ...).
"""
from __future__ import annotations

import csv
import io
import itertools
import string
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
import yaml

from .ingest import (SCORED_CATEGORIES, FamineCategory, FeatureCatalog, Observation, PanelDataset,
                     catalog_to_dict, dataset_to_csv, default_catalog)
from .models.rng import derive_seed

VARIANTS = ("nonlinear", "linear")
N_ADMIN1 = 5
BASE_LEVEL = 50.0


@dataclass(frozen=True)
class SynthSpec:
    per_category: dict = field(default_factory=lambda: {c: 4 for c in SCORED_CATEGORIES})
    rows_per_country: int = 600
    noise: float = 3.0
    seed: int = 0
    variant: str = "nonlinear"
    missing_rate: float = 0.02
    sparse_features: int = 2  # per country, observed in only ~30% of rows

    def __post_init__(self):
        per = {FamineCategory.parse(k): int(v)
               for k, v in self.per_category.items()}
        object.__setattr__(self, "per_category", per)
        if any(c not in SCORED_CATEGORIES for c in per):
            raise ValueError("only Natural, Economic and Conflict can be planted")
        if any(v < 0 for v in per.values()) or sum(per.values()) == 0:
            raise ValueError("need at least one country to generate")
        if self.rows_per_country < 5:
            raise ValueError("rows_per_country must be at least 5")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not 0 <= self.missing_rate < 0.5:
            raise ValueError("missing_rate must lie in [0, 0.5)")


@dataclass(frozen=True)
class SyntheticPanel:
    dataset: PanelDataset
    truth: dict[str, FamineCategory]
    signal_features: dict[str, tuple[str, ...]]


def country_codes():
    for a, b in itertools.product(string.ascii_uppercase, repeat=2):
        yield "X" + a + b


def _draw_feature(name: str, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Map a standard-normal driver to a plausible value range for the feature family."""
    if name.startswith("pop_density"):
        return np.round(np.exp(4.5 + 0.6 * z), 3)
    if name.startswith("rainfall_value"):
        return np.round(np.exp(3.5 + 0.5 * z), 3)
    if name.startswith("rainfall_"):
        return np.round(100 + 25 * z, 3)
    if name.startswith("ndvi_value"):
        return np.round(np.clip(0.4 + 0.15 * z, -1, 1), 4)
    if name.startswith("ndvi_anomaly"):
        return np.round(100 + 12 * z, 3)
    if name.startswith("single_pewi"):
        return np.round(np.clip(20 + 6 * z, 0, 100), 3)
    if "inflation" in name:
        return np.round(8 + 5 * z, 3)
    if name.startswith("ce_variation"):
        return np.round(2 * z, 4)
    if name.endswith("_difference"):
        return np.round(15 * z)
    if name.startswith("num_fatalities"):
        return rng.poisson(np.exp(2.0 + 0.7 * z)).astype(float)
    return np.round(z, 4)


def _target(drivers: np.ndarray, variant: str) -> np.ndarray:
    a, b, c = drivers
    if variant == "linear":
        return BASE_LEVEL + 5 * a + 4 * b + 3 * c
    return BASE_LEVEL + 5 * a + 4 * np.tanh(1.5 * b) + 3 * np.sign(c)


def generate_panel(spec: SynthSpec = SynthSpec(), catalog: FeatureCatalog | None = None) -> SyntheticPanel:
    catalog = catalog or default_catalog()
    names = catalog.names
    by_cat = {c: [e.name for e in catalog.entries if e.category is c] for c in SCORED_CATEGORIES}
    totals = {e.name: e.components for e in catalog.entries if e.components}
    component_of = {c for comps in totals.values() for c in comps}

    plan = [c for c in SCORED_CATEGORIES for _ in range(spec.per_category.get(c, 0))]
    for cat in set(plan):
        if len(by_cat[cat]) < 3:
            raise ValueError(f"catalog needs at least 3 {cat.value} features to plant a signal")

    n = spec.rows_per_country
    observations = []
    truth = {}
    signals = {}
    for idx, (code, cat) in enumerate(zip(country_codes(), plan)):
        rng = np.random.Generator(np.random.PCG64(derive_seed(spec.seed, idx)))
        drivers = rng.standard_normal((len(names), n))
        values = {}
        for j, name in enumerate(names):
            if name in totals:
                continue
            values[name] = _draw_feature(name, drivers[j], rng)
        for name, comps in totals.items():
            # totals are the sum of their components, so the consistency check stays quiet
            values[name] = np.sum([values[c] for c in comps], axis=0)

        planted = [str(f) for f in rng.choice(
            [f for f in by_cat[cat] if f not in totals and f not in component_of] or by_cat[cat],
            size=3, replace=False)]
        # the target reads the standardized drivers of the planted features
        driver_rows = np.array([drivers[names.index(f)] for f in planted])
        y = _target(driver_rows, spec.variant) + spec.noise * rng.standard_normal(n)
        y = np.round(np.clip(y, 0.0, 112.0), 4)

        missing = rng.random((len(names), n)) < spec.missing_rate
        others = [j for j, f in enumerate(names) if f not in planted]
        for j in rng.choice(others, size=min(spec.sparse_features, len(others)), replace=False):
            missing[j] = rng.random(n) < 0.7

        for r in range(n):
            feats = {f: float(values[f][r]) for j, f in enumerate(names) if not missing[j, r]}
            month = r // N_ADMIN1
            when = date(2012 + month // 12, month % 12 + 1, 1)
            observations.append(Observation(code, f"{code}-{r % N_ADMIN1 + 1:02d}", when,
                                            feats, float(y[r])))
        truth[code] = cat
        signals[code] = tuple(planted)
    return SyntheticPanel(PanelDataset(catalog, tuple(observations)), truth, signals)


def truth_csv(panel: SyntheticPanel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["country", "planted_category", "signal_features"])
    for code, cat in panel.truth.items():
        w.writerow([code, cat.value, ";".join(panel.signal_features[code])])
    return buf.getvalue()


def generate_synthetic(spec: SynthSpec, out_dir: str | Path,
                       catalog: FeatureCatalog | None = None) -> dict[str, Path]:
    """Write ``dataset.csv``, ``catalog.yaml`` and ``truth.csv`` into ``out_dir``."""
    panel = generate_panel(spec, catalog)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"dataset": out / "dataset.csv", "catalog": out / "catalog.yaml", "truth": out / "truth.csv"}
    paths["dataset"].write_text(dataset_to_csv(panel.dataset), encoding="utf-8")
    paths["catalog"].write_text(yaml.safe_dump(catalog_to_dict(panel.dataset.catalog), sort_keys=False),
                                encoding="utf-8")
    paths["truth"].write_text(truth_csv(panel), encoding="utf-8")
    return paths
