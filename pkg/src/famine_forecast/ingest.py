"""Reading the feature catalog and the country panel, plus data-quality checks."""
from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np
import yaml

DEFAULT_TARGET_RANGE = (0.0, 112.0)
REQUIRED_COLUMNS = ("country", "admin1", "date", "target")


class CatalogError(ValueError):
    pass


class DataError(ValueError):
    pass


class UnknownFeatureWarning(UserWarning):
    pass


class FamineCategory(str, enum.Enum):
    NATURAL = "Natural"
    ECONOMIC = "Economic"
    CONFLICT = "Conflict"
    OTHER = "Other"

    @classmethod
    def parse(cls, text: str) -> "FamineCategory":
        if isinstance(text, cls):
            return text
        for member in cls:
            if member.value.lower() == str(text).strip().lower():
                return member
        raise ValueError(f"unknown category {text!r}")


SCORED_CATEGORIES = (FamineCategory.NATURAL, FamineCategory.ECONOMIC, FamineCategory.CONFLICT)


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    category: FamineCategory
    description: str = ""
    lower_bound: float | None = None
    upper_bound: float | None = None
    # features whose value must never exceed this one (e.g. total vs battle fatalities)
    components: tuple[str, ...] = ()


@dataclass(frozen=True)
class FeatureCatalog:
    entries: tuple[FeatureSpec, ...]

    def __post_init__(self):
        if not self.entries:
            raise CatalogError("catalog must declare at least one feature")
        seen = set()
        for entry in self.entries:
            if entry.name in seen:
                raise CatalogError(f"duplicate feature name {entry.name!r}")
            seen.add(entry.name)
        for entry in self.entries:
            for comp in entry.components:
                if comp not in seen:
                    raise CatalogError(f"feature {entry.name!r} lists unknown component {comp!r}")

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def __contains__(self, name):
        return any(e.name == name for e in self.entries)

    def index(self, name: str) -> int:
        for i, e in enumerate(self.entries):
            if e.name == name:
                return i
        raise KeyError(name)

    def get(self, name: str) -> FeatureSpec:
        return self.entries[self.index(name)]

    def category_of(self, name: str) -> FamineCategory:
        return self.get(name).category

    def with_extra(self, names: Iterable[str]) -> "FeatureCatalog":
        """Append features unknown to the catalog under category Other."""
        extra = tuple(FeatureSpec(n, FamineCategory.OTHER, "auto-registered from dataset header")
                      for n in names)
        return FeatureCatalog(self.entries + extra)


def _optional_number(entry: Mapping, key: str, name: str) -> float | None:
    value = entry.get(key)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise CatalogError(f"feature {name!r}: {key} must be a number, got {value!r}") from None


def parse_catalog(raw: str | Mapping) -> FeatureCatalog:
    """Build a catalog from a YAML/JSON document (text) or an already-loaded mapping.

    Entries keep document order; missing ``min``/``max`` mean unbounded.
    """
    if isinstance(raw, str):
        try:
            doc = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise CatalogError(f"malformed catalog document: {exc}") from None
    else:
        doc = raw
    if not isinstance(doc, Mapping) or "features" not in doc:
        raise CatalogError("malformed catalog document: expected a top-level 'features' list")
    features = doc["features"]
    if features is None:
        features = []
    if not isinstance(features, list):
        raise CatalogError("malformed catalog document: 'features' must be a list")

    entries = []
    for pos, entry in enumerate(features):
        if not isinstance(entry, Mapping) or "name" not in entry:
            raise CatalogError(f"catalog entry #{pos} must be a mapping with a 'name'")
        name = str(entry["name"]).strip()
        if not name:
            raise CatalogError(f"catalog entry #{pos} has an empty name")
        if "category" not in entry:
            raise CatalogError(f"feature {name!r} has no category")
        try:
            category = FamineCategory.parse(entry["category"])
        except ValueError:
            raise CatalogError(f"feature {name!r}: unknown category {entry['category']!r}") from None
        lo = _optional_number(entry, "min", name)
        hi = _optional_number(entry, "max", name)
        if lo is not None and hi is not None and lo > hi:
            raise CatalogError(f"feature {name!r}: min {lo} exceeds max {hi}")
        components = entry.get("components") or ()
        if not isinstance(components, (list, tuple)):
            raise CatalogError(f"feature {name!r}: components must be a list")
        entries.append(FeatureSpec(name, category, str(entry.get("description", "") or ""),
                                   lo, hi, tuple(str(c) for c in components)))
    return FeatureCatalog(tuple(entries))


def load_catalog(path: str | Path) -> FeatureCatalog:
    return parse_catalog(Path(path).read_text(encoding="utf-8"))


def default_catalog() -> FeatureCatalog:
    """The packaged 31-feature catalog."""
    text = resources.files("famine_forecast").joinpath("data/default_catalog.yaml").read_text("utf-8")
    return parse_catalog(text)


def catalog_to_dict(catalog: FeatureCatalog) -> dict:
    features = []
    for e in catalog.entries:
        item = {"name": e.name, "category": e.category.value.lower()}
        if e.description:
            item["description"] = e.description
        if e.lower_bound is not None:
            item["min"] = e.lower_bound
        if e.upper_bound is not None:
            item["max"] = e.upper_bound
        if e.components:
            item["components"] = list(e.components)
        features.append(item)
    return {"features": features}


@dataclass(frozen=True)
class Observation:
    country: str
    admin1: str | None
    date: date
    features: Mapping[str, float]  # absent key = missing value
    target: float


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Immutable panel of observations.

    Besides the row objects, the dataset keeps a dense float matrix in catalog
    column order (NaN = missing) which the numeric stages work from.
    """

    catalog: FeatureCatalog
    observations: tuple[Observation, ...]
    matrix: np.ndarray = field(init=False, repr=False)
    targets: np.ndarray = field(init=False, repr=False)
    countries: tuple[str, ...] = field(init=False)
    _rows: dict = field(init=False, repr=False)

    def __post_init__(self):
        if not self.observations:
            raise DataError("dataset has no observations")
        names = self.catalog.names
        col = {n: i for i, n in enumerate(names)}
        mat = np.full((len(self.observations), len(names)), np.nan)
        for r, obs in enumerate(self.observations):
            for name, value in obs.features.items():
                if name not in col:
                    raise DataError(f"row {r}: feature {name!r} is not in the catalog")
                mat[r, col[name]] = value
        mat.setflags(write=False)
        tgt = np.array([o.target for o in self.observations], dtype=float)
        tgt.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "targets", tgt)
        rows: dict[str, list[int]] = {}
        for r, obs in enumerate(self.observations):
            rows.setdefault(obs.country, []).append(r)
        object.__setattr__(self, "_rows", {c: np.array(v, dtype=np.int64) for c, v in rows.items()})
        object.__setattr__(self, "countries", tuple(sorted(rows)))

    def __eq__(self, other):
        if not isinstance(other, PanelDataset):
            return NotImplemented
        return self.catalog == other.catalog and self.observations == other.observations

    __hash__ = None

    def __len__(self):
        return len(self.observations)

    def country_rows(self, country: str) -> np.ndarray:
        try:
            return self._rows[country].copy()
        except KeyError:
            raise KeyError(f"unknown country {country!r}") from None


def _parse_number(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {column!r}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}, column {column!r}: non-finite value {text!r}")
    return value


def parse_dataset(raw: str | IO[str], catalog: FeatureCatalog) -> PanelDataset:
    """Parse the comma-delimited panel.

    Header must contain ``country``, ``admin1``, ``date`` and ``target``; every
    other column is a feature. Empty cells are missing values. Feature columns
    unknown to ``catalog`` are kept and registered under category Other with
    an :class:`UnknownFeatureWarning`. Row numbers in error messages are
    1-based data rows (the header is row 0).
    """
    stream = io.StringIO(raw) if isinstance(raw, str) else raw
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("dataset is empty (no header row)") from None
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise DataError(f"missing required column(s): {', '.join(missing)}")
    dupes = [h for h, k in Counter(header).items() if k > 1]
    if dupes:
        raise DataError(f"duplicate column(s) in header: {', '.join(dupes)}")

    feature_cols = [(i, h) for i, h in enumerate(header) if h not in REQUIRED_COLUMNS]
    unknown = [h for _, h in feature_cols if h not in catalog]
    if unknown:
        warnings.warn(f"feature column(s) not in catalog, registered as Other: {', '.join(unknown)}",
                      UnknownFeatureWarning, stacklevel=2)
        catalog = catalog.with_extra(unknown)
    pos = {c: header.index(c) for c in REQUIRED_COLUMNS}

    observations = []
    for r, cells in enumerate(reader, start=1):
        if not cells:
            continue
        if len(cells) != len(header):
            raise DataError(f"row {r}: expected {len(header)} cells, found {len(cells)}")
        country = cells[pos["country"]].strip()
        if not country:
            raise DataError(f"row {r}: empty country code")
        admin1 = cells[pos["admin1"]].strip() or None
        date_text = cells[pos["date"]].strip()
        try:
            when = date.fromisoformat(date_text)
        except ValueError:
            raise DataError(f"row {r}, column 'date': {date_text!r} is not an ISO 8601 date") from None
        target_text = cells[pos["target"]].strip()
        if not target_text:
            raise DataError(f"row {r}, column 'target': target value is missing")
        target = _parse_number(target_text, r, "target")
        feats = {}
        for i, name in feature_cols:
            text = cells[i].strip()
            if text:
                feats[name] = _parse_number(text, r, name)
        observations.append(Observation(country, admin1, when, feats, target))
    return PanelDataset(catalog, tuple(observations))


def load_dataset(path: str | Path, catalog: FeatureCatalog) -> PanelDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_dataset(fh, catalog)


def format_number(value: float) -> str:
    """Shortest round-trip decimal; integral values print without a fraction."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_dataset(dataset: PanelDataset, out: IO[str]) -> None:
    names = dataset.catalog.names
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(REQUIRED_COLUMNS) + names)
    for obs in dataset.observations:
        row = [obs.country, obs.admin1 or "", obs.date.isoformat(), format_number(obs.target)]
        row += [format_number(obs.features[n]) if n in obs.features else "" for n in names]
        writer.writerow(row)


def dataset_to_csv(dataset: PanelDataset) -> str:
    buf = io.StringIO()
    write_dataset(dataset, buf)
    return buf.getvalue()


@dataclass
class ValidationReport:
    row_counts_per_country: dict[str, int]
    target_range_violations: list[tuple[int, float]] = field(default_factory=list)
    bound_violations: list[tuple[int, str, float]] = field(default_factory=list)
    duplicate_keys: list[tuple[str, str | None, date]] = field(default_factory=list)
    conflict_consistency_warnings: list[int] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.target_range_violations or self.bound_violations
                    or self.duplicate_keys or self.conflict_consistency_warnings)

    def to_dict(self) -> dict:
        return {
            "clean": self.clean,
            "row_counts_per_country": dict(self.row_counts_per_country),
            "target_range_violations": [{"row": r, "value": v} for r, v in self.target_range_violations],
            "bound_violations": [{"row": r, "feature": f, "value": v} for r, f, v in self.bound_violations],
            "duplicate_keys": [{"country": c, "admin1": a, "date": d.isoformat()}
                               for c, a, d in self.duplicate_keys],
            "conflict_consistency_warnings": list(self.conflict_consistency_warnings),
        }


def validate(dataset: PanelDataset,
             target_range: Sequence[float] = DEFAULT_TARGET_RANGE) -> ValidationReport:
    """Collect data-quality findings; never raises on bad data and never mutates it.

    Rows are 0-based indices into ``dataset.observations``.
    """
    lo, hi = target_range
    counts = Counter(o.country for o in dataset.observations)
    report = ValidationReport(dict(sorted(counts.items())))

    bounded = [e for e in dataset.catalog.entries
               if e.lower_bound is not None or e.upper_bound is not None]
    totals = [e for e in dataset.catalog.entries if e.components]
    seen = {}
    for r, obs in enumerate(dataset.observations):
        if not lo <= obs.target <= hi:
            report.target_range_violations.append((r, obs.target))
        for e in bounded:
            v = obs.features.get(e.name)
            if v is None:
                continue
            if (e.lower_bound is not None and v < e.lower_bound) or \
               (e.upper_bound is not None and v > e.upper_bound):
                report.bound_violations.append((r, e.name, v))
        for e in totals:
            total = obs.features.get(e.name)
            if total is None:
                continue
            if any(obs.features.get(c, -math.inf) > total for c in e.components):
                report.conflict_consistency_warnings.append(r)
                break
        key = (obs.country, obs.admin1, obs.date)
        if key in seen:
            if seen[key] == 1:
                report.duplicate_keys.append(key)
            seen[key] += 1
        else:
            seen[key] = 1
    return report


def availability(dataset: PanelDataset, country: str) -> dict[str, float]:
    """Fraction of the country's rows in which each catalog feature is observed."""
    if country not in dataset.countries:
        raise KeyError(f"unknown country {country!r}")
    rows = dataset.country_rows(country)
    observed = (~np.isnan(dataset.matrix[rows])).sum(axis=0)
    n = len(rows)
    return {name: int(k) / n for name, k in zip(dataset.catalog.names, observed)}
