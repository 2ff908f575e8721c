"""Famine-driver labels from feature importances, and the cross-country rank spread."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .ingest import SCORED_CATEGORIES, FamineCategory, FeatureCatalog

TOP_K = 5
BOTTOM_K = 4


class ScoringMode(str, enum.Enum):
    IMPORTANCE = "importance"  # mean weight per category, highest wins
    RANK = "rank"  # mean descending-rank position per category, lowest wins

    @classmethod
    def parse(cls, text) -> "ScoringMode":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown category scoring mode {text!r}") from None


@dataclass(frozen=True)
class CategoryScores:
    scores: dict[FamineCategory, float]
    counts: dict[FamineCategory, int]
    mode: ScoringMode = ScoringMode.IMPORTANCE


@dataclass
class ImportanceSpread:
    top5_count: dict[str, int] = field(default_factory=dict)
    bottom4_count: dict[str, int] = field(default_factory=dict)

    @property
    def features(self) -> list[str]:
        return list(self.top5_count)

    def rows(self) -> list[tuple[str, int, int]]:
        return [(f, self.top5_count[f], self.bottom4_count[f]) for f in self.top5_count]


def _catalog_pos(catalog: FeatureCatalog | None):
    if catalog is None:
        return None
    return {name: i for i, name in enumerate(catalog.names)}


def rank_features(importances: Mapping[str, float], catalog: FeatureCatalog | None = None) -> list[str]:
    """Descending weight; ties by catalog position (insertion order without a catalog)."""
    pos = _catalog_pos(catalog)
    names = list(importances)
    tie = {n: (pos[n] if pos is not None and n in pos else len(names) + i) for i, n in enumerate(names)}
    return sorted(names, key=lambda n: (-importances[n], tie[n]))


def category_scores(importances: Mapping[str, float], catalog: FeatureCatalog,
                    mode: ScoringMode | str = ScoringMode.IMPORTANCE) -> CategoryScores:
    """Average the importances (or rank positions) of each category's features.

    Features in category Other are ignored; categories without a
    contributing feature are absent from the result.
    """
    mode = ScoringMode.parse(mode)
    if not importances:
        raise ValueError("empty importance table")
    if any(w < 0 for w in importances.values()):
        raise ValueError("importances must be nonnegative")
    if mode is ScoringMode.RANK:
        values = {name: float(r) for r, name in enumerate(rank_features(importances, catalog), start=1)}
    else:
        values = {name: float(w) for name, w in importances.items()}
    grouped: dict[FamineCategory, list[float]] = {}
    for name, v in values.items():
        if name not in catalog:
            raise ValueError(f"feature {name!r} is not in the catalog")
        cat = catalog.category_of(name)
        if cat is FamineCategory.OTHER:
            continue
        grouped.setdefault(cat, []).append(v)
    scores = {}
    counts = {}
    for cat in SCORED_CATEGORIES:
        if cat in grouped:
            # fsum is exactly rounded, so the score ignores insertion order
            scores[cat] = math.fsum(grouped[cat]) / len(grouped[cat])
            counts[cat] = len(grouped[cat])
    return CategoryScores(scores, counts, mode)


def assign_category(scores: CategoryScores) -> FamineCategory:
    if not scores.scores:
        raise ValueError("no category scores to choose from")
    sign = -1.0 if scores.mode is ScoringMode.IMPORTANCE else 1.0
    # alphabetical tie-break: Conflict < Economic < Natural
    return min(scores.scores, key=lambda c: (sign * scores.scores[c], c.value))


def importance_spread(per_country: Sequence[tuple[str, Mapping[str, float]]],
                      catalog: FeatureCatalog | None = None) -> ImportanceSpread:
    """Count, per feature, the countries ranking it in their top five and bottom four."""
    spread = ImportanceSpread()
    seen = []
    for country, importances in per_country:
        if not importances:
            raise ValueError(f"{country}: empty importance table")
        ranked = rank_features(importances, catalog)
        for name in ranked:
            if name not in spread.top5_count:
                spread.top5_count[name] = 0
                spread.bottom4_count[name] = 0
                seen.append(name)
        for name in ranked[:TOP_K]:
            spread.top5_count[name] += 1
        for name in ranked[-BOTTOM_K:]:
            spread.bottom4_count[name] += 1
    pos = _catalog_pos(catalog)
    if pos is not None:
        order = sorted(seen, key=lambda n: (pos.get(n, len(pos)), seen.index(n)))
        spread.top5_count = {n: spread.top5_count[n] for n in order}
        spread.bottom4_count = {n: spread.bottom4_count[n] for n in order}
    return spread


def category_proportions(assignments: Mapping[str, FamineCategory]) -> dict[FamineCategory, float]:
    """Share of countries per assigned category (only categories that occur)."""
    if not assignments:
        raise ValueError("no category assignments")
    n = len(assignments)
    out = {}
    for cat in SCORED_CATEGORIES:
        k = sum(1 for c in assignments.values() if c is cat)
        if k:
            out[cat] = k / n
    return out
