"""Per-country design matrices: availability filter, holdout split, median imputation."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .ingest import PanelDataset, availability

REASON_INSUFFICIENT_ROWS = "insufficient rows"
REASON_NO_FEATURES = "no feature passes the availability threshold"
REASON_NO_TRAINING_FEATURES = "no feature has training observations"
DROP_BELOW_THRESHOLD = "below availability threshold"
DROP_NO_TRAINING = "no training observations"


class SplitMode(str, enum.Enum):
    RANDOM = "random"
    CHRONOLOGICAL = "chronological"

    @classmethod
    def parse(cls, text) -> "SplitMode":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown split mode {text!r} (expected random or chronological)") from None


@dataclass(frozen=True)
class PrepareConfig:
    availability_threshold: float = 0.5
    test_fraction: float = 0.2
    split_mode: SplitMode = SplitMode.RANDOM
    min_rows: int = 40
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "split_mode", SplitMode.parse(self.split_mode))
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie strictly between 0 and 1")
        if not 0 <= self.availability_threshold <= 1:
            raise ValueError("availability_threshold must lie in [0, 1]")
        if self.min_rows < 5:
            raise ValueError("min_rows must be at least 5")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class PreparedCountry:
    country: str
    selected_features: tuple[str, ...]
    train_matrix: np.ndarray
    train_targets: np.ndarray
    test_matrix: np.ndarray
    test_targets: np.ndarray
    medians: np.ndarray
    dropped_features: tuple[tuple[str, str], ...] = ()
    train_rows: np.ndarray = field(default=None, repr=False)  # dataset row indices
    test_rows: np.ndarray = field(default=None, repr=False)

    @property
    def n_train(self) -> int:
        return len(self.train_targets)

    @property
    def n_test(self) -> int:
        return len(self.test_targets)


@dataclass(frozen=True)
class Skip:
    country: str
    reason: str


def select_features(avail: Mapping[str, float], threshold: float) -> list[str]:
    """Features observed in strictly more than ``threshold`` of the rows, in input order."""
    return [name for name, frac in avail.items() if frac > threshold]


def holdout_size(n: int, test_fraction: float) -> int:
    # half-up rounding, so the result does not depend on banker's rounding
    return int(math.floor(test_fraction * n + 0.5))


def train_test_split(dates: Sequence, test_fraction: float = 0.2, seed: int = 0,
                     split_mode: SplitMode | str = SplitMode.RANDOM) -> tuple[np.ndarray, np.ndarray]:
    """Partition positions ``0..n-1`` into (train, test), both returned sorted.

    Random mode permutes the positions with a seeded PCG64 generator and
    takes the last ``round(test_fraction * n)`` as test; chronological mode
    takes the latest-dated rows, ties going to later input positions.
    """
    mode = SplitMode.parse(split_mode)
    n = len(dates)
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    k = holdout_size(n, test_fraction)
    if k < 1 or k >= n:
        raise ValueError(f"{n} rows with test_fraction={test_fraction} leave an empty partition")
    if mode is SplitMode.RANDOM:
        perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    else:
        perm = np.array(sorted(range(n), key=lambda i: (dates[i], i)), dtype=np.int64)
    return np.sort(perm[: n - k]), np.sort(perm[n - k:])


def fit_imputer(train_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-column median of the observed (non-NaN) values.

    Returns ``(medians, empty)`` where ``empty`` flags columns with no
    observed value; their median is NaN and the column should be dropped.
    """
    m = np.asarray(train_matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    medians = np.full(m.shape[1], np.nan)
    empty = np.zeros(m.shape[1], dtype=bool)
    for j in range(m.shape[1]):
        col = m[:, j]
        col = col[~np.isnan(col)]
        if col.size == 0:
            empty[j] = True
        else:
            medians[j] = np.median(col)
    return medians, empty


def impute(matrix, medians) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float64)
    medians = np.asarray(medians, dtype=np.float64)
    if m.ndim != 2 or medians.shape != (m.shape[1],):
        raise ValueError(f"medians of shape {medians.shape} do not cover a {m.shape} matrix")
    if np.isnan(medians).any():
        bad = np.flatnonzero(np.isnan(medians)).tolist()
        raise ValueError(f"column(s) {bad} have no imputation median")
    return np.where(np.isnan(m), medians, m)


def prepare_country(dataset: PanelDataset, country: str,
                    config: PrepareConfig = PrepareConfig()) -> PreparedCountry | Skip:
    rows = dataset.country_rows(country)
    if len(rows) < config.min_rows:
        return Skip(country, REASON_INSUFFICIENT_ROWS)

    avail = availability(dataset, country)
    selected = select_features(avail, config.availability_threshold)
    dropped = [(name, DROP_BELOW_THRESHOLD) for name in avail if name not in selected]
    if not selected:
        return Skip(country, REASON_NO_FEATURES)

    dates = [dataset.observations[r].date for r in rows]
    try:
        train_pos, test_pos = train_test_split(dates, config.test_fraction, config.seed,
                                               config.split_mode)
    except ValueError as exc:
        return Skip(country, str(exc))
    cols = [dataset.catalog.index(name) for name in selected]
    x = dataset.matrix[np.ix_(rows, cols)]
    y = dataset.targets[rows]

    medians, empty = fit_imputer(x[train_pos])
    if empty.any():
        dropped += [(name, DROP_NO_TRAINING) for name, e in zip(selected, empty) if e]
        keep = ~empty
        selected = [name for name, k in zip(selected, keep) if k]
        if not selected:
            return Skip(country, REASON_NO_TRAINING_FEATURES)
        x = x[:, keep]
        medians, _ = fit_imputer(x[train_pos])

    order = {name: i for i, name in enumerate(dataset.catalog.names)}
    dropped.sort(key=lambda item: order[item[0]])
    return PreparedCountry(
        country=country,
        selected_features=tuple(selected),
        train_matrix=impute(x[train_pos], medians),
        train_targets=y[train_pos].copy(),
        test_matrix=impute(x[test_pos], medians),
        test_targets=y[test_pos].copy(),
        medians=medians,
        dropped_features=tuple(dropped),
        train_rows=rows[train_pos],
        test_rows=rows[test_pos],
    )
