from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from famine_forecast.ingest import parse_catalog  # noqa: E402
from famine_forecast.synth import SynthSpec, generate_panel  # noqa: E402

SMALL_CATALOG = """
features:
  - name: rainfall
    category: natural
    min: 0
  - name: ndvi
    category: natural
    min: -1
    max: 1
  - name: food_inflation_value
    category: economic
  - name: battles
    category: conflict
    min: 0
  - name: total_fatalities
    category: conflict
    min: 0
    components: [battles]
  - name: pop_density
    category: other
"""


@pytest.fixture
def small_catalog():
    return parse_catalog(SMALL_CATALOG)


@pytest.fixture(scope="session")
def small_panel():
    """Three synthetic countries, one per category, 120 rows each."""
    return generate_panel(SynthSpec(per_category={"natural": 1, "economic": 1, "conflict": 1},
                                    rows_per_country=120, seed=5))
