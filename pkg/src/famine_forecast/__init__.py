"""Per-country food consumption forecasting and famine-driver categorization."""

__version__ = "0.1.0"
