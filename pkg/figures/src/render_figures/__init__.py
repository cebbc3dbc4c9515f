"""Figure rendering for wonham-lab experiment CSVs."""

__version__ = "0.1.0"

from .renderer import FIGURE_KINDS, SchemaError, load_series, render
