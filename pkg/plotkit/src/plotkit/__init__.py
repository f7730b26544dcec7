"""plotkit: publication-style figures from qtherm CSV artifacts.

Reads the documented CSV dialect (schema-version line + header) and renders
five figure kinds — lqts-curves, lqts-scaling, fi-panels, gap-ratio, and
discrimination — from JSON recipes, deterministically for fixed inputs.
"""

from plotkit.csvio import SchemaError, Table, read_table
from plotkit.recipe import FigureRecipe, RecipeError, load_gap_ratio_curve, render_recipe

__version__ = "0.1.0"

__all__ = [
    "FigureRecipe",
    "RecipeError",
    "SchemaError",
    "Table",
    "load_gap_ratio_curve",
    "read_table",
    "render_recipe",
]
