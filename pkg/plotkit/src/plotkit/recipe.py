"""Figure recipes: JSON descriptions of one rendered artifact each."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from plotkit.csvio import read_table
from plotkit.figures import RENDERERS
from plotkit.style import SAVEFIG_KWARGS, rc_context


class RecipeError(ValueError):
    """Recipe file is malformed or references a figure kind we cannot draw."""


@dataclass
class FigureRecipe:
    """One figure: input CSV path(s), kind, labels, and the output image path."""

    kind: str
    inputs: list[str]
    output: str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    base_dir: str = field(default=".", repr=False)

    def __post_init__(self):
        if self.kind not in RENDERERS:
            raise RecipeError(f"unknown figure kind {self.kind!r}; choose from {sorted(RENDERERS)}")
        if not self.inputs:
            raise RecipeError("recipe needs at least one input CSV")
        if not self.output:
            raise RecipeError("recipe needs an output image path")
        ext = os.path.splitext(self.output)[1].lower()
        if ext not in (".png", ".svg"):
            raise RecipeError(f"output extension {ext!r} not supported; use .png or .svg")

    @classmethod
    def load(cls, path: str) -> "FigureRecipe":
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise RecipeError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise RecipeError(f"{path}: recipe must be a JSON object")
        known = {"kind", "inputs", "output", "title", "xlabel", "ylabel"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise RecipeError(f"{path}: unknown recipe key {unknown[0]!r}")
        try:
            return cls(base_dir=os.path.dirname(os.path.abspath(path)), **raw)
        except TypeError as exc:
            raise RecipeError(f"{path}: {exc}") from exc

    def input_paths(self) -> list[str]:
        return [p if os.path.isabs(p) else os.path.join(self.base_dir, p) for p in self.inputs]

    def render(self, output_dir: str | None = None) -> str:
        """Read the inputs, draw the figure, and write the image; returns its path."""
        renderer, schema = RENDERERS[self.kind]
        tables = [read_table(p, schema) for p in self.input_paths()]
        out = self.output
        if not os.path.isabs(out):
            out = os.path.join(output_dir if output_dir is not None else self.base_dir, out)
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        with rc_context():
            fig = renderer(tables, self)
            fig.savefig(out, **SAVEFIG_KWARGS)
        return out


def render_recipe(path: str, output_dir: str | None = None) -> str:
    """Load a recipe JSON and render it; returns the written image path."""
    return FigureRecipe.load(path).render(output_dir=output_dir)


def load_gap_ratio_curve(path: str) -> list[float]:
    """Gap ratios (ordered by N) computed from a gap-ratio recipe's inputs."""
    from plotkit.figures import gap_ratio_curve

    recipe = FigureRecipe.load(path)
    if recipe.kind != "gap-ratio":
        raise RecipeError(f"{path}: expected a gap-ratio recipe, got {recipe.kind!r}")
    _, schema = RENDERERS[recipe.kind]
    tables = [read_table(p, schema) for p in recipe.input_paths()]
    return gap_ratio_curve(tables)[1]
