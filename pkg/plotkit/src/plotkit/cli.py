"""Command-line entry point: ``plotkit <recipe.json> [...] [--output-dir D]``."""

from __future__ import annotations

import argparse
import sys

from plotkit.csvio import SchemaError
from plotkit.recipe import RecipeError, render_recipe


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render publication-style figures from qtherm CSV artifacts.",
    )
    parser.add_argument("recipes", nargs="+", metavar="recipe.json",
                        help="figure recipe file(s) to render")
    parser.add_argument("--output-dir", default=None,
                        help="directory for relative output paths (default: recipe's directory)")
    args = parser.parse_args(argv)
    for path in args.recipes:
        try:
            out = render_recipe(path, output_dir=args.output_dir)
        except (RecipeError, SchemaError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
