"""Reader for the qtherm CSV dialect.

Files start with a ``# schema=<name> version=<v>`` line followed by a header
row; all values are plain strings with floats printed at full precision.
This module re-implements the parser so the plotting layer depends only on
the published file format, not on the producing package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

# columns each schema is required to provide (extra columns are allowed)
SCHEMAS: dict[str, list[str]] = {
    "lqts-sweep": ["model", "L", "param", "beta", "n_A", "s_A", "variance_H"],
    "lqts-scaling": ["model", "L", "n_A", "param_at_extremum", "s_A_at_extremum"],
    "discrimination": ["t_gamma", "r0_class", "distance"],
    "fisher-compare": ["protocol", "N", "T", "n_th", "fisher_value", "input_class"],
}


class SchemaError(ValueError):
    """Input CSV does not satisfy the declared schema."""


@dataclass
class Table:
    """Parsed CSV: schema name, header, and rows as string dicts."""

    schema: str
    version: int
    header: list[str]
    rows: list[dict[str, str]]

    def column(self, name: str) -> list[str]:
        return [row[name] for row in self.rows]

    def floats(self, name: str) -> list[float]:
        return [float(v) for v in self.column(name)]


def read_table(path: str, expected_schema: str) -> Table:
    """Parse a CSV and check it against the expected schema.

    Raises SchemaError listing the expected columns when the file declares a
    different schema, lacks required columns, or carries no data rows.
    """
    required = SCHEMAS.get(expected_schema)
    if required is None:
        raise SchemaError(f"unknown schema {expected_schema!r}; known: {sorted(SCHEMAS)}")
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# schema="):
            raise SchemaError(f"{path}: missing '# schema=<name> version=<v>' line")
        fields = dict(part.split("=", 1) for part in first[2:].split())
        schema = fields.get("schema", "")
        version = int(fields.get("version", "0"))
        if schema != expected_schema:
            raise SchemaError(
                f"{path}: schema {schema!r}, expected {expected_schema!r} "
                f"with columns {required}"
            )
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing columns {missing}; schema {expected_schema!r} "
                f"expects {required}"
            )
        rows = []
        for row in reader:
            if len(row) != len(header):
                raise SchemaError(f"{path}: row width {len(row)} != header width {len(header)}")
            rows.append(dict(zip(header, row)))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return Table(schema=schema, version=version, header=header, rows=rows)
