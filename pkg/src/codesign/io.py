"""Result tables and their CSV, JSON and SVG renderings.

CSV is canonical: a ``# schema:`` comment line, a header of ``name [unit]``
columns, then rows with floats at 17 significant digits. Table files hold no
run-dependent metadata, so fixed inputs give identical bytes; wall time and
version live in a ``<name>.meta.json`` sidecar.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence


@dataclass(frozen=True)
class Column:
    name: str
    unit: str = ""

    @property
    def header(self) -> str:
        return f"{self.name} [{self.unit}]" if self.unit else self.name


@dataclass
class ResultTable:
    name: str
    schema: str  # "<table>/<version>"; bump on any column change
    columns: list[Column]
    rows: list[tuple]
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        k = len(self.columns)
        for i, r in enumerate(self.rows):
            if len(r) != k:
                raise ValueError(f"{self.name}: row {i} has {len(r)} fields, expected {k}")

    def column(self, name: str) -> list:
        j = [c.name for c in self.columns].index(name)
        return [r[j] for r in self.rows]


def fmt(v) -> str:
    if isinstance(v, (bool, str)):
        return str(v)
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    x = float(v)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_csv(t: ResultTable) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {t.schema}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([c.header for c in t.columns])
    for r in t.rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return v
    x = float(v)
    return x if math.isfinite(x) else fmt(x)


def to_json(t: ResultTable) -> str:
    doc = {
        "schema": t.schema,
        "columns": [{"name": c.name, "unit": c.unit} for c in t.columns],
        "rows": [[_json_value(v) for v in r] for r in t.rows],
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def read_csv(path: str | Path) -> tuple[str, list[str], list[list[str]]]:
    """``(schema, headers, rows)`` of a CSV written by :func:`to_csv`."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# schema: "):
        raise ValueError(f"{path}: missing schema line")
    rows = list(csv.reader(lines[1:]))
    return lines[0][len("# schema: "):], rows[0], rows[1:]


def write_table(t: ResultTable, out: Path, formats: Sequence[str], plot=None) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        p = out / f"{t.name}.csv"
        p.write_text(to_csv(t))
        written.append(p)
    if "json" in formats:
        p = out / f"{t.name}.json"
        p.write_text(to_json(t))
        written.append(p)
    if "svg" in formats and plot is not None:
        p = out / f"{t.name}.svg"
        plot(t, p)
        written.append(p)
    meta = out / f"{t.name}.meta.json"
    meta.write_text(json.dumps({"schema": t.schema, **t.meta}, indent=1, sort_keys=True) + "\n")
    written.append(meta)
    return written
