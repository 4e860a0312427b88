"""Per-property indicator table and the fixed text formatting of all outputs."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

METRIC_COLUMNS = (
    "property_id",
    "node_count",
    "mean_visibility",
    "std_visibility",
    "min_visibility",
    "median_visibility",
    "max_visibility",
    "mean_relative",
    "wall_ratio",
    "ceiling_ratio",
    "floor_ratio",
    "window_ratio",
    "other_ratio",
    "interior_image_count",
    "meters_per_pixel",
    "rent",
    "floor_area_m2",
    "construction_year",
    "region_key",
)
TEXT_COLUMNS = frozenset({"property_id", "region_key"})
INT_COLUMNS = frozenset({
    "node_count", "min_visibility", "median_visibility", "max_visibility",
    "interior_image_count", "construction_year",
})


class TableError(ValueError):
    pass


def fmt(value) -> str:
    """Output cell text: missing as empty, ints verbatim, floats fixed to 6 decimals."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        out = f"{value:.6f}"
        return "0.000000" if out == "-0.000000" else out
    return str(value)


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _parse(column: str, raw: str):
    if raw == "":
        return None
    if column in TEXT_COLUMNS:
        return raw
    try:
        return float(raw)
    except ValueError:
        raise TableError(f"column {column!r}: non-numeric value {raw!r}") from None


@dataclass
class IndicatorTable:
    """Rows keyed by property id; ``None`` marks a missing value."""

    columns: tuple[str, ...]
    rows: list[dict]

    def __post_init__(self):
        if "property_id" not in self.columns:
            raise TableError("indicator table needs a property_id column")
        seen = set()
        for row in self.rows:
            pid = row.get("property_id")
            if pid in seen:
                raise TableError(f"duplicate property_id {pid!r}")
            seen.add(pid)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        if name not in self.columns:
            raise TableError(f"missing column {name!r}")
        return [row.get(name) for row in self.rows]

    def require(self, names: Iterable[str]) -> None:
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise TableError(f"metrics table is missing required columns: {', '.join(missing)}")

    def write_csv(self, path: str | Path) -> None:
        write_rows(path, self.columns, ([row.get(c) for c in self.columns] for row in self.rows))

    @classmethod
    def read_csv(cls, path: str | Path) -> "IndicatorTable":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            columns = tuple(reader.fieldnames or ())
            if not columns:
                raise TableError(f"{path}: empty metrics table")
            rows = [{c: _parse(c, r.get(c) or "") for c in columns} for r in reader]
        return cls(columns, rows)


def paired(xs: Sequence[Optional[float]], ys: Sequence[Optional[float]]) -> tuple[list[float], list[float]]:
    """Pairwise-complete observations of two columns."""
    px, py = [], []
    for a, b in zip(xs, ys):
        if a is None or b is None:
            continue
        px.append(float(a))
        py.append(float(b))
    return px, py
