"""Sequential dataset filtering with a per-stage survival report."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .records import PropertyRecord

log = logging.getLogger(__name__)

TOKYO_23_WARDS = (
    "Adachi", "Arakawa", "Bunkyo", "Chiyoda", "Chuo", "Edogawa", "Itabashi",
    "Katsushika", "Kita", "Koto", "Meguro", "Minato", "Nakano", "Nerima",
    "Ota", "Setagaya", "Shibuya", "Shinagawa", "Shinjuku", "Suginami",
    "Sumida", "Taito", "Toshima",
)

Predicate = Callable[[PropertyRecord], bool]


@dataclass(frozen=True)
class FunnelStage:
    name: str
    input_count: int
    surviving_count: int
    surviving_percent: float  # of the original count, 2 decimals

    def describe(self) -> str:
        return f"{self.name}: {self.input_count} -> {self.surviving_count} ({self.surviving_percent:.2f}%)"


@dataclass(frozen=True)
class FunnelReport:
    original_count: int
    stages: tuple[FunnelStage, ...]

    @property
    def final_count(self) -> int:
        return self.stages[-1].surviving_count if self.stages else self.original_count

    def describe(self) -> str:
        lines = [f"input: {self.original_count}"]
        lines += [s.describe() for s in self.stages]
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["stage", "predicate", "input_count", "surviving_count", "surviving_percent"])
            for i, s in enumerate(self.stages, start=1):
                w.writerow([i, s.name, s.input_count, s.surviving_count, f"{s.surviving_percent:.2f}"])


def _percent(n: int, total: int) -> float:
    return round(100.0 * n / total, 2) if total else 0.0


def run_funnel(
    records: Sequence[PropertyRecord],
    predicates: Iterable[tuple[str, Predicate]],
) -> tuple[list[PropertyRecord], FunnelReport]:
    """Apply named predicates in order, recording how many records survive each."""
    original = len(records)
    current = list(records)
    stages = []
    for name, pred in predicates:
        kept = [r for r in current if pred(r)]
        stages.append(FunnelStage(name, len(current), len(kept), _percent(len(kept), original)))
        current = kept
    if original and not current:
        log.warning("funnel removed every record")
    return current, FunnelReport(original, tuple(stages))


def default_predicates(
    min_year: int = 1960,
    regions: Sequence[str] | None = TOKYO_23_WARDS,
) -> list[tuple[str, Predicate]]:
    """Built after ``min_year``, inside the region allow-list, has an interior image.

    ``regions=None`` disables the region stage.
    """
    preds: list[tuple[str, Predicate]] = [
        (f"construction_year>={min_year}", lambda r: r.construction_year >= min_year)
    ]
    if regions is not None:
        allowed = frozenset(regions)
        preds.append(("region_in_allow_list", lambda r: r.region_key in allowed))
    preds.append(("has_interior_image", lambda r: len(r.interior_masks) > 0))
    return preds
