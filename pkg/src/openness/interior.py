"""Element pixel ratios of interior photographs (the 3D openness indicators)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .masks import INTERIOR, ClassMask, MaskError, validate_vocabulary

BUCKETS = ("wall", "ceiling", "floor", "window", "other")


@dataclass(frozen=True)
class ElementRatios:
    wall: float
    ceiling: float
    floor: float
    window: float
    other: float
    denominator: int

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.wall, self.ceiling, self.floor, self.window, self.other)


def element_ratios(mask: ClassMask) -> ElementRatios:
    """Fraction of visible (non-void) pixels in each element bucket."""
    if mask.flavor != INTERIOR:
        raise MaskError(f"element_ratios needs an {INTERIOR} mask, got {mask.flavor}")
    hist = np.bincount(mask.labels.ravel(), minlength=256)
    per_bucket = dict.fromkeys(BUCKETS + ("void",), 0)
    for k, name in mask.vocabulary.items():
        per_bucket[name] += int(hist[k])
    visible = sum(per_bucket[b] for b in BUCKETS)
    if visible == 0:
        raise MaskError("interior mask has no visible (non-void) pixels")
    return ElementRatios(*(per_bucket[b] / visible for b in BUCKETS), denominator=visible)


def aggregate_property_ratios(ratios: Sequence[ElementRatios]) -> ElementRatios:
    """Unweighted mean over a property's images, renormalised to sum to one."""
    if not ratios:
        raise ValueError("no interior ratios to aggregate")
    if len(ratios) == 1:
        return ratios[0]
    arr = np.array([r.as_tuple() for r in ratios], dtype=np.float64)
    mean = arr.mean(axis=0)
    mean = mean / mean.sum()
    return ElementRatios(*(float(v) for v in mean), denominator=sum(r.denominator for r in ratios))


def load_collapse_table(path: Optional[str | Path] = None, default: str = "other") -> dict[int, str]:
    """Build a full 8-bit interior vocabulary from a class-collapse table.

    The table maps source class ids (e.g. ADE20K indices) to one of the five
    buckets or ``void``; ids it does not mention fall into ``default``.
    Without ``path`` the packaged ADE20K table is used.
    """
    if path is None:
        raw = json.loads(resources.files("openness.data").joinpath("ade20k_collapse.json").read_text())
    else:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    vocab = {i: default for i in range(256)}
    for k, v in raw.items():
        if v not in BUCKETS and v != "void":
            raise MaskError(f"collapse table maps {k} to unknown bucket {v!r}")
        vocab[int(k)] = v
    return validate_vocabulary(vocab, INTERIOR)


def ratios_from_counts(counts: Mapping[str, int]) -> ElementRatios:
    """Convenience for tests and fixtures: ratios from bucket pixel counts."""
    visible = sum(int(counts.get(b, 0)) for b in BUCKETS)
    if visible == 0:
        raise MaskError("no visible pixels")
    return ElementRatios(*(int(counts.get(b, 0)) / visible for b in BUCKETS), denominator=visible)
