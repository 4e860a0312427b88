"""Run configuration: a small ``key = value`` text format.

Example::

    # paths are relative to this file
    metadata = properties.csv
    floorplan_dir = plans
    interior_dir = interiors
    grid_interval_m = 0.20
    min_year = 1960
    regions = Chiyoda, Chuo, Minato
    out = results
    workers = 4
    analytics = trends, regions, correlation

``regions = any`` switches the region stage off.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .analytics.funnel import TOKYO_23_WARDS
from .grid import DEFAULT_INTERVAL_M

OUT_ENV = "OPENNESS_OUT"

ANALYSES = ("trends", "regions", "correlation")
DEFAULT_INDICATORS = (
    "mean_visibility",
    "std_visibility",
    "mean_relative",
    "wall_ratio",
    "ceiling_ratio",
    "floor_ratio",
    "window_ratio",
)
DEFAULT_CORRELATION_COLUMNS = DEFAULT_INDICATORS + ("rent", "floor_area_m2", "construction_year")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    metadata: Path
    floorplan_dir: Optional[Path] = None
    interior_dir: Optional[Path] = None
    floorplan_classmap: Optional[Path] = None
    interior_classmap: Optional[Path] = None
    interior_collapse: Optional[Path] = None
    grid_interval_m: float = DEFAULT_INTERVAL_M
    min_year: int = 1960
    regions: Optional[tuple[str, ...]] = TOKYO_23_WARDS
    out: Path = Path("openness-out")
    workers: int = 1
    analytics: tuple[str, ...] = ANALYSES
    trend_indicators: tuple[str, ...] = DEFAULT_INDICATORS
    region_indicators: tuple[str, ...] = DEFAULT_INDICATORS
    correlation_columns: tuple[str, ...] = DEFAULT_CORRELATION_COLUMNS
    heatmaps: bool = True

    def __post_init__(self):
        if not self.grid_interval_m > 0:
            raise ConfigError(f"grid_interval_m must be > 0, got {self.grid_interval_m}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        unknown = set(self.analytics) - set(ANALYSES)
        if unknown:
            raise ConfigError(f"unknown analytics {sorted(unknown)}; choose from {list(ANALYSES)}")

    @property
    def base_dir(self) -> Path:
        return self.metadata.parent

    @property
    def plan_root(self) -> Path:
        return self.floorplan_dir or self.base_dir

    @property
    def interior_root(self) -> Path:
        return self.interior_dir or self.base_dir

    def relative(self, path: Optional[Path]) -> Optional[str]:
        if path is None:
            return None
        try:
            return Path(os.path.relpath(path, self.base_dir)).as_posix()
        except ValueError:
            return Path(path).as_posix()

    def fingerprint(self) -> str:
        """Hash of every setting that affects results.

        The output directory and worker count are excluded, as are absolute
        locations: two runs of the same inputs hash identically wherever
        they live.
        """
        payload = {}
        for f in dataclasses.fields(self):
            if f.name in ("out", "workers"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, Path):
                v = self.relative(v)
            elif isinstance(v, tuple):
                v = list(v)
            payload[f.name] = v
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _split(raw: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


_PATH_KEYS = {"metadata", "floorplan_dir", "interior_dir", "floorplan_classmap",
              "interior_classmap", "interior_collapse", "out"}
_LIST_KEYS = {"analytics", "trend_indicators", "region_indicators", "correlation_columns"}


def parse_config_text(text: str, base: Path) -> dict:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        try:
            if key in _PATH_KEYS:
                values[key] = (base / raw) if raw else None
            elif key in _LIST_KEYS:
                values[key] = _split(raw)
            elif key == "regions":
                values[key] = None if raw.lower() in ("any", "*", "") else _split(raw)
            elif key == "grid_interval_m":
                values[key] = float(raw)
            elif key in ("min_year", "workers"):
                values[key] = int(raw)
            elif key == "heatmaps":
                values[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from None
    return values


def load_config(path: Optional[str | Path], **overrides) -> RunConfig:
    """Read a config file and apply overrides (``None`` overrides are ignored).

    The ``OPENNESS_OUT`` environment variable replaces the configured output
    directory; an explicit ``out`` override wins over both.
    """
    values: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values = parse_config_text(text, path.parent)
    env_out = os.environ.get(OUT_ENV)
    if env_out:
        values["out"] = Path(env_out)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "metadata" not in values or values["metadata"] is None:
        raise ConfigError("config must name a metadata file")
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
