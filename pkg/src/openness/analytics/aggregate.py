"""Decade trends, regional aggregation and correlation matrices over an indicator table."""
from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .stats import StatsError, ols_trend, pearson, spearman, stars
from .table import IndicatorTable, TableError, paired, write_rows

MIN_PAIRS = 3


def _mean_std(values: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else None
    return mean, std


@dataclass(frozen=True)
class DecadeBin:
    decade: int
    count: int
    mean: Optional[float]
    std: Optional[float]  # sample std; None when count < 2

    @property
    def label(self) -> str:
        return f"{self.decade}s"

    @property
    def degenerate(self) -> bool:
        return self.count < 2


@dataclass(frozen=True)
class TrendTable:
    indicator: str
    bins: tuple[DecadeBin, ...]
    n_used: int
    n_missing: int
    slope: Optional[float]
    intercept: Optional[float]
    p_value: Optional[float]

    @property
    def stars(self) -> str:
        return "" if self.p_value is None else stars(self.p_value)

    def write_csv(self, path: str | Path) -> None:
        rows = [[b.label, b.count, b.mean, b.std, int(b.degenerate)] for b in self.bins]
        write_rows(path, ["decade", "count", "mean", "std", "degenerate"], rows)
        summary = Path(path).with_name(Path(path).stem + "_ols.csv")
        write_rows(
            summary,
            ["indicator", "n_used", "n_missing", "slope", "intercept", "p_value", "stars"],
            [[self.indicator, self.n_used, self.n_missing, self.slope, self.intercept, self.p_value, self.stars]],
        )


def decade_trends(table: IndicatorTable, indicator: str) -> TrendTable:
    """Per-decade count/mean/sample-std of ``indicator`` plus an OLS slope on year.

    Rows missing the indicator or the year are left out and counted. The
    regression fields are ``None`` when fewer than three rows remain or all
    years coincide.
    """
    years_col = table.column("construction_year")
    vals_col = table.column(indicator)
    years, vals = paired(years_col, vals_col)
    n_missing = len(table) - len(years)
    if not years:
        raise TableError(f"no rows with both {indicator!r} and construction_year")
    by_decade = defaultdict(list)
    for y, v in zip(years, vals):
        by_decade[int(y) // 10 * 10].append(v)
    lo, hi = min(by_decade), max(by_decade)
    bins = []
    for d in range(lo, hi + 10, 10):
        mean, std = _mean_std(by_decade.get(d, []))
        bins.append(DecadeBin(d, len(by_decade.get(d, [])), mean, std))
    slope = intercept = p = None
    if len(years) >= 3:
        try:
            slope, intercept, p = ols_trend(years, vals)
        except StatsError:
            pass
    return TrendTable(indicator, tuple(bins), len(years), n_missing, slope, intercept, p)


@dataclass(frozen=True)
class RegionStat:
    region: str
    count: int
    mean: float
    std: Optional[float]


def regional_aggregate(table: IndicatorTable, indicator: str) -> list[RegionStat]:
    """Group ``indicator`` by region, lexicographic region order; missing values skipped."""
    groups = defaultdict(list)
    for region, v in zip(table.column("region_key"), table.column(indicator)):
        if region is None or v is None:
            continue
        groups[region].append(float(v))
    out = []
    for region in sorted(groups):
        mean, std = _mean_std(groups[region])
        out.append(RegionStat(region, len(groups[region]), mean, std))
    return out


def write_regions(stats_: Sequence[RegionStat], path: str | Path) -> None:
    write_rows(path, ["region", "count", "mean", "std"], ([s.region, s.count, s.mean, s.std] for s in stats_))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson and Spearman matrices; NaN marks cells without enough data."""

    columns: tuple[str, ...]
    pearson_r: np.ndarray
    pearson_p: np.ndarray
    spearman_r: np.ndarray
    spearman_p: np.ndarray
    n: np.ndarray

    def pairs(self):
        k = len(self.columns)
        for i in range(k):
            for j in range(i + 1, k):
                yield i, j

    def write(self, outdir: str | Path, prefix: str = "correlation") -> None:
        outdir = Path(outdir)
        for method, r in (("pearson", self.pearson_r), ("spearman", self.spearman_r)):
            write_rows(
                outdir / f"{prefix}_{method}.csv",
                ["column", *self.columns],
                ([c, *(float(v) for v in r[i])] for i, c in enumerate(self.columns)),
            )
        rows = []
        for method, r, p in (
            ("pearson", self.pearson_r, self.pearson_p),
            ("spearman", self.spearman_r, self.spearman_p),
        ):
            for i, j in self.pairs():
                pv = float(p[i, j])
                rows.append([
                    method, self.columns[i], self.columns[j], int(self.n[i, j]),
                    float(r[i, j]), pv, "" if math.isnan(pv) else stars(pv),
                ])
        write_rows(outdir / f"{prefix}_pairs.csv", ["method", "x", "y", "n", "r", "p_value", "stars"], rows)


def correlation_matrix(table: IndicatorTable, columns: Sequence[str]) -> CorrelationMatrix:
    """Pairwise-complete Pearson and Spearman correlations.

    Each pair is computed once and mirrored. Pairs with fewer than three
    complete rows, or a constant side, are NaN rather than zero.
    """
    table.require(columns)
    data = [table.column(c) for c in columns]
    k = len(columns)
    mats = {name: np.full((k, k), np.nan) for name in ("pr", "pp", "sr", "sp")}
    n = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        xs, _ = paired(data[i], data[i])
        n[i, i] = len(xs)
        if len(xs) >= MIN_PAIRS and len(set(xs)) > 1:
            for name, v in (("pr", 1.0), ("pp", 0.0), ("sr", 1.0), ("sp", 0.0)):
                mats[name][i, i] = v
        for j in range(i + 1, k):
            xs, ys = paired(data[i], data[j])
            n[i, j] = n[j, i] = len(xs)
            if len(xs) < MIN_PAIRS:
                continue
            try:
                pr = pearson(xs, ys)
                sr = spearman(xs, ys)
            except StatsError:
                continue
            for name, v in (("pr", pr.r), ("pp", pr.p_value), ("sr", sr.r), ("sp", sr.p_value)):
                mats[name][i, j] = mats[name][j, i] = v
    return CorrelationMatrix(tuple(columns), mats["pr"], mats["pp"], mats["sr"], mats["sp"], n)
