"""Batch orchestration: metadata -> funnel -> per-property indicators -> outputs."""
from __future__ import annotations

import hashlib
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .analytics.aggregate import correlation_matrix, decade_trends, regional_aggregate, write_regions
from .analytics.funnel import FunnelReport, default_predicates, run_funnel
from .analytics.records import PropertyRecord, load_metadata
from .analytics.table import METRIC_COLUMNS, IndicatorTable, TableError, write_rows
from .config import RunConfig
from .grid import build_grid, calibrate
from .interior import aggregate_property_ratios, element_ratios, load_collapse_table
from .masks import (
    DEFAULT_FLOORPLAN_VOCAB,
    DEFAULT_INTERIOR_VOCAB,
    FLOORPLAN,
    INTERIOR,
    binarize_floorplan,
    load_vocabulary,
    parse_class_mask,
)
from .vga import render_heatmap, save_heatmap, summarize, visibility_counts

log = logging.getLogger(__name__)

ERROR_COLUMNS = ("property_id", "stage", "message")


class PropertyFailure(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


@dataclass(frozen=True)
class PropertyResult:
    row: dict
    heatmap: np.ndarray


@dataclass
class ComputeResult:
    metrics: IndicatorTable
    errors: list[tuple[str, str, str]]
    funnel: FunnelReport
    manifest: dict


def safe_name(property_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", property_id)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class _Context:
    def __init__(self, config: RunConfig):
        self.config = config
        self.plan_vocab = (
            load_vocabulary(config.floorplan_classmap, FLOORPLAN)
            if config.floorplan_classmap else dict(DEFAULT_FLOORPLAN_VOCAB)
        )
        if config.interior_collapse:
            self.interior_vocab = load_collapse_table(config.interior_collapse)
        elif config.interior_classmap:
            self.interior_vocab = load_vocabulary(config.interior_classmap, INTERIOR)
        else:
            self.interior_vocab = dict(DEFAULT_INTERIOR_VOCAB)

    def plan_path(self, rec: PropertyRecord) -> Path:
        return self.config.plan_root / rec.floorplan_mask

    def interior_paths(self, rec: PropertyRecord) -> list[Path]:
        return [self.config.interior_root / m for m in rec.interior_masks]


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, OSError) as exc:
        raise PropertyFailure(name, str(exc)) from exc


def compute_property(rec: PropertyRecord, ctx: _Context, workers: int = 1) -> PropertyResult:
    """Full 2D + 3D indicator computation for one property."""
    cfg = ctx.config
    if not rec.floorplan_mask:
        raise PropertyFailure("ingest", "no floor plan mask listed")
    plan = _stage("ingest", parse_class_mask, ctx.plan_path(rec), ctx.plan_vocab, FLOORPLAN)
    occ = _stage("binarize", binarize_floorplan, plan)
    cal = _stage("calibrate", calibrate, occ, rec.floor_area_m2)
    grid = _stage("grid", build_grid, occ, cal, cfg.grid_interval_m)
    field = _stage("visibility", visibility_counts, grid, workers)
    summary = _stage("summarize", summarize, field)

    ratios = None
    if rec.interior_masks:
        per_image = []
        for p in ctx.interior_paths(rec):
            mask = _stage("interior", parse_class_mask, p, ctx.interior_vocab, INTERIOR)
            per_image.append(_stage("interior", element_ratios, mask))
        ratios = aggregate_property_ratios(per_image)

    row = {
        "property_id": rec.property_id,
        "node_count": summary.node_count,
        "mean_visibility": summary.mean_visibility,
        "std_visibility": summary.std_visibility,
        "min_visibility": summary.min_visibility,
        "median_visibility": summary.median_visibility,
        "max_visibility": summary.max_visibility,
        "mean_relative": summary.mean_relative,
        "wall_ratio": ratios.wall if ratios else None,
        "ceiling_ratio": ratios.ceiling if ratios else None,
        "floor_ratio": ratios.floor if ratios else None,
        "window_ratio": ratios.window if ratios else None,
        "other_ratio": ratios.other if ratios else None,
        "interior_image_count": len(rec.interior_masks),
        "meters_per_pixel": cal.meters_per_pixel,
        "rent": rec.rent,
        "floor_area_m2": rec.floor_area_m2,
        "construction_year": rec.construction_year,
        "region_key": rec.region_key or None,
    }
    return PropertyResult(row, render_heatmap(field))


def _input_hashes(config: RunConfig, ctx: _Context, records: list[PropertyRecord]) -> dict:
    files = {config.metadata}
    for p in (config.floorplan_classmap, config.interior_classmap, config.interior_collapse):
        if p:
            files.add(p)
    for rec in records:
        if rec.floorplan_mask:
            files.add(ctx.plan_path(rec))
        files.update(ctx.interior_paths(rec))
    out = {}
    for f in files:
        key = config.relative(f)
        out[key] = _sha256(f) if f.is_file() else None
    return dict(sorted(out.items()))


def run_compute(config: RunConfig) -> ComputeResult:
    """Compute indicators for every property surviving the funnel and write outputs.

    Writes ``metrics.csv``, ``errors.csv``, ``funnel.csv``, ``manifest.json``
    and ``heatmaps/<id>.png`` under ``config.out``. A property that fails at
    any stage is logged to ``errors.csv`` and skipped. Output order is by
    property id, so results do not depend on the worker count.
    """
    records = load_metadata(config.metadata)
    ctx = _Context(config)
    survivors, funnel = run_funnel(records, default_predicates(config.min_year, config.regions))

    def work(rec):
        try:
            return rec.property_id, compute_property(rec, ctx), None
        except PropertyFailure as exc:
            return rec.property_id, None, (exc.stage, exc.message)

    ordered = sorted(survivors, key=lambda r: r.property_id)
    if config.workers > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, ordered))
    else:
        results = [work(r) for r in ordered]

    out = Path(config.out)
    heat_dir = out / "heatmaps"
    heat_dir.mkdir(parents=True, exist_ok=True)
    rows, errors = [], []
    for pid, res, err in results:
        if err is not None:
            errors.append((pid, *err))
            continue
        rows.append(res.row)
        if config.heatmaps:
            save_heatmap(res.heatmap, heat_dir / f"{safe_name(pid)}.png")

    metrics = IndicatorTable(METRIC_COLUMNS, rows)
    metrics.write_csv(out / "metrics.csv")
    write_rows(out / "errors.csv", ERROR_COLUMNS, errors)
    funnel.write_csv(out / "funnel.csv")

    manifest = {
        "config_sha256": config.fingerprint(),
        "inputs_sha256": _input_hashes(config, ctx, survivors),
        "records_total": len(records),
        "records_after_funnel": len(survivors),
        "properties_computed": len(rows),
        "properties_failed": len(errors),
        "funnel": [
            {"predicate": s.name, "input": s.input_count, "surviving": s.surviving_count,
             "percent": f"{s.surviving_percent:.2f}"}
            for s in funnel.stages
        ],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if errors:
        log.warning("%d of %d properties failed; see %s", len(errors), len(survivors), out / "errors.csv")
    return ComputeResult(metrics, errors, funnel, manifest)


def run_analytics(config: RunConfig, metrics_path: Optional[str | Path] = None) -> list[Path]:
    """Trend, regional and correlation tables from a metrics table.

    Returns the written paths. Raises ``TableError`` naming any required
    column absent from the table, or when the table has no rows.
    """
    metrics_path = Path(metrics_path) if metrics_path else Path(config.out) / "metrics.csv"
    table = IndicatorTable.read_csv(metrics_path)
    needed = set()
    if "trends" in config.analytics:
        needed |= {"construction_year", *config.trend_indicators}
    if "regions" in config.analytics:
        needed |= {"region_key", *config.region_indicators}
    if "correlation" in config.analytics:
        needed |= set(config.correlation_columns)
    table.require(sorted(needed))
    if len(table) == 0:
        raise TableError(f"{metrics_path}: metrics table has no rows")

    outdir = Path(config.out) / "analytics"
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if "trends" in config.analytics:
        for ind in config.trend_indicators:
            path = outdir / f"trends_{ind}.csv"
            try:
                decade_trends(table, ind).write_csv(path)
            except TableError as exc:
                log.warning("trend for %s skipped: %s", ind, exc)
                continue
            written += [path, path.with_name(path.stem + "_ols.csv")]
    if "regions" in config.analytics:
        for ind in config.region_indicators:
            path = outdir / f"regions_{ind}.csv"
            write_regions(regional_aggregate(table, ind), path)
            written.append(path)
    if "correlation" in config.analytics:
        cm = correlation_matrix(table, config.correlation_columns)
        cm.write(outdir)
        written += [outdir / f"correlation_{m}.csv" for m in ("pearson", "spearman", "pairs")]
    return written


def run_render(config: RunConfig, property_id: str, path: Optional[str | Path] = None) -> Path:
    """Heatmap for a single property, bypassing the funnel."""
    records = {r.property_id: r for r in load_metadata(config.metadata)}
    if property_id not in records:
        raise KeyError(f"unknown property_id {property_id!r}")
    res = compute_property(records[property_id], _Context(config), workers=config.workers)
    if path is None:
        path = Path(config.out) / "heatmaps" / f"{safe_name(property_id)}.png"
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_heatmap(res.heatmap, path)
    return path
