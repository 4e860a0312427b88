"""Synthetic dataset builders shared by the pipeline and acceptance tests."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from openness.analytics.records import PropertyRecord, write_metadata_csv
from openness.masks import DEFAULT_INTERIOR_VOCAB, INTERIOR, ClassMask, parse_ascii, save_indexed


def record(pid, year=1990, region="Chuo", rent=100000.0, area=30.0, interiors=("i.png",), plan="p.txt"):
    return PropertyRecord(pid, rent, area, year, region, None, None, plan, tuple(interiors))


def walled_plan(w: int, h: int, inner_wall_at: int | None = None, door: tuple[int, int] | None = None) -> str:
    rows = [["#"] * (w + 2)] + [["#"] + ["."] * w + ["#"] for _ in range(h)] + [["#"] * (w + 2)]
    if inner_wall_at is not None:
        for y in range(1, h + 1):
            rows[y][inner_wall_at] = "#"
        if door is not None:
            for y in range(door[0], door[1]):
                rows[y][inner_wall_at] = "D"
    rows[0][2] = "W"
    return "\n".join("".join(r) for r in rows) + "\n"


def interior_png(path: Path, counts: dict, width: int = 20) -> None:
    ids = {v: k for k, v in DEFAULT_INTERIOR_VOCAB.items()}
    labels = np.concatenate([np.full(n, ids[name], np.uint8) for name, n in counts.items()])
    save_indexed(ClassMask(labels.reshape(-1, width), DEFAULT_INTERIOR_VOCAB, INTERIOR), path)


def three_property_dataset(root: Path, broken: bool = False) -> Path:
    """Three small dwellings; with ``broken`` the second plan is solid wall.

    Returns the config path.
    """
    root.mkdir(parents=True, exist_ok=True)
    (root / "plans").mkdir(exist_ok=True)
    (root / "interiors").mkdir(exist_ok=True)
    plans = {
        "A01": walled_plan(40, 30),
        "B02": walled_plan(60, 40, inner_wall_at=30, door=(10, 18)),
        "C03": walled_plan(50, 50, inner_wall_at=20),
    }
    if broken:
        plans["B02"] = "\n".join("#" * 20 for _ in range(10)) + "\n"
    for pid, text in plans.items():
        (root / "plans" / f"{pid}.txt").write_text(text)
    # one plan as an indexed raster to exercise the PNG path
    save_indexed(parse_ascii(plans["C03"]), root / "plans" / "C03.png")
    interior_png(root / "interiors" / "A01_1.png", {"wall": 160, "ceiling": 80, "floor": 100, "window": 40, "other": 20})
    interior_png(root / "interiors" / "B02_1.png", {"void": 40, "wall": 200, "ceiling": 60, "floor": 80, "window": 20})
    interior_png(root / "interiors" / "B02_2.png", {"wall": 100, "ceiling": 100, "floor": 100, "window": 100})
    interior_png(root / "interiors" / "C03_1.png", {"wall": 120, "ceiling": 120, "floor": 120, "window": 20, "other": 20})
    recs = [
        record("A01", 1975, "Chiyoda", 95000.0, 12.0, ["A01_1.png"], "A01.txt"),
        record("B02", 1992, "Setagaya", 180000.0, 24.0, ["B02_1.png", "B02_2.png"], "B02.txt"),
        record("C03", 2008, "Chiyoda", 150000.0, 25.0, ["C03_1.png"], "C03.png"),
    ]
    write_metadata_csv(recs, root / "properties.csv")
    cfg = root / "run.cfg"
    cfg.write_text(
        "metadata = properties.csv\n"
        "floorplan_dir = plans\n"
        "interior_dir = interiors\n"
        "grid_interval_m = 0.20\n"
        "min_year = 1960\n"
        "out = out\n"
    )
    return cfg


def hump_table_rows(n_per_decade: int = 5):
    """30 rows over 1960-2019 whose indicator peaks in the 1990s."""
    rows = []
    peak = {1960: 1.0, 1970: 2.0, 1980: 3.0, 1990: 4.0, 2000: 3.5, 2010: 2.5}
    for decade, level in peak.items():
        for k in range(n_per_decade):
            rows.append({
                "property_id": f"P{decade}{k}",
                "construction_year": float(decade + 2 * k),
                "mean_visibility": level + 0.1 * (k - 2),
                "region_key": "Chuo" if k % 2 else "Nerima",
            })
    return rows
