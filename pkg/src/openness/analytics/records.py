"""Property metadata records and their CSV / JSON-lines loaders."""
from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

MIN_YEAR = 1900

RECORD_FIELDS = (
    "property_id",
    "rent",
    "floor_area_m2",
    "construction_year",
    "region_key",
    "latitude",
    "longitude",
    "floorplan_mask",
    "interior_masks",
)


class RecordError(ValueError):
    pass


@dataclass(frozen=True)
class PropertyRecord:
    property_id: str
    rent: float
    floor_area_m2: float
    construction_year: int
    region_key: str
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    floorplan_mask: str = ""
    interior_masks: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.property_id:
            raise RecordError("property_id is required")
        if not self.rent > 0:
            raise RecordError(f"{self.property_id}: rent must be positive")
        if not self.floor_area_m2 > 0:
            raise RecordError(f"{self.property_id}: floor area must be positive")
        this_year = datetime.date.today().year
        if not MIN_YEAR <= self.construction_year <= this_year:
            raise RecordError(
                f"{self.property_id}: construction year {self.construction_year} "
                f"outside [{MIN_YEAR}, {this_year}]"
            )


def _opt_float(raw) -> Optional[float]:
    if raw is None or raw == "":
        return None
    return float(raw)


def _split_masks(raw) -> tuple[str, ...]:
    if raw is None or raw == "":
        return ()
    if isinstance(raw, (list, tuple)):
        return tuple(str(v) for v in raw if str(v))
    return tuple(p.strip() for p in str(raw).split(";") if p.strip())


def record_from_mapping(row: dict, where: str = "") -> PropertyRecord:
    try:
        return PropertyRecord(
            property_id=str(row.get("property_id") or "").strip(),
            rent=float(row["rent"]),
            floor_area_m2=float(row["floor_area_m2"]),
            construction_year=int(float(row["construction_year"])),
            region_key=str(row.get("region_key") or "").strip(),
            latitude=_opt_float(row.get("latitude")),
            longitude=_opt_float(row.get("longitude")),
            floorplan_mask=str(row.get("floorplan_mask") or "").strip(),
            interior_masks=_split_masks(row.get("interior_masks")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RecordError):
            raise RecordError(f"{where}{exc}") from None
        raise RecordError(f"{where}bad record: {exc!r}") from None


def load_metadata(path: str | Path) -> list[PropertyRecord]:
    """Read property metadata from CSV (header row) or JSON lines (``.jsonl``).

    In CSV the interior mask list is ``;``-separated. Empty fields are
    missing values. Duplicate ids are rejected.
    """
    path = Path(path)
    rows: Iterable[tuple[str, dict]]
    if path.suffix.lower() in (".jsonl", ".ndjson"):
        with open(path, encoding="utf-8") as fh:
            rows = [
                (f"{path.name}:{i}: ", json.loads(line))
                for i, line in enumerate(fh, start=1)
                if line.strip()
            ]
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"property_id", "rent", "floor_area_m2", "construction_year"} - set(
                reader.fieldnames or ()
            )
            if missing:
                raise RecordError(f"{path.name}: missing columns {sorted(missing)}")
            rows = [(f"{path.name}:{i}: ", r) for i, r in enumerate(reader, start=2)]
    records = []
    seen = set()
    for where, row in rows:
        rec = record_from_mapping(row, where)
        if rec.property_id in seen:
            raise RecordError(f"{where}duplicate property_id {rec.property_id!r}")
        seen.add(rec.property_id)
        records.append(rec)
    return records


def write_metadata_csv(records: Iterable[PropertyRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([
                r.property_id,
                repr(r.rent),
                repr(r.floor_area_m2),
                r.construction_year,
                r.region_key,
                "" if r.latitude is None else repr(r.latitude),
                "" if r.longitude is None else repr(r.longitude),
                r.floorplan_mask,
                ";".join(r.interior_masks),
            ])
