import json
import math

import numpy as np
import pytest

from fixtures import hump_table_rows, record
from openness.analytics.aggregate import correlation_matrix, decade_trends, regional_aggregate
from openness.analytics.funnel import default_predicates, run_funnel
from openness.analytics.records import RecordError, load_metadata, write_metadata_csv
from openness.analytics.table import IndicatorTable, TableError, fmt


def table(rows, columns=None):
    columns = columns or tuple(rows[0])
    return IndicatorTable(tuple(columns), rows)


# --- funnel ---------------------------------------------------------------

def test_funnel_counts_and_percent():
    recs = [record(f"r{i}", year=1950 if i < 4 else 1990) for i in range(10)]
    kept, rep = run_funnel(recs, [("year>=1960", lambda r: r.construction_year >= 1960)])
    assert len(kept) == 6
    s = rep.stages[0]
    assert (s.input_count, s.surviving_count, s.surviving_percent) == (10, 6, 60.0)
    assert s.describe() == "year>=1960: 10 -> 6 (60.00%)"


def test_funnel_empty_predicates_is_identity():
    recs = [record(f"r{i}") for i in range(3)]
    kept, rep = run_funnel(recs, [])
    assert kept == recs and rep.stages == () and rep.final_count == 3


def test_funnel_order_is_preserved():
    recs = [record(f"r{i}", year=1950 + 10 * (i % 5), region="Chuo" if i % 2 else "Yokohama") for i in range(20)]
    a = ("year", lambda r: r.construction_year >= 1970)
    b = ("region", lambda r: r.region_key == "Chuo")
    kept_ab, rep_ab = run_funnel(recs, [a, b])
    kept_ba, rep_ba = run_funnel(recs, [b, a])
    assert kept_ab == kept_ba
    assert [s.name for s in rep_ab.stages] == ["year", "region"]
    assert [s.surviving_count for s in rep_ab.stages] != [s.surviving_count for s in rep_ba.stages]


def test_funnel_two_decimal_percent_and_empty_warning(caplog):
    recs = [record(f"r{i}", year=1950) for i in range(7)]
    _, rep = run_funnel(recs, default_predicates())
    assert rep.final_count == 0
    assert "removed every record" in caplog.text
    recs = [record(f"r{i:04d}", interiors=("x.png",) if i < 40 else ()) for i in range(7700)]
    _, rep = run_funnel(recs, [("img", lambda r: bool(r.interior_masks))])
    assert rep.stages[0].describe() == "img: 7700 -> 40 (0.52%)"


def test_default_predicates():
    recs = [
        record("a", year=1960),
        record("b", year=1959),
        record("c", region="Yokohama"),
        record("d", interiors=()),
    ]
    kept, rep = run_funnel(recs, default_predicates(1960))
    assert [r.property_id for r in kept] == ["a"]
    assert [s.surviving_count for s in rep.stages] == [3, 2, 1]
    kept, _ = run_funnel(recs, default_predicates(1960, regions=None))
    assert [r.property_id for r in kept] == ["a", "c"]


# --- records ---------------------------------------------------------------

def test_metadata_csv_round_trip(tmp_path):
    recs = [record("x1", interiors=("a.png", "b.png")), record("x2", interiors=())]
    path = tmp_path / "m.csv"
    write_metadata_csv(recs, path)
    assert load_metadata(path) == recs


def test_metadata_jsonl(tmp_path):
    path = tmp_path / "m.jsonl"
    rows = [
        {"property_id": "j1", "rent": 1, "floor_area_m2": 20, "construction_year": 1999,
         "region_key": "Ota", "interior_masks": ["a.png"], "latitude": 35.6, "longitude": ""},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    (rec,) = load_metadata(path)
    assert rec.interior_masks == ("a.png",) and rec.latitude == 35.6 and rec.longitude is None


def test_metadata_validation(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("property_id,rent,floor_area_m2,construction_year\nA,1,1,1990\nA,1,1,1990\n")
    with pytest.raises(RecordError, match="duplicate"):
        load_metadata(path)
    path.write_text("property_id,rent,floor_area_m2,construction_year\nA,1,1,1850\n")
    with pytest.raises(RecordError, match="1850"):
        load_metadata(path)
    path.write_text("property_id,rent\nA,1\n")
    with pytest.raises(RecordError, match="missing columns"):
        load_metadata(path)
    path.write_text("property_id,rent,floor_area_m2,construction_year\nA,-3,1,1990\n")
    with pytest.raises(RecordError, match="rent"):
        load_metadata(path)


# --- table -----------------------------------------------------------------

def test_fmt_rules():
    assert [fmt(None), fmt(3), fmt(0.1), fmt(-1e-9), fmt(float("nan")), fmt("Ota")] == [
        "", "3", "0.100000", "0.000000", "", "Ota"]


def test_indicator_table_round_trip(tmp_path):
    t = table([{"property_id": "a", "x": 1.5, "region_key": "Ota"}, {"property_id": "b", "x": None, "region_key": None}])
    t.write_csv(tmp_path / "t.csv")
    back = IndicatorTable.read_csv(tmp_path / "t.csv")
    assert back.rows == t.rows
    with pytest.raises(TableError, match="duplicate"):
        table([{"property_id": "a"}, {"property_id": "a"}])
    with pytest.raises(TableError, match="missing required columns: nope"):
        t.require(["x", "nope"])


# --- trends ----------------------------------------------------------------

def test_trend_indicator_equal_to_year():
    rows = [{"property_id": str(y), "construction_year": float(y), "v": float(y)} for y in range(1960, 2020, 3)]
    tr = decade_trends(table(rows), "v")
    for b in tr.bins:
        ys = [y for y in range(1960, 2020, 3) if y // 10 * 10 == b.decade]
        assert b.mean == pytest.approx(sum(ys) / len(ys), abs=1e-12)
    assert tr.slope == pytest.approx(1.0, abs=1e-12)
    assert tr.stars == "***"


def test_trend_single_row_per_decade_is_flagged():
    rows = [{"property_id": str(d), "construction_year": float(d + 1), "v": float(d % 7)} for d in range(1960, 2020, 10)]
    tr = decade_trends(table(rows), "v")
    assert all(b.count == 1 and b.std is None and b.degenerate for b in tr.bins)


def test_trend_hump_peaks_in_1990s(tmp_path):
    tr = decade_trends(table(hump_table_rows()), "mean_visibility")
    means = {b.label: b.mean for b in tr.bins}
    assert max(means, key=means.get) == "1990s"
    assert tr.n_used == 30 and tr.n_missing == 0
    tr.write_csv(tmp_path / "t.csv")
    assert (tmp_path / "t_ols.csv").read_text().splitlines()[0].startswith("indicator,")


def test_trend_missing_values_and_empty_bins():
    rows = [
        {"property_id": "a", "construction_year": 1961.0, "v": 1.0},
        {"property_id": "b", "construction_year": 1985.0, "v": 2.0},
        {"property_id": "c", "construction_year": None, "v": 3.0},
        {"property_id": "d", "construction_year": 1990.0, "v": None},
    ]
    tr = decade_trends(table(rows), "v")
    assert tr.n_missing == 2 and tr.n_used == 2
    assert [b.count for b in tr.bins] == [1, 0, 1]
    assert tr.slope is None and tr.stars == ""
    with pytest.raises(TableError):
        decade_trends(table([{"property_id": "a", "construction_year": None, "v": None}]), "v")


# --- regions ---------------------------------------------------------------

def test_regions_examples():
    rows = [
        {"property_id": "1", "region_key": "Ota", "v": 1.0},
        {"property_id": "2", "region_key": "Ota", "v": 3.0},
        {"property_id": "3", "region_key": "Chuo", "v": 5.0},
        {"property_id": "4", "region_key": "Chuo", "v": None},
    ]
    res = regional_aggregate(table(rows), "v")
    assert [(r.region, r.count, r.mean) for r in res] == [("Chuo", 1, 5.0), ("Ota", 2, 2.0)]
    assert res[0].std is None and res[1].std == pytest.approx(math.sqrt(2))


def test_single_region_equals_global():
    rows = hump_table_rows()
    for r in rows:
        r["region_key"] = "Minato"
    (res,) = regional_aggregate(table(rows), "mean_visibility")
    v = np.array([r["mean_visibility"] for r in rows])
    assert res.count == 30
    assert res.mean == pytest.approx(v.mean(), abs=1e-12)
    assert res.std == pytest.approx(v.std(ddof=1), abs=1e-12)


def test_centre_region_has_higher_window_ratio():
    rows = []
    for i in range(12):
        centre = i % 3 == 0
        rows.append({"property_id": str(i), "region_key": "Chiyoda" if centre else "Nerima",
                     "window_ratio": (0.25 if centre else 0.10) + 0.01 * (i % 4)})
    res = {r.region: r.mean for r in regional_aggregate(table(rows), "window_ratio")}
    assert res["Chiyoda"] > res["Nerima"]


# --- correlation -----------------------------------------------------------

def test_correlation_hand_fixture():
    a = [1, 2, 3, 4, 5]
    b = [2, 1, 4, 3, 5]
    c = [5, 4, 3, 2, 1]
    rows = [{"property_id": str(i), "a": float(a[i]), "b": float(b[i]), "c": float(c[i])} for i in range(5)]
    cm = correlation_matrix(table(rows), ["a", "b", "c"])
    # by hand: Sab = 8, Saa = Sbb = Scc = 10, Sac = -10, Sbc = -8
    expected = np.array([[1, 0.8, -1], [0.8, 1, -0.8], [-1, -0.8, 1]])
    assert np.abs(cm.pearson_r - expected).max() <= 1e-12
    assert np.array_equal(cm.pearson_r, cm.pearson_r.T)
    assert np.array_equal(cm.spearman_r, cm.spearman_r.T)
    assert (cm.n == 5).all()


def test_correlation_identical_and_negated_columns():
    rng = np.random.default_rng(3)
    x = rng.normal(size=12)
    rows = [{"property_id": str(i), "x": float(v), "y": float(v), "z": float(-v)} for i, v in enumerate(x)]
    cm = correlation_matrix(table(rows), ["x", "y", "z"])
    assert cm.pearson_r[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert cm.pearson_r[0, 2] == pytest.approx(-1.0, abs=1e-15)


def test_correlation_pairwise_complete_and_small_n(tmp_path):
    rows = [
        {"property_id": "1", "x": 1.0, "y": 2.0, "z": None},
        {"property_id": "2", "x": 2.0, "y": 1.0, "z": 1.0},
        {"property_id": "3", "x": 3.0, "y": 4.0, "z": 2.0},
        {"property_id": "4", "x": 4.0, "y": 3.0, "z": None},
    ]
    cm = correlation_matrix(table(rows), ["x", "y", "z"])
    assert cm.n[0, 1] == 4 and cm.n[0, 2] == 2
    assert not math.isnan(cm.pearson_r[0, 1])
    assert math.isnan(cm.pearson_r[0, 2]) and math.isnan(cm.pearson_r[2, 2])
    cm.write(tmp_path)
    pairs = (tmp_path / "correlation_pairs.csv").read_text().splitlines()
    assert "pearson,x,z,2,,," in pairs
    matrix = (tmp_path / "correlation_pearson.csv").read_text().splitlines()
    assert matrix[0] == "column,x,y,z"
    assert matrix[3] == "z,,,"


def test_correlation_matrix_bounds(rng):
    rows = [{"property_id": str(i), **{c: float(rng.normal()) for c in "pqrs"}} for i in range(40)]
    cm = correlation_matrix(table(rows), list("pqrs"))
    assert (np.abs(cm.pearson_r) <= 1).all() and (np.diag(cm.pearson_r) == 1).all()
    assert np.array_equal(cm.pearson_p, cm.pearson_p.T)
