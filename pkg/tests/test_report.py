import json
import math

import numpy as np
import pytest

from hemtkit.errors import ValidationError
from hemtkit.measurement import DeviceGeometry, FamilyVariable, Kind, SweepCurve, SweepFamily
from hemtkit.report import (UNITS, ExtractionReport, PlotData, ReportEntry, cv_report,
                            fixture_report, output_report, round_sig, transfer_report)


def entry(name, value=1.0, unit="V", **conditions):
    return ReportEntry(name, value, unit, "m", conditions)


def test_units_are_checked():
    for unit in UNITS:
        entry("x", unit=unit)
    with pytest.raises(ValidationError):
        entry("x", unit="volts")


def test_duplicates_rejected_and_conditions_distinguish():
    rep = ExtractionReport("d", [entry("vth", vds=0.1)])
    rep.add(entry("vth", vds=0.2))
    with pytest.raises(ValidationError):
        rep.add(entry("vth", vds=0.1))
    assert rep.value("vth", vds=0.2) == 1.0
    with pytest.raises(KeyError):
        rep.get("vth")                       # ambiguous


def test_entries_sorted_by_name_then_conditions():
    rep = ExtractionReport("d", [entry("ss", vds=0.1), entry("gm_peak", unit="mS"),
                                 entry("mu_peak", unit="cm^2/(V·s)", vds=0.1),
                                 entry("mu_peak", unit="cm^2/(V·s)", vds=0.05)])
    doc = rep.to_dict()
    assert [(e["name"], e["conditions"].get("vds")) for e in doc["entries"]] == [
        ("gm_peak", None), ("mu_peak", 0.05), ("mu_peak", 0.1), ("ss", 0.1)]
    assert set(doc) == {"device_id", "entries"}
    assert set(doc["entries"][0]) == {"name", "value", "unit", "method", "conditions",
                                      "diagnostics"}


def test_nine_significant_digits_and_nan():
    assert round_sig(1.23456789012345) == 1.23456789
    assert round_sig(-9.87654321987e-13) == -9.87654322e-13
    assert round_sig(float("nan")) is None and round_sig(float("inf")) is None
    text = ExtractionReport("d", [entry("r", float("nan"), "dimensionless")]).to_json()
    assert json.loads(text)["entries"][0]["value"] is None
    assert "NaN" not in text


def test_stamp_is_opt_in():
    rep = ExtractionReport("d", [entry("v")])
    assert "generated_at" not in rep.to_dict()
    assert rep.to_dict("2024-01-01T00:00:00Z")["generated_at"] == "2024-01-01T00:00:00Z"


def test_plot_csv_blank_for_missing(tmp_path):
    p = PlotData("t", ("vgs_V", "mu_cm2_Vs"), [(0.0, float("nan")), (0.5, 2.0)]).write_csv(tmp_path)
    assert p.read_text().splitlines() == ["vgs_V,mu_cm2_Vs", "0.0,", "0.5,2.0"]


def test_failed_extraction_becomes_error_entry():
    x = np.linspace(0, 1, 50)
    fam = SweepFamily((SweepCurve(x, 1e-3 * (1 + x), 0.1, Kind.TRANSFER),),
                      FamilyVariable.FIXED_VDS)
    res = transfer_report(fam, DeviceGeometry(1, 1))
    ss = res.report.get("ss")
    assert ss.value is None and ss.error.startswith("NoSubthresholdRegion")
    assert res.report.value("gm_peak") == pytest.approx(1.0)      # mS, still extracted
    assert [e.name for e in res.report.errors] == ["ss"]
    assert json.loads(res.report.to_json())["entries"][-2]["error"].startswith("NoSub")


def test_non_positive_ioff_entry():
    x = np.linspace(-1, 0, 20)
    fam = SweepFamily((SweepCurve(x, np.linspace(0, 1e-3, 20), 0.1, Kind.TRANSFER),),
                      FamilyVariable.FIXED_VDS)
    r = transfer_report(fam, DeviceGeometry(1, 1)).report.get("on_off_ratio")
    assert r.value is None or math.isnan(r.value)
    assert r.error.startswith("NonPositiveIOff")


def test_pipelines_reject_wrong_kind(paper, paper_geometry):
    with pytest.raises(ValidationError):
        transfer_report(paper["output"], paper_geometry)
    with pytest.raises(ValidationError):
        output_report(paper["cv"], paper_geometry)
    with pytest.raises(ValidationError):
        cv_report(paper["transfer_linear"], paper_geometry)
    with pytest.raises(ValidationError):
        transfer_report(paper["transfer_linear"], paper_geometry, region="deep")


def test_fixture_report_contents(paper_dir):
    res = fixture_report(paper_dir)
    rep = res.report
    assert rep.device_id == "paper-fixture" and not rep.errors
    assert rep.value("ss") == pytest.approx(80, abs=3)
    assert rep.value("gm_peak") == pytest.approx(0.18, rel=0.05)
    assert rep.value("gm_peak_saturation") == pytest.approx(0.5, rel=0.05)
    assert rep.value("i_on_saturation") == pytest.approx(1.9, rel=1e-9)
    assert rep.value("ron") == pytest.approx(22.72, rel=0.02)
    assert rep.get("ron").diagnostics["ron_ohm"] == pytest.approx(22.72 / 2.0, rel=0.02)
    assert rep.value("mu_peak", vds=0.01) == pytest.approx(1200, rel=0.05)
    assert {e.method for e in rep.entries if e.name == "vth"} == {"lin-extrap-maxgm",
                                                                   "cv-max-slope"}
    names = sorted(p.name for p in res.plots)
    assert names == sorted(["gm_vs_vgs", "logid_vs_vgs", "gm_vs_vgs_saturation",
                            "logid_vs_vgs_saturation", "id_vs_vds", "q_vs_vgs", "mu_vs_vgs"])


def test_fixture_report_independent_of_jobs(paper_dir, tmp_path):
    a = fixture_report(paper_dir, jobs=1)
    b = fixture_report(paper_dir, jobs=2)
    assert a.report.to_json() == b.report.to_json()
    assert [p.name for p in a.plots] == [p.name for p in b.plots]
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    for p, q in zip(a.plots, b.plots):          # compare serialized tables (NaN-safe)
        assert p.write_csv(tmp_path / "a").read_bytes() == q.write_csv(tmp_path / "b").read_bytes()


def test_fixture_report_missing_directory(tmp_path):
    with pytest.raises(ValidationError):
        fixture_report(tmp_path / "absent")
    with pytest.raises(ValidationError):
        fixture_report(tmp_path)


def test_figures_render(tmp_path, paper_dir):
    pytest.importorskip("matplotlib")
    from hemtkit.plotting import render_all
    res = fixture_report(paper_dir)
    paths = render_all(res.plots[:2], tmp_path / "fig")
    assert all(p.read_bytes().startswith(b"\x89PNG") for p in paths)
