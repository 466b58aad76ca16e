"""Extraction reports and the pipelines that fill them.

Each pipeline turns sweep families into a :class:`ExtractionReport` plus a
set of plot-ready tables (:class:`PlotData`). Numerical failures of a single
extraction become entries carrying an error message; validation errors
propagate.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .extraction import (align_charge, extract_dibl, extract_gm, extract_mobility,
                         extract_on_off, extract_ron, extract_ss, extract_vsat,
                         extract_vth_cv, extract_vth_transfer, integrate_charge)
from .measurement import DeviceGeometry, Kind, SweepFamily
from .numerics import DEFAULT_SMOOTHING, SmoothingSpec

UNITS = frozenset({"V", "A", "mA", "S", "mS", "mV/decade", "mV/V", "ohm·um", "C/cm^2",
                   "cm^2/(V·s)", "dimensionless"})
SIGNIFICANT_DIGITS = 9


def round_sig(v):
    """Round to 9 significant digits; non-finite values become None."""
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.{SIGNIFICANT_DIGITS}g}")


@dataclass(frozen=True)
class ReportEntry:
    name: str
    value: float | None
    unit: str
    method: str
    conditions: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    error: str | None = None

    def __post_init__(self):
        if self.unit not in UNITS:
            raise ValidationError(f"unit {self.unit!r} is not in the report unit set")

    @property
    def key(self):
        return (self.name, tuple(sorted(self.conditions.items())))

    def to_dict(self):
        doc = {
            "name": self.name,
            "value": round_sig(self.value),
            "unit": self.unit,
            "method": self.method,
            "conditions": {k: round_sig(v) for k, v in sorted(self.conditions.items())},
            "diagnostics": {k: round_sig(v) for k, v in sorted(self.diagnostics.items())},
        }
        if self.error is not None:
            doc["error"] = self.error
        return doc


class ExtractionReport:
    """Ordered collection of extracted parameters for one device."""

    def __init__(self, device_id: str, entries=()):
        self.device_id = device_id
        self._entries = {}
        for e in entries:
            self.add(e)

    def add(self, entry: ReportEntry):
        if entry.key in self._entries:
            raise ValidationError(f"duplicate report entry {entry.name} {entry.conditions}")
        self._entries[entry.key] = entry
        return entry

    def merge(self, other: "ExtractionReport"):
        for e in other.entries:
            self.add(e)
        return self

    @property
    def entries(self):
        return sorted(self._entries.values(), key=lambda e: e.key)

    @property
    def errors(self):
        return [e for e in self.entries if e.error is not None]

    def get(self, name, **conditions) -> ReportEntry:
        matches = [e for e in self.entries if e.name == name
                   and all(e.conditions.get(k) == v for k, v in conditions.items())]
        if len(matches) != 1:
            raise KeyError(f"{len(matches)} entries match {name} {conditions}")
        return matches[0]

    def value(self, name, **conditions):
        return self.get(name, **conditions).value

    def to_dict(self, stamp=None):
        doc = {"device_id": self.device_id, "entries": [e.to_dict() for e in self.entries]}
        if stamp is not None:
            doc["generated_at"] = stamp
        return doc

    def to_json(self, stamp=None):
        return json.dumps(self.to_dict(stamp), indent=2, ensure_ascii=False) + "\n"

    def write(self, path, stamp=None):
        Path(path).write_text(self.to_json(stamp), encoding="utf-8")


@dataclass(frozen=True)
class PlotData:
    """A long-format table ready for any plotting tool."""

    name: str
    header: tuple
    rows: list

    def write_csv(self, directory) -> Path:
        path = Path(directory) / f"{self.name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header)
            for row in self.rows:
                w.writerow(["" if v is None or not math.isfinite(v) else repr(float(v))
                            for v in row])
        return path


@dataclass
class PipelineResult:
    report: ExtractionReport
    plots: list = field(default_factory=list)

    def merge(self, other: "PipelineResult"):
        self.report.merge(other.report)
        self.plots.extend(other.plots)
        return self


def _attempt(report, name, unit, method, conditions, fn):
    """Run ``fn`` -> (value, diagnostics); numerical failures become error entries."""
    try:
        value, diag = fn()
    except NumericalError as exc:
        report.add(ReportEntry(name, None, unit, method, conditions, {},
                               f"{type(exc).__name__}: {exc}"))
        return None
    report.add(ReportEntry(name, value, unit, method, conditions, diag))
    return value


# -- pipelines -------------------------------------------------------------------

def transfer_report(family: SweepFamily, geometry: DeviceGeometry, region="linear",
                    spec: SmoothingSpec = DEFAULT_SMOOTHING, device_id="device") -> PipelineResult:
    """Transfer-family extractions.

    Linear region: peak g_m over the family, SS on the highest-V_DS curve,
    V_th by linear extrapolation on the lowest-V_DS curve and I_ON/I_OFF on
    the highest-V_DS curve. Saturation region: peak g_m, I_ON/I_OFF and
    DIBL between the lowest- and highest-V_DS curves.
    """
    if family.kind is not Kind.TRANSFER:
        raise ValidationError(f"expected a transfer family, got {family.kind.value}")
    region = str(region).lower()
    if region not in ("linear", "saturation"):
        raise ValidationError(f"region must be linear or saturation, got {region!r}")
    rep = ExtractionReport(device_id)
    low, high = family.curves[0], family.curves[-1]

    gms = []

    def gm_peak():
        for c in family.curves:
            gms.append((c, extract_gm(c, spec)))
        c, best = max(gms, key=lambda cg: (cg[1].peak, -cg[0].fixed_bias))
        return best.peak * 1e3, {"vgs_at_peak": best.vgs_at_peak, "vds": c.fixed_bias}
    _attempt(rep, "gm_peak", "mS", "savgol-gradient-max", {}, gm_peak)

    oo = extract_on_off(high)
    cond = {"vds": high.fixed_bias}
    rep.add(ReportEntry("i_on", oo.i_on * 1e3, "mA", "endpoint", dict(cond, vgs=oo.vgs_on)))
    rep.add(ReportEntry("i_off", oo.i_off * 1e3, "mA", "endpoint", dict(cond, vgs=oo.vgs_off)))
    rep.add(ReportEntry("on_off_ratio", oo.ratio, "dimensionless", "endpoint-quotient", cond,
                        {"vgs_on": oo.vgs_on, "vgs_off": oo.vgs_off},
                        "NonPositiveIOff: I_OFF <= 0, ratio undefined"
                        if oo.non_positive_ioff else None))

    if region == "linear":
        def ss():
            r = extract_ss(high, spec)
            return r.ss, {"window_lo": r.window[0], "window_hi": r.window[1],
                          "vgs_at_min": r.vgs_at_min, "floor_A": r.floor,
                          "ceiling_A": r.ceiling}
        _attempt(rep, "ss", "mV/decade", "min-log-slope", {"vds": high.fixed_bias}, ss)

        def vth():
            r = extract_vth_transfer(low, spec)
            return r.vth, {"intercept": r.intercept, "drain_correction": r.drain_correction,
                           "vgs_at_gm_peak": r.vgs_at_gm_peak, "gm_peak_S": r.gm_peak}
        _attempt(rep, "vth", "V", "lin-extrap-maxgm", {"vds": low.fixed_bias}, vth)
    else:
        if len(family) >= 2:
            def dibl():
                r = extract_dibl(low, high, geometry, spec)
                return r.dibl, {"vth_low": r.vth_low, "vth_high": r.vth_high,
                                "i_target_A": r.i_target}
            _attempt(rep, "dibl", "mV/V", "constant-current",
                     {"vds_low": low.fixed_bias, "vds_high": high.fixed_bias}, dibl)

    plots = [_gm_plot(family, gms), _logid_plot(family)]
    return PipelineResult(rep, plots)


def dibl_report(family: SweepFamily, geometry: DeviceGeometry,
                spec: SmoothingSpec = DEFAULT_SMOOTHING, device_id="device",
                vds_low=None, vds_high=None) -> PipelineResult:
    """DIBL between two curves of a transfer family (default: first and last)."""
    if family.kind is not Kind.TRANSFER:
        raise ValidationError(f"expected a transfer family, got {family.kind.value}")
    if len(family) < 2:
        raise ValidationError("DIBL needs at least two transfer curves")
    low = family.curves[0] if vds_low is None else family.nearest(vds_low)
    high = family.curves[-1] if vds_high is None else family.nearest(vds_high)
    rep = ExtractionReport(device_id)

    def dibl():
        r = extract_dibl(low, high, geometry, spec)
        return r.dibl, {"vth_low": r.vth_low, "vth_high": r.vth_high, "i_target_A": r.i_target}
    _attempt(rep, "dibl", "mV/V", "constant-current",
             {"vds_low": low.fixed_bias, "vds_high": high.fixed_bias}, dibl)
    return PipelineResult(rep, [_logid_plot(family)])


def output_report(family: SweepFamily, geometry: DeviceGeometry,
                  spec: SmoothingSpec = DEFAULT_SMOOTHING, device_id="device") -> PipelineResult:
    """R_ON on the highest-V_GS output curve and its knee voltage."""
    if family.kind is not Kind.OUTPUT:
        raise ValidationError(f"expected an output family, got {family.kind.value}")
    rep = ExtractionReport(device_id)
    top = family.curves[-1]

    def ron():
        r = extract_ron(family, geometry)
        d = {"ron_ohm": r.ron_ohm, "intercept_A": r.intercept, "rms_residual_A": r.rms_residual,
             "n_points": float(r.n_points), "width_um": geometry.width}
        if r.non_ohmic:
            d["non_ohmic"] = 1.0
        return r.ron_ohm_um, d
    _attempt(rep, "ron", "ohm·um", "linfit-ohmic", {"vgs": top.fixed_bias}, ron)

    def knee():
        return extract_vsat(top, spec), {}
    _attempt(rep, "vsat", "V", "knee-10pct-slope", {"vgs": top.fixed_bias}, knee)
    rows = [(c.fixed_bias, x, y) for c in family.curves for x, y in zip(c.x, c.y)]
    return PipelineResult(rep, [PlotData("id_vs_vds", ("vgs_V", "vds_V", "id_A"), rows)])


def cv_report(family: SweepFamily, geometry: DeviceGeometry,
              spec: SmoothingSpec = DEFAULT_SMOOTHING, device_id="device") -> PipelineResult:
    """C-V threshold and the integrated channel charge."""
    if family.kind is not Kind.CV:
        raise ValidationError(f"expected a C-V family, got {family.kind.value}")
    rep = ExtractionReport(device_id)
    curve = family.curves[0]
    _attempt(rep, "vth", "V", "cv-max-slope", {}, lambda: (extract_vth_cv(curve, spec), {}))
    charge = integrate_charge(curve, geometry)
    rep.add(ReportEntry("q_max", float(charge.q[-1]), "C/cm^2", "cumtrapz",
                        {"vgs": float(charge.vgs[-1])}, {"area_cm2": geometry.area_cm2}))
    rows = list(zip(charge.vgs, charge.q))
    return PipelineResult(rep, [PlotData("q_vs_vgs", ("vgs_V", "q_C_cm2"), rows)])


def mobility_report(transfer: SweepFamily, cv: SweepFamily, geometry: DeviceGeometry,
                    device_id="device") -> PipelineResult:
    """Peak field-effect mobility for every transfer curve, charge from C-V."""
    if transfer.kind is not Kind.TRANSFER or cv.kind is not Kind.CV:
        raise ValidationError("mobility needs a transfer family and a C-V family")
    rep = ExtractionReport(device_id)
    charge = integrate_charge(cv.curves[0], geometry)
    rows = []
    for c in transfer.curves:
        c2, q2 = align_charge(c, charge)

        def mu(c2=c2, q2=q2):
            m = extract_mobility(c2, q2, geometry)
            rows.extend((m.vds, v, u) for v, u in zip(m.vgs, m.mu))
            return m.peak, {"vgs_at_peak": m.vgs_at_peak}
        _attempt(rep, "mu_peak", "cm^2/(V·s)", "transconductance-charge",
                 {"vds": c.fixed_bias}, mu)
    return PipelineResult(rep, [PlotData("mu_vs_vgs", ("vds_V", "vgs_V", "mu_cm2_Vs"), rows)])


def _gm_plot(family, gms):
    done = {id(c): g for c, g in gms}
    rows = []
    for c in family.curves:
        g = done.get(id(c))
        if g is None:
            try:
                g = extract_gm(c)
            except NumericalError:
                continue
        rows.extend((c.fixed_bias, v, s) for v, s in zip(g.vgs, g.gm))
    return PlotData("gm_vs_vgs", ("vds_V", "vgs_V", "gm_S"), rows)


def _logid_plot(family):
    rows = []
    for c in family.curves:
        with np.errstate(divide="ignore", invalid="ignore"):
            logi = np.log10(np.abs(c.y))
        rows.extend((c.fixed_bias, v, l) for v, l in zip(c.x, logi))
    return PlotData("logid_vs_vgs", ("vds_V", "vgs_V", "log10_id_A"), rows)


def band_plot(solution) -> PlotData:
    rows = list(zip(solution.z, solution.ec, solution.electron_density))
    return PlotData("ec_vs_z", ("z_nm", "ec_eV", "n_cm3"), rows)


# -- whole fixture ---------------------------------------------------------------

FIXTURE_FAMILIES = ("transfer_linear", "transfer_saturation", "output", "cv")


def _fixture_job(args):
    kind, directory, spec = args
    from .measurement import ingest_sweep_file, load_metadata
    d = Path(directory)

    def load(name):
        meta = load_metadata(d / f"{name}.json")
        return ingest_sweep_file(d / f"{name}.csv", meta), meta

    if kind == "mobility":
        t, meta = load("transfer_linear")
        cv, _ = load("cv")
        return mobility_report(t, cv, meta.geometry, meta.device_id)
    fam, meta = load(kind)
    if kind == "transfer_linear":
        return transfer_report(fam, meta.geometry, "linear", spec, meta.device_id)
    if kind == "transfer_saturation":
        res = transfer_report(fam, meta.geometry, "saturation", spec, meta.device_id)
        # saturation plots carry their own names so they do not clash
        res.plots = [PlotData(p.name + "_saturation", p.header, p.rows) for p in res.plots]
        return res
    if kind == "output":
        return output_report(fam, meta.geometry, spec, meta.device_id)
    return cv_report(fam, meta.geometry, spec, meta.device_id)


def fixture_report(directory, spec: SmoothingSpec = DEFAULT_SMOOTHING, jobs=1) -> PipelineResult:
    """Full report for a fixture directory holding ``<family>.csv`` and
    ``<family>.json`` for each of the four standard families.

    Families present in the directory are processed independently (in
    worker processes when ``jobs > 1``) and merged in a fixed order, so the
    result does not depend on ``jobs``. The saturation family's g_m and
    ON/OFF entries are renamed with a ``_saturation`` suffix.
    """
    d = Path(directory)
    if not d.is_dir():
        raise ValidationError(f"fixture directory not found: {d}")
    kinds = [k for k in FIXTURE_FAMILIES if (d / f"{k}.csv").exists()]
    if not kinds:
        raise ValidationError(f"{d} holds none of {', '.join(FIXTURE_FAMILIES)}")
    if "transfer_linear" in kinds and "cv" in kinds:
        kinds.append("mobility")
    tasks = [(k, str(d), spec) for k in kinds]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_fixture_job, tasks))
    else:
        parts = [_fixture_job(t) for t in tasks]
    device_id = parts[0].report.device_id
    out = PipelineResult(ExtractionReport(device_id))
    for kind, part in zip(kinds, parts):
        if kind == "transfer_saturation":
            part = PipelineResult(ExtractionReport(device_id, [_suffix(e, "_saturation")
                                                               for e in part.report.entries]),
                                  part.plots)
        out.merge(part)
    return out


def _suffix(entry: ReportEntry, suffix):
    if entry.name in ("gm_peak", "i_on", "i_off", "on_off_ratio"):
        return ReportEntry(entry.name + suffix, entry.value, entry.unit, entry.method,
                           entry.conditions, entry.diagnostics, entry.error)
    return entry
