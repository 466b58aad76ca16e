"""Command-line front end.

Every command is a thin shell over the library: it loads inputs, calls the
same functions a script would, and writes their output unchanged. Exit codes:
0 success, 1 invalid input, 2 numerical failure (the report is still written
with per-entry error markers).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import enum
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import NumericalError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class Command(enum.Enum):
    EXTRACT_TRANSFER = "extract-transfer"
    EXTRACT_OUTPUT = "extract-output"
    EXTRACT_CV = "extract-cv"
    MOBILITY = "mobility"
    DIBL = "dibl"
    BANDSIM = "bandsim"
    SYNTH = "synth"
    REPORT = "report"


class Region(enum.Enum):
    LINEAR = "linear"
    SATURATION = "saturation"


@dataclass
class RunConfig:
    command: Command
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    region: Region = Region.LINEAR
    window: int | None = None
    poly_order: int | None = None
    emit_plots: bool = False
    figures: bool = False
    stamp: bool = False
    jobs: int = 1
    options: dict = field(default_factory=dict)

    def smoothing(self):
        from .numerics import DEFAULT_SMOOTHING, SmoothingSpec
        if self.window is None and self.poly_order is None:
            return DEFAULT_SMOOTHING
        return SmoothingSpec(self.window or DEFAULT_SMOOTHING.window,
                             DEFAULT_SMOOTHING.poly_order if self.poly_order is None
                             else self.poly_order)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; here that status means a
    numerical failure, so usage errors exit with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="hemtkit", description="Transistor parameter extraction and "
                "heterostructure band solving.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, meta=True):
        sp.add_argument("--in", dest="input", required=True, help="sweep CSV")
        if meta:
            sp.add_argument("--meta", required=True, help="metadata JSON sidecar")
        sp.add_argument("--out", required=True, help="report JSON")
        smoothing(sp)
        plots(sp)
        sp.add_argument("--stamp", action="store_true", help="add a generation timestamp")

    def smoothing(sp):
        sp.add_argument("--window", type=int, help="Savitzky-Golay window (odd)")
        sp.add_argument("--poly-order", type=int, help="Savitzky-Golay polynomial order")

    def plots(sp):
        sp.add_argument("--plots", metavar="DIR", help="write plot-data CSVs to DIR")
        sp.add_argument("--figures", action="store_true",
                        help="also render PNG figures into the --plots directory")

    t = sub.add_parser("extract-transfer", help="g_m, SS, V_th, ON/OFF (and DIBL in saturation)")
    common(t)
    t.add_argument("--region", choices=[r.value for r in Region], default="linear")
    common(sub.add_parser("extract-output", help="R_ON and knee voltage"))
    common(sub.add_parser("extract-cv", help="C-V threshold and channel charge"))

    m = sub.add_parser("mobility", help="field-effect mobility from transfer + C-V")
    common(m)
    m.add_argument("--cv", required=True, help="C-V sweep CSV")
    m.add_argument("--cv-meta", required=True, help="C-V metadata JSON")

    d = sub.add_parser("dibl", help="drain-induced barrier lowering")
    common(d)
    d.add_argument("--vds-low", type=float, help="low drain bias (default: lowest curve)")
    d.add_argument("--vds-high", type=float, help="high drain bias (default: highest curve)")

    b = sub.add_parser("bandsim", help="equilibrium band diagram of a layer stack")
    b.add_argument("--stack", required=True, help="stack JSON")
    b.add_argument("--out", required=True, help="profile CSV (or sweep CSV with --sweep)")
    b.add_argument("--summary", help="summary JSON (default: <out stem>.summary.json)")
    b.add_argument("--quantum", action="store_true", help="self-consistent Schrödinger-Poisson")
    b.add_argument("--materials", help="material table JSON (overrides HEMTKIT_MATERIALS)")
    b.add_argument("--sweep", choices=["thickness", "x", "doping"],
                   help="sweep the barrier layer instead of a single solve")
    b.add_argument("--values", type=float, nargs="+", help="sweep values")
    b.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    plots(b)

    s = sub.add_parser("synth", help="generate a synthetic fixture")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--paper", action="store_true",
                   help="the calibrated fixture reproducing the reported device figures")
    s.add_argument("--params", help="compact-model parameter JSON (default parameters if absent)")
    s.add_argument("--noise", type=float, help="relative multiplicative noise amplitude")
    s.add_argument("--seed", type=int, help="noise seed")

    r = sub.add_parser("report", help="full report for a fixture directory")
    r.add_argument("--in", dest="input", required=True, help="fixture directory")
    r.add_argument("--out", required=True, help="report JSON")
    r.add_argument("--jobs", type=int, default=1, help="parallel family extractions")
    r.add_argument("--stamp", action="store_true")
    smoothing(r)
    plots(r)
    return p


def config_from_args(ns) -> RunConfig:
    cmd = Command(ns.command)
    g = lambda name: getattr(ns, name, None)     # noqa: E731
    cfg = RunConfig(
        command=cmd,
        inputs={"input": g("input"), "meta": g("meta"), "cv": g("cv"), "cv_meta": g("cv_meta"),
                "stack": g("stack"), "params": g("params"), "materials": g("materials")},
        outputs={"out": g("out"), "summary": g("summary"), "plots": g("plots")},
        region=Region(g("region") or "linear"),
        window=g("window"), poly_order=g("poly_order"),
        emit_plots=g("plots") is not None, figures=bool(g("figures")),
        stamp=bool(g("stamp")), jobs=g("jobs") or 1,
        options={k: g(k) for k in ("vds_low", "vds_high", "quantum", "sweep", "values",
                                   "paper", "noise", "seed")},
    )
    if cfg.figures and not cfg.emit_plots:
        raise ValidationError("--figures needs --plots DIR")
    if cfg.jobs < 1:
        raise ValidationError("--jobs must be at least 1")
    return cfg


# -- command implementations ---------------------------------------------------

def _load(path, meta_path):
    from .measurement import ingest_sweep_file, load_metadata
    meta = load_metadata(meta_path)
    return ingest_sweep_file(path, meta), meta


def _emit(cfg: RunConfig, result):
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds") if cfg.stamp else None
    result.report.write(cfg.outputs["out"], stamp)
    _emit_plots(cfg, result.plots)
    for e in result.report.errors:
        print(f"hemtkit: {e.name} {e.conditions}: {e.error}", file=sys.stderr)
    return EXIT_NUMERICAL if result.report.errors else EXIT_OK


def _emit_plots(cfg, plots):
    if not cfg.emit_plots:
        return
    d = Path(cfg.outputs["plots"])
    d.mkdir(parents=True, exist_ok=True)
    for p in plots:
        p.write_csv(d)
    if cfg.figures:
        from .plotting import render_all
        render_all(plots, d)


def run_extract_transfer(cfg):
    from .report import transfer_report
    fam, meta = _load(cfg.inputs["input"], cfg.inputs["meta"])
    return _emit(cfg, transfer_report(fam, meta.geometry, cfg.region.value, cfg.smoothing(),
                                      meta.device_id))


def run_extract_output(cfg):
    from .report import output_report
    fam, meta = _load(cfg.inputs["input"], cfg.inputs["meta"])
    return _emit(cfg, output_report(fam, meta.geometry, cfg.smoothing(), meta.device_id))


def run_extract_cv(cfg):
    from .report import cv_report
    fam, meta = _load(cfg.inputs["input"], cfg.inputs["meta"])
    return _emit(cfg, cv_report(fam, meta.geometry, cfg.smoothing(), meta.device_id))


def run_mobility(cfg):
    from .report import mobility_report
    fam, meta = _load(cfg.inputs["input"], cfg.inputs["meta"])
    cv, _ = _load(cfg.inputs["cv"], cfg.inputs["cv_meta"])
    return _emit(cfg, mobility_report(fam, cv, meta.geometry, meta.device_id))


def run_dibl(cfg):
    from .report import dibl_report
    fam, meta = _load(cfg.inputs["input"], cfg.inputs["meta"])
    return _emit(cfg, dibl_report(fam, meta.geometry, cfg.smoothing(), meta.device_id,
                                  cfg.options["vds_low"], cfg.options["vds_high"]))


def run_report(cfg):
    from .report import fixture_report
    return _emit(cfg, fixture_report(cfg.inputs["input"], cfg.smoothing(), cfg.jobs))


def run_bandsim(cfg):
    from dataclasses import replace

    from .bandsolver import MaterialTable, load_stack, solve_self_consistent, sweep_design
    from .bandsolver.io import summary_path_for, write_profile, write_summary
    from .report import band_plot

    problem = load_stack(cfg.inputs["stack"])
    if cfg.inputs["materials"]:
        problem = replace(problem, materials=MaterialTable.load(cfg.inputs["materials"]))
    quantum = bool(cfg.options["quantum"])
    out = Path(cfg.outputs["out"])
    if cfg.options["sweep"]:
        values = cfg.options["values"]
        if not values or len(values) < 2:
            raise ValidationError("--sweep needs at least two --values")
        points = sweep_design(problem, cfg.options["sweep"], values, quantum, cfg.jobs)
        lines = ["value,ns_cm2,error"]
        for pt in points:
            ns = "" if pt.error else repr(pt.sheet_density)
            lines.append(f"{pt.value!r},{ns},{pt.error or ''}")
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        failed = [pt for pt in points if pt.error]
        for pt in failed:
            print(f"hemtkit: sweep point {pt.value!r}: {pt.error}", file=sys.stderr)
        return EXIT_NUMERICAL if failed else EXIT_OK
    from .errors import NotConverged
    try:
        sol = solve_self_consistent(problem, quantum=quantum)
        status = EXIT_OK
    except NotConverged as exc:
        if exc.solution is None:
            raise
        sol = exc.solution
        print(f"hemtkit: {exc}", file=sys.stderr)
        status = EXIT_NUMERICAL
    write_profile(sol, out)
    write_summary(sol, cfg.outputs["summary"] or summary_path_for(out))
    _emit_plots(cfg, [band_plot(sol)])
    return status


def run_synth(cfg):
    from dataclasses import replace

    from .synth import CompactModelParams, default_plan, generate_fixture, generate_paper_fixture
    opts = cfg.options
    if opts["paper"]:
        if cfg.inputs["params"]:
            raise ValidationError("--paper and --params are mutually exclusive")
        generate_paper_fixture(cfg.outputs["out"], noise_amplitude=opts["noise"] or 0.0,
                               seed=opts["seed"])
        return EXIT_OK
    if cfg.inputs["params"]:
        path = Path(cfg.inputs["params"])
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"parameter file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ValidationError(f"parameter file {path} is not valid JSON: {e}") from None
        # a ground-truth file nests the parameters under "params"
        doc = doc.get("params", doc) if isinstance(doc, dict) else doc
        if not isinstance(doc, dict):
            raise ValidationError(f"parameter file {path} must hold a JSON object")
        try:
            p = CompactModelParams.from_dict(doc)
        except TypeError as e:
            raise ValidationError(f"bad parameter file {path}: {e}") from None
    else:
        p = CompactModelParams()
    if opts["noise"] is not None:
        p = replace(p, noise_amplitude=opts["noise"])
    if opts["seed"] is not None:
        p = replace(p, seed=opts["seed"])
    generate_fixture(p, default_plan(), cfg.outputs["out"])
    return EXIT_OK


RUNNERS = {
    Command.EXTRACT_TRANSFER: run_extract_transfer,
    Command.EXTRACT_OUTPUT: run_extract_output,
    Command.EXTRACT_CV: run_extract_cv,
    Command.MOBILITY: run_mobility,
    Command.DIBL: run_dibl,
    Command.BANDSIM: run_bandsim,
    Command.SYNTH: run_synth,
    Command.REPORT: run_report,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    try:
        return RUNNERS[cfg.command](cfg)
    except ValidationError as exc:
        print(f"hemtkit: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"hemtkit: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValidationError as exc:
        print(f"hemtkit: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":    # pragma: no cover
    sys.exit(main())
