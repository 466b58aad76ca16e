"""Sweep data model and the long-format CSV / JSON sidecar readers and writers."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (EmptyFamily, InconsistentKind, InvalidCurve, MissingColumn,
                     NonNumericCell, NoOverlap, ValidationError)


class Kind(enum.Enum):
    TRANSFER = "transfer"
    OUTPUT = "output"
    CV = "cv"


class FamilyVariable(enum.Enum):
    FIXED_VDS = "fixed_vds"
    FIXED_VGS = "fixed_vgs"


# (swept column, fixed column, response column); CV has no fixed column
COLUMNS = {
    Kind.TRANSFER: ("vgs_V", "vds_V", "id_A"),
    Kind.OUTPUT: ("vds_V", "vgs_V", "id_A"),
    Kind.CV: ("vgs_V", None, "c_F"),
}


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SweepCurve:
    """One measured curve: swept voltage ``x``, response ``y`` (A or F)."""

    x: np.ndarray
    y: np.ndarray
    fixed_bias: float
    kind: Kind
    temperature: float = 300.0

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "y", _frozen(self.y))
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "fixed_bias", float(self.fixed_bias))
        if self.x.ndim != 1 or self.x.shape != self.y.shape:
            raise InvalidCurve("x and y must be 1-D and of equal length")
        if len(self.x) < 3:
            raise InvalidCurve(f"a curve needs at least 3 samples, got {len(self.x)}")
        if not np.all(np.isfinite(self.x)) or not np.all(np.isfinite(self.y)):
            raise InvalidCurve("curve contains non-finite samples")
        if np.any(np.diff(self.x) <= 0):
            raise InvalidCurve("x must be strictly increasing")
        if self.kind is Kind.CV and np.any(self.y < 0):
            raise InvalidCurve("capacitance must be non-negative")

    def __eq__(self, other):
        if not isinstance(other, SweepCurve):
            return NotImplemented
        return (self.kind is other.kind and self.fixed_bias == other.fixed_bias
                and self.temperature == other.temperature
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))

    __hash__ = None

    def with_y(self, y):
        return replace(self, y=y)


@dataclass(frozen=True, eq=False)
class SweepFamily:
    curves: tuple
    family_variable: FamilyVariable
    provenance: str = ""
    resampled: bool = False

    def __post_init__(self):
        curves = tuple(self.curves)
        object.__setattr__(self, "curves", curves)
        if not curves:
            raise EmptyFamily("a sweep family needs at least one curve")
        kinds = {c.kind for c in curves}
        if len(kinds) != 1:
            raise InconsistentKind(f"curves of mixed kind: {sorted(k.value for k in kinds)}")
        biases = [c.fixed_bias for c in curves]
        if any(b2 <= b1 for b1, b2 in zip(biases, biases[1:])):
            raise ValidationError("fixed_bias must be strictly increasing across the family")

    @property
    def kind(self) -> Kind:
        return self.curves[0].kind

    @property
    def biases(self):
        return [c.fixed_bias for c in self.curves]

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    def __getitem__(self, i):
        return self.curves[i]

    def __eq__(self, other):
        if not isinstance(other, SweepFamily):
            return NotImplemented
        return (self.family_variable is other.family_variable
                and len(self.curves) == len(other.curves)
                and all(a == b for a, b in zip(self.curves, other.curves)))

    __hash__ = None

    def nearest(self, bias):
        """Curve whose fixed bias is closest to ``bias``."""
        return min(self.curves, key=lambda c: abs(c.fixed_bias - bias))


@dataclass(frozen=True)
class DeviceGeometry:
    """Gate width and length in micrometres."""

    width: float
    length: float

    def __post_init__(self):
        if not (self.width > 0 and self.length > 0):
            raise ValidationError(f"gate width and length must be positive, got {self}")

    @property
    def area_cm2(self):
        return self.width * self.length * 1e-8


@dataclass(frozen=True)
class DeviceMeta:
    """Contents of a metadata sidecar."""

    device_id: str
    kind: Kind
    geometry: DeviceGeometry
    temperature: float = 300.0
    frequency: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        doc = {"device_id": self.device_id, "kind": self.kind.value,
               "w_um": self.geometry.width, "l_um": self.geometry.length,
               "temperature_K": self.temperature}
        if self.frequency is not None:
            doc["frequency_Hz"] = self.frequency
        doc.update(self.extra)
        return doc


def parse_metadata(doc: dict) -> DeviceMeta:
    try:
        kind = Kind(str(doc["kind"]).lower())
        geometry = DeviceGeometry(float(doc["w_um"]), float(doc["l_um"]))
        device_id = str(doc["device_id"])
    except KeyError as e:
        raise ValidationError(f"metadata is missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(f"malformed metadata: {e}") from None
    freq = doc.get("frequency_Hz")
    known = {"device_id", "kind", "w_um", "l_um", "temperature_K", "frequency_Hz"}
    return DeviceMeta(device_id=device_id, kind=kind, geometry=geometry,
                      temperature=float(doc.get("temperature_K", 300.0)),
                      frequency=None if freq is None else float(freq),
                      extra={k: v for k, v in doc.items() if k not in known})


def load_metadata(path) -> DeviceMeta:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"metadata file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"metadata file {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"metadata file {path} must hold a JSON object")
    return parse_metadata(doc)


def write_metadata(meta: DeviceMeta, path):
    Path(path).write_text(json.dumps(meta.to_dict(), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _read_rows(text, path):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise EmptyFamily(f"{path}: no header row")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    return header, list(reader)


def _collapse(x, y):
    """Sort by x and average y over repeated abscissae."""
    order = np.argsort(x, kind="stable")
    x = x[order]
    y = y[order]
    ux, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    sums = np.zeros(len(ux))
    np.add.at(sums, inverse, y)
    return ux, sums / counts


def ingest_sweep_file(path, meta) -> SweepFamily:
    """Read a long-format sweep CSV into a validated :class:`SweepFamily`.

    ``meta`` is a :class:`DeviceMeta`, a metadata dict, or a sidecar path.
    Rows are grouped by the fixed-bias column; duplicate abscissae within a
    group are averaged. Groups on differing grids are resampled onto their
    common grid and the family is flagged ``resampled``.
    """
    if not isinstance(meta, DeviceMeta):
        meta = parse_metadata(meta) if isinstance(meta, dict) else load_metadata(meta)
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"sweep file not found: {path}") from None
    header, rows = _read_rows(text, path)
    swept, fixed, resp = COLUMNS[meta.kind]
    # a header that belongs to another kind is a kind mismatch, not a missing column
    wanted = [c for c in (swept, fixed, resp) if c]
    if not set(wanted) <= set(header):
        for other, cols in COLUMNS.items():
            if other is not meta.kind and set(c for c in cols if c) <= set(header):
                raise InconsistentKind(
                    f"{path}: metadata says {meta.kind.value!r} but columns match {other.value!r}")
        missing = next(c for c in wanted if c not in header)
        raise MissingColumn(missing, path)
    idx = {c: header.index(c) for c in wanted}

    data = {c: np.empty(len(rows)) for c in wanted}
    for r, row in enumerate(rows, start=1):
        for c in wanted:
            try:
                cell = row[idx[c]]
            except IndexError:
                raise NonNumericCell(r, c, None) from None
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericCell(r, c, cell) from None
            if not math.isfinite(v):
                raise NonNumericCell(r, c, cell)
            data[c][r - 1] = v
    if not rows:
        raise EmptyFamily(f"{path}: no data rows")

    if fixed is None:
        groups = {0.0: np.arange(len(rows))}
    else:
        fb = data[fixed]
        groups = {float(b): np.flatnonzero(fb == b) for b in np.unique(fb)}

    curves = []
    for bias in sorted(groups):
        sel = groups[bias]
        x, y = _collapse(data[swept][sel], data[resp][sel])
        curves.append(SweepCurve(x, y, bias, meta.kind, meta.temperature))

    family = SweepFamily(
        tuple(curves),
        FamilyVariable.FIXED_VGS if meta.kind is Kind.OUTPUT else FamilyVariable.FIXED_VDS,
        provenance=str(path))
    if any(not np.array_equal(c.x, curves[0].x) for c in curves[1:]):
        family = resample_to_common_grid(family)
    return family


def format_number(v):
    return repr(float(v))


def family_to_csv(family: SweepFamily) -> str:
    swept, fixed, resp = COLUMNS[family.kind]
    buf = io.StringIO()
    cols = [swept, fixed, resp] if fixed else [swept, resp]
    buf.write(",".join(cols) + "\n")
    for c in family.curves:
        for xv, yv in zip(c.x, c.y):
            vals = [xv, c.fixed_bias, yv] if fixed else [xv, yv]
            buf.write(",".join(format_number(v) for v in vals) + "\n")
    return buf.getvalue()


def write_sweep_file(family: SweepFamily, path, comments=()):
    text = "".join(f"# {c}\n" for c in comments) + family_to_csv(family)
    Path(path).write_text(text, encoding="utf-8")


def common_grid(grids):
    """Union of the abscissae restricted to the interval every grid covers."""
    lo = max(float(g[0]) for g in grids)
    hi = min(float(g[-1]) for g in grids)
    if lo > hi:
        raise NoOverlap(f"curve ranges do not overlap (max start {lo} > min end {hi})")
    allx = np.unique(np.concatenate([np.asarray(g, dtype=float) for g in grids]))
    return allx[(allx >= lo) & (allx <= hi)]


def resample_to_common_grid(family: SweepFamily) -> SweepFamily:
    """Linearly interpolate every curve onto the family's common grid."""
    grid = common_grid([c.x for c in family.curves])
    if all(np.array_equal(c.x, grid) for c in family.curves):
        return family
    curves = tuple(replace(c, x=grid, y=np.interp(grid, c.x, c.y)) for c in family.curves)
    return replace(family, curves=curves, resampled=True)
