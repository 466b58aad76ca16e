"""hemtkit: transistor parameter extraction from I-V/C-V sweeps, a compact-model
device generator, and a 1D equilibrium band solver for AlGaN/GaN stacks."""

from .errors import HemtkitError, NumericalError, ValidationError
from .measurement import (DeviceGeometry, DeviceMeta, Kind, SweepCurve, SweepFamily,
                          ingest_sweep_file, load_metadata)
from .numerics import DEFAULT_SMOOTHING, SmoothingSpec
from .report import ExtractionReport, ReportEntry

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SMOOTHING", "DeviceGeometry", "DeviceMeta", "ExtractionReport", "HemtkitError",
    "Kind", "NumericalError", "ReportEntry", "SmoothingSpec", "SweepCurve", "SweepFamily",
    "ValidationError", "ingest_sweep_file", "load_metadata",
]
