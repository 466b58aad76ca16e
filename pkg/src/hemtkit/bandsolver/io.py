"""Band-solution export: profile CSV and JSON summary."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .poisson import BandSolution

PROFILE_HEADER = ("z_nm", "ec_eV", "n_cm3")


def summary_dict(sol: BandSolution) -> dict:
    return {
        "ns_cm2": sol.sheet_density,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "bound_energies_eV": [float(e) for e in sol.bound_energies],
    }


def write_profile(sol: BandSolution, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_HEADER)
        for row in zip(sol.z, sol.ec, sol.electron_density):
            w.writerow([repr(float(v)) for v in row])
    return path


def write_summary(sol: BandSolution, path):
    path = Path(path)
    path.write_text(json.dumps(summary_dict(sol), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def summary_path_for(profile_path) -> Path:
    """``band.csv`` -> ``band.summary.json``."""
    p = Path(profile_path)
    return p.with_name(p.stem + ".summary.json")
