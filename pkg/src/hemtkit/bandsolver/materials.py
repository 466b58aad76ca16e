"""Material parameters for the nitride band solver."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import ValidationError

ENV_VAR = "HEMTKIT_MATERIALS"


@dataclass(frozen=True)
class MaterialParams:
    """Per-material constants.

    ``net_polarization`` (C/m^2) is spontaneous plus piezoelectric
    polarization, projected on the solver's depth axis (surface -> substrate),
    so that the bound charge at an interface is P(upper) - P(lower).
    """

    bandgap: float                          # eV
    conduction_band_offset_vs_GaN: float    # eV
    relative_permittivity: float
    electron_effective_mass: float          # m0
    net_polarization: float                 # C/m^2

    def __post_init__(self):
        if not self.bandgap > 0:
            raise ValidationError("bandgap must be positive")
        if not self.relative_permittivity > 1:
            raise ValidationError("relative permittivity must exceed 1")
        if not self.electron_effective_mass > 0:
            raise ValidationError("effective mass must be positive")


def _lerp(a, b, x):
    return (1 - x) * a + x * b


class MaterialTable:
    """Material lookup backed by a JSON document (see ``data/materials.json``)."""

    def __init__(self, doc: dict, source: str = "<dict>"):
        self.doc = {k: v for k, v in doc.items() if not k.startswith("_")}
        self.source = source
        if "GaN" not in self.doc:
            raise ValidationError(f"material table {source} has no GaN entry")

    @classmethod
    def load(cls, path=None) -> "MaterialTable":
        """Read a table from ``path``, else ``$HEMTKIT_MATERIALS``, else the bundled default."""
        path = path or os.environ.get(ENV_VAR)
        if path:
            try:
                doc = json.loads(Path(path).read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ValidationError(f"material table not found: {path}") from None
            except json.JSONDecodeError as e:
                raise ValidationError(f"material table {path} is not valid JSON: {e}") from None
            return cls(doc, str(path))
        return _bundled()

    def _binary(self, name, substrate=None):
        try:
            d = self.doc[name]
        except KeyError:
            raise ValidationError(f"unknown material {name!r} in {self.source}") from None
        return d

    def _polarization(self, d, substrate):
        """Spontaneous + piezoelectric polarization (c-axis sign convention)."""
        p = d.get("spontaneous_polarization", 0.0)
        if substrate is not None and "lattice_a" in d:
            a0 = substrate["lattice_a"]
            a = d["lattice_a"]
            strain = (a0 - a) / a
            p += 2 * strain * (d["e31"] - d["e33"] * d["c13"] / d["c33"])
        return p

    def params(self, material: str, al_fraction: float = 0.0) -> MaterialParams:
        gan = self._binary("GaN")
        entry = self._binary(material)
        if "endpoints" in entry:
            lo, hi = (self._binary(n) for n in entry["endpoints"])
            x = float(al_fraction)
            if not 0 <= x <= 1:
                raise ValidationError(f"al_fraction must lie in [0, 1], got {x}")
            keys = ("bandgap", "relative_permittivity", "electron_effective_mass",
                    "spontaneous_polarization", "lattice_a", "e31", "e33", "c13", "c33")
            d = {k: _lerp(lo[k], hi[k], x) for k in keys if k in lo and k in hi}
            ratio = entry.get("band_offset_ratio", 0.63)
            d["conduction_band_offset_vs_GaN"] = ratio * (d["bandgap"] - gan["bandgap"])
            substrate = self._binary(entry["substrate"]) if entry.get("substrate") else None
        else:
            d = dict(entry)
            d.setdefault("conduction_band_offset_vs_GaN",
                         0.63 * (d["bandgap"] - gan["bandgap"]))
            substrate = None if material == "GaN" else gan
        p_c = self._polarization(d, substrate)
        return MaterialParams(
            bandgap=d["bandgap"],
            conduction_band_offset_vs_GaN=d["conduction_band_offset_vs_GaN"],
            relative_permittivity=d["relative_permittivity"],
            electron_effective_mass=d["electron_effective_mass"],
            # Ga-face: the c axis points towards the surface, opposite to depth
            net_polarization=-p_c,
        )


@lru_cache(maxsize=1)
def _bundled() -> MaterialTable:
    text = resources.files("hemtkit").joinpath("data/materials.json").read_text(encoding="utf-8")
    return MaterialTable(json.loads(text), "hemtkit/data/materials.json")
