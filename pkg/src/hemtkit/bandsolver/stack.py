"""Layer-stack description and its JSON file format."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..errors import ValidationError


class Statistics(enum.Enum):
    BOLTZMANN = "boltzmann"
    FERMI_DIRAC = "fermi"


@dataclass(frozen=True)
class LayerSpec:
    material: str
    thickness: float              # nm
    al_fraction: float = 0.0
    donor_doping: float = 0.0     # cm^-3
    acceptor_doping: float = 0.0  # cm^-3

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValidationError(f"layer thickness must be positive, got {self.thickness}")
        if self.material == "GaN" and self.al_fraction != 0:
            raise ValidationError("a GaN layer cannot carry an Al fraction")
        if not 0 <= self.al_fraction <= 1:
            raise ValidationError(f"al_fraction must lie in [0, 1], got {self.al_fraction}")
        if self.donor_doping < 0 or self.acceptor_doping < 0:
            raise ValidationError("doping concentrations must be non-negative")


@dataclass(frozen=True)
class StackProblem:
    layers: tuple
    surface_barrier: float = 1.0      # eV, E_c - E_F at z = 0
    temperature: float = 300.0        # K
    grid_step: float = 0.5            # nm
    statistics: Statistics = Statistics.FERMI_DIRAC
    materials: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        if not self.layers:
            raise ValidationError("a stack needs at least one layer")
        if not self.temperature > 0:
            raise ValidationError("temperature must be positive")
        if not self.grid_step > 0:
            raise ValidationError("grid_step must be positive")

    @property
    def barrier_index(self):
        """Index of the first alloy layer, the one the design sweeps act on."""
        for i, layer in enumerate(self.layers):
            if layer.material != "GaN":
                return i
        return 0

    def with_layer(self, index, **changes):
        layers = list(self.layers)
        layers[index] = replace(layers[index], **changes)
        return replace(self, layers=tuple(layers))


def default_stack(**overrides) -> StackProblem:
    """25 nm Al0.25Ga0.75N on 500 nm undoped GaN, 1 eV Schottky barrier."""
    p = StackProblem(layers=(LayerSpec("AlGaN", 25.0, 0.25), LayerSpec("GaN", 500.0)))
    return replace(p, **overrides) if overrides else p


def stack_from_dict(doc: dict) -> StackProblem:
    try:
        layers = tuple(
            LayerSpec(material=str(l["material"]), thickness=float(l["thickness_nm"]),
                      al_fraction=float(l.get("x", 0.0)),
                      donor_doping=float(l.get("nd_cm3", 0.0)),
                      acceptor_doping=float(l.get("na_cm3", 0.0)))
            for l in doc["layers"])
        return StackProblem(
            layers=layers,
            surface_barrier=float(doc.get("surface_barrier_eV", 1.0)),
            temperature=float(doc.get("temperature_K", 300.0)),
            grid_step=float(doc.get("grid_step_nm", 0.5)),
            statistics=Statistics(str(doc.get("statistics", "fermi")).lower()))
    except KeyError as e:
        raise ValidationError(f"stack file is missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(f"malformed stack file: {e}") from None


def stack_to_dict(p: StackProblem) -> dict:
    return {
        "surface_barrier_eV": p.surface_barrier,
        "temperature_K": p.temperature,
        "grid_step_nm": p.grid_step,
        "statistics": p.statistics.value,
        "layers": [{"material": l.material, "thickness_nm": l.thickness, "x": l.al_fraction,
                    "nd_cm3": l.donor_doping, "na_cm3": l.acceptor_doping} for l in p.layers],
    }


def load_stack(path) -> StackProblem:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"stack file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"stack file {path} is not valid JSON: {e}") from None
    return stack_from_dict(doc)


def save_stack(p: StackProblem, path):
    Path(path).write_text(json.dumps(stack_to_dict(p), indent=2) + "\n", encoding="utf-8")
