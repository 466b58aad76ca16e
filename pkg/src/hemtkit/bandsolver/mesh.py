"""Finite-volume mesh for a layer stack."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import Boltzmann, electron_mass, epsilon_0, hbar, pi

from ..errors import GridTooCoarse
from .materials import MaterialTable
from .stack import StackProblem


def effective_dos(mass, T):
    """Conduction-band effective density of states, m^-3."""
    return 2.0 * (mass * electron_mass * Boltzmann * T / (2 * pi * hbar ** 2)) ** 1.5


@dataclass(frozen=True)
class Mesh:
    z: np.ndarray            # node positions, nm
    h: np.ndarray            # cell widths, m (len = nodes - 1)
    layer: np.ndarray        # layer index per cell
    eps: np.ndarray          # permittivity per cell, F/m
    offset: np.ndarray       # conduction-band offset per cell, eV
    mass: np.ndarray         # effective mass per cell, m0
    nc: np.ndarray           # effective DOS per cell, m^-3
    doping: np.ndarray       # N_D - N_A per cell, m^-3
    polarization: np.ndarray  # net polarization per cell, C/m^2
    interfaces: np.ndarray   # node indices of internal interfaces
    sigma: np.ndarray        # bound sheet charge per node, C/m^2 (zero off-interface)
    temperature: float

    @property
    def n_nodes(self):
        return len(self.z)

    @property
    def z_m(self):
        return self.z * 1e-9

    def node_average(self, cell_values):
        """Box-weighted average of a per-cell quantity onto the nodes."""
        h = self.h
        left = np.concatenate(([0.0], h))
        right = np.concatenate((h, [0.0]))
        lv = np.concatenate(([0.0], cell_values))
        rv = np.concatenate((cell_values, [0.0]))
        return (left * lv + right * rv) / (left + right)

    @property
    def box(self):
        """Control-volume width of each node, m."""
        left = np.concatenate(([0.0], self.h))
        right = np.concatenate((self.h, [0.0]))
        return 0.5 * (left + right)


def discretize(problem: StackProblem, materials: MaterialTable | None = None) -> Mesh:
    """Uniform spacing inside each layer, nodes on every material interface.

    Each internal interface carries the bound sheet charge
    P(upper layer) - P(lower layer).
    """
    materials = materials or problem.materials or MaterialTable.load()
    thinnest = min(l.thickness for l in problem.layers)
    if problem.grid_step > thinnest / 4:
        raise GridTooCoarse(
            f"grid_step {problem.grid_step} nm exceeds a quarter of the thinnest layer "
            f"({thinnest} nm)")
    T = problem.temperature
    z = [0.0]
    cell_layer = []
    boundaries = []
    for k, layer in enumerate(problem.layers):
        n = max(1, math.ceil(layer.thickness / problem.grid_step - 1e-9))
        start = z[-1]
        z.extend(start + layer.thickness * (np.arange(1, n + 1) / n))
        cell_layer.extend([k] * n)
        boundaries.append(len(z) - 1)
    z = np.array(z)
    cell_layer = np.array(cell_layer)
    params = [materials.params(l.material, l.al_fraction) for l in problem.layers]

    def per_cell(fn):
        return np.array([fn(params[k], problem.layers[k]) for k in cell_layer], dtype=float)

    mass = per_cell(lambda m, l: m.electron_effective_mass)
    pol = per_cell(lambda m, l: m.net_polarization)
    sigma = np.zeros(len(z))
    iface = np.array(boundaries[:-1], dtype=int)
    for node in iface:
        # cells node-1 and node sit on either side of the interface
        sigma[node] = pol[node - 1] - pol[node]
    return Mesh(
        z=z,
        h=np.diff(z) * 1e-9,
        layer=cell_layer,
        eps=per_cell(lambda m, l: m.relative_permittivity) * epsilon_0,
        offset=per_cell(lambda m, l: m.conduction_band_offset_vs_GaN),
        mass=mass,
        nc=effective_dos(mass, T),
        doping=per_cell(lambda m, l: l.donor_doping - l.acceptor_doping) * 1e6,
        polarization=pol,
        interfaces=iface,
        sigma=sigma,
        temperature=T,
    )
