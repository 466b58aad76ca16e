"""Self-consistent Schrödinger–Poisson loop and design sweeps."""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple

import numpy as np
from scipy.constants import Boltzmann, electron_mass, elementary_charge as Q_E, hbar, pi

from ..errors import HemtkitError, NotConverged, ValidationError
from .materials import MaterialTable
from .poisson import (ChargeModel, assemble_solution, solve_nonlinear_poisson,
                      solve_poisson_equilibrium, surface_potential)
from .schrodinger import solve_schrodinger
from .stack import StackProblem

MIXING = 0.3
OUTER_TOLERANCE = 1e-6
MAX_OUTER = 300
N_STATES = 10


def _subband_density(ec_node, z, mesh, k, vt):
    """Quantum electron density per node (m^-3) and the subband energies."""
    mass_node = mesh.node_average(mesh.mass)
    energies, psi = solve_schrodinger(ec_node, z, mesh.mass, k)
    # 2D density of states per subband (m^-2 per eV-normalized occupancy)
    g = mass_node * electron_mass * Boltzmann * mesh.temperature / (pi * hbar ** 2)
    occupancy = np.logaddexp(0.0, -energies / vt)          # ln(1 + exp((E_F - E_i)/kT))
    # psi is normalized with nm-based weights; convert |psi|^2 to m^-1
    density = g * (occupancy[:, None] * psi ** 2).sum(axis=0) * 1e9
    return density, energies, psi


def solve_self_consistent(problem: StackProblem, quantum: bool = False,
                          materials: MaterialTable | None = None, mixing: float = MIXING,
                          n_states: int = N_STATES, tol: float = OUTER_TOLERANCE,
                          max_outer: int = MAX_OUTER, strict: bool = True):
    """Equilibrium band diagram, optionally with quantized electrons.

    Without ``quantum`` this is exactly :func:`solve_poisson_equilibrium`.
    With it, the classical solution seeds an outer loop that alternates a
    Schrödinger solve on the current band edge with a Poisson solve whose
    electron density is the under-relaxed mix of the previous and new
    subband densities. Inside each Poisson solve the density responds to
    the potential as ``n_mix * exp((phi - phi_ref)/V_t)``, a predictor that
    keeps the outer iteration stable; at the fixed point phi = phi_ref and
    the predictor drops out.
    """
    if not quantum:
        return solve_poisson_equilibrium(problem, materials)
    if not 0 < mixing <= 1:
        raise ValidationError("mixing factor must lie in (0, 1]")
    classical = solve_poisson_equilibrium(problem, materials)
    mesh = classical.mesh
    model = ChargeModel(mesh, problem.statistics)
    vt = model.vt
    box = mesh.box
    z = mesh.z
    phi_s = surface_potential(problem, mesh)
    offset_node = mesh.node_average(mesh.offset)
    k = min(n_states, len(z) - 2)

    phi = classical.potential
    n_mix, energies, psi = _subband_density(offset_node - phi, z, mesh, k, vt)
    ns_old = float(np.sum(n_mix * box))
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        phi_ref = phi.copy()
        n_ref = n_mix.copy()

        def charge(p, phi_ref=phi_ref, n_ref=n_ref):
            n = n_ref * np.exp((p - phi_ref) / vt)
            return model.fixed - Q_E * box * n, -Q_E * box * n / vt

        phi, ok, _, upd, hist = solve_nonlinear_poisson(mesh, phi, phi_s, charge)
        if not ok:
            break
        n_new, energies, psi = _subband_density(offset_node - phi, z, mesh, k, vt)
        n_mix = (1 - mixing) * n_mix + mixing * n_new
        ns = float(np.sum(n_mix * box))
        change = abs(ns - ns_old) / max(abs(ns), 1e-300)
        ns_old = ns
        if change < tol:
            converged = True
            break

    def density(p):
        # report the converged subband density, split evenly over the half-cells
        nl = nr = n_mix
        return nl, nr, None, None

    bound = energies[energies < (offset_node - phi)[-1]]
    sol = assemble_solution(problem, mesh, phi, model, converged, outer, change if outer else 0.0,
                            (), electron_fn=density, bound=bound, wavefunctions=psi)
    if not converged and strict:
        raise NotConverged(f"Schrödinger–Poisson loop did not converge in {outer} iterations", sol)
    return sol


class DesignAxis(enum.Enum):
    BARRIER_THICKNESS = "thickness"
    AL_FRACTION = "x"
    DOPING = "doping"


class SweepPoint(NamedTuple):
    value: float
    sheet_density: float          # cm^-2, NaN if the point failed
    error: str | None = None


def _modified(problem: StackProblem, axis: DesignAxis, value):
    i = problem.barrier_index
    field = {DesignAxis.BARRIER_THICKNESS: "thickness",
             DesignAxis.AL_FRACTION: "al_fraction",
             DesignAxis.DOPING: "donor_doping"}[axis]
    return problem.with_layer(i, **{field: float(value)})


def _solve_point(args):
    problem, axis, value, quantum = args
    try:
        sol = solve_self_consistent(_modified(problem, axis, value), quantum=quantum)
        return SweepPoint(float(value), sol.sheet_density)
    except HemtkitError as exc:
        return SweepPoint(float(value), float("nan"), f"{type(exc).__name__}: {exc}")


def sweep_design(problem: StackProblem, axis, values, quantum: bool = False, jobs: int = 1):
    """Re-solve ``problem`` with the barrier layer's thickness (nm), Al
    fraction or donor doping (cm^-3) set to each of ``values``.

    Returns one :class:`SweepPoint` per value, in input order. A point that
    fails (invalid layer, no convergence) is flagged with NaN and its error
    message; the remaining points still run. ``jobs > 1`` solves the points
    in worker processes; the result is identical.
    """
    axis = DesignAxis(axis)
    values = list(values)
    if len(values) < 2:
        raise ValidationError("a design sweep needs at least two values")
    tasks = [(problem, axis, v, quantum) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_point, tasks))
    return [_solve_point(t) for t in tasks]
