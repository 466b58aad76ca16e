"""Equilibrium nonlinear Poisson solver (box discretization, damped Newton)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import Boltzmann, elementary_charge as Q_E
from scipy.linalg import solve_banded

from ..errors import NonFiniteResidual, NotConverged
from .fermi import fermi_half, fermi_minus_half
from .materials import MaterialTable
from .mesh import Mesh, discretize
from .stack import Statistics, StackProblem

TOLERANCE = 1e-8      # V, max potential update at convergence
MAX_ITERATIONS = 200
MAX_STEP = 1.0        # V, cap on a single Newton update


@dataclass(frozen=True)
class BandSolution:
    z: np.ndarray                 # nm
    ec: np.ndarray                # eV, relative to E_F = 0
    potential: np.ndarray         # V
    electron_density: np.ndarray  # cm^-3
    sheet_density: float          # cm^-2
    bound_energies: np.ndarray    # eV
    converged: bool
    iterations: int
    residual: float               # last max |update|, V
    mesh: Mesh = field(repr=False, compare=False, default=None)
    history: tuple = field(repr=False, compare=False, default=())
    wavefunctions: np.ndarray = field(repr=False, compare=False, default=None)


class ChargeModel:
    """Space charge of the mesh as a function of the node potential.

    Every node owns half of each adjacent cell; each half-cell uses its own
    material's band offset and density of states, so the band-edge step at an
    interface is represented exactly.
    """

    def __init__(self, mesh: Mesh, statistics: Statistics):
        self.mesh = mesh
        self.statistics = statistics
        self.vt = Boltzmann * mesh.temperature / Q_E
        h = mesh.h
        self.half_left = np.concatenate(([0.0], 0.5 * h))    # cell to the left of node
        self.half_right = np.concatenate((0.5 * h, [0.0]))
        self.nc_left = np.concatenate(([0.0], mesh.nc))
        self.nc_right = np.concatenate((mesh.nc, [0.0]))
        self.off_left = np.concatenate(([0.0], mesh.offset))
        self.off_right = np.concatenate((mesh.offset, [0.0]))
        dop_l = np.concatenate(([0.0], mesh.doping))
        dop_r = np.concatenate((mesh.doping, [0.0]))
        self.fixed = Q_E * (self.half_left * dop_l + self.half_right * dop_r) + mesh.sigma

    def _density(self, eta, nc):
        if self.statistics is Statistics.BOLTZMANN:
            n = nc * np.exp(eta)
            return n, n
        return nc * fermi_half(eta), nc * fermi_minus_half(eta)

    def half_cell_density(self, phi):
        """Electron density (m^-3) on the left and right half-cells of each node,
        with its derivative with respect to the node potential."""
        nl, dl = self._density((phi - self.off_left) / self.vt, self.nc_left)
        nr, dr = self._density((phi - self.off_right) / self.vt, self.nc_right)
        return nl, nr, dl / self.vt, dr / self.vt

    def electrons(self, phi):
        """Electrons per unit area in each control volume and its derivative."""
        nl, nr, dl, dr = self.half_cell_density(phi)
        return (self.half_left * nl + self.half_right * nr,
                self.half_left * dl + self.half_right * dr)


def _flux(mesh, phi):
    return mesh.eps * np.diff(phi) / mesh.h


def poisson_residual(mesh: Mesh, phi, electrons):
    """Box-integrated Gauss law at every node (C/m^2); node 0 is Dirichlet."""
    d = _flux(mesh, phi)
    r = np.zeros_like(phi)
    r[1:-1] = d[1:] - d[:-1]
    r[-1] = -d[-1]
    return r


def surface_potential(problem: StackProblem, mesh: Mesh):
    return mesh.offset[0] - problem.surface_barrier


def initial_guess(problem: StackProblem, mesh: Mesh, vt):
    """Band edge pinned at the surface, relaxing over the first layer to the
    local neutral level (doped cells) or 0.1 eV above E_F (undoped cells)."""
    level = np.full(len(mesh.h), 0.1)
    doped = mesh.doping > 0
    level[doped] = -vt * np.log(mesh.doping[doped] / mesh.nc[doped])
    node_level = np.concatenate((level, [level[-1]]))
    ec = node_level.copy()
    first = problem.layers[0].thickness
    w = np.clip(mesh.z / first, 0.0, 1.0)
    ec = (1 - w) * problem.surface_barrier + w * node_level
    node_offset = np.concatenate((mesh.offset, [mesh.offset[-1]]))
    return node_offset - ec


def solve_nonlinear_poisson(mesh: Mesh, phi0, phi_surface, charge_fn, tol=TOLERANCE,
                            max_iter=MAX_ITERATIONS):
    """Damped Newton on the box-discretized Poisson equation.

    ``charge_fn(phi)`` returns (space charge per control volume C/m^2,
    derivative w.r.t. the node potential). Returns
    (phi, converged, iterations, last max update, history).
    """
    phi = np.array(phi0, dtype=float)
    phi[0] = phi_surface
    eps_h = mesh.eps / mesh.h
    n = len(phi)

    def residual(p):
        rho, drho = charge_fn(p)
        return poisson_residual(mesh, p, None) + rho, drho

    r, drho = residual(phi)
    norm = np.linalg.norm(r[1:])
    history = []
    update = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        if not np.all(np.isfinite(r)):
            raise NonFiniteResidual("Poisson residual is not finite")
        ab = np.zeros((3, n - 1))
        diag = np.zeros(n)
        diag[1:-1] = -(eps_h[1:] + eps_h[:-1])
        diag[-1] = -eps_h[-1]
        diag += drho
        ab[1] = diag[1:]
        ab[0, 1:] = eps_h[1:]          # super-diagonal
        ab[2, :-1] = eps_h[1:]         # sub-diagonal
        delta = solve_banded((1, 1), ab, -r[1:])
        big = np.abs(delta).max()
        if big > MAX_STEP:
            delta *= MAX_STEP / big
        t = 1.0
        while True:
            trial = phi.copy()
            trial[1:] += t * delta
            r_t, drho_t = residual(trial)
            norm_t = np.linalg.norm(r_t[1:])
            if np.isfinite(norm_t) and norm_t < norm:
                break
            if t * np.abs(delta).max() < 1e3 * tol or t < 1e-12:
                # round-off regime or stalled: take the step and let the caller judge
                break
            t *= 0.5
        phi = trial
        r, drho, norm = r_t, drho_t, norm_t
        update = t * np.abs(delta).max()
        history.append((update, norm, t))
        if update < tol:
            return phi, True, it, update, tuple(history)
    return phi, False, it, update, tuple(history)


def assemble_solution(problem, mesh, phi, model: ChargeModel, converged, it, update, history,
                      electron_fn=None, bound=(), wavefunctions=None):
    nl, nr, _, _ = (model.half_cell_density(phi) if electron_fn is None else electron_fn(phi))
    box = mesh.box
    n_node = (model.half_left * nl + model.half_right * nr) / box
    node_offset = np.concatenate((mesh.offset, [mesh.offset[-1]]))
    ns = float(np.sum(model.half_left * nl + model.half_right * nr)) * 1e-4   # m^-2 -> cm^-2
    return BandSolution(
        z=mesh.z.copy(), ec=node_offset - phi, potential=phi.copy(),
        electron_density=n_node * 1e-6, sheet_density=ns,
        bound_energies=np.asarray(bound, dtype=float), converged=bool(converged),
        iterations=int(it), residual=float(update), mesh=mesh, history=history,
        wavefunctions=wavefunctions)


def solve_poisson_equilibrium(problem: StackProblem, materials: MaterialTable | None = None,
                              tol=TOLERANCE, max_iter=MAX_ITERATIONS, strict=True) -> BandSolution:
    """Classical equilibrium band diagram of ``problem`` (E_F = 0).

    With ``strict`` a non-converged solve raises :class:`NotConverged`
    carrying the best iterate; otherwise that iterate is returned with
    ``converged=False``.
    """
    mesh = discretize(problem, materials)
    model = ChargeModel(mesh, problem.statistics)
    phi_s = surface_potential(problem, mesh)

    def charge(phi):
        e, de = model.electrons(phi)
        return model.fixed - Q_E * e, -Q_E * de

    phi0 = initial_guess(problem, mesh, model.vt)
    phi, ok, it, upd, hist = solve_nonlinear_poisson(mesh, phi0, phi_s, charge, tol, max_iter)
    sol = assemble_solution(problem, mesh, phi, model, ok, it, upd, hist)
    if not ok and strict:
        raise NotConverged(f"Poisson solve did not converge in {it} iterations "
                           f"(last update {upd:.3g} V)", sol)
    return sol


def charge_balance(sol: BandSolution):
    """(net charge, total |charge|) per unit area including the surface charge
    implied by the Dirichlet condition; both in C/m^2."""
    mesh = sol.mesh
    phi = sol.potential
    model = ChargeModel(mesh, Statistics.FERMI_DIRAC)
    n_cv = sol.electron_density * 1e6 * mesh.box
    space = Q_E * (model.half_left * np.concatenate(([0.0], mesh.doping))
                   + model.half_right * np.concatenate((mesh.doping, [0.0]))) - Q_E * n_cv
    interior = space.sum() + mesh.sigma.sum()
    # the boundary node's own half-cell charge belongs to the surface sheet
    surface = -(mesh.eps[0] * (phi[1] - phi[0]) / mesh.h[0]) - space[0]
    total = interior + surface
    scale = np.abs(space).sum() + np.abs(mesh.sigma).sum() + abs(surface)
    return total, scale
