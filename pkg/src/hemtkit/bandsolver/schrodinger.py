"""Single-band effective-mass Schrödinger equation on a 1D grid."""

from __future__ import annotations

import numpy as np
from scipy.constants import electron_mass, elementary_charge, hbar
from scipy.linalg import LinAlgError, eigh_tridiagonal

from ..errors import EigSolverFailure, ValidationError

#: hbar^2 / (2 m0) in eV nm^2
HBAR2_2M0 = hbar ** 2 / (2 * electron_mass) / elementary_charge * 1e18


def _cell_mass(mass, n_nodes):
    mass = np.asarray(mass, dtype=float)
    if mass.ndim == 0:
        return np.full(n_nodes - 1, float(mass))
    if len(mass) == n_nodes - 1:
        return mass
    if len(mass) == n_nodes:
        # harmonic mean keeps 1/m (the quantity in the flux) an average
        return 2.0 / (1.0 / mass[:-1] + 1.0 / mass[1:])
    raise ValidationError("mass_profile must have one entry per node or per cell")


def box_weights(z):
    h = np.diff(z)
    return 0.5 * (np.concatenate(([0.0], h)) + np.concatenate((h, [0.0])))


def solve_schrodinger(ec, z, mass_profile, k: int = 1):
    """Lowest ``k`` eigenpairs of -(hbar^2/2) d/dz (1/m* d/dz) + E_c(z).

    Parameters
    ----------
    ec : eV per node.
    z : node positions in nm (strictly increasing, spacing may vary).
    mass_profile : effective mass in m0, scalar, per node or per cell.
    k : number of states.

    The three-point box discretization uses the cell masses in the
    fluxes, so the operator is symmetric for any mass profile. Hard walls
    pin psi to zero on the two end nodes. Returns ``(energies, psi)`` with
    energies ascending and ``psi`` of shape (k, nodes) normalized so that
    ``sum(psi**2 * w) == 1`` with the box weights ``w`` of the grid.
    """
    ec = np.asarray(ec, dtype=float)
    z = np.asarray(z, dtype=float)
    if len(z) < 3 or len(ec) != len(z):
        raise ValidationError("solve_schrodinger needs ec and z of equal length >= 3")
    if np.any(np.diff(z) <= 0):
        raise ValidationError("z must be strictly increasing")
    interior = len(z) - 2
    if not 1 <= k <= interior:
        raise ValidationError(f"k must lie in [1, {interior}], got {k}")
    m = _cell_mass(mass_profile, len(z))
    h = np.diff(z)
    c = HBAR2_2M0 / (m * h)                       # coupling of each cell
    w = box_weights(z)[1:-1]
    diag = (c[:-1] + c[1:] + ec[1:-1] * w)
    off = -c[1:-1]
    s = 1.0 / np.sqrt(w)
    d = diag * s * s
    e = off * s[:-1] * s[1:]
    try:
        energies, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    except (LinAlgError, ValueError) as exc:
        raise EigSolverFailure(f"tridiagonal eigen-solver failed: {exc}") from exc
    if not np.all(np.isfinite(energies)):
        raise EigSolverFailure("eigen-solver returned non-finite energies")
    psi = np.zeros((k, len(z)))
    psi[:, 1:-1] = (vecs * s[:, None]).T
    norm = np.sqrt((psi ** 2 * box_weights(z)).sum(axis=1))
    psi /= norm[:, None]
    # deterministic sign: the largest lobe is positive
    idx = np.argmax(np.abs(psi), axis=1)
    psi *= np.sign(psi[np.arange(k), idx])[:, None]
    return energies, psi
