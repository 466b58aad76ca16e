"""Shared helpers: covariance transforms, band-solver oracles and CLI runs."""

import filecmp
from fractions import Fraction

import numpy as np
from scipy.constants import Boltzmann, electron_mass, elementary_charge as Q, epsilon_0, hbar, pi
from scipy.optimize import brentq

from hemtkit.bandsolver import MaterialTable, default_stack, save_stack
from hemtkit.bandsolver.mesh import effective_dos
from hemtkit.cli import main
from hemtkit.extraction import (align_charge, extract_dibl, extract_gm, extract_mobility,
                                extract_on_off, extract_ron, extract_ss, extract_vsat,
                                extract_vth_cv, extract_vth_transfer, integrate_charge)
from hemtkit.measurement import DeviceGeometry, SweepCurve, SweepFamily


def map_family(family, fn):
    return SweepFamily(tuple(fn(c) for c in family.curves), family.family_variable)


def scale_current(family, alpha):
    return map_family(family, lambda c: SweepCurve(c.x, c.y * alpha, c.fixed_bias, c.kind))


def shift_vgs(family, delta):
    return map_family(family, lambda c: SweepCurve(c.x + delta, c.y, c.fixed_bias, c.kind))


def extract_all(fam, geometry, dibl_geometry=None):
    """Every scalar extraction on a dict of the four fixture families."""
    lin, sat, out, cv = fam["transfer_linear"], fam["transfer_saturation"], fam["output"], fam["cv"]
    top, low = lin.curves[-1], lin.curves[0]
    oo = extract_on_off(top)
    t, q = align_charge(low, integrate_charge(cv.curves[0], geometry))
    return {
        "gm": extract_gm(top).peak, "i_on": oo.i_on, "i_off": oo.i_off,
        "ss": extract_ss(top).ss, "vth": extract_vth_transfer(low).vth,
        "vth_cv": extract_vth_cv(cv.curves[0]),
        "dibl": extract_dibl(sat.curves[0], sat.curves[-1], dibl_geometry or geometry).dibl,
        "vsat": extract_vsat(out.curves[-1]), "ron": extract_ron(out, geometry).ron_ohm,
        "mu": extract_mobility(t, q, geometry).peak,
    }


# how each quantity transforms when every drain current is multiplied by alpha
SCALING_POWER = {"gm": 1, "i_on": 1, "i_off": 1, "ss": 0, "vth": 0, "vth_cv": 0, "dibl": 0,
                 "vsat": 0, "ron": -1, "mu": 1}
SHIFTED = ("vth", "vth_cv")


def scaling_errors(fam, geometry, alpha):
    """Relative deviation of each quantity from its exact scaling law.

    The constant-current DIBL target (1 uA x W/L) is scaled with the current
    through the width, so the threshold criterion follows the curves.
    """
    base = extract_all(fam, geometry)
    scaled = {k: scale_current(f, alpha) if k != "cv" else f for k, f in fam.items()}
    wide = DeviceGeometry(geometry.width * alpha, geometry.length)
    got = extract_all(scaled, geometry, dibl_geometry=wide)
    return {k: abs(got[k] / (base[k] * alpha ** SCALING_POWER[k]) - 1) for k in base}


def shift_errors(fam, geometry, delta):
    """Deviation from the voltage-shift law: V_th moves by delta, the rest stay put.

    Threshold errors are relative to |delta|; the others are relative to the
    unshifted value.
    """
    base = extract_all(fam, geometry)
    shifted = {k: shift_vgs(f, delta) if k != "output" else f for k, f in fam.items()}
    got = extract_all(shifted, geometry)
    out = {}
    for k in base:
        if k in SHIFTED:
            out[k] = abs(got[k] - base[k] - delta) / abs(delta)
        else:
            out[k] = abs(got[k] - base[k]) / max(abs(base[k]), 1e-300)
    return out


# -- band-solver oracles ---------------------------------------------------------------

def depletion_oracle(nd_cm3, barrier_ev, mass=0.2, eps_r=8.9, T=300.0):
    """Depletion-approximation Schottky width (nm) in uniformly doped GaN,
    Boltzmann statistics."""
    vt = Boltzmann * T / Q
    nc = effective_dos(mass, T) * 1e-6
    vn = vt * np.log(nc / nd_cm3)                 # bulk E_c - E_F
    return np.sqrt(2 * eps_r * epsilon_0 * (barrier_ev - vn) / (Q * nd_cm3 * 1e6)) * 1e9


def charge_control_oracle(x=0.25, d=25.0, phi_b=1.0):
    """Triangular-well charge-control sheet density, cm^-2."""
    table = MaterialTable.load()
    gan = table.params("GaN")
    b = table.params("AlGaN", x)
    sigma = b.net_polarization - gan.net_polarization                  # C/m^2
    m = gan.electron_effective_mass * electron_mass
    eps_gan = gan.relative_permittivity * epsilon_0
    eps_b = b.relative_permittivity * epsilon_0
    gamma0 = (9 * pi * hbar * Q ** 2 / (8 * eps_gan * np.sqrt(8 * m))) ** (2 / 3) / Q
    dec = b.conduction_band_offset_vs_GaN

    def ef0(ns):          # m^-2 -> eV above the well bottom
        return gamma0 * ns ** (2 / 3) + pi * hbar ** 2 * ns / m / Q

    def balance(ns):
        return sigma / Q - eps_b * (phi_b - dec + ef0(ns)) / (Q * d * 1e-9) - ns

    return brentq(balance, 1e12, 1e18) * 1e-4


# -- CLI runs ------------------------------------------------------------------------

def sweep_args(d, name):
    return ["--in", str(d / f"{name}.csv"), "--meta", str(d / f"{name}.json")]


def cli_commands(d):
    """Extraction commands on a fixture directory, keyed by a label."""
    return {
        "extract-transfer": ["extract-transfer", *sweep_args(d, "transfer_linear")],
        "extract-transfer-sat": ["extract-transfer", *sweep_args(d, "transfer_saturation"),
                                 "--region", "saturation"],
        "extract-output": ["extract-output", *sweep_args(d, "output")],
        "extract-cv": ["extract-cv", *sweep_args(d, "cv")],
        "mobility": ["mobility", *sweep_args(d, "transfer_linear"), "--cv", str(d / "cv.csv"),
                     "--cv-meta", str(d / "cv.json")],
        "dibl": ["dibl", *sweep_args(d, "transfer_saturation")],
        "report": ["report", "--in", str(d)],
    }


def run_every_command(root, fixture_dir, figures=False):
    """Run every CLI command once into ``root``; returns the exit codes."""
    root.mkdir()
    save_stack(default_stack(), root / "stack.json")
    fig = ["--figures"] if figures else []
    codes = [main(["synth", "--out", str(root / "fx"), "--noise", "0.01", "--seed", "3"]),
             main(["synth", "--out", str(root / "paper"), "--paper"])]
    for key, argv in cli_commands(fixture_dir).items():
        codes.append(main([*argv, "--out", str(root / f"{key}.json"),
                           "--plots", str(root / f"{key}-plots"), *fig]))
    codes.append(main(["report", "--in", str(root / "fx"), "--out", str(root / "fx.json"),
                       "--jobs", "2"]))
    codes.append(main(["bandsim", "--stack", str(root / "stack.json"), "--quantum",
                       "--out", str(root / "band.csv"), "--plots", str(root / "band-plots"),
                       *fig]))
    codes.append(main(["bandsim", "--stack", str(root / "stack.json"), "--sweep", "x",
                       "--values", "0.2", "0.3", "--jobs", "2", "--out", str(root / "sw.csv")]))
    return codes


def tree_differences(a, b):
    """Relative paths that differ (or exist on one side only) between two trees."""
    cmp = filecmp.dircmp(a, b)
    diff = sorted(set(cmp.left_only) | set(cmp.right_only))
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    diff += mismatch + errors
    for sub in cmp.common_dirs:
        diff += [f"{sub}/{p}" for p in tree_differences(a / sub, b / sub)]
    return diff


def normal_equations_exact(x, y):
    """Least-squares (slope, intercept) from the normal equations in exact
    rational arithmetic on the float inputs."""
    X, Y = [Fraction(v) for v in x], [Fraction(v) for v in y]
    n, sx, sy = len(X), sum(X), sum(Y)
    sxx = sum(v * v for v in X)
    sxy = sum(p * q for p, q in zip(X, Y))
    det = n * sxx - sx * sx
    return np.array([float((n * sxy - sx * sy) / det), float((sy * sxx - sx * sxy) / det)])
