"""Normalized complete Fermi-Dirac integrals of order 1/2 and -1/2."""

import numpy as np
from scipy.special import expit

_T, _W = np.polynomial.legendre.leggauss(80)
_T = 0.5 * (_T + 1.0)
_W = 0.5 * _W
_SQRT_PI = np.sqrt(np.pi)


def _quad(eta, weight_fn):
    eta = np.asarray(eta, dtype=float)
    flat = eta.reshape(-1)
    # substitute e = t^2; the occupancy has died off by t^2 = eta + 60. The
    # range is split at the Fermi edge t = sqrt(eta) so that neither panel
    # contains the step, which keeps degenerate arguments accurate.
    edge = np.sqrt(np.maximum(flat, 0.0))
    upper = np.sqrt(np.maximum(flat, 0.0) + 60.0)
    vals = np.zeros_like(flat)
    for a, b in ((np.zeros_like(edge), edge), (edge, upper)):
        t = a[:, None] + (b - a)[:, None] * _T[None, :]
        vals += (weight_fn(t) * expit(flat[:, None] - t * t)) @ _W * (b - a)
    return vals.reshape(eta.shape)


def fermi_half(eta):
    """F_{1/2}(eta) = 2/sqrt(pi) * int_0^inf sqrt(e) / (1 + exp(e - eta)) de."""
    return 4.0 / _SQRT_PI * _quad(eta, lambda t: t * t)


def fermi_minus_half(eta):
    """F_{-1/2}(eta), the eta-derivative of :func:`fermi_half`."""
    return 2.0 / _SQRT_PI * _quad(eta, lambda t: np.ones_like(t))
