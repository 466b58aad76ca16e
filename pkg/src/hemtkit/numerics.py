"""Numerical kernels shared by the extraction routines and the band solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.signal import savgol_filter

from .errors import DegenerateWindow, SeriesShorterThanWindow, TooFewPoints, ValidationError


@dataclass(frozen=True)
class SmoothingSpec:
    """Savitzky-Golay window (odd sample count) and polynomial order."""

    window: int = 7
    poly_order: int = 2

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValidationError(f"smoothing window must be odd and >= 3, got {self.window}")
        if not 1 <= self.poly_order < self.window:
            raise ValidationError(
                f"poly_order must satisfy 1 <= poly_order < window, got {self.poly_order}")


DEFAULT_SMOOTHING = SmoothingSpec()


def _as_grid(x, y, min_len):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("x and y must be 1-D arrays of equal length")
    if len(x) < min_len:
        raise TooFewPoints(f"need at least {min_len} points, got {len(x)}")
    if np.any(np.diff(x) <= 0):
        raise ValidationError("x must be strictly increasing")
    return x, y


def derivative(x, y) -> np.ndarray:
    """dy/dx on a possibly non-uniform grid.

    Second-order central differences in the interior and second-order
    one-sided stencils at both ends, so quadratics are differentiated exactly.
    """
    x, y = _as_grid(x, y, 3)
    return np.gradient(y, x, edge_order=2)


def smooth(y, spec: SmoothingSpec = DEFAULT_SMOOTHING) -> np.ndarray:
    """Centered moving least-squares polynomial smoothing.

    Edge samples are taken from a one-sided fit over the first/last
    ``spec.window`` samples, so any polynomial of degree <= ``poly_order``
    passes through unchanged.
    """
    y = np.asarray(y, dtype=float)
    if len(y) < spec.window:
        raise SeriesShorterThanWindow(
            f"series of length {len(y)} is shorter than window {spec.window}")
    return savgol_filter(y, spec.window, spec.poly_order, mode="interp")


def cumtrapz(x, y) -> np.ndarray:
    """Running trapezoid integral of y over x, starting at zero."""
    x, y = _as_grid(x, y, 2)
    return cumulative_trapezoid(y, x, initial=0.0)


def linfit(x, y, window=None):
    """Ordinary least squares line over ``window`` (a slice or index array).

    Returns ``(slope, intercept, rms_residual)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        x = x[window]
        y = y[window]
    if len(x) < 2 or np.ptp(x) == 0:
        raise DegenerateWindow("linear fit needs at least two distinct abscissae")
    xm = x.mean()
    ym = y.mean()
    dx = x - xm
    slope = float(np.dot(dx, y - ym) / np.dot(dx, dx))
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    return slope, intercept, float(np.sqrt(np.mean(resid ** 2)))


def argmax_smoothed(x, y, spec: SmoothingSpec = DEFAULT_SMOOTHING):
    """Location and value of the maximum of the smoothed series.

    Ties go to the smallest x.
    """
    x = np.asarray(x, dtype=float)
    ys = smooth(y, spec)
    top = ys.max()
    # smoothing a flat run can leave last-bit differences; treat those as ties
    tol = 8 * np.finfo(float).eps * max(abs(top), np.abs(ys).max())
    i = int(np.flatnonzero(ys >= top - tol)[0])
    return float(x[i]), float(ys[i])
