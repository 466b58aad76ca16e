"""Parameter extraction from transfer, output and C-V sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (AllPointsGuarded, ChargeCurveMismatch, FlatCapacitance, NoLinearRegion,
                     NonPositiveArea, NoSaturation, NoSubthresholdRegion, ThresholdNotCrossed,
                     ValidationError)
from .measurement import DeviceGeometry, Kind, SweepCurve, SweepFamily
from .numerics import (DEFAULT_SMOOTHING, SmoothingSpec, argmax_smoothed, cumtrapz, derivative,
                       linfit, smooth)

LINEAR_REGION_CAP = 0.1        # V, upper V_DS bound for the ohmic fit
OHMIC_INTERCEPT_FRACTION = 0.05
NOISE_FLOOR_FACTOR = 3.0
SUBTHRESHOLD_CEILING = 0.1     # fraction of the curve maximum
KNEE_SLOPE_FRACTION = 0.1
CHARGE_GUARD_FRACTION = 0.01
CC_CURRENT_PER_SQUARE = 1e-6   # A, constant-current threshold per W/L


def _require(curve, kind):
    if curve.kind is not kind:
        raise ValidationError(f"expected a {kind.value} curve, got {curve.kind.value}")


@dataclass(frozen=True)
class GmResult:
    vgs: np.ndarray
    gm: np.ndarray
    peak: float
    vgs_at_peak: float


def extract_gm(curve: SweepCurve, spec: SmoothingSpec = DEFAULT_SMOOTHING) -> GmResult:
    """Transconductance dI_D/dV_GS of the smoothed transfer curve and its peak."""
    _require(curve, Kind.TRANSFER)
    gm = derivative(curve.x, smooth(curve.y, spec))
    v_peak, g_peak = argmax_smoothed(curve.x, gm, spec)
    return GmResult(curve.x, gm, g_peak, v_peak)


@dataclass(frozen=True)
class SSResult:
    ss: float                 # mV/decade
    window: tuple             # (V_lo, V_hi) of the detected subthreshold region
    vgs_at_min: float
    floor: float
    ceiling: float


def extract_ss(curve: SweepCurve, spec: SmoothingSpec = DEFAULT_SMOOTHING,
               floor_factor=NOISE_FLOOR_FACTOR, ceiling_fraction=SUBTHRESHOLD_CEILING) -> SSResult:
    """Subthreshold swing as the smallest reciprocal log-slope in the
    subthreshold region.

    The region is the longest contiguous run of samples whose current lies
    between ``floor_factor`` times the smallest measured |I_D| and
    ``ceiling_fraction`` of the largest, and whose log-current is rising.
    """
    _require(curve, Kind.TRANSFER)
    i = np.abs(curve.y)
    positive = i[i > 0]
    if positive.size < 4:
        raise NoSubthresholdRegion("fewer than four samples carry current")
    floor = floor_factor * positive.min()
    ceiling = ceiling_fraction * i.max()
    if ceiling < 10 * floor:
        raise NoSubthresholdRegion(
            f"less than one decade between noise floor {floor:.3g} A and {ceiling:.3g} A")
    logi = np.log10(np.where(i > 0, i, positive.min()))
    slope = derivative(curve.x, smooth(logi, spec))
    ok = (i >= floor) & (i <= ceiling) & (slope > 0)

    best = (0, 0)
    start = None
    for k, flag in enumerate(np.append(ok, False)):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            if k - start > best[1] - best[0]:
                best = (start, k)
            start = None
    lo, hi = best
    if hi - lo < 4:
        raise NoSubthresholdRegion(f"only {hi - lo} qualifying subthreshold samples")
    j = lo + int(np.argmax(slope[lo:hi]))
    return SSResult(1e3 / slope[j], (float(curve.x[lo]), float(curve.x[hi - 1])),
                    float(curve.x[j]), float(floor), float(ceiling))


@dataclass(frozen=True)
class OnOffResult:
    i_on: float
    i_off: float
    ratio: float              # nan when I_OFF <= 0
    vgs_on: float
    vgs_off: float
    non_positive_ioff: bool = False


def extract_on_off(curve: SweepCurve) -> OnOffResult:
    """I_ON at the highest swept V_GS, I_OFF at the lowest."""
    _require(curve, Kind.TRANSFER)
    i_on = float(curve.y[-1])
    i_off = float(curve.y[0])
    bad = i_off <= 0
    ratio = float("nan") if bad else i_on / i_off
    return OnOffResult(i_on, i_off, ratio, float(curve.x[-1]), float(curve.x[0]), bad)


def extract_vth_cv(curve: SweepCurve, spec: SmoothingSpec = DEFAULT_SMOOTHING) -> float:
    """Gate voltage of the steepest capacitance rise."""
    _require(curve, Kind.CV)
    c = curve.y
    if c.max() < 2 * c.min():
        raise FlatCapacitance(f"capacitance rises only {c.max() / c.min():.3g}x")
    dcdv = derivative(curve.x, smooth(c, spec))
    v, _ = argmax_smoothed(curve.x, dcdv, spec)
    return v


@dataclass(frozen=True)
class ChargeCurve:
    vgs: np.ndarray
    q: np.ndarray             # C/cm^2


def integrate_charge(curve: SweepCurve, geometry: DeviceGeometry | None = None,
                     area_cm2: float | None = None) -> ChargeCurve:
    """Channel charge per area, Q(V) = (1/area) * integral of C from the sweep start.

    The area defaults to the gate area W*L.
    """
    _require(curve, Kind.CV)
    if area_cm2 is None:
        if geometry is None:
            raise ValidationError("integrate_charge needs a geometry or an explicit area")
        area_cm2 = geometry.area_cm2
    if not area_cm2 > 0:
        raise NonPositiveArea(f"area must be positive, got {area_cm2}")
    return ChargeCurve(curve.x, cumtrapz(curve.x, curve.y) / area_cm2)


@dataclass(frozen=True)
class RonResult:
    ron_ohm_um: float
    ron_ohm: float
    vgs_used: float
    intercept: float
    rms_residual: float
    n_points: int
    non_ohmic: bool


def extract_ron(family: SweepFamily, geometry: DeviceGeometry, vds_cap=LINEAR_REGION_CAP) -> RonResult:
    """On-resistance from the low-V_DS slope of the highest-V_GS output curve.

    A fit intercept above 5% of the largest fitted current flags the contact
    as non-ohmic; the value is still returned.
    """
    if family.kind is not Kind.OUTPUT:
        raise ValidationError(f"expected an output family, got {family.kind.value}")
    curve = family.curves[-1]
    sel = np.flatnonzero(curve.x <= vds_cap)
    if sel.size < 3:
        raise NoLinearRegion(f"only {sel.size} samples with V_DS <= {vds_cap} V")
    slope, intercept, rms = linfit(curve.x, curve.y, sel)
    if not slope > 0:
        raise NoLinearRegion(f"non-positive output conductance {slope:.3g} S")
    fitted = slope * curve.x[sel] + intercept
    non_ohmic = abs(intercept) >= OHMIC_INTERCEPT_FRACTION * np.abs(fitted).max()
    ron = 1.0 / slope
    return RonResult(ron * geometry.width, ron, curve.fixed_bias, intercept, rms,
                     int(sel.size), bool(non_ohmic))


def extract_vsat(curve: SweepCurve, spec: SmoothingSpec = DEFAULT_SMOOTHING,
                 fraction=KNEE_SLOPE_FRACTION) -> float:
    """Knee voltage: first V_DS where the smoothed output conductance drops to
    ``fraction`` of its mean over the first three samples.

    The crossing is linearly interpolated between the bracketing samples.
    """
    _require(curve, Kind.OUTPUT)
    g = derivative(curve.x, smooth(curve.y, spec))
    target = fraction * g[:3].mean()
    below = np.flatnonzero(g <= target)
    if below.size == 0 or not target > 0:
        raise NoSaturation("output conductance never falls to "
                           f"{fraction:.0%} of its initial value")
    k = int(below[0])
    if k == 0:
        return float(curve.x[0])
    x0, x1, g0, g1 = curve.x[k - 1], curve.x[k], g[k - 1], g[k]
    return float(x0 + (g0 - target) * (x1 - x0) / (g0 - g1))


@dataclass(frozen=True)
class VthResult:
    vth: float
    intercept: float          # tangent V-axis intercept before the drain correction
    drain_correction: float
    vgs_at_gm_peak: float
    gm_peak: float


def extract_vth_transfer(curve: SweepCurve, spec: SmoothingSpec = DEFAULT_SMOOTHING) -> VthResult:
    """Linear extrapolation of the tangent at peak transconductance, less V_DS/2."""
    gm = extract_gm(curve, spec)
    k = int(np.flatnonzero(curve.x == gm.vgs_at_peak)[0])
    i_s = smooth(curve.y, spec)[k]
    intercept = gm.vgs_at_peak - i_s / gm.peak
    corr = curve.fixed_bias / 2
    return VthResult(float(intercept - corr), float(intercept), corr, gm.vgs_at_peak, gm.peak)


def constant_current_vth(curve: SweepCurve, i_target: float) -> float:
    """First V_GS where I_D reaches ``i_target``, interpolated in log current."""
    i = curve.y
    above = np.flatnonzero(i >= i_target)
    if above.size == 0 or above[0] == 0 or np.any(i[: above[0]] <= 0):
        raise ThresholdNotCrossed(
            f"curve at V_DS={curve.fixed_bias} V does not cross {i_target:.3g} A from below")
    k = int(above[0])
    l0, l1, lt = np.log10(i[k - 1]), np.log10(i[k]), np.log10(i_target)
    x0, x1 = curve.x[k - 1], curve.x[k]
    return float(x0 + (lt - l0) * (x1 - x0) / (l1 - l0))


@dataclass(frozen=True)
class DiblResult:
    dibl: float               # mV/V
    vth_low: float
    vth_high: float
    vds_low: float
    vds_high: float
    i_target: float


def extract_dibl(low: SweepCurve, high: SweepCurve, geometry: DeviceGeometry,
                 spec: SmoothingSpec = DEFAULT_SMOOTHING) -> DiblResult:
    """Drain-induced threshold shift from constant-current thresholds at
    1 uA * W/L on a low- and a high-drain-bias transfer curve."""
    _require(low, Kind.TRANSFER)
    _require(high, Kind.TRANSFER)
    if not low.fixed_bias < high.fixed_bias:
        raise ValidationError("the low-bias curve must have the smaller V_DS")
    i_target = CC_CURRENT_PER_SQUARE * geometry.width / geometry.length
    v_lo = constant_current_vth(low, i_target)
    v_hi = constant_current_vth(high, i_target)
    dibl = (v_lo - v_hi) / (high.fixed_bias - low.fixed_bias) * 1e3
    return DiblResult(dibl, v_lo, v_hi, low.fixed_bias, high.fixed_bias, i_target)


@dataclass(frozen=True)
class MobilityCurve:
    vgs: np.ndarray
    mu: np.ndarray            # cm^2/(V s); nan where the charge guard excludes a point
    peak: float
    vgs_at_peak: float
    vds: float


def align_charge(curve: SweepCurve, charge: ChargeCurve):
    """Put a transfer curve and a charge curve on their common V_GS grid."""
    from .measurement import common_grid
    g = common_grid([curve.x, charge.vgs])
    i = np.interp(g, curve.x, curve.y)
    q = np.interp(g, charge.vgs, charge.q)
    return (SweepCurve(g, i, curve.fixed_bias, curve.kind, curve.temperature),
            ChargeCurve(g, q))


def extract_mobility(curve: SweepCurve, charge: ChargeCurve, geometry: DeviceGeometry,
                     guard=CHARGE_GUARD_FRACTION) -> MobilityCurve:
    """Field-effect mobility mu = I_D L / (W Q V_DS) on points where Q exceeds
    ``guard`` times its maximum."""
    _require(curve, Kind.TRANSFER)
    if len(curve.x) != len(charge.vgs) or not np.array_equal(curve.x, charge.vgs):
        raise ChargeCurveMismatch("transfer and charge curves are not on the same V_GS grid")
    if not curve.fixed_bias > 0:
        raise ValidationError("mobility needs a positive drain bias")
    q = np.asarray(charge.q, dtype=float)
    ok = q > guard * q.max()
    if not ok.any():
        raise AllPointsGuarded("no point has charge above the division guard")
    mu = np.full(len(q), np.nan)
    mu[ok] = curve.y[ok] * geometry.length / (geometry.width * q[ok] * curve.fixed_bias)
    k = int(np.nanargmax(mu))
    return MobilityCurve(curve.x, mu, float(mu[k]), float(curve.x[k]), curve.fixed_bias)


def mobility_bias_trend(family: SweepFamily, charge: ChargeCurve, geometry: DeviceGeometry,
                        guard=CHARGE_GUARD_FRACTION):
    """(V_DS, peak mobility) for every curve of a transfer family, sorted by V_DS."""
    if family.kind is not Kind.TRANSFER:
        raise ValidationError(f"expected a transfer family, got {family.kind.value}")
    out = []
    for c in family.curves:
        c2, q2 = align_charge(c, charge)
        out.append((c.fixed_bias, extract_mobility(c2, q2, geometry, guard).peak))
    return sorted(out)
