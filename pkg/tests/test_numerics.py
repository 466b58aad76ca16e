import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hemtkit.errors import (DegenerateWindow, SeriesShorterThanWindow, TooFewPoints,
                            ValidationError)
from hemtkit.numerics import (DEFAULT_SMOOTHING, SmoothingSpec, argmax_smoothed, cumtrapz,
                              derivative, linfit, smooth)

from _support import normal_equations_exact

coef = st.floats(-10, 10, allow_nan=False)


def nonuniform_grid(seed, n=25):
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.uniform(0.05, 0.3, n)) - 1.0


@settings(max_examples=50, deadline=None)
@given(a=coef, b=coef, c=coef, seed=st.integers(0, 10_000))
def test_derivative_exact_on_quadratics(a, b, c, seed):
    x = nonuniform_grid(seed)
    y = a * x ** 2 + b * x + c
    scale = 1 + abs(a) + abs(b) + abs(c)
    np.testing.assert_allclose(derivative(x, y), 2 * a * x + b, rtol=0, atol=1e-10 * scale)


def test_derivative_needs_three_points():
    with pytest.raises(TooFewPoints):
        derivative([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValidationError):
        derivative([0.0, 2.0, 1.0], [0.0, 1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(a=coef, b=coef, seed=st.integers(0, 10_000))
def test_cumtrapz_exact_on_affine(a, b, seed):
    x = nonuniform_grid(seed)
    q = cumtrapz(x, a * x + b)
    exact = a / 2 * (x ** 2 - x[0] ** 2) + b * (x - x[0])
    np.testing.assert_allclose(q, exact, rtol=0, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)
    assert q[0] == 0.0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 40))
def test_linfit_matches_normal_equations(seed, n):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(-3, 3, n))
    if np.ptp(x) < 1e-3:
        return
    y = rng.normal(size=n) + 2.5 * x
    s, i, rms = linfit(x, y)
    exact = normal_equations_exact(x, y)
    # norm-wise: the intercept alone can be ill-conditioned when it is near zero
    assert np.linalg.norm([s, i] - exact) <= 1e-12 * np.linalg.norm(exact)
    s0, i0 = exact
    assert rms == pytest.approx(np.sqrt(np.mean((y - s0 * x - i0) ** 2)), rel=1e-9, abs=1e-12)


def test_linfit_window_and_degenerate():
    x = np.arange(10.0)
    y = np.where(x < 5, 3 * x + 1, 0.0)
    s, i, rms = linfit(x, y, slice(0, 5))
    assert (s, i) == pytest.approx((3.0, 1.0))
    assert rms == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DegenerateWindow):
        linfit([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateWindow):
        linfit([1.0], [1.0])


@settings(max_examples=50, deadline=None)
@given(a=coef, b=coef, c=coef, n=st.integers(7, 60))
def test_smoothing_preserves_quadratics(a, b, c, n):
    x = np.linspace(-1, 1, n)
    y = a * x ** 2 + b * x + c
    scale = 1 + abs(a) + abs(b) + abs(c)
    np.testing.assert_allclose(smooth(y), y, rtol=0, atol=1e-12 * scale)


def test_smoothing_spec_validation():
    with pytest.raises(ValidationError):
        SmoothingSpec(window=6)
    with pytest.raises(ValidationError):
        SmoothingSpec(window=5, poly_order=5)
    with pytest.raises(ValidationError):
        SmoothingSpec(window=1)
    with pytest.raises(SeriesShorterThanWindow):
        smooth(np.ones(5), SmoothingSpec(7, 2))


def test_smoothing_reduces_noise():
    rng = np.random.default_rng(1)
    y = rng.normal(size=2000)
    assert smooth(y).std() < 0.7 * y.std()


def test_argmax_smoothed_parabola_and_ties():
    x = np.linspace(-1, 1, 41)
    v, peak = argmax_smoothed(x, 1 - (x - 0.3) ** 2)
    assert v == pytest.approx(0.3)
    assert peak == pytest.approx(1.0)
    # a flat series ties everywhere: the leftmost sample wins
    v, _ = argmax_smoothed(x, np.full_like(x, 2.0))
    assert v == x[0]


def test_default_spec():
    assert DEFAULT_SMOOTHING == SmoothingSpec(7, 2)


# -- literal examples ----------------------------------------------------------

def test_derivative_small_examples():
    x = np.array([0.0, 1.0, 2.0])
    np.testing.assert_array_equal(derivative(x, x), [1.0, 1.0, 1.0])
    np.testing.assert_allclose(derivative(x, x ** 2), [0.0, 2.0, 4.0], atol=1e-15)


def test_derivative_sine_second_order():
    # error of the three-point stencils: central h^2/6 |f'''|, one-sided h^2/3 |f'''|
    for n in (101, 201):
        x = np.linspace(0, np.pi, n)
        h = x[1] - x[0]
        err = np.abs(derivative(x, np.sin(x)) - np.cos(x)).max()
        assert err <= h ** 2 / 3 * 1.01
    # halving h quarters the error
    e1 = np.abs(derivative(np.linspace(0, np.pi, 101), np.sin(np.linspace(0, np.pi, 101)))
                - np.cos(np.linspace(0, np.pi, 101))).max()
    e2 = np.abs(derivative(np.linspace(0, np.pi, 201), np.sin(np.linspace(0, np.pi, 201)))
                - np.cos(np.linspace(0, np.pi, 201))).max()
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)


def test_derivative_is_linear():
    x = nonuniform_grid(3, 30)
    y1, y2 = np.sin(x), np.exp(x)
    lhs = derivative(x, 2.5 * y1 - 0.75 * y2)
    rhs = 2.5 * derivative(x, y1) - 0.75 * derivative(x, y2)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-14, atol=1e-14)


def test_smooth_constant_and_affine_unchanged():
    np.testing.assert_allclose(smooth(np.full(20, 3.25)), 3.25, rtol=0, atol=1e-14)
    y = 0.5 * np.arange(20.0) - 2
    np.testing.assert_allclose(smooth(y, SmoothingSpec(5, 1)), y, atol=1e-13)


def test_smooth_reduces_rms_deviation_of_noisy_sine():
    x = np.linspace(0, 2 * np.pi, 400)
    clean = np.sin(x)
    noisy = clean + 0.05 * np.random.default_rng(4).standard_normal(len(x))
    before = np.sqrt(np.mean((noisy - clean) ** 2))
    after = np.sqrt(np.mean((smooth(noisy) - clean) ** 2))
    assert after < before


def test_smooth_idempotent_on_quadratics():
    y = np.linspace(-2, 2, 30) ** 2
    np.testing.assert_allclose(smooth(smooth(y)), smooth(y), atol=1e-12)


def test_cumtrapz_examples():
    assert cumtrapz([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])[-1] == 2.0
    x = np.sort(np.random.default_rng(0).uniform(0, 1, 17))
    x = np.concatenate(([0.0], x, [1.0]))
    assert cumtrapz(x, x)[-1] == pytest.approx(0.5, abs=1e-15)
    x = np.linspace(0, 1, 1001)
    assert abs(cumtrapz(x, x ** 2)[-1] - 1 / 3) < 1e-6
    with pytest.raises(TooFewPoints):
        cumtrapz([0.0], [1.0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 1000))
def test_cumtrapz_monotone_for_nonnegative(seed):
    rng = np.random.default_rng(seed)
    x = np.cumsum(rng.uniform(0.01, 1, 30))
    assert np.all(np.diff(cumtrapz(x, rng.uniform(0, 5, 30))) >= 0)


def test_linfit_examples():
    x = np.linspace(-2, 5, 9)
    s, i, r = linfit(x, 3 * x - 1)
    assert (s, i) == pytest.approx((3.0, -1.0))
    assert r == pytest.approx(0.0, abs=1e-14)
    assert linfit([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]) == (1.0, 0.0, 0.0)


def test_argmax_equal_maxima_leftmost():
    x = np.linspace(-0.5, 1.5, 81)
    v, _ = argmax_smoothed(x, np.cos(2 * np.pi * x))     # maxima at 0 and 1
    assert v == pytest.approx(0.0, abs=1e-12)


def test_argmax_noisy_gaussian_bump():
    x = np.linspace(-3, 3, 121)
    clean = np.exp(-((x - 0.4) ** 2) / 0.5)
    noisy = clean + 0.01 * np.random.default_rng(2).standard_normal(len(x))
    v, _ = argmax_smoothed(x, noisy)
    assert abs(v - x[np.argmax(clean)]) <= (x[1] - x[0]) + 1e-12


def test_kernels_bitwise_deterministic():
    x = nonuniform_grid(9, 50)
    y = np.sin(3 * x)
    assert np.array_equal(derivative(x, y), derivative(x, y))
    assert np.array_equal(smooth(y), smooth(y))
    assert linfit(x, y) == linfit(x, y)
