import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracburgers.constants import BumpProfile, M0_LEMMA, barrier_fraclap_at
from fracburgers.errors import ContractViolation, ParameterError
from fracburgers.field import SpectralField
from fracburgers.fraclap import (
    FracLapParams,
    Tail,
    apply_singular_integral,
    apply_spectral,
    cauchy_schwarz_constant,
    normalization_constant,
    singular_integral_grid,
    tail_lower_bound,
)

# mpmath at 30 digits: 4^s s Gamma(1/2+s) / (sqrt(pi) Gamma(1-s))
NORMALIZATION = {0.25: 0.199471140200716339, 0.3: 0.230096381681632105, 0.375: 0.270277897640085963,
                 0.45: 0.302370486343053456}


def gaussian(x):
    return np.exp(-np.asarray(x) ** 2)


@pytest.mark.parametrize("s", sorted(NORMALIZATION))
def test_normalization_against_mpmath(s):
    assert normalization_constant(s) == pytest.approx(NORMALIZATION[s], rel=1e-13)


def test_normalization_at_one_half():
    assert normalization_constant(0.5) == pytest.approx(1 / math.pi, rel=1e-14)


def test_normalization_bounded_on_working_range():
    vals = [normalization_constant(s) for s in np.linspace(0.25, 0.5, 26)]
    assert all(0.19 < v < 0.32 for v in vals)
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2])
def test_normalization_domain(s):
    with pytest.raises(ParameterError):
        normalization_constant(s)


def test_params_range():
    with pytest.raises(ParameterError):
        FracLapParams(0.2)
    assert FracLapParams(0.2, relaxed=True).s == 0.2
    with pytest.raises(ParameterError):
        FracLapParams(1.0, relaxed=True)


def test_spectral_constant_is_annihilated():
    f = SpectralField(np.full(64, 3.7), 10.0)
    assert np.max(np.abs(apply_spectral(f, FracLapParams(0.4)).values)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 15), st.floats(0.25, 0.5), st.floats(1.0, 100.0))
def test_spectral_eigenfunctions(k, s, L):
    n = 64
    f = SpectralField.from_function(lambda x: np.sin(2 * np.pi * k * x / L), n, L)
    out = apply_spectral(f, FracLapParams(s)).values
    expect = (2 * np.pi * k / L) ** (2 * s) * f.values
    assert np.max(np.abs(out - expect)) < 1e-12


def test_spectral_commutes_with_reflection():
    L, n = 40.0, 256
    f = SpectralField.from_function(lambda x: np.exp(-x ** 2) + 0.2 * np.exp(-(x - 3) ** 2), n, L)
    refl = np.concatenate([[f.values[0]], f.values[1:][::-1]])  # x -> -x on the grid
    a = apply_spectral(f, 0.4).values
    b = apply_spectral(f.with_values(refl), 0.4).values
    np.testing.assert_allclose(np.concatenate([[b[0]], b[1:][::-1]]), a, atol=1e-12)


def test_singular_integral_zero_function():
    out = apply_singular_integral(lambda y: np.zeros_like(y), np.linspace(-1, 1, 5), 0.4, 5.0, tail=Tail.zero())
    assert np.all(out == 0)


def test_singular_integral_requires_tail():
    with pytest.raises(ContractViolation):
        apply_singular_integral(gaussian, 0.0, 0.4, 5.0)


def test_singular_integral_refuses_critical():
    with pytest.raises(ParameterError):
        apply_singular_integral(gaussian, 0.0, 0.5, 5.0, tail=Tail.zero())


def test_gaussian_on_line_against_mpmath():
    # C_s int (2 - 2 e^{-h^2}) h^{-1-2s} dh at s=0.45 (mpmath, 30 digits)
    val = apply_singular_integral(gaussian, 0.0, 0.45, 12.0, h=2.5e-4, tail=Tail.zero())
    assert val == pytest.approx(1.08592951361729496, abs=1e-4)


def test_constant_tail_on_constant_function():
    val = apply_singular_integral(lambda y: np.full_like(y, 2.0), 0.3, 0.35, 3.0, tail=Tail.constant(2.0))
    assert abs(val) < 1e-14


def test_periodic_sine_matches_spectral():
    L, k, s = 10.0, 2, 0.4
    func = lambda x: np.sin(2 * np.pi * k * x / L)
    pts = np.linspace(-4, 4, 9)
    val = apply_singular_integral(func, pts, s, 0.0, h=1e-3, period=L)
    expect = (2 * np.pi * k / L) ** (2 * s) * func(pts)
    assert np.max(np.abs(val - expect)) < 1e-4


def test_power_tail_matches_direct_quadrature():
    # f = A|y|^{2a} everywhere; the power tail from r_cut must match a wider direct window
    A, a, s = 0.7, 0.1, 0.45
    func = lambda y: A * np.abs(y) ** (2 * a)
    near = apply_singular_integral(func, 0.5, s, 4.0, h=1e-3, tail=Tail.power(A, a))
    wide = apply_singular_integral(func, 0.5, s, 40.0, h=1e-3, tail=Tail.power(A, a))
    assert near == pytest.approx(wide, abs=1e-6)


def test_positive_at_strict_maximum():
    for x0 in (0.0, 0.7):
        val = apply_singular_integral(lambda y: gaussian(y - x0), x0, 0.3, 10.0, tail=Tail.zero())
        assert val > 0


def test_even_function_gives_even_result():
    pts = np.array([-1.3, 1.3])
    val = apply_singular_integral(gaussian, pts, 0.35, 10.0, tail=Tail.zero())
    assert val[0] == pytest.approx(val[1], abs=1e-14)


def test_barrier_negative_outside_support():
    prof = BumpProfile()
    t = -0.1
    edge = 2.0 - M0_LEMMA * t  # support of beta(|x| + M0 t) ends at |x| = 2 - M0 t
    val = barrier_fraclap_at(prof, np.array([edge + 0.05, -(edge + 0.3)]), t, M0_LEMMA, 0.45)
    assert np.all(val < 0)


@pytest.mark.parametrize("s", [0.3, 0.45])
def test_grid_periodic_matches_spectral(s):
    L, n = 40.0, 4096
    f = SpectralField.from_function(lambda x: np.exp(-(x / 0.5) ** 2), n, L)
    grid_val = singular_integral_grid(f.values, f.dx, s, periodic=True)
    spec = apply_spectral(f, s).values
    assert np.max(np.abs(grid_val - spec)) < 2e-4


def test_grid_compact_support_matches_pointwise():
    x = np.linspace(-6, 6, 6001)
    v = np.exp(-x ** 2 / (1 - np.minimum(x ** 2, 0.999999) / 25.0)) * (np.abs(x) < 5)
    func = lambda y: np.interp(y, x, v, left=0.0, right=0.0)
    g = singular_integral_grid(v, x[1] - x[0], 0.35)
    pts = [2000, 3000, 4100]
    p = apply_singular_integral(func, x[pts], 0.35, 12.0, h=2e-4, tail=Tail.zero())
    np.testing.assert_allclose(g[pts], p, atol=2e-3)


def test_grid_needs_tail_for_nonvanishing_edges():
    with pytest.raises(ContractViolation):
        singular_integral_grid(np.ones(64), 0.1, 0.4)


def test_cauchy_schwarz_constant_at_half():
    assert cauchy_schwarz_constant(0.5) == pytest.approx(math.sqrt(2 / 3), rel=1e-15)
    assert cauchy_schwarz_constant(0.5) == pytest.approx(0.8165, abs=1e-4)


def test_tail_lower_bound_constant_function():
    x = np.linspace(-5, 5, 1001)
    vals = np.full_like(x, 1.5)
    tb = tail_lower_bound((x, vals), 0.0, 1.0, 0.4, 1.0, tail=Tail.constant(1.5))
    assert abs(tb.lower_bound) < 1e-12
    assert tb.lower_bound <= 0.0 + 1e-12


def test_tail_lower_bound_gaussian():
    s = 0.45
    width = 1.0
    amp = 1 / math.sqrt(width * math.sqrt(math.pi / 2))  # unit L2 norm
    L, n = 80.0, 8192
    f = SpectralField.from_function(lambda y: amp * np.exp(-(y / width) ** 2), n, L)
    x0 = 0.0
    direct = apply_singular_integral(lambda y: amp * np.exp(-(y / width) ** 2), x0, s, 30.0,
                                     h=5e-4, tail=Tail.zero())
    for r in (0.5, 1.0, 2.0):
        tb = tail_lower_bound(f, x0, r, s, 1.0)
        assert tb.lower_bound <= direct
        # recover the far-field integral and compare with its Cauchy-Schwarz bound
        c_s = normalization_constant(s)
        far = amp / (s * r ** (2 * s)) - tb.lower_bound / c_s
        assert 0 < far <= tb.cauchy_schwarz_bound


def test_tail_lower_bound_contracts():
    f = SpectralField.from_function(gaussian, 256, 20.0)
    with pytest.raises(ParameterError):
        tail_lower_bound(f, 0.0, 0.0, 0.4, 1.0)
    with pytest.raises(ContractViolation):
        tail_lower_bound(f, 1.0, 1.0, 0.4, 1.0)  # not the maximum
    with pytest.raises(ContractViolation):
        tail_lower_bound(f, 0.01, 1.0, 0.4, 1.0)  # not a node
