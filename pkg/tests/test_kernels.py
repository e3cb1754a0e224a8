import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dtfrac.errors import InputError
from dtfrac.kernels import (
    KernelQuery,
    continuous_frac_kernel_1d,
    discrete_gaussian,
    discrete_gaussian_multiplier,
    frac_fundamental,
    frac_fundamental_quadrature,
    frac_multiplier,
    frac_second_moment,
    fractional_kernel,
    gaussian_kernel,
    grid_fourier_transform,
    multiplier_table,
    multiplier_tail_coefficient,
    periodized,
    power_sum,
)
from dtfrac.specfun import FracParams, subordination_weights


def bessel_oracle(n, h, r, N):
    """Gamma-weighted heat kernel via int t^(v-1) e^(-t/h - c/t) dt = 2 (c h)^(v/2) K_v(2 sqrt(c/h))."""
    with mpmath.workdps(30):
        c = mpmath.mpf(r) ** 2 / 4
        v = n - mpmath.mpf(N) / 2
        integral = 2 * (c * h) ** (v / 2) * mpmath.besselk(v, 2 * mpmath.sqrt(c / h))
        return float(integral / (h**n * mpmath.gamma(n) * (4 * mpmath.pi) ** (mpmath.mpf(N) / 2)))


def half_line(f, *, points=None):
    # split at the break points (kernel cusp near the origin), then a tail to infinity
    edges = [0.0] + list(points or [])
    val = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val += integrate.quad(f, a, b, limit=400, epsabs=1e-14, epsrel=1e-11)[0]
    val += integrate.quad(f, edges[-1], np.inf, limit=400, epsabs=1e-14, epsrel=1e-11)[0]
    return val


def half_line_vec(f, edges=(0.0, 0.5, 2.0, 6.0, 15.0, 40.0, 100.0), nodes=64):
    # composite Gauss-Legendre for vectorised integrands decaying before the last edge
    z, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        x = 0.5 * (b - a) * (z + 1) + a
        total += 0.5 * (b - a) * float(np.dot(w, f(x)))
    return total


# -- Gaussian kernels --------------------------------------------------------


def test_gaussian_examples():
    assert gaussian_kernel(1.0, 0.0) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert gaussian_kernel(1.0, 0.0) == pytest.approx(0.28209479177387814, rel=1e-15)
    assert gaussian_kernel(0.5, [[1.0, 1.0]], N=2)[0] == pytest.approx(math.exp(-1) / (2 * math.pi))
    with pytest.raises(InputError):
        gaussian_kernel(0.0, 1.0)
    with pytest.raises(InputError):
        gaussian_kernel(1.0, 1.0, N=4)


@pytest.mark.parametrize("x, expected", [(0.0, 0.5), (1.0, math.exp(-1) / 2), (-3.0, math.exp(-3) / 2)])
def test_discrete_gaussian_first_step(x, expected):
    # n = 1, h = 1 in 1-D is the resolvent kernel e^{-|x|}/2
    assert discrete_gaussian(1, 1.0, x) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 2, 5, 40, 200])
@pytest.mark.parametrize("h", [0.1, 1.0])
def test_discrete_gaussian_against_bessel(N, n, h):
    for r in (0.05, 0.7, 3.0, 12.0):
        x = np.zeros((1, N))
        x[0, 0] = r
        got = discrete_gaussian(n, h, x if N > 1 else r, N)
        got = float(np.ravel(got)[0])
        ref = bessel_oracle(n, h, r, N)
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_discrete_gaussian_origin():
    # finite Gamma value at the origin when n > N/2, divergent otherwise
    assert discrete_gaussian(2, 1.0, 0.0) == pytest.approx(math.gamma(1.5) / (math.sqrt(4 * math.pi)))
    assert math.isinf(discrete_gaussian(1, 1.0, np.zeros((1, 3)), 3)[0])
    assert math.isinf(discrete_gaussian(1, 1.0, np.zeros((1, 2)), 2)[0])
    assert math.isfinite(discrete_gaussian(2, 1.0, np.zeros((1, 3)), 3)[0])


@pytest.mark.parametrize("n, h", [(1, 1.0), (3, 0.5), (30, 0.2)])
def test_discrete_gaussian_mass_and_second_moment(n, h):
    mass = 2 * half_line(lambda x: discrete_gaussian(n, h, x))
    assert mass == pytest.approx(1.0, abs=1e-8)
    second = 2 * half_line(lambda x: x * x * discrete_gaussian(n, h, x))
    assert second == pytest.approx(2 * n * h, rel=1e-7)


@pytest.mark.parametrize("n, h", [(2, 1.0), (5, 0.3)])
def test_discrete_heat_recurrence(n, h):
    # (1 - h d^2/dx^2) G_n = G_{n-1}
    x = np.array([0.4, 1.3, 2.7])
    d = 1e-3
    g = discrete_gaussian(n, h, x)
    lap = (discrete_gaussian(n, h, x + d) - 2 * g + discrete_gaussian(n, h, x - d)) / d**2
    np.testing.assert_allclose(g - h * lap, discrete_gaussian(n - 1, h, x), rtol=1e-5)


def test_discrete_gaussian_input_errors():
    with pytest.raises(InputError):
        discrete_gaussian(0, 1.0, 1.0)
    with pytest.raises(InputError):
        discrete_gaussian(1, 0.0, 1.0)
    with pytest.raises(InputError):
        discrete_gaussian(1, 1.0, np.ones((2, 2)), 3)


def test_discrete_gaussian_multiplier():
    assert discrete_gaussian_multiplier(2, 1.0, 1.0) == pytest.approx(0.25)
    assert discrete_gaussian_multiplier(3, 0.5, 0.0) == 1.0
    np.testing.assert_allclose(discrete_gaussian_multiplier(2, 1.0, [[1.0, 1.0]], 2), [1 / 9])


def test_discrete_gaussian_fourier_pair():
    n, h, xi = 3, 0.5, 0.8
    ft = 2 * half_line(lambda x: math.cos(xi * x) * discrete_gaussian(n, h, x))
    assert ft == pytest.approx(discrete_gaussian_multiplier(n, h, xi), rel=1e-8)


# -- fractional kernel -------------------------------------------------------


@pytest.mark.parametrize("n", [1, 4])
@pytest.mark.parametrize("h", [0.5, 1.0])
def test_first_order_reduces_to_discrete_gaussian(n, h):
    x = np.array([0.3, 1.0, 4.0])
    np.testing.assert_allclose(fractional_kernel(1.0, n, h, x), discrete_gaussian(n, h, x), rtol=1e-14)
    np.testing.assert_allclose(frac_multiplier(1.0, n, h, x), (1 + h * x**2) ** -n, rtol=1e-14)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("n", [1, 3, 12])
def test_fractional_kernel_mass_and_second_moment(alpha, n):
    h = 0.5
    f = lambda x: fractional_kernel(alpha, n, h, x, tol=1e-12)  # noqa: E731
    mass = 2 * half_line_vec(f)
    assert mass == pytest.approx(1.0, abs=1e-7)
    second = 2 * half_line_vec(lambda x: x * x * f(x))
    assert second == pytest.approx(frac_second_moment(alpha, n, h), rel=1e-6)


def test_second_moment_example():
    assert frac_second_moment(1.0, 1, 1.0) == pytest.approx(2.0)
    second = 2 * half_line(lambda x: x * x * fractional_kernel(1.0, 1, 1.0, x))
    assert abs(second - 2.0) < 1e-4
    with pytest.raises(InputError):
        frac_second_moment(0.5, 0, 1.0)


@given(st.floats(0.1, 0.95), st.integers(1, 30), st.floats(0.05, 3.0))
@settings(max_examples=25, deadline=None)
def test_fractional_kernel_positive(alpha, n, x):
    assert fractional_kernel(alpha, n, 0.7, x) > 0


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("n, h", [(1, 1.0), (5, 0.5), (20, 0.1)])
def test_quadrature_route_agrees(alpha, n, h):
    for x in (0.0, 0.5, 2.0):
        sub = fractional_kernel(alpha, n, h, x)
        quad = frac_fundamental_quadrature(alpha, n, h, x)
        assert sub == pytest.approx(quad, rel=1e-6)


def test_fractional_kernel_fourier_pair():
    a, n, h, xi = 0.5, 3, 0.5, 0.7
    f = lambda x: np.cos(xi * x) * fractional_kernel(a, n, h, x, tol=1e-12)  # noqa: E731
    ft = 2 * half_line_vec(f)
    assert ft == pytest.approx(frac_multiplier(a, n, h, xi), rel=1e-7)


def test_frac_fundamental_diagnostics():
    q = KernelQuery(1, 4, FracParams(0.5, 0.5, 0.5), x=np.array([0.5, 1.0]))
    res = frac_fundamental(q, tol=1e-12)
    assert res.tail <= 1e-12
    assert res.n_terms > 1
    d = res.diagnostics()
    assert set(d) == {"terms", "tail", "warnings"}
    with pytest.raises(InputError):
        frac_fundamental(KernelQuery(1, 4, FracParams(0.5, 0.5, 0.5), xi=1.0))
    with pytest.raises(InputError):
        KernelQuery(4, 1, FracParams(0.5, 0.5, 0.5), x=0.0)
    with pytest.raises(InputError):
        KernelQuery(1, 0, FracParams(0.5, 0.5, 0.5), x=0.0)


@pytest.mark.parametrize("N", [2, 3])
def test_higher_dimensional_kernel_radial(N):
    pts = np.zeros((3, N))
    pts[:, 0] = [0.5, 1.0, 2.0]
    rot = pts[:, ::-1]
    np.testing.assert_allclose(fractional_kernel(0.5, 4, 0.5, pts, N), fractional_kernel(0.5, 4, 0.5, rot, N))


def test_continuous_kernel_mass():
    mass = 2 * half_line(lambda x: float(continuous_frac_kernel_1d(0.6, 1.5, x)))
    assert mass == pytest.approx(1.0, abs=1e-8)


# -- multipliers -------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("n", [1, 7, 50])
@pytest.mark.parametrize("h", [0.5, 1.0])
def test_multiplier_branches_agree(alpha, n, h):
    q = np.linspace(0, 0.95, 12) * h ** (-alpha)
    xi = np.sqrt(q)
    ml = frac_multiplier(alpha, n, h, xi, branch="ml")
    sub = frac_multiplier(alpha, n, h, xi, branch="subordination", tol=1e-13)
    np.testing.assert_allclose(ml, sub, atol=1e-11)
    auto = frac_multiplier(alpha, n, h, np.sqrt(np.array([0.5, 4.0, 100.0])) * h ** (-alpha / 2))
    assert np.all((auto > 0) & (auto <= 1))


def test_multiplier_examples():
    assert frac_multiplier(0.5, 3, 1.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    # n = 1: sum_j phi(0, j-1) (1 + h q)^-j with phi(0, j) = h^(1-a) (1 - h^(1-a))^j
    a, h, q = 0.5, 0.25, 3.0
    c = h ** (1 - a)
    ratio = 1 / (1 + h * q)
    expected = c * ratio / (1 - (1 - c) * ratio)
    assert frac_multiplier(a, 1, h, math.sqrt(q)) == pytest.approx(expected, rel=1e-10)


def test_multiplier_errors():
    with pytest.raises(InputError):
        frac_multiplier(0.5, 2, 1.0, 3.0, branch="ml")
    with pytest.raises(InputError):
        frac_multiplier(0.5, 2, 1.0, 0.1, branch="other")


@pytest.mark.parametrize("alpha", [0.4, 1.0])
def test_multiplier_table_matches_pointwise(alpha):
    q = np.array([0.0, 0.3, 2.0, 50.0])
    tab = multiplier_table(alpha, [1, 5, 9], 0.5, q)
    for i, n in enumerate([1, 5, 9]):
        np.testing.assert_allclose(tab[i], frac_multiplier(alpha, n, 0.5, np.sqrt(q), tol=1e-12), atol=1e-11)


@pytest.mark.parametrize("alpha, n", [(0.5, 1), (0.5, 9), (0.8, 4), (1.0, 1), (1.0, 3)])
def test_tail_coefficient(alpha, n):
    h = 0.5
    q = 1e8
    got = q * frac_multiplier(alpha, n, h, math.sqrt(q), branch="auto" if alpha < 1 else "auto")
    assert got == pytest.approx(multiplier_tail_coefficient(alpha, n, h), rel=1e-4, abs=1e-6)


def test_power_sum():
    w = np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 1.0]])
    r = np.array([0.5, 1.0])
    expected = np.array([[0.5 + 2 * 0.25 + 3 * 0.125, 6.0], [0.125, 1.0]])
    np.testing.assert_allclose(power_sum(w, r, chunk=1), expected)
    np.testing.assert_allclose(power_sum(w, r), expected)


def test_subordination_weights_reproduce_multiplier():
    rows = subordination_weights(0.5, 0.5, [4])
    w = rows.weights[0]
    q = 1.7
    direct = sum(wj * (1 + 0.5 * q) ** -(j + 1) for j, wj in enumerate(w))
    assert direct == pytest.approx(frac_multiplier(0.5, 4, 0.5, math.sqrt(q)), rel=1e-9)


# -- sampled Fourier transforms -----------------------------------------------


def test_periodized_gaussian():
    # periodising a Gaussian multiplier against the direct image sum
    f = lambda y: np.exp(-(y**2))  # noqa: E731
    xi = np.array([0.0, 0.5, 1.0])
    ref = sum(np.exp(-((xi + m * 3.0) ** 2)) for m in range(-20, 21))
    np.testing.assert_allclose(periodized(f, xi, 3.0, images=10), ref, rtol=1e-15)


def test_periodized_tail_correction():
    f = lambda y: 1.0 / (1.0 + y**2)  # noqa: E731
    xi = np.array([0.0, 0.7])
    P = 2.0
    # closed form: sum_m 1/(1+(x+mP)^2) = (pi/P) sinh(2pi/P) / (cosh(2pi/P) - cos(2pi x/P))
    exact = (np.pi / P) * np.sinh(2 * np.pi / P) / (np.cosh(2 * np.pi / P) - np.cos(2 * np.pi * xi / P))
    # the correction removes the 1/y^2 part of the remainder; 1/y^4 is left
    raw = periodized(f, xi, P, images=400)
    fixed = periodized(f, xi, P, images=400, tail_coef=1.0)
    assert np.max(np.abs(raw - exact)) > 1e-4
    np.testing.assert_allclose(fixed, exact, rtol=1e-9)


@pytest.mark.parametrize("alpha, n", [(0.5, 3), (0.8, 10), (1.0, 2)])
def test_grid_transform_matches_periodized_multiplier(alpha, n):
    h, L, M = 0.5, 30.0, 1024
    dx = 2 * L / M
    x = -L + dx * np.arange(M)
    samples = fractional_kernel(alpha, n, h, x)
    if not np.isfinite(samples).all():
        pytest.skip("kernel singular at the origin")
    xi, ft = grid_fourier_transform(samples, dx)
    sel = np.abs(xi) < 4.0
    period = 2 * np.pi / dx
    mfun = lambda y: frac_multiplier(alpha, n, h, y, tol=1e-13)  # noqa: E731
    ref = periodized(mfun, xi[sel], period, images=60, tail_coef=multiplier_tail_coefficient(alpha, n, h))
    assert np.max(np.abs(ft[sel].imag)) < 1e-12
    assert np.max(np.abs(ft[sel].real - ref)) < 1e-8
