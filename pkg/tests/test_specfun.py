import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dtfrac.cesaro import cauchy_convolve, cesaro_values
from dtfrac.errors import DomainError, InputError, NumericalError
from dtfrac.fracdiff import MeshSequence, caputo_difference
from dtfrac.specfun import (
    FracParams,
    ml_continuous,
    ml_discrete,
    ml_discrete_series,
    ml_sequence,
    mwright,
    scaled_wright_continuous,
    subordination_weights,
    wright_binomial,
    wright_contour,
    wright_discrete,
    wright_integral,
    wright_rows,
    wright_series,
    wright_table,
)


def mp_series_pow(gamma, n_max):
    # Taylor coefficients of (1 - z)^gamma
    out = [mpmath.mpf(1)]
    for k in range(1, n_max + 1):
        out.append(out[-1] * (k - 1 - gamma) / k)
    return out


def mp_mul(a, b):
    n = len(a)
    return [mpmath.fsum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]


def mp_wright_column(alpha, beta, h, n_max, j):
    """Coefficients of h^beta (1-z)^-beta (1 - h^(1-alpha) (1-z)^alpha)^j at 60 digits."""
    with mpmath.workdps(60):
        a, b, hh = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(h)
        g = [-(hh ** (1 - a)) * c for c in mp_series_pow(a, n_max)]
        g[0] += 1
        col = [hh**b * c for c in mp_series_pow(-b, n_max)]
        for _ in range(j):
            col = mp_mul(col, g)
        return [float(c) for c in col]


def mp_ml(alpha, beta, lam, n, h):
    # direct definition: sum_j h^(a j + b) k^(a j + b)(n - 1) lam^j
    with mpmath.workdps(50):
        a, b, hh, lm = (mpmath.mpf(v) for v in (alpha, beta, h, lam))

        def term(j):
            g = a * j + b
            k = mpmath.rf(g, n - 1) / mpmath.factorial(n - 1)
            return hh**g * k * lm**j

        return float(mpmath.nsum(term, [0, mpmath.inf]))


# -- discrete Mittag-Leffler -------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 5, 40])
@pytest.mark.parametrize("h, lam", [(1.0, -0.5), (0.5, 0.9), (0.25, -1.5)])
def test_ml_first_order_closed_form(n, h, lam):
    # alpha = beta = 1 sums to a geometric-type series h (1 - h lam)^-n
    assert ml_discrete(1.0, 1.0, lam, n, h) == pytest.approx(h * (1.0 - h * lam) ** (-n), rel=1e-12)


@pytest.mark.parametrize(
    "alpha, beta, lam, n, h",
    [(0.5, 1.0, -0.5, 1, 1.0), (0.5, 1.0, -0.5, 7, 1.0), (0.3, 0.7, 0.4, 12, 0.5),
     (0.9, 1.0, -2.0, 30, 0.25)],
)
def test_ml_against_mpmath(alpha, beta, lam, n, h):
    assert ml_discrete(alpha, beta, lam, n, h) == pytest.approx(mp_ml(alpha, beta, lam, n, h), rel=1e-11)


def test_ml_zero_lambda_is_power_kernel():
    h, b = 0.5, 0.7
    for n in (1, 3, 9):
        assert ml_discrete(0.4, b, 0.0, n, h) == pytest.approx(h**b * cesaro_values(b, n - 1)[n - 1])


def test_ml_first_term():
    # n = 1 keeps only k^g(0) = 1: sum_j h^(a j + b) lam^j
    a, b, h, lam = 0.5, 1.0, 1.0, -0.5
    assert ml_discrete(a, b, lam, 1, h) == pytest.approx(1.0 / (1.0 + 0.5), rel=1e-13)


def mp_ml_cauchy(alpha, beta, lam, n, h, r=0.95):
    # Cauchy integral of the generating function over |z| = r, adaptive quadrature
    m = n - 1
    with mpmath.workdps(18):
        def f(t):
            w = 1 - r * mpmath.expj(t)
            g = mpmath.mpf(h) ** beta * w ** (-beta) / (1 - lam * mpmath.mpf(h) ** alpha * w ** (-alpha))
            return (g * mpmath.expj(-m * t)).real

        return float(mpmath.quad(f, mpmath.linspace(-mpmath.pi, mpmath.pi, m + 1)) / (2 * mpmath.pi) * r ** (-m))


def test_ml_terms_beyond_double_range():
    res = ml_discrete_series(0.5, 1.5, -0.99, 200, 1.0)
    assert res.precision == "contour"
    assert res.value == pytest.approx(mp_ml_cauchy(0.5, 1.5, -0.99, 200, 1.0), rel=1e-9)
    with pytest.raises(NumericalError):
        ml_discrete_series(0.5, 1.5, -0.99, 200, 1.0, exact_fallback=False)


@pytest.mark.parametrize("alpha, lam, n, h", [(0.7, -0.8 * 0.5**-0.7, 96, 0.5), (0.5, -0.9, 60, 1.0)])
def test_ml_large_cancellation_uses_extended_precision(alpha, lam, n, h):
    res = ml_discrete_series(alpha, 1.0, lam, n, h)
    assert res.abs_sum > 1e20 * abs(res.value)
    assert res.precision.startswith("mp")
    assert res.value == pytest.approx(mp_ml_cauchy(alpha, 1.0, lam, n, h), rel=1e-10)


@pytest.mark.parametrize("lam, h", [(1.0, 1.0), (-2.0, 0.5), (4.0, 0.25)])
def test_ml_domain(lam, h):
    with pytest.raises(DomainError):
        ml_discrete(0.5, 1.0, lam, 3, h)


@pytest.mark.parametrize("args", [(0.0, 1.0, 0.1, 2, 1.0), (0.5, 0.0, 0.1, 2, 1.0), (0.5, 1.0, 0.1, 0, 1.0),
                                  (0.5, 1.0, 0.1, 2, -1.0), (1.2, 1.0, 0.1, 2, 1.0)])
def test_ml_input_errors(args):
    with pytest.raises(InputError):
        ml_discrete(*args)


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0])
@pytest.mark.parametrize("h", [0.5, 1.0])
@pytest.mark.parametrize("scale", [-0.8, -0.2, 0.3])
def test_ml_sequence_is_caputo_eigen_sequence(alpha, h, scale):
    lam = scale * h ** (-alpha)
    e = MeshSequence(h, ml_sequence(alpha, lam, 64, h))
    assert e.values[0] == 1.0
    d = caputo_difference(alpha, e).values[1:]
    np.testing.assert_allclose(d, lam * e.values[1:], rtol=1e-9, atol=1e-14)


def test_ml_sequence_at_zero_lambda():
    np.testing.assert_allclose(ml_sequence(0.4, 0.0, 10, 0.3), 1.0, rtol=1e-14)


def test_ml_sequence_first_order():
    # alpha = 1: implicit Euler iterates (1 - h lam)^-n
    h, lam = 0.5, -1.3
    np.testing.assert_allclose(ml_sequence(1.0, lam, 20, h), (1 - h * lam) ** -np.arange(21.0), rtol=1e-12)


# -- discrete Wright ---------------------------------------------------------


@pytest.mark.parametrize("alpha, beta, h", [(0.5, 0.0, 1.0), (0.5, 0.5, 0.5), (0.25, 1.0, 0.25), (0.75, 0.25, 2.0)])
def test_wright_table_against_mpmath(alpha, beta, h):
    p = FracParams(alpha, beta, h)
    tab = wright_table(p, 40, 16).entries
    for j in (0, 1, 5, 16):
        ref = np.array(mp_wright_column(alpha, beta, h, 40, j))
        scale = max(1.0, np.max(np.abs(ref)))
        assert np.max(np.abs(tab[:, j] - ref)) <= 1e-11 * scale


@pytest.mark.parametrize("n, j", [(0, 0), (3, 0), (0, 4), (5, 2), (30, 12), (64, 20)])
def test_wright_binomial_against_mpmath(n, j):
    p = FracParams(0.6, 0.4, 0.5)
    ref = mp_wright_column(0.6, 0.4, 0.5, n, j)[n]
    assert wright_binomial(p, n, j) == pytest.approx(ref, rel=1e-10, abs=1e-15)


def test_wright_small_examples():
    # phi(n, 0) = h^beta k^beta(n); phi(0, j) = h^beta (1 - h^(1-alpha))^j
    a, b, h = 0.5, 0.5, 0.25
    p = FracParams(a, b, h)
    assert wright_binomial(p, 4, 0) == pytest.approx(h**b * cesaro_values(b, 4)[4], rel=1e-14)
    assert wright_binomial(p, 0, 3) == pytest.approx(h**b * (1 - h ** (1 - a)) ** 3, rel=1e-13)
    # h = 1, beta = 0: phi(n, 1) = -k^(-alpha)(n) and phi(0, j) = 0 for j >= 1
    q = FracParams(a, 0.0, 1.0)
    assert wright_binomial(q, 0, 2) == 0.0
    assert wright_binomial(q, 3, 1) == pytest.approx(-cesaro_values(-a, 3)[3], rel=1e-14)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("h", [0.25, 1.0, 1.5])
def test_three_algorithms_agree(alpha, h):
    p = FracParams(alpha, 1.0 - alpha, h)
    rows = wright_rows(p, np.arange(0, 65), tol=1e-12)
    contour = wright_table(p, 64, 20).entries
    J = min(21, rows.weights.shape[1])
    assert np.max(np.abs(rows.weights[:, :J] - contour[:, :J])) <= 1e-10
    for n, j in [(0, 0), (10, 3), (64, 12), (40, 20)]:
        assert abs(wright_binomial(p, n, j) - contour[n, j]) <= 1e-9
        assert wright_contour(p, n, j) == pytest.approx(contour[n, j], abs=1e-12)
        assert wright_discrete(p, n, j) == pytest.approx(contour[n, j], abs=1e-9)


def test_binomial_method_table():
    p = FracParams(0.5, 0.5, 0.5)
    a = wright_table(p, 10, 6, method="binomial").entries
    b = wright_table(p, 10, 6).entries
    np.testing.assert_allclose(a, b, atol=1e-12)
    with pytest.raises(InputError):
        wright_table(p, 10, 6, method="nope")


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("h", [0.1, 0.5, 1.0])
def test_nonnegative_for_small_steps(alpha, h):
    for b in (0.0, 1.0 - alpha, 1.0):
        t = wright_table(FracParams(alpha, b, h), 64, 64).entries
        assert t.min() >= -1e-13


def test_negative_entries_possible_for_large_steps():
    t = wright_table(FracParams(0.5, 0.0, 4.0), 10, 3).entries
    assert t.min() < 0


@pytest.mark.parametrize("b", [0.5, 1.0, 1.5])
def test_difference_recurrence(b):
    a, h = 0.5, 0.5
    t = wright_table(FracParams(a, b, h), 48, 21).entries
    d = wright_table(FracParams(a, b - a, h), 48, 20).entries
    np.testing.assert_allclose(t[:, :-1] - t[:, 1:], h * d, atol=1e-11)


def test_convolution_lift():
    a, h, g, b = 0.4, 0.5, 0.6, 0.7
    lo = wright_table(FracParams(a, g, h), 48, 10).entries
    hi = wright_table(FracParams(a, g + b, h), 48, 10).entries
    k = h**b * cesaro_values(b, 48)
    for j in range(11):
        np.testing.assert_allclose(cauchy_convolve(k, lo[:, j]), hi[:, j], atol=1e-11)


def test_column_semigroup():
    t = wright_table(FracParams(0.5, 0.0, 0.5), 48, 12).entries
    for j in range(12):
        np.testing.assert_allclose(cauchy_convolve(t[:, j], t[:, 1]), t[:, j + 1], atol=1e-12)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("h", [0.25, 1.0])
def test_row_sums_and_moments(alpha, h):
    b = 1.0 - alpha
    rows = wright_rows(FracParams(alpha, b, h), np.arange(0, 65), tol=1e-13)
    np.testing.assert_allclose(rows.weights.sum(axis=1), 1.0, atol=1e-10)
    J = rows.n_terms
    for gamma in (1.0, 2.0):
        lhs = rows.weights @ cesaro_values(gamma, J - 1)
        rhs = h ** (b + gamma * (alpha - 1)) * cesaro_values(b + gamma * alpha, 64)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-8)


@pytest.mark.parametrize("lam_scale", [0.0, -0.5, 0.3])
def test_generating_identity(lam_scale):
    a, b, h = 0.5, 0.5, 0.5
    lam = lam_scale * h ** (-a)
    ratio = 1.0 / (1.0 - h * lam)
    rows = np.arange(0, 24)
    tab = wright_rows(FracParams(a, b, h), rows, tol=1e-13, growth=max(ratio, 1.0))
    lhs = (tab.weights * ratio ** np.arange(1, tab.n_terms + 1)).sum(axis=1)
    rhs = [mp_ml(a, a + b, lam, int(n) + 1, h) / h for n in rows]
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


def test_subordination_weights():
    w = subordination_weights(0.5, 0.5, [1, 5, 20])
    assert w.weights.shape[0] == 3
    np.testing.assert_allclose(w.weights.sum(axis=1), 1.0, atol=1e-10)
    assert np.all(w.weights >= -1e-15)
    one = subordination_weights(1.0, 0.5, [1, 3])
    np.testing.assert_array_equal(one.weights, [[1, 0, 0], [0, 0, 1]])
    with pytest.raises(InputError):
        subordination_weights(0.5, 0.5, [0])


def test_rows_warn_for_large_steps():
    rows = wright_rows(FracParams(0.5, 0.5, 1.5), [0, 4], tol=1e-10)
    assert rows.warnings


@pytest.mark.parametrize("alpha, beta, h", [(0.0, 0.0, 1.0), (1.5, 0.0, 1.0), (0.5, -0.1, 1.0), (0.5, 0.0, 0.0)])
def test_params_validation(alpha, beta, h):
    with pytest.raises(InputError):
        FracParams(alpha, beta, h)


# -- continuous functions ----------------------------------------------------


@pytest.mark.parametrize(
    "alpha, beta, z, expected",
    [(1.0, 1.0, 1.0, math.e), (2.0, 1.0, 4.0, math.cosh(2.0)), (1.0, 1.0, -3.0, math.exp(-3.0)),
     (0.5, 1.0, -1.0, math.exp(1.0) * math.erfc(1.0)), (1.0, 2.0, 2.0, (math.exp(2.0) - 1) / 2.0)],
)
def test_ml_continuous_examples(alpha, beta, z, expected):
    assert ml_continuous(alpha, beta, z) == pytest.approx(expected, rel=1e-12)


@given(st.floats(0.3, 1.0), st.floats(0.5, 2.0), st.floats(-4.0, 4.0))
@settings(max_examples=30, deadline=None)
def test_ml_continuous_against_mpmath(alpha, beta, z):
    with mpmath.workdps(150):
        a, b, zz = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
        ref = float(mpmath.fsum(zz**k * mpmath.rgamma(a * k + b) for k in range(1200)))
    assert ml_continuous(alpha, beta, z) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_ml_continuous_domain():
    with pytest.raises(DomainError):
        ml_continuous(0.5, 1.0, 80.0)
    with pytest.raises(InputError):
        ml_continuous(0.0, 1.0, 1.0)


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 3.0])
def test_mainardi_half_is_gaussian(x):
    assert mwright(0.5, x) == pytest.approx(math.exp(-x * x / 4) / math.sqrt(math.pi), rel=1e-10)


@pytest.mark.parametrize("nu", [0.25, 0.5, 0.75])
def test_mainardi_is_a_density(nu):
    mass, _ = integrate.quad(lambda x: mwright(nu, x), 0, np.inf, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-7)


def mp_wright(lam, mu, z):
    with mpmath.workdps(60):
        lam, mu, z = mpmath.mpf(lam), mpmath.mpf(mu), mpmath.mpf(z)
        return float(mpmath.fsum(z**k / mpmath.factorial(k) * mpmath.rgamma(lam * k + mu) for k in range(400)))


@pytest.mark.parametrize("alpha, beta", [(0.3, 0.0), (0.5, 0.5), (0.8, 0.2)])
@pytest.mark.parametrize("x", [0.1, 1.0, 2.5, 3.0])
def test_integral_against_mpmath(alpha, beta, x):
    assert wright_integral(alpha, beta, x) == pytest.approx(mp_wright(-alpha, beta, -x), rel=1e-8, abs=1e-14)


@pytest.mark.parametrize("x", [0.1, 1.0, 2.0])
def test_series_cancellation_ratio(x):
    value, abs_sum = wright_series(-0.8, 0.2, -x)
    ref = mp_wright(-0.8, 0.2, -x)
    # accuracy is governed by the reported cancellation ratio
    assert abs(value - ref) <= 1e-14 * abs_sum


def test_wright_series_closed_form():
    # W_{1,1}(z) relates to I_0: W_{1,1}(x^2/4) = I_0(x)
    from scipy.special import i0

    v, _ = wright_series(1.0, 1.0, 1.0)
    assert v == pytest.approx(i0(2.0), rel=1e-13)


def test_scaled_wright_continuous():
    # alpha = 1/2, beta = 1/2: t^(-1/2) M_(1/2)(s t^(-1/2)) is a heat kernel in s
    t, s = 2.0, 0.7
    expected = t**-0.5 * math.exp(-(s**2) / (4 * t)) / math.sqrt(math.pi)
    assert scaled_wright_continuous(0.5, 0.5, t, s) == pytest.approx(expected, rel=1e-10)
    with pytest.raises(DomainError):
        scaled_wright_continuous(0.5, 0.5, 1e-4, 30.0)
    with pytest.raises(InputError):
        scaled_wright_continuous(1.0, 0.5, 1.0, 1.0)


def test_laplace_transform_of_mainardi():
    # int_0^inf e^(-p x) M_nu(x) dx = E_nu(-p)
    nu, p = 0.4, 1.3
    val, _ = integrate.quad(lambda x: math.exp(-p * x) * mwright(nu, x), 0, np.inf, limit=200)
    assert val == pytest.approx(ml_continuous(nu, 1.0, -p), rel=1e-7)
