"""Heat kernels in continuous and discrete time, and the subordinated
fractional fundamental solution.

Conventions: the Fourier transform is ``F(u)(xi) = int e^{-i x.xi} u(x) dx``,
so that the Gaussian kernel has multiplier ``exp(-t |xi|^2)`` and the
discrete Gaussian ``(1 + h |xi|^2)^-n``.  The Gaussian is normalised by
``(4 pi t)^{-N/2}`` so that it has unit mass in every dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, polygamma, roots_legendre

from .cesaro import cesaro_number
from .errors import InputError, QuadratureError
from .specfun import FracParams, WrightRows, mwright, subordination_weights

QUAD_RTOL = 1e-10
NODE_COUNTS = (32, 64, 128, 256, 512)


def _sqnorm(x, N: int) -> np.ndarray:
    """``|x|^2`` for points given as shape ``(..., N)``, or plain positions
    when ``N == 1``."""
    if N not in (1, 2, 3):
        raise InputError(f"dimension N must be 1, 2 or 3, got {N}")
    x = np.asarray(x, dtype=float)
    if N == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        return x**2
    if x.shape[-1] != N:
        raise InputError(f"points must have trailing dimension {N}")
    return np.sum(x**2, axis=-1)


def gaussian_kernel(t: float, x, N: int = 1):
    """``(4 pi t)^{-N/2} exp(-|x|^2 / (4t))``."""
    if not t > 0:
        raise InputError(f"t must be positive, got {t}")
    r2 = _sqnorm(x, N)
    return (4.0 * math.pi * t) ** (-N / 2.0) * np.exp(-r2 / (4.0 * t))


@lru_cache(maxsize=32)
def _legendre(k: int):
    return roots_legendre(k)


LOG_DROP = 45.0


def _log_integrand(s, a1, c):
    # log of u^{a+1} e^{-u - c/u} with u = e^s (the du = u ds factor included)
    return a1 * s - np.exp(s) - c * np.exp(-s)


def _bracket(a1: float, c: np.ndarray, s0: np.ndarray, g0: np.ndarray, sign: float) -> np.ndarray:
    # g is concave in s, so it decreases monotonically away from the mode s0
    step = np.ones_like(s0)
    far = s0 + sign * step
    while True:
        low = _log_integrand(far, a1, c) < g0 - LOG_DROP
        if low.all():
            break
        step = np.where(low, step, 2.0 * step)
        far = s0 + sign * step
    near = s0.copy()
    for _ in range(40):
        mid = 0.5 * (near + far)
        low = _log_integrand(mid, a1, c) < g0 - LOG_DROP
        far = np.where(low, mid, far)
        near = np.where(low, near, mid)
    return far


def _laplace_gaussian_integral(a: float, c: np.ndarray, lognorm: float) -> np.ndarray:
    """``exp(-lognorm) int_0^inf u^a e^{-u - c/u} du`` for ``c > 0``.

    In ``s = log u`` the integrand is log-concave; Gauss-Legendre is applied on
    the interval where it lies within ``e^-45`` of its peak, doubling the node
    count until two counts agree to :data:`QUAD_RTOL`.
    """
    a1 = a + 1.0
    s0 = np.log(0.5 * (a1 + np.sqrt(a1 * a1 + 4.0 * c)))
    g0 = _log_integrand(s0, a1, c)
    lo = _bracket(a1, c, s0, g0, -1.0)
    hi = _bracket(a1, c, s0, g0, 1.0)
    half = 0.5 * (hi - lo)
    prev = None
    for k in NODE_COUNTS:
        nodes, weights = _legendre(k)
        s = lo[:, None] + half[:, None] * (nodes + 1.0)
        f = np.exp(_log_integrand(s, a1, c[:, None]) - g0[:, None])
        cur = half * (f * weights).sum(axis=-1)
        if prev is not None and np.all(np.abs(cur - prev) <= QUAD_RTOL * np.abs(cur)):
            return cur * np.exp(g0 - lognorm)
        prev = cur
    bad = float(np.max(np.abs(cur - prev) / np.abs(cur)))
    raise QuadratureError(f"discrete Gaussian quadrature did not converge (rel diff {bad:.2e})")


def discrete_gaussian(n: int, h: float, x, N: int = 1):
    """Discrete-time heat kernel ``G_{n,h}(x)``.

    Evaluates ``1/(h^n Gamma(n)) int_0^inf e^{-t/h} t^{n-1} G_t(x) dt`` in the
    variable ``log(t/h)`` with adaptive Gauss-Legendre quadrature around the
    peak of the integrand (relative tolerance 1e-10).  At ``x = 0`` the integral is a Gamma
    function; it diverges for ``n <= N/2``, in which case ``inf`` is returned.

    Raises
    ------
    QuadratureError
        If the node doubling does not converge.
    """
    n = int(n)
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if not h > 0:
        raise InputError(f"h must be positive, got {h}")
    r2 = np.asarray(_sqnorm(x, N), dtype=float)
    a = n - 1.0 - N / 2.0
    c = r2 / (4.0 * h)
    scale = (4.0 * math.pi * h) ** (-N / 2.0)
    out = np.empty_like(c)
    origin = c == 0
    if origin.any():
        out[origin] = math.exp(gammaln(a + 1.0) - gammaln(n)) * scale if a > -1.0 else np.inf
    rest = ~origin
    if rest.any():
        out[rest] = _laplace_gaussian_integral(a, c[rest], gammaln(n)) * scale
    return out if out.ndim else float(out)


def discrete_gaussian_multiplier(n: int, h: float, xi, N: int = 1):
    """``(1 + h |xi|^2)^-n`` evaluated in log space."""
    q = _sqnorm(xi, N)
    return np.exp(-int(n) * np.log1p(h * q))


@dataclass(frozen=True)
class KernelQuery:
    """Pointwise (``x``) or spectral (``xi``) evaluation request."""

    N: int
    n: int
    params: FracParams
    x: np.ndarray | float | None = None
    xi: np.ndarray | float | None = None

    def __post_init__(self):
        if self.N not in (1, 2, 3):
            raise InputError(f"dimension N must be 1, 2 or 3, got {self.N}")
        if int(self.n) < 1:
            raise InputError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class KernelValue:
    """Values plus truncation diagnostics."""

    values: np.ndarray | float
    n_terms: int
    tail: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def diagnostics(self) -> dict:
        return {"terms": self.n_terms, "tail": self.tail, "warnings": list(self.warnings)}


def frac_fundamental(query: KernelQuery, tol: float = 1e-10) -> KernelValue:
    """Fractional fundamental solution by the subordination series
    ``sum_j phi_{alpha,1-alpha}(n-1, j-1) G_{j,h}(x)``.

    The series is cut where the remaining weight (known exactly, the weights
    sum to one) drops below ``tol``.
    """
    a, h = query.params.alpha, query.params.h
    if query.x is None:
        raise InputError("frac_fundamental needs query.x")
    if a == 1.0:
        return KernelValue(discrete_gaussian(query.n, h, query.x, query.N), 1, 0.0)
    rows = subordination_weights(a, h, query.n, tol=tol)
    w = rows.weights[0]
    total = 0.0
    for j, wj in enumerate(w, start=1):
        if wj == 0.0:
            continue
        total = total + wj * discrete_gaussian(j, h, query.x, query.N)
    return KernelValue(total, len(w), float(abs(rows.tails[0])), rows.warnings)


def fractional_kernel(alpha: float, n: int, h: float, x, N: int = 1, tol: float = 1e-10):
    """Convenience wrapper returning only the values of :func:`frac_fundamental`."""
    q = KernelQuery(N, n, FracParams(alpha, 1.0 - alpha if alpha < 1 else 0.0, h), x=x)
    return frac_fundamental(q, tol).values


def power_sum(weights: np.ndarray, ratio: np.ndarray, chunk: int = 128) -> np.ndarray:
    """``sum_{j>=1} weights[..., j-1] * ratio**j`` for a batch of weight rows.

    ``weights`` has shape ``(rows, J)``, ``ratio`` any shape; the result has
    shape ``(rows,) + ratio.shape``.
    """
    weights = np.atleast_2d(weights)
    flat = np.asarray(ratio, dtype=float).ravel()
    out = np.zeros((weights.shape[0], flat.size))
    log_r = np.log(np.where(flat > 0, flat, 1.0))
    zero = flat <= 0
    J = weights.shape[1]
    for lo in range(0, J, chunk):
        hi = min(lo + chunk, J)
        j = np.arange(lo + 1, hi + 1, dtype=float)
        powers = np.exp(j[:, None] * log_r[None, :])
        powers[:, zero] = 0.0
        out += weights[:, lo:hi] @ powers
    return out.reshape((weights.shape[0],) + np.shape(ratio))


def subordinated_multiplier(rows: WrightRows, q, h: float) -> np.ndarray:
    """``sum_j w_j (1 + h q)^-j`` for every row of ``rows``."""
    return power_sum(rows.weights, 1.0 / (1.0 + h * np.asarray(q, dtype=float)))


def frac_multiplier(
    alpha: float, n: int, h: float, xi, N: int = 1, branch: str = "auto", tol: float = 1e-10
):
    """Fourier multiplier of the fractional fundamental solution.

    Inside the disc ``|xi|^2 < h^-alpha`` this is ``E^h_{alpha,1}(-|xi|^2, n) / h``
    (Mittag-Leffler branch); the subordination series
    ``sum_j phi(n-1, j-1) (1 + h|xi|^2)^-j`` converges everywhere.  With
    ``branch="auto"`` the Mittag-Leffler branch is used inside the disc when
    its double-precision rounding estimate is below ``tol``, and the
    subordination series otherwise.
    """
    from .specfun import ml_discrete_series

    q = np.asarray(_sqnorm(xi, N), dtype=float)
    if alpha == 1.0:
        return np.exp(-int(n) * np.log1p(h * q))
    if branch not in ("auto", "ml", "subordination"):
        raise InputError(f"unknown branch {branch!r}")
    out = np.empty(q.shape)
    flat_q = q.ravel()
    flat = out.ravel()
    todo = np.ones(flat_q.size, dtype=bool)
    if branch in ("auto", "ml"):
        inside = flat_q * h**alpha < 1.0
        if branch == "ml" and not inside.all():
            raise InputError("Mittag-Leffler branch requested outside the convergence disc")
        for i in np.nonzero(inside)[0]:
            res = ml_discrete_series(alpha, 1.0, -flat_q[i], n, h, tol=tol * 1e-2,
                                     exact_fallback=(branch == "ml"))
            if branch == "ml" or res.err_estimate <= tol * abs(res.value):
                flat[i] = res.value / h
                todo[i] = False
    if todo.any():
        rows = subordination_weights(alpha, h, n, tol=tol * 1e-1)
        flat[todo] = subordinated_multiplier(rows, flat_q[todo], h)[0]
    return out.reshape(q.shape) if q.ndim else float(out)


def multiplier_table(alpha: float, ns, h: float, q, tol: float = 1e-12) -> np.ndarray:
    """Fractional multipliers at ``|xi|^2 = q`` for several time indices.

    Uses the subordination series for every entry (one set of weight rows is
    shared by all ``n``).  Returns shape ``(len(ns),) + q.shape``.
    """
    ns = np.atleast_1d(np.asarray(ns, dtype=int))
    q = np.asarray(q, dtype=float)
    if alpha == 1.0:
        return np.exp(-ns.reshape((-1,) + (1,) * q.ndim) * np.log1p(h * q)[None])
    uq, inverse = np.unique(q, return_inverse=True)
    rows = subordination_weights(alpha, h, ns, tol=tol)
    table = subordinated_multiplier(rows, uq, h)
    return table[:, inverse.reshape(q.shape)]


def frac_second_moment(alpha: float, n: int, h: float, N: int = 1) -> float:
    """``int |x|^2 G^alpha_{n,h}(x) dx = 2 N h^alpha k^{alpha+1}(n-1)``."""
    if int(n) < 1:
        raise InputError("n must be >= 1")
    return 2.0 * N * h**alpha * cesaro_number(alpha + 1.0, int(n) - 1)


def multiplier_tail_coefficient(alpha: float, n: int, h: float) -> float:
    """Limit of ``|xi|^2 m(xi)`` as ``|xi| -> inf`` for the fractional multiplier.

    Only the ``j = 1`` subordination term decays like ``|xi|^-2``; its weight is
    ``phi_{alpha,1-alpha}(n-1, 0) = h^{1-alpha} k^{1-alpha}(n-1)``.
    """
    if alpha == 1.0:
        return 1.0 / h if int(n) == 1 else 0.0
    return h ** (1.0 - alpha) * cesaro_number(1.0 - alpha, int(n) - 1) / h


def periodized(mfunc, xi, period: float, images: int = 400, tail_coef: float = 0.0):
    """``sum_m mfunc(xi + m period)`` over all integers ``m`` (1-D).

    This is what a sampled (grid) Fourier transform actually measures.  Images
    ``|m| <= images`` are summed directly; the remainder uses the
    ``tail_coef / y^2`` asymptote, summed exactly with the trigamma function.
    """
    xi = np.asarray(xi, dtype=float)
    m = np.arange(-images, images + 1)
    y = xi[..., None] + m * period
    total = mfunc(y).sum(axis=-1)
    if tail_coef:
        s = xi / period
        tail = polygamma(1, images + 1 + s) + polygamma(1, images + 1 - s)
        total = total + tail_coef * tail / period**2
    return total


def grid_fourier_transform(samples: np.ndarray, dx: float) -> tuple[np.ndarray, np.ndarray]:
    """Riemann-sum Fourier transform of samples on the centred 1-D grid
    ``x_k = -L + k dx``.  Returns ``(xi, F)`` in FFT frequency order."""
    M = len(samples)
    xi = 2.0 * np.pi * np.fft.fftfreq(M, d=dx)
    return xi, dx * np.fft.fft(np.fft.ifftshift(samples))


# ---------------------------------------------------------------------------
# Independent quadrature representation of the fractional kernel
# ---------------------------------------------------------------------------


def continuous_frac_kernel_1d(alpha: float, t, x) -> np.ndarray:
    """Fundamental solution of the continuous time-fractional heat equation in
    1-D, ``t^{-alpha/2} M_{alpha/2}(|x| t^{-alpha/2}) / 2``."""
    t = np.asarray(t, dtype=float)
    scale = t ** (-alpha / 2.0)
    z = abs(float(x)) * scale
    m = np.array([mwright(alpha / 2.0, float(v)) for v in z.ravel()]).reshape(z.shape)
    return 0.5 * scale * m


def frac_fundamental_quadrature(alpha: float, n: int, h: float, x: float,
                                rtol: float = 1e-9) -> float:
    """Fractional kernel in 1-D from the double-integral representation
    ``1/(h^n (n-1)!) int int e^{-s/h} s^{n-1} psi_{alpha,1-alpha}(s,t) G_t(x) ds dt``.

    The inner integral is the continuous kernel
    :func:`continuous_frac_kernel_1d`; the outer one, in ``u = s/h``, is split
    at ``u = 1``.  On ``[1, inf)`` the integrand is analytic and a shifted
    Gauss-Laguerre rule is used.  On ``(0, 1]`` the kernel behaves like
    ``u^{-alpha/2}`` down to ``u ~ x^{2/alpha}``, where Laguerre rules converge
    only algebraically, so Gauss-Legendre in ``log u`` is used there.  Node
    counts double until two successive totals agree to ``rtol``.  Independent
    of the discrete Wright weights.
    """
    from scipy.special import roots_laguerre

    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    n = int(n)
    if n < 1:
        raise InputError("n must be >= 1")
    lognorm = gammaln(n)
    # head integrand ~ u^(n - alpha/2) as u -> 0; cut where it is below 1e-18
    s_lo = -41.5 / (n - alpha / 2.0)

    def head(k):
        z, w = _legendre(k)
        s = 0.5 * s_lo * (1.0 - z)
        u = np.exp(s)
        f = continuous_frac_kernel_1d(alpha, h * u, x) * np.exp(n * s - u - lognorm)
        return 0.5 * -s_lo * float((w * f).sum())

    def tail(k):
        v, w = roots_laguerre(k)
        u = 1.0 + v
        f = continuous_frac_kernel_1d(alpha, h * u, x) * np.exp((n - 1) * np.log(u) - 1.0 - lognorm)
        return float((w * f).sum())

    prev = None
    for k in (32, 64, 128, 256):
        cur = head(k) + tail(k)
        if prev is not None and abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise QuadratureError(f"fractional kernel quadrature did not converge at x={x}")
