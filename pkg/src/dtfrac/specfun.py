"""Discrete Mittag-Leffler sequences, discrete scaled Wright functions and
their continuous counterparts.

Discrete scaled Wright function
-------------------------------
``phi(n, j)`` (parameters ``alpha, beta, h``) is the n-th Taylor coefficient
at the origin of::

    g_j(z) = (1 - h w**alpha)**j / w**beta,      w = (1 - z) / h.

Three evaluations are provided:

* binomial: ``h^beta sum_i C(j,i) (-1)^i h^{i(1-alpha)} k^{beta-alpha i}(n)``,
  exact but cancelling for large ``j``;
* contour: sample ``g_j`` on ``|z| = r`` and take a discrete Fourier
  transform, which yields all ``n <= n_max`` of one column at once;
* recurrence: ``g_{j+1} = g_1 g_j``, one convolution per column.  For
  ``h <= 1`` the coefficients of ``g_1`` are nonnegative, so this is the most
  accurate route and is used for whole rows (subordination weights).

``w`` lies in the right half plane for ``|z| < 1``, so the principal branch of
``w**alpha`` is the right one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import gammaln, rgamma

from .cesaro import cesaro_number, cesaro_values
from .errors import DomainError, InputError, NumericalError, TruncationError

EPS = np.finfo(float).eps

#: Largest ``j`` evaluated by the binomial sum in :func:`wright_discrete`.
J_SWITCH = 12

#: Default series tolerance.
SERIES_TOL = 1e-12

#: Series-safe bound on ``|z|`` for :func:`ml_continuous`.
Z_MAX = 50.0

#: Largest tolerated cancellation ratio sum|terms| / |sum| in the
#: continuous Wright series before the argument is declared unsafe.
WRIGHT_SAFE_RATIO = 1e6


@dataclass(frozen=True)
class FracParams:
    """Order ``alpha``, weight ``beta`` and mesh step ``h``."""

    alpha: float
    beta: float
    h: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InputError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta >= 0.0:
            raise InputError(f"beta must be >= 0, got {self.beta}")
        if not self.h > 0.0:
            raise InputError(f"h must be positive, got {self.h}")

    @property
    def nonnegative(self) -> bool:
        """Whether entries are guaranteed nonnegative (``h <= 1``)."""
        return self.h <= 1.0


@dataclass(frozen=True)
class WrightTable:
    """``entries[n, j] = phi(n, j)`` for ``n <= n_max``, ``j <= j_max``."""

    params: FracParams
    entries: np.ndarray
    err_bound: float
    method: str = "contour"

    @property
    def n_max(self) -> int:
        return self.entries.shape[0] - 1

    @property
    def j_max(self) -> int:
        return self.entries.shape[1] - 1


# ---------------------------------------------------------------------------
# Discrete Mittag-Leffler sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MLSeries:
    """Result of :func:`ml_discrete_series`."""

    value: float
    terms: int
    abs_sum: float
    err_estimate: float
    precision: str


def _log_cesaro(gamma: np.ndarray, m: int) -> np.ndarray:
    # log k^gamma(m) for gamma > 0, via the product form.
    if m == 0:
        return np.zeros_like(gamma)
    i = np.arange(m, dtype=float)
    return np.log((gamma[:, None] + i) / (i + 1.0)).sum(axis=1)


def _ml_check(alpha, beta, lam, n, h):
    if not 0.0 < alpha <= 1.0:
        raise InputError(f"alpha must lie in (0, 1], got {alpha}")
    if not beta > 0.0:
        raise InputError(f"beta must be positive, got {beta}")
    if not h > 0.0:
        raise InputError(f"h must be positive, got {h}")
    if int(n) < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if abs(lam) * h**alpha >= 1.0:
        raise DomainError(
            f"lambda={lam} is outside the convergence disc |lambda| < h^-alpha = {h ** -alpha}"
        )


class _TermOverflow(Exception):
    def __init__(self, log_peak: float):
        self.log_peak = log_peak


def _ml_float(alpha, beta, lam, m, h, tol, max_terms, block=64):
    terms: list[float] = []
    log_h = math.log(h)
    log_lam = math.log(abs(lam))
    sign = -1.0 if lam < 0 else 1.0
    small_run = 0
    partial = 0.0
    j0 = 0
    while j0 < max_terms:
        j = np.arange(j0, j0 + block, dtype=float)
        gamma = alpha * j + beta
        logt = gamma * log_h + _log_cesaro(gamma, m) + j * log_lam
        if logt.max() > 700.0:
            raise _TermOverflow(float(logt.max()))
        block_terms = np.exp(logt) * sign ** (j % 2)
        for idx, t in enumerate(block_terms):
            terms.append(float(t))
            partial += t
            jj = j0 + idx
            if abs(t) < tol * abs(partial):
                small_run += 1
            else:
                small_run = 0
            if small_run >= 3 and t == 0.0:
                return terms
            if small_run >= 3 and jj >= 1 and terms[-2] != 0.0:
                ratio = abs(t / terms[-2])
                if ratio < 1.0 and abs(t) * ratio / (1.0 - ratio) < tol * abs(partial):
                    return terms
        j0 += block
    raise TruncationError(
        f"Mittag-Leffler series did not converge in {max_terms} terms",
        achieved=abs(terms[-1]),
    )


def _ml_contour(alpha, beta, lam, m, h):
    """Coefficient ``m`` of ``h^beta (1-z)^-beta / (1 - lam h^alpha (1-z)^-alpha)``.

    For ``lam < 0`` the function is analytic in the unit disc, so a circle
    with ``r^-m <= 1e3`` works and the aliasing ``r^M`` is below 1e-17.
    """
    m = max(int(m), 1)
    r = 10.0 ** (-3.0 / m)
    size = 1 << int(math.ceil(math.log2(max(64 * m, 6 * m, 1 << 12))))
    z = r * np.exp(2j * np.pi * np.arange(size) / size)
    w = 1.0 - z
    f = h**beta * w ** (-beta) / (1.0 - lam * h**alpha * w ** (-alpha))
    coef = np.fft.fft(f) / size
    value = float(coef[m].real) * r ** (-m)
    err = 8.0 * EPS * math.log2(size) * float(np.abs(f).max()) * r ** (-m)
    return value, float(err)


def _ml_mp(alpha, beta, lam, m, h, tol, dps, max_terms):
    with mpmath.workdps(dps):
        a, b, hh, ll = (mpmath.mpf(v) for v in (alpha, beta, h, lam))
        fact = mpmath.factorial(m)
        total = mpmath.mpf(0)
        prev = None
        small_run = 0
        for j in range(max_terms):
            g = a * j + b
            t = hh**g * mpmath.rf(g, m) / fact * ll**j
            total += t
            if abs(t) < tol * abs(total):
                small_run += 1
            else:
                small_run = 0
            if small_run >= 3 and prev:
                ratio = abs(t / prev)
                if ratio < 1 and abs(t) * ratio / (1 - ratio) < tol * abs(total):
                    return float(total), j + 1
            prev = t
    raise TruncationError("Mittag-Leffler series (extended precision) did not converge")


def ml_discrete_series(
    alpha: float,
    beta: float,
    lam: float,
    n: int,
    h: float,
    tol: float = SERIES_TOL,
    max_terms: int = 200_000,
    exact_fallback: bool = True,
) -> MLSeries:
    """Evaluate ``sum_j h^{alpha j + beta} k^{alpha j + beta}(n - 1) lam^j``.

    Terms are summed with :func:`math.fsum`.  For negative ``lam`` and large
    ``n`` the terms grow far beyond the result; when the estimated rounding
    error exceeds ``tol`` relative, the series is re-summed in extended
    precision (mpmath) unless ``exact_fallback`` is false.
    """
    alpha, beta, lam, h = float(alpha), float(beta), float(lam), float(h)
    _ml_check(alpha, beta, lam, n, h)
    m = int(n) - 1
    if lam == 0.0:
        value = h**beta * cesaro_number(beta, m)
        return MLSeries(value, 1, abs(value), EPS * abs(value), "double")
    if alpha == 1.0 and beta == 1.0:
        # binomial series: h (1 - h lam)^-n
        value = h * math.exp(-(m + 1) * math.log1p(-h * lam))
        return MLSeries(value, 1, abs(value), 4 * EPS * (m + 1) * abs(value), "closed")
    try:
        terms = _ml_float(alpha, beta, lam, m, h, tol, max_terms)
    except _TermOverflow:
        if lam > 0 or not exact_fallback:
            raise NumericalError("Mittag-Leffler terms exceed double range") from None
        # terms beyond double range; extract the coefficient from the generating function
        value, err = _ml_contour(alpha, beta, lam, m, h)
        return MLSeries(value, 0, math.inf, err, "contour")
    value = math.fsum(terms)
    abs_sum = math.fsum(abs(t) for t in terms)
    # each term carries a relative error ~ eps * (m + log-magnitude)
    logmag = max(1.0, math.log(max(abs_sum, 1e-300)) if abs_sum > 1 else 1.0)
    err = EPS * (m + 4 + logmag) * abs_sum
    if err <= tol * abs(value) or not exact_fallback:
        return MLSeries(value, len(terms), abs_sum, err, "double")
    # the double-precision sum may be pure rounding noise; size the working
    # precision from an independent estimate of the magnitude (lam < 0 here,
    # since positive lam gives positive terms)
    estimate, est_err = _ml_contour(alpha, beta, lam, m, h)
    floor = max(abs(estimate) - est_err, abs_sum * EPS)
    used = []

    def total_at(dps):
        v, c = _ml_mp(alpha, beta, lam, m, h, tol * 1e-3, dps, max_terms)
        used.append((dps, c))
        return v

    value = _mp_resum(total_at, abs_sum, floor, rtol=tol * 1e-2)
    dps, count = used[-1]
    return MLSeries(value, count, abs_sum, tol * abs(value), f"mp{dps}")


def ml_discrete(alpha, beta, lam, n, h, tol: float = SERIES_TOL) -> float:
    """Discrete Mittag-Leffler sequence ``E^h_{alpha,beta}(lam, n)``, ``n >= 1``.

    Raises
    ------
    DomainError
        If ``|lam| >= h**-alpha``.
    """
    return ml_discrete_series(alpha, beta, lam, n, h, tol).value


def ml_sequence(alpha, lam, n_max, h, tol: float = SERIES_TOL) -> np.ndarray:
    """Eigen-sequence of the Caputo h-difference: 1 at n = 0, then
    ``E^h_{alpha,1}(lam, n) / h`` for ``n = 1..n_max``.

    The ``1/h`` makes the sequence continuous with its starting value 1 (at
    ``lam = 0`` it is identically 1) and equal to the kernel multiplier.
    """
    out = np.empty(int(n_max) + 1)
    out[0] = 1.0
    for n in range(1, int(n_max) + 1):
        out[n] = ml_discrete(alpha, 1.0, lam, n, h, tol) / h
    return out


# ---------------------------------------------------------------------------
# Discrete scaled Wright function
# ---------------------------------------------------------------------------


_MP_CESARO: dict = {}


def _mp_resum(total_at, mag: float, floor: float = 1.0, rtol: float = 1e-15,
              max_dps: int = 800) -> float:
    """Evaluate a cancelling sum in mpmath.

    ``total_at(dps)`` returns the sum computed with ``dps`` digits.  The
    double-precision result cannot size the precision (it may be pure
    rounding noise), so digits are added until two successive evaluations
    agree to ``rtol``.  ``floor`` is a lower bound for the magnitude of the
    result when one is known; it sets the starting precision.
    """
    dps = 25 + int(math.ceil(math.log10(max(mag / max(floor, 1e-300), 1.0))))
    prev = total_at(dps)
    while dps < max_dps:
        dps += max(20, dps // 2)
        cur = total_at(dps)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise NumericalError("extended-precision re-summation did not settle")


def _mp_cesaro(order: float, n: int, dps: int):
    # k^order(n) in mpmath, memoised per (order, dps) as a growing list
    key = (order, dps)
    seq = _MP_CESARO.get(key)
    if seq is None:
        if len(_MP_CESARO) > 4096:
            _MP_CESARO.clear()
        with mpmath.workdps(dps):
            seq = _MP_CESARO[key] = [mpmath.mpf(1)]
    if len(seq) <= n:
        with mpmath.workdps(dps):
            x = mpmath.mpf(order)
            for i in range(len(seq) - 1, n):
                seq.append(seq[-1] * (x + i) / (i + 1))
    return seq[n]


def wright_binomial(params: FracParams, n: int, j: int) -> float:
    """Finite binomial-sum form of ``phi(n, j)``.

    The sum alternates in sign; when the cancellation ratio (sum of
    magnitudes over magnitude of the sum) exceeds 1e4 it is re-evaluated in
    mpmath with enough extra digits to absorb it.
    """
    a, b, h = params.alpha, params.beta, params.h
    n, j = int(n), int(j)
    if n < 0 or j < 0:
        raise InputError("indices must be >= 0")
    terms = [
        math.comb(j, i) * (-1) ** i * h ** (i * (1.0 - a)) * cesaro_number(b - a * i, n)
        for i in range(j + 1)
    ]
    value = math.fsum(terms)
    mag = math.fsum(abs(t) for t in terms)
    if mag == 0.0 or mag <= 1e4 * abs(value):
        return h**b * value

    def total_at(dps):
        with mpmath.workdps(dps):
            hh = mpmath.mpf(h) ** (1 - mpmath.mpf(a))
            total = mpmath.fsum(
                mpmath.binomial(j, i) * (-1) ** i * hh**i * _mp_cesaro(b - a * i, n, dps)
                for i in range(j + 1)
            )
            return float(mpmath.mpf(h) ** b * total)

    return _mp_resum(total_at, mag)


def contour_parameters(n_max: int) -> tuple[float, int]:
    """Radius and number of samples for coefficient extraction up to ``n_max``.

    The radius is 0.9, raised towards 1 for long columns so that
    ``r**-n_max`` stays below 1e3; the sample count is a power of two large
    enough that ``r**(M - n_max)`` is below 1e-17 (aliasing).
    """
    n_max = max(int(n_max), 1)
    r = max(0.9, 10.0 ** (-3.0 / n_max))
    need = max(4 * n_max, 256, n_max + math.log(1e-17) / math.log(r))
    return r, 1 << int(math.ceil(math.log2(need)))


R_MIN = 1e-3


class _ContourColumns:
    """Batched column generator for the contour algorithm.

    For ``h <= 1`` the series ``g(z) = 1 - h^{1-a} (1 - z)^a`` has
    nonnegative coefficients, so ``|g| <= g(r)`` on ``|z| = r``.  Each column
    ``j`` then uses its own radius, the saddle point of
    ``g(r)^j (1 - r)^-b r^-n_max``, and is normalised by ``g(r)^j``; the
    extraction is free of cancellation.  For ``h > 1`` a fixed radius is used.
    """

    def __init__(self, params: FracParams, n_max: int):
        self.params = params
        self.n_max = int(n_max)
        self.r_max, self.M = contour_parameters(self.n_max)
        self.unit = np.exp(2j * np.pi * np.arange(self.M) / self.M)
        self.n = np.arange(self.n_max + 1)
        self.peak = 0.0

    def _g(self, r):
        a, h = self.params.alpha, self.params.h
        return 1.0 - h ** (1.0 - a) * (1.0 - r) ** a

    def _radius(self, j: np.ndarray) -> np.ndarray:
        if not self.params.nonnegative:
            return np.full(len(j), self.r_max)
        a, b, h = self.params.alpha, self.params.beta, self.params.h
        lo = np.full(len(j), math.log(R_MIN))
        hi = np.full(len(j), math.log(self.r_max))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            r = np.exp(mid)
            dg = a * h ** (1.0 - a) * (1.0 - r) ** (a - 1.0)
            slope = j * r * dg / self._g(r) - self.n_max + b * r / (1.0 - r)
            up = slope < 0
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        return np.exp(0.5 * (lo + hi))

    def columns(self, j_lo: int, j_hi: int) -> np.ndarray:
        """Array of shape ``(n_max + 1, j_hi - j_lo)``."""
        a, b, h = self.params.alpha, self.params.beta, self.params.h
        j = np.arange(j_lo, j_hi)
        r = self._radius(j)
        z = r[:, None] * self.unit[None, :]
        w = (1.0 - z) / h
        base = 1.0 - h * w**a
        weight = w ** (-b)
        if self.params.nonnegative:
            g_r = self._g(r)
            log_norm = np.where(j > 0, j * np.log(np.where(j > 0, g_r, 1.0)), 0.0)
            log_norm = log_norm - b * np.log((1.0 - r) / h)
            vals = (base / g_r[:, None]) ** j[:, None] * weight * ((1.0 - r) / h)[:, None] ** b
        else:
            log_norm = np.zeros(len(j))
            vals = base ** j[:, None] * weight
        coef = np.fft.fft(vals, axis=1)[:, : self.n_max + 1].real / self.M
        log_scale = log_norm[:, None] - self.n[None, :] * np.log(r)[:, None]
        top = log_norm - self.n_max * np.log(r) + np.log(np.abs(vals).max(axis=1))
        self.peak = max(self.peak, float(np.exp(top.max())))
        return (coef * np.exp(log_scale)).T

    def err_bound(self) -> float:
        rounding = 8 * EPS * math.log2(self.M) * self.peak
        aliasing = self.peak * self.r_max ** (self.M - self.n_max)
        return rounding + aliasing


class _RecurrenceColumns:
    """Column generator using ``phi(., j + 1) = c * phi(., j)``.

    ``c`` holds the Taylor coefficients of ``g(z) = 1 - h^{1-a} (1 - z)^a``
    and column 0 those of ``h^b (1 - z)^-b``.  For ``h <= 1`` every ``c_k`` is
    nonnegative and they sum to one, so each step is an averaging operation
    and rounding does not grow.
    """

    DIRECT_MAX = 256

    def __init__(self, params: FracParams, n_max: int):
        a, b, h = params.alpha, params.beta, params.h
        self.n_max = int(n_max)
        size = self.n_max + 1
        coef = -(h ** (1.0 - a)) * cesaro_values(-a, self.n_max)
        coef[0] += 1.0
        self.coef = coef
        self.norm1 = float(np.abs(coef).sum())
        self.col = h**b * cesaro_values(b, self.n_max)
        self.next_j = 0
        self.fft_len = 1 << int(math.ceil(math.log2(2 * size)))
        self.coef_hat = np.fft.rfft(coef, self.fft_len)
        self.bound = 0.0

    def _step(self, col: np.ndarray) -> np.ndarray:
        size = self.n_max + 1
        if size <= self.DIRECT_MAX:
            return np.convolve(self.coef, col)[:size]
        return np.fft.irfft(self.coef_hat * np.fft.rfft(col, self.fft_len), self.fft_len)[:size]

    def columns(self, j_lo: int, j_hi: int) -> np.ndarray:
        if j_lo != self.next_j:
            raise ValueError("recurrence columns must be requested in order")
        out = np.empty((self.n_max + 1, j_hi - j_lo))
        rel = 4 * EPS * math.log2(self.fft_len)
        for i in range(j_hi - j_lo):
            if self.next_j > 0:
                self.col = self._step(self.col)
                self.bound = self.norm1 * self.bound + rel * float(np.abs(self.col).max())
            out[:, i] = self.col
            self.next_j += 1
        return out

    def err_bound(self) -> float:
        return self.bound


def wright_contour(params: FracParams, n: int, j: int) -> float:
    """Coefficient-extraction form of ``phi(n, j)``."""
    n, j = int(n), int(j)
    if n < 0 or j < 0:
        raise InputError("indices must be >= 0")
    return float(_ContourColumns(params, max(n, 1)).columns(j, j + 1)[n, 0])


def wright_discrete(params: FracParams, n: int, j: int) -> float:
    """Discrete scaled Wright function ``phi^h_{alpha,beta}(n, j)``.

    Binomial sum for ``j <= J_SWITCH``, contour extraction beyond.
    """
    if int(j) <= J_SWITCH:
        return wright_binomial(params, n, j)
    return wright_contour(params, n, j)


def wright_table(
    params: FracParams, n_max: int, j_max: int, method: str = "contour"
) -> WrightTable:
    """Dense table ``phi(n, j)``, ``0 <= n <= n_max``, ``0 <= j <= j_max``.

    ``method="contour"`` computes one transform per column and records an
    a-priori error bound; ``method="binomial"`` evaluates every entry by the
    finite sum (slow, cancellation-prone for large ``j``).
    """
    n_max, j_max = int(n_max), int(j_max)
    if n_max < 0 or j_max < 0:
        raise InputError("table bounds must be >= 0")
    if method == "binomial":
        entries = np.array(
            [[wright_binomial(params, n, j) for j in range(j_max + 1)] for n in range(n_max + 1)]
        )
        return WrightTable(params, entries, 1e3 * EPS * 2.0**j_max, "binomial")
    if method != "contour":
        raise InputError(f"unknown method {method!r}")
    gen = _ContourColumns(params, max(n_max, 1))
    cols = []
    batch = 64
    for lo in range(0, j_max + 1, batch):
        cols.append(gen.columns(lo, min(lo + batch, j_max + 1)))
    entries = np.hstack(cols)[: n_max + 1]
    return WrightTable(params, entries, gen.err_bound(), "contour")


@dataclass(frozen=True)
class WrightRows:
    """Selected rows ``phi(n, 0..J)`` truncated where their tails are small.

    ``tails[i]`` is ``total[i] - sum_j weights[i, j]`` where ``total`` is the
    exact row sum ``h^{beta+alpha-1} k^{beta+alpha}(n)``.
    """

    params: FracParams
    rows: np.ndarray
    weights: np.ndarray
    totals: np.ndarray
    tails: np.ndarray
    err_bound: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def n_terms(self) -> int:
        return self.weights.shape[1]


def wright_rows(
    params: FracParams,
    rows,
    tol: float = 1e-10,
    j_max: int = 65536,
    batch: int = 64,
    growth: float = 1.0,
) -> WrightRows:
    """Rows of the Wright table, extended in ``j`` until every row's tail
    (exact row sum minus accumulated sum) is below ``tol`` (times the row
    total when that exceeds one).

    ``growth > 1`` is for sums ``sum_j phi(n, j) growth^j``: the tail and the
    last column must then be below ``tol`` after multiplication by
    ``growth^J``.

    For ``h <= 1`` all entries are nonnegative, so the tail bounds every
    omitted entry.  For ``h > 1`` there is no sign guarantee; the result then
    carries a warning.

    Raises
    ------
    TruncationError
        If the tails are not below ``tol`` by ``j_max`` columns.
    """
    rows = np.atleast_1d(np.asarray(rows, dtype=int))
    if rows.min() < 0:
        raise InputError("row indices must be >= 0")
    a, b, h = params.alpha, params.beta, params.h
    n_top = int(rows.max())
    totals = np.array([h ** (b + a - 1.0) * cesaro_number(b + a, int(n)) for n in rows])
    warnings: tuple[str, ...] = ()
    if not params.nonnegative:
        warnings = ("h > 1: weights may be negative; tail bound is not rigorous",)
    # relative to the row total once that exceeds one (rounding floor)
    thresh = tol * np.maximum(1.0, np.abs(totals))
    gen = _RecurrenceColumns(params, n_top)
    chunks = []
    acc = np.zeros(len(rows))
    j = 0
    while True:
        hi = min(j + batch, j_max + 1)
        block = gen.columns(j, hi)[rows]
        chunks.append(block)
        acc = acc + block.sum(axis=1)
        j = hi
        tails = totals - acc
        last = np.abs(block[:, -1])
        scale = np.float64(growth) ** j
        if np.all(np.abs(tails) * scale < thresh) and np.all(last * scale < thresh):
            break
        if growth > 1.0 and not block.any() and np.all(np.abs(tails) < thresh):
            # columns vanish identically beyond this point (h = 1)
            break
        if j > j_max:
            raise TruncationError(
                f"Wright row tails not below {tol} within {j_max} terms",
                achieved=float(np.abs(tails).max()),
            )
    weights = np.hstack(chunks)
    # trim trailing columns that are negligible for every row
    cum_tail = totals[:, None] - np.cumsum(weights, axis=1)
    scale = np.float64(growth) ** np.arange(1, weights.shape[1] + 1)
    nonzero = weights.any(axis=0)
    zero_after = np.append(~np.cumsum(nonzero[::-1])[::-1][1:].astype(bool), True)
    ok = np.all(np.abs(cum_tail) * scale < thresh[:, None], axis=0) | zero_after
    keep = int(np.argmax(ok)) + 1 if ok.any() else weights.shape[1]
    weights = weights[:, :keep]
    tails = totals - weights.sum(axis=1)
    return WrightRows(params, rows, weights, totals, tails, gen.err_bound(), warnings)


def subordination_weights(alpha: float, h: float, n, tol: float = 1e-10, j_max: int = 65536):
    """Weights ``phi_{alpha,1-alpha}(n - 1, j - 1)``, ``j = 1..J``, for time
    indices ``n >= 1``.  Returns a :class:`WrightRows` over rows ``n - 1``.
    """
    n = np.atleast_1d(np.asarray(n, dtype=int))
    if n.min() < 1:
        raise InputError("time index n must be >= 1")
    if alpha == 1.0:
        rows = n - 1
        weights = np.zeros((len(n), int(n.max())))
        weights[np.arange(len(n)), n - 1] = 1.0
        params = FracParams(1.0, 0.0, h)
        ones = np.ones(len(n))
        return WrightRows(params, rows, weights, ones, np.zeros(len(n)), 0.0)
    return wright_rows(FracParams(alpha, 1.0 - alpha, h), n - 1, tol=tol, j_max=j_max)


# ---------------------------------------------------------------------------
# Continuous special functions
# ---------------------------------------------------------------------------


def ml_continuous(alpha: float, beta: float, z: float, tol: float = SERIES_TOL,
                  z_max: float = Z_MAX, max_terms: int = 10_000) -> float:
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)`` by its
    power series (real ``z``, ``|z| <= z_max``)."""
    if not (alpha > 0 and beta > 0):
        raise InputError("alpha and beta must be positive")
    if abs(z) > z_max:
        raise DomainError(f"|z|={abs(z)} exceeds the series-safe bound {z_max}")
    if z == 0:
        return float(rgamma(beta))
    k = np.arange(max_terms, dtype=float)
    logmag = k * math.log(abs(z)) - gammaln(alpha * k + beta)
    # gammaln is log|Gamma|; positive arguments only here
    mags = np.exp(logmag)
    signs = np.sign(z) ** k
    peak = int(np.argmax(mags))
    below = np.nonzero((mags < tol * EPS) & (k > peak))[0]
    if len(below) == 0:
        raise DomainError(f"Mittag-Leffler series not converged for z={z}, alpha={alpha}")
    stop = int(below[0]) + 1
    value = math.fsum((signs[:stop] * mags[:stop]).tolist())
    mag = math.fsum(mags[:stop].tolist())
    if mag <= 1e4 * abs(value):
        return value
    # alternating series with heavy cancellation (negative z): re-sum

    def total_at(dps):
        with mpmath.workdps(dps):
            a, b, zz = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
            return float(mpmath.fsum(zz**i * mpmath.rgamma(a * i + b) for i in range(stop)))

    return _mp_resum(total_at, mag)


def _log_rgamma(x: np.ndarray):
    """``log|1/Gamma(x)|`` and its sign; sign 0 (and log -inf) at the poles."""
    x = np.asarray(x, dtype=float)
    logv = np.empty_like(x)
    sign = np.ones_like(x)
    pos = x > 0
    logv[pos] = -gammaln(x[pos])
    neg = ~pos
    xn = x[neg]
    sn = np.sin(np.pi * xn)
    pole = xn == np.round(xn)
    sn[pole] = 0.0
    with np.errstate(divide="ignore"):
        logv[neg] = gammaln(1.0 - xn) + np.log(np.abs(sn)) - math.log(math.pi)
    sign[neg] = np.sign(sn)
    return logv, sign


def wright_series(lam: float, mu: float, z: float, tol: float = SERIES_TOL,
                  max_terms: int = 2000) -> tuple[float, float]:
    """Wright function ``W_{lam,mu}(z) = sum z^n / (n! Gamma(lam n + mu))``.

    Returns ``(value, abs_sum)``; ``abs_sum / |value|`` measures the
    cancellation.  Reciprocal Gamma vanishes exactly at the poles.
    """
    if z == 0:
        v = float(rgamma(mu))
        return v, abs(v)
    n = np.arange(max_terms, dtype=float)
    arg = lam * n + mu
    log_rg, sign_rg = _log_rgamma(arg)
    logmag = n * math.log(abs(z)) - gammaln(n + 1.0) + log_rg
    with np.errstate(over="ignore"):
        mags = np.exp(logmag)
    signs = np.sign(z) ** n * sign_rg
    if not np.isfinite(mags).all():
        raise DomainError(f"Wright series overflow at z={z}")
    # envelope without the sin factor, so that pole zeros do not stop early
    env = np.exp(np.where(arg > 0, logmag, n * math.log(abs(z)) - gammaln(n + 1.0)
                          + gammaln(np.abs(1.0 - arg)) - math.log(math.pi)))
    peak = int(np.argmax(env))
    scale = env[peak]
    below = np.nonzero((env < tol * EPS * max(scale, 1e-300)) & (n > peak + 2))[0]
    if len(below) == 0:
        raise DomainError(f"Wright series not converged at z={z}")
    stop = int(below[0]) + 1
    terms = (signs[:stop] * mags[:stop]).tolist()
    try:
        return math.fsum(terms), math.fsum(mags[:stop].tolist())
    except OverflowError:
        raise DomainError(f"Wright series overflow at z={z}") from None


def scaled_wright_continuous(alpha: float, beta: float, t: float, s: float,
                             safe_ratio: float = WRIGHT_SAFE_RATIO) -> float:
    """Scaled Wright function ``psi(t, s) = t^{beta-1} W_{-alpha,beta}(-s t^-alpha)``.

    Evaluated by the power series; raises :class:`DomainError` when the
    cancellation ratio of the series exceeds ``safe_ratio``.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    if beta < 0:
        raise InputError("beta must be >= 0")
    if not t > 0:
        raise InputError("t must be positive")
    x = s * t ** (-alpha)
    value, abs_sum = wright_series(-alpha, beta, -x)
    if abs_sum > safe_ratio * max(abs(value), EPS):
        raise DomainError(
            f"argument s*t^-alpha={x:.3g} beyond the series-safe bound (cancellation {abs_sum:.2e})"
        )
    return t ** (beta - 1.0) * value


def wright_integral(alpha: float, beta: float, x: float) -> float:
    """``W_{-alpha,beta}(-x)`` for ``0 < alpha < 1``, ``0 <= beta < 1``, ``x >= 0``.

    Hankel contour deformed onto the rays ``arg sigma = +-theta`` with
    ``pi/2 < theta``, ``alpha theta < pi/2``, then ``r = v**(1/(1-beta))``
    removes the endpoint singularity::

        W = 1/(pi (1-beta)) int_0^inf exp(r cos th - x r^a cos(a th))
                                      sin((1-b) th + r sin th - x r^a sin(a th)) dv
    """
    if not 0.0 < alpha < 1.0 or not 0.0 <= beta < 1.0:
        raise InputError("wright_integral needs 0 < alpha < 1 and 0 <= beta < 1")
    if x < 0:
        raise InputError("x must be >= 0")
    theta = min(math.pi, 0.5 * (0.5 * math.pi + 0.5 * math.pi / alpha))
    ct, st = math.cos(theta), math.sin(theta)
    cat, sat = math.cos(alpha * theta), math.sin(alpha * theta)
    p = 1.0 / (1.0 - beta)

    def integrand(v):
        r = v**p
        ra = r**alpha
        return math.exp(r * ct - x * ra * cat) * math.sin((1.0 - beta) * theta + r * st - x * ra * sat)

    # the integrand is negligible once r cos(theta) < -50
    v_end = (50.0 / -ct) ** (1.0 / p) if ct < 0 else 50.0
    with warnings.catch_warnings():
        # roundoff warnings appear once the value is far below the integrand scale
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, v_end, limit=400, epsabs=1e-15, epsrel=1e-12)
    return p * val / math.pi


def mwright(nu: float, x: float) -> float:
    """Mainardi function ``M_nu(x) = W_{-nu,1-nu}(-x)``; series when safe,
    contour integral otherwise."""
    try:
        value, abs_sum = wright_series(-nu, 1.0 - nu, -x)
        if abs_sum <= 1e3 * max(abs(value), EPS):
            return value
    except DomainError:
        pass
    return wright_integral(nu, 1.0 - nu, x)
