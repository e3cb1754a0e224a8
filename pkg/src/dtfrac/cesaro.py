"""Cesaro numbers k^alpha(n) and Cauchy convolution of sequences.

The Cesaro numbers are the Taylor coefficients of ``(1 - z)**(-alpha)``::

    k^alpha(0) = 1,    k^alpha(n + 1) = (alpha + n) / (n + 1) * k^alpha(n).

Every other module is built on these two primitives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import InputError

#: Hard cap on dense sequence length (memory bound).
N_MAX_CAP = 2**20

#: Above this length :func:`cauchy_convolve` switches to FFT.
DIRECT_CONVOLVE_MAX = 4096


@dataclass(frozen=True)
class CesaroSeq:
    """Values ``k^alpha(0..n_max)``."""

    alpha: float
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


def _check_n_max(n_max: int) -> int:
    n_max = int(n_max)
    if n_max < 0:
        raise InputError(f"n_max must be >= 0, got {n_max}")
    if n_max > N_MAX_CAP:
        raise InputError(f"n_max={n_max} exceeds the cap {N_MAX_CAP}")
    return n_max


def cesaro_number(alpha: float, n: int) -> float:
    """Return ``k^alpha(n)`` by the multiplicative recurrence.

    Works for any real ``alpha``; for ``alpha`` a nonpositive integer the
    values vanish exactly once ``n > -alpha``.
    """
    n = int(n)
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    alpha = float(alpha)
    value = 1.0
    for i in range(n):
        value *= (alpha + i) / (i + 1)
        if value == 0.0:
            break
    return value


def cesaro_values(alpha: float, n_max: int) -> np.ndarray:
    """Plain array ``[k^alpha(0), ..., k^alpha(n_max)]``."""
    n_max = _check_n_max(n_max)
    i = np.arange(n_max, dtype=float)
    out = np.empty(n_max + 1)
    out[0] = 1.0
    out[1:] = np.cumprod((float(alpha) + i) / (i + 1.0))
    return out


def cesaro_sequence(alpha: float, n_max: int) -> CesaroSeq:
    """Return the Cesaro sequence of order ``alpha`` up to ``n_max``."""
    return CesaroSeq(float(alpha), cesaro_values(alpha, n_max))


def cesaro_gamma_ratio(alpha: float, n) -> np.ndarray:
    """``Gamma(n + alpha) / (Gamma(alpha) Gamma(n + 1))`` via log-gamma.

    Only valid for ``alpha > 0``; used as an independent cross-check of the
    recurrence.
    """
    from scipy.special import gammaln

    if alpha <= 0:
        raise InputError("gamma-ratio form needs alpha > 0")
    n = np.asarray(n, dtype=float)
    return np.exp(gammaln(n + alpha) - gammaln(alpha) - gammaln(n + 1.0))


def _neumaier_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Column-wise Neumaier accumulation of out[n] = sum_j a[j] b[n - j].
    size = len(a)
    s = np.zeros(size)
    c = np.zeros(size)
    for j in range(size):
        if a[j] == 0.0:
            continue
        t = a[j] * b[: size - j]
        sj = s[j:]
        total = sj + t
        big = np.abs(sj) >= np.abs(t)
        c[j:] += np.where(big, (sj - total) + t, (t - total) + sj)
        s[j:] = total
    return s + c


def cauchy_convolve(a, b, method: str = "auto") -> np.ndarray:
    """Truncated Cauchy product ``out[n] = sum_{j<=n} a[n-j] b[j]``.

    Parameters
    ----------
    a, b : array_like
        Real sequences of equal length ``L >= 1``.
    method : {"auto", "direct", "fft"}
        ``direct`` is an O(L^2) compensated sum, ``fft`` uses
        :func:`scipy.signal.fftconvolve`. ``auto`` picks direct up to
        :data:`DIRECT_CONVOLVE_MAX`.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1:
        raise InputError("cauchy_convolve expects 1-D sequences")
    if len(a) != len(b):
        raise InputError(f"length mismatch: {len(a)} != {len(b)}")
    if len(a) == 0:
        raise InputError("sequences must be non-empty")
    if method == "auto":
        method = "direct" if len(a) <= DIRECT_CONVOLVE_MAX else "fft"
    if method == "direct":
        return _neumaier_convolve(a, b)
    if method == "fft":
        return fftconvolve(a, b)[: len(a)]
    raise InputError(f"unknown method {method!r}")
