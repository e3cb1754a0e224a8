"""L^p norms, moments, power-law decay fits and large-time diagnostics for
fields on a periodic grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .solver import Field, GridSpec, evolve_fields, kernel_fields

MAX_FIT_RESIDUAL = 0.05


def _check_p(p) -> float:
    p = float(p)
    if not p >= 1.0:
        raise InputError(f"p must be >= 1 or inf, got {p}")
    return p


def lp_norm(u: Field, p) -> float:
    """Riemann-sum ``L^p`` norm; ``p = inf`` gives the largest absolute sample."""
    p = _check_p(p)
    a = np.abs(u.samples)
    if math.isinf(p):
        return float(a.max())
    vol = u.grid.cell_volume
    if p == 1.0:
        return float(a.sum() * vol)
    peak = a.max()
    if peak == 0.0:
        return 0.0
    # scale by the peak so that large p cannot overflow
    return float(peak * ((a / peak) ** p).sum() ** (1.0 / p) * vol ** (1.0 / p))


class Moments(NamedTuple):
    mass: float
    first: np.ndarray
    second: float


def moments(u: Field) -> Moments:
    """``int u``, ``int x u`` and ``int |x|^2 u`` by grid quadrature."""
    coords = u.grid.coords()
    vol = u.grid.cell_volume
    mass = float(u.samples.sum() * vol)
    first = np.array([float((c * u.samples).sum() * vol) for c in coords])
    second = float((sum(c**2 for c in coords) * u.samples).sum() * vol)
    return Moments(mass, first, second)


def gradient_field(u: Field) -> list[Field]:
    """Spectral gradient, one :class:`Field` per axis."""
    g = u.grid
    spec = g.fft(u.samples)
    full = 2.0 * np.pi * np.fft.fftfreq(g.M, d=g.dx)
    half = 2.0 * np.pi * np.fft.rfftfreq(g.M, d=g.dx)
    axes = [full] * (g.N - 1) + [half]
    out = []
    for i in range(g.N):
        xi = axes[i].copy()
        if g.M % 2 == 0:
            # the Nyquist mode has no odd part on the grid
            xi[g.M // 2 if i < g.N - 1 else -1] = 0.0
        shape = [1] * g.N
        shape[i] = -1
        out.append(Field(g, g.ifft(1j * xi.reshape(shape) * spec)))
    return out


def gradient_norm(u: Field, p) -> float:
    """``L^p`` norm of ``|grad u|``; for ``N > 1`` only ``p < N/(N-1)``."""
    p = _check_p(p)
    N = u.grid.N
    if N > 1 and not p < N / (N - 1.0):
        raise InputError(f"gradient norm needs p < {N / (N - 1.0)} in dimension {N}")
    parts = gradient_field(u)
    mag = np.sqrt(sum(f.samples**2 for f in parts))
    return lp_norm(Field(u.grid, mag), p)


def decay_exponent(alpha: float, p, N: int = 1, q: float = 1.0) -> float:
    """Theoretical slope ``-alpha N/2 (1/q - 1/p)`` of ``||u(nh)||_p`` in ``log t``."""
    p = _check_p(p)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return -alpha * N / 2.0 * (1.0 / q - inv_p)


@dataclass(frozen=True)
class DecayReport:
    times: np.ndarray
    norms: np.ndarray
    p: float
    fitted_slope: float
    expected_slope: float
    residual: float
    fit_from: int = 0

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InputError("times must be strictly increasing")
        if np.any(self.norms <= 0):
            raise InputError("norms must be positive")

    @property
    def relative_error(self) -> float:
        if self.expected_slope == 0:
            return abs(self.fitted_slope)
        return abs(self.fitted_slope / self.expected_slope - 1.0)

    def passes(self, rel_tol: float) -> bool:
        return self.residual < MAX_FIT_RESIDUAL and self.relative_error <= rel_tol

    def verdict(self, rel_tol: float) -> dict:
        return {
            "p": self.p,
            "expected_slope": self.expected_slope,
            "fitted_slope": self.fitted_slope,
            "relative_error": self.relative_error,
            "residual": self.residual,
            "tolerance": rel_tol,
            "pass": self.passes(rel_tol),
        }


def decay_fit(times, norms, expected_slope: float, p=2.0, upper_half: bool = True) -> DecayReport:
    """Least-squares line through ``(log t, log norm)``.

    With ``upper_half`` only samples with ``log t`` in the upper half of the
    sampled log-range enter the fit (the asymptotic regime).
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.shape != norms.shape or times.ndim != 1:
        raise InputError("times and norms must be 1-D arrays of equal length")
    if len(times) < 4:
        raise InputError("need at least 4 samples")
    if np.any(times <= 0) or np.any(norms <= 0):
        raise InputError("times and norms must be positive")
    lt, ln = np.log(times), np.log(norms)
    start = 0
    if upper_half:
        mid = 0.5 * (lt[0] + lt[-1])
        start = int(np.searchsorted(lt, mid))
        start = min(start, len(lt) - 4)
    coef = np.polyfit(lt[start:], ln[start:], 1)
    resid = ln[start:] - np.polyval(coef, lt[start:])
    rms = float(np.sqrt(np.mean(resid**2)))
    return DecayReport(times, norms, float(p), float(coef[0]), float(expected_slope), rms, start)


def log_spaced(n_lo: int, n_hi: int, count: int = 16) -> np.ndarray:
    """Distinct integers spread geometrically over ``[n_lo, n_hi]``."""
    if not 1 <= n_lo < n_hi:
        raise InputError("need 1 <= n_lo < n_hi")
    return np.unique(np.round(np.geomspace(n_lo, n_hi, count)).astype(int))


def longtime_gap(u_n: Field, alpha: float, n: int, h: float, p, mass: float,
                 kernel: Field | None = None) -> float:
    """Scaled distance ``(nh)^{alpha N/2 (1-1/p)} ||u(nh) - M G^alpha_n||_p``."""
    if kernel is None:
        kernel = kernel_fields(u_n.grid, alpha, h, [n])[0]
    elif kernel.grid != u_n.grid:
        raise InputError("kernel and solution live on different grids")
    diff = Field(u_n.grid, u_n.samples - mass * kernel.samples)
    scale = (n * h) ** (-decay_exponent(alpha, p, u_n.grid.N))
    return scale * lp_norm(diff, p)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

BUILTIN_DATA = ("gaussian", "box", "two-bumps", "single-mode", "shifted-gaussian")


def builtin_datum(grid: GridSpec, name: str, **kw) -> Field:
    """Named initial data.

    ``gaussian``: unit-mass Gaussian of variance ``width^2``; ``box``:
    indicator of ``[-width/2, width/2]^N``; ``two-bumps``: two opposite
    Gaussians (zero mass); ``single-mode``: ``cos(k x_1)`` with ``k`` a grid
    frequency; ``shifted-gaussian``: Gaussian centred at ``shift`` on axis 1.
    """
    width = float(kw.get("width", 1.0))
    coords = grid.coords()
    N = grid.N
    r2 = sum(c**2 for c in coords)
    norm = (2.0 * math.pi * width**2) ** (-N / 2.0)
    if name == "gaussian":
        v = norm * np.exp(-r2 / (2.0 * width**2))
    elif name == "shifted-gaussian":
        s = float(kw.get("shift", 2.0))
        v = norm * np.exp(-((coords[0] - s) ** 2 + r2 - coords[0] ** 2) / (2.0 * width**2))
    elif name == "box":
        inside = np.ones(grid.shape, dtype=bool)
        for c in coords:
            inside &= np.abs(c) <= width / 2.0
        v = inside.astype(float)
    elif name == "two-bumps":
        s = float(kw.get("shift", 2.0))
        rest = r2 - coords[0] ** 2
        v = norm * (np.exp(-((coords[0] - s) ** 2 + rest) / (2.0 * width**2))
                    - np.exp(-((coords[0] + s) ** 2 + rest) / (2.0 * width**2)))
    elif name == "single-mode":
        k = 2.0 * math.pi * int(kw.get("mode", 1)) / (2.0 * grid.L)
        v = np.cos(k * coords[0])
    else:
        raise InputError(f"unknown datum {name!r}; choose from {BUILTIN_DATA}")
    return Field(grid, v)


def decay_series(quantity: str, alpha: float, p, ns, h: float, grid: GridSpec,
                 datum: Field | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Norm time series for ``quantity`` in ``{"kernel", "gradient", "solution"}``."""
    ns = np.asarray(ns, dtype=int)
    if quantity == "solution":
        if datum is None:
            datum = builtin_datum(grid, "box")
        fields = evolve_fields(datum, alpha, h, ns)
    elif quantity in ("kernel", "gradient"):
        fields = kernel_fields(grid, alpha, h, ns)
    else:
        raise InputError(f"unknown quantity {quantity!r}")
    norm = gradient_norm if quantity == "gradient" else lp_norm
    return ns * h, np.array([norm(f, p) for f in fields])


def decay_experiment(quantity: str, alpha: float, p, n_range=(64, 4096), h: float = 1.0,
                     grid: GridSpec | None = None, count: int = 16) -> DecayReport:
    """Fit the decay slope of a kernel, gradient or box-datum solution norm."""
    grid = grid or GridSpec(1, 500.0, 16384)
    ns = log_spaced(n_range[0], n_range[1], count)
    times, norms = decay_series(quantity, alpha, p, ns, h, grid)
    expected = decay_exponent(alpha, p, grid.N)
    if quantity == "gradient":
        expected -= alpha / 2.0
    return decay_fit(times, norms, expected, p)


def longtime_experiment(alpha: float, p, n_range=(16, 1024), h: float = 1.0,
                        grid: GridSpec | None = None, count: int = 16,
                        datum: Field | None = None) -> DecayReport:
    """Scaled gap to ``M G^alpha_n`` for a datum (default: shifted Gaussian),
    fitted against the rate ``-alpha/2``."""
    grid = grid or GridSpec(1, 400.0, 8192)
    datum = datum or builtin_datum(grid, "shifted-gaussian", shift=2.0, width=1.0)
    ns = log_spaced(n_range[0], n_range[1], count)
    mass = datum.mass()
    sols = evolve_fields(datum, alpha, h, ns)
    kers = kernel_fields(grid, alpha, h, ns)
    gaps = np.array([longtime_gap(u, alpha, int(n), h, p, mass, k)
                     for u, k, n in zip(sols, kers, ns)])
    return decay_fit(ns * h, gaps, -alpha / 2.0, p)
