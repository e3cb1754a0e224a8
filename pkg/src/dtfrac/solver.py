"""Spectral solvers for the discrete-time fractional heat equation on a
periodic box ``[-L, L)^N``.

Three independent schemes compute the same ``u(nh)``:

* ``multiplier``: multiply ``f^`` by the closed-form kernel multiplier,
* ``subordination``: weighted sum of implicit-Euler heat iterates,
* ``timestep``: march the Cesaro-convolution recurrence in time.

The Laplacian is the exact Fourier symbol ``-|xi|^2``, so the only
discretisation being studied is the one in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cesaro import cesaro_values
from .errors import InputError, NumericalError
from .kernels import frac_multiplier, frac_second_moment, multiplier_table
from .specfun import FracParams, subordination_weights

SCHEMES = ("multiplier", "subordination", "timestep")
IMAG_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``M`` points per axis on ``[-L, L)^N``."""

    N: int
    L: float
    M: int

    def __post_init__(self):
        if self.N not in (1, 2, 3):
            raise InputError(f"dimension N must be 1, 2 or 3, got {self.N}")
        if not self.L > 0:
            raise InputError(f"half-extent L must be positive, got {self.L}")
        M = int(self.M)
        if M < 16 or M & (M - 1):
            raise InputError(f"M must be a power of two >= 16, got {self.M}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.N

    @property
    def cell_volume(self) -> float:
        return self.dx**self.N

    def axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.M)

    def coords(self) -> list[np.ndarray]:
        """Coordinate arrays, one per axis, broadcast to :attr:`shape`."""
        return list(np.meshgrid(*([self.axis()] * self.N), indexing="ij"))

    def radius_squared(self) -> np.ndarray:
        return sum(c**2 for c in self.coords())

    def rfft_q(self) -> np.ndarray:
        """``|xi|^2`` on the half-spectrum layout used by ``rfftn``."""
        full = 2.0 * np.pi * np.fft.fftfreq(self.M, d=self.dx)
        half = 2.0 * np.pi * np.fft.rfftfreq(self.M, d=self.dx)
        axes = [full] * (self.N - 1) + [half]
        grids = np.meshgrid(*axes, indexing="ij")
        return sum(g**2 for g in grids)

    def fft(self, samples: np.ndarray) -> np.ndarray:
        # samples live on x = -L + k dx; the phase from the shift is common to
        # every scheme and cancels on the inverse transform
        return np.fft.rfftn(samples, axes=tuple(range(-self.N, 0)))

    def ifft(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(spectrum, s=self.shape, axes=tuple(range(-self.N, 0)))


def suggest_half_extent(alpha: float, h: float, n_target: int, N: int = 1,
                        log_drop: float = 45.0) -> float:
    """Half-extent keeping kernel tails negligible at the boundary.

    The kernel decays like ``exp(-(1-v) v^{v/(1-v)} z^{1/(1-v)})`` with
    ``v = alpha/2`` and ``z = |x| t^{-alpha/2}``, and its second moment is
    about ``2 N t^alpha / Gamma(1+alpha)``.  ``L`` is the radius, in units of
    ``sqrt(m2/N)``, where the tail factor reaches ``exp(-log_drop)``.  Small
    ``alpha`` has heavier tails and needs more widths (about 9 widths at
    ``alpha = 1``, 23 at ``alpha = 0.3``).
    """
    v = alpha / 2.0
    rate = (1.0 - v) * v ** (v / (1.0 - v))
    z = (log_drop / rate) ** (1.0 - v)
    widths = z / math.sqrt(2.0 / math.gamma(1.0 + alpha))
    m2 = frac_second_moment(alpha, n_target, h, N)
    return widths * math.sqrt(m2 / N)


@dataclass(frozen=True)
class Field:
    """Real samples of a function on a :class:`GridSpec`."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != self.grid.shape:
            if s.size != self.grid.M**self.grid.N:
                raise InputError(f"expected {self.grid.shape} samples, got {s.shape}")
            s = s.reshape(self.grid.shape)
        if not np.all(np.isfinite(s)):
            raise InputError("field samples must be finite")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: GridSpec, func: Callable) -> "Field":
        """Sample ``func(*coords)`` on the grid."""
        return cls(grid, func(*grid.coords()))

    def mass(self) -> float:
        return float(self.samples.sum() * self.grid.cell_volume)

    def first_moment(self) -> np.ndarray:
        vol = self.grid.cell_volume
        return np.array([float((c * self.samples).sum() * vol) for c in self.grid.coords()])


@dataclass(frozen=True)
class SolveConfig:
    alpha: float
    h: float
    n_target: int
    scheme: str = "multiplier"
    tol: float = 1e-12
    history: bool = False

    def __post_init__(self):
        FracParams(self.alpha, 0.0, self.h)
        if int(self.n_target) < 1:
            raise InputError(f"n_target must be >= 1, got {self.n_target}")
        if self.scheme not in SCHEMES:
            raise InputError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not self.tol > 0:
            raise InputError("tol must be positive")


def _to_fields(grid: GridSpec, spectra) -> list[Field]:
    return [Field(grid, grid.ifft(s)) for s in spectra]


def _check_real(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if np.max(np.abs(m.imag)) > IMAG_TOL:
            raise NumericalError("multiplier has a non-negligible imaginary part")
        m = m.real
    return m


def _finish(grid: GridSpec, f_hat, spectra, history: bool):
    if history:
        return _to_fields(grid, [f_hat] + list(spectra))
    return Field(grid, grid.ifft(spectra[-1]))


def solve_multiplier(f: Field, cfg: SolveConfig):
    """``u(nh)^ = m_n(xi) f^`` with ``m_n`` from :func:`~dtfrac.kernels.frac_multiplier`.

    The multiplier is evaluated once per distinct value of ``|xi|^2``.
    Returns a :class:`Field`, or the list ``[u(0), ..., u(n_target h)]``
    when ``cfg.history`` is set.
    """
    grid = f.grid
    q = grid.rfft_q()
    uq, inverse = np.unique(q, return_inverse=True)
    inverse = inverse.reshape(q.shape)
    f_hat = grid.fft(f.samples)
    ns = range(1, cfg.n_target + 1) if cfg.history else [cfg.n_target]
    spectra = []
    for n in ns:
        m = _check_real(frac_multiplier(cfg.alpha, n, cfg.h, np.sqrt(uq), tol=cfg.tol))
        spectra.append(m[inverse] * f_hat)
    return _finish(grid, f_hat, spectra, cfg.history)


def solve_subordination(f: Field, cfg: SolveConfig):
    """Accumulate ``sum_j phi(n-1, j-1) w_j`` with ``w_j = (I - h Lap)^-1 w_{j-1}``.

    All requested time levels share the same resolvent iterates.
    """
    grid = f.grid
    resolvent = 1.0 / (1.0 + cfg.h * grid.rfft_q())
    f_hat = grid.fft(f.samples)
    ns = list(range(1, cfg.n_target + 1)) if cfg.history else [cfg.n_target]
    weights = subordination_weights(cfg.alpha, cfg.h, ns, tol=cfg.tol).weights
    acc = np.zeros((len(ns),) + f_hat.shape, dtype=complex)
    w = f_hat
    for j in range(weights.shape[1]):
        w = w * resolvent
        col = weights[:, j]
        nz = np.nonzero(col)[0]
        if len(nz):
            acc[nz] += col[nz].reshape((-1,) + (1,) * w.ndim) * w
    return _finish(grid, f_hat, list(acc), cfg.history)


def solve_timestep(f: Field, cfg: SolveConfig) -> list[Field]:
    """March ``(1 + h^a q) u_n^ = f^ - h^a q sum_{w=1}^{n-1} k^a(n-w) u_w^``.

    Always returns the full trajectory ``[u(0), ..., u(n_target h)]``; the
    dense history costs ``n_target * M^N`` complex values.
    """
    grid = f.grid
    ha_q = cfg.h**cfg.alpha * grid.rfft_q()
    denom = 1.0 + ha_q
    k = cesaro_values(cfg.alpha, cfg.n_target)
    f_hat = grid.fft(f.samples)
    hist = np.empty((cfg.n_target + 1,) + f_hat.shape, dtype=complex)
    hist[0] = f_hat
    for n in range(1, cfg.n_target + 1):
        # memory term: sum_{w=1}^{n-1} k(n-w) u_w, i.e. k[n-1..1] against hist[1..n-1]
        memory = np.tensordot(k[n - 1 : 0 : -1], hist[1:n], axes=1) if n > 1 else 0.0
        hist[n] = (f_hat - ha_q * memory) / denom
    return _to_fields(grid, hist)


def solve(f: Field, cfg: SolveConfig):
    """Dispatch on ``cfg.scheme``."""
    if cfg.scheme == "multiplier":
        return solve_multiplier(f, cfg)
    if cfg.scheme == "subordination":
        return solve_subordination(f, cfg)
    traj = solve_timestep(f, cfg)
    return traj if cfg.history else traj[-1]


def spectral_laplacian(u: Field) -> Field:
    """Exact-symbol Laplacian ``-|xi|^2 u^`` of a periodic field."""
    g = u.grid
    return Field(g, g.ifft(-g.rfft_q() * g.fft(u.samples)))


def kernel_fields(grid: GridSpec, alpha: float, h: float, ns, tol: float = 1e-12) -> list[Field]:
    """Fractional kernel sampled on the grid for each ``n`` in ``ns``, obtained
    by inverse transforming its multiplier (periodised on the torus)."""
    table = multiplier_table(alpha, ns, h, grid.rfft_q(), tol=tol)
    return [Field(grid, np.fft.fftshift(grid.ifft(m)) / grid.cell_volume) for m in table]


def evolve_fields(f: Field, alpha: float, h: float, ns, tol: float = 1e-12) -> list[Field]:
    """``u(nh)`` for each ``n`` in ``ns`` (arbitrary, not necessarily
    consecutive), via one shared multiplier table."""
    grid = f.grid
    f_hat = grid.fft(f.samples)
    table = multiplier_table(alpha, ns, h, grid.rfft_q(), tol=tol)
    return [Field(grid, grid.ifft(m * f_hat)) for m in table]
