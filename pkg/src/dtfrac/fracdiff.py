"""Fractional sums and differences on the mesh {0, h, 2h, ...}.

Outputs of difference operators have no value at n = 0; that slot holds
``nan`` (:data:`ABSENT`) so that it can never leak silently into a later
convolution.  Fractional sums only ever read indices ``1..n_max``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cesaro import cauchy_convolve, cesaro_values
from .errors import InputError

ABSENT = float("nan")


@dataclass(frozen=True)
class MeshSequence:
    """Samples ``f(nh)`` for ``n = 0..n_max``."""

    h: float
    values: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise InputError(f"step h must be positive, got {self.h}")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) == 0:
            raise InputError("values must be a non-empty 1-D array")
        object.__setattr__(self, "values", values)

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(len(self.values))

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    def __sub__(self, other):
        if isinstance(other, MeshSequence):
            if other.h != self.h:
                raise InputError("mesh steps differ")
            other = other.values
        return MeshSequence(self.h, self.values - other)

    @classmethod
    def from_function(cls, func, h: float, n_max: int) -> "MeshSequence":
        t = h * np.arange(n_max + 1)
        return cls(h, np.asarray(func(t), dtype=float))


def _require_steps(f: MeshSequence) -> None:
    if f.n_max < 1:
        raise InputError("difference operators need n_max >= 1")


def backward_difference(f: MeshSequence) -> MeshSequence:
    """``(f(nh) - f((n-1)h)) / h`` for ``n >= 1``; slot 0 is absent."""
    _require_steps(f)
    out = np.empty_like(f.values)
    out[0] = ABSENT
    out[1:] = np.diff(f.values) / f.h
    return MeshSequence(f.h, out)


def fractional_sum(alpha: float, f: MeshSequence) -> MeshSequence:
    """Fractional sum ``h^alpha sum_{j=1}^n k^alpha(n-j) f(jh)``.

    ``out[0]`` is the empty sum, 0.  Order 0 returns ``f`` on ``n >= 1``.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise InputError(f"fractional sum order must be >= 0, got {alpha}")
    out = np.zeros_like(f.values)
    if f.n_max == 0:
        return MeshSequence(f.h, out)
    tail = f.values[1:]
    if alpha == 0.0:
        out[1:] = tail
        return MeshSequence(f.h, out)
    kernel = cesaro_values(alpha, f.n_max - 1)
    out[1:] = f.h**alpha * cauchy_convolve(kernel, tail)
    return MeshSequence(f.h, out)


def rl_difference(alpha: float, f: MeshSequence) -> MeshSequence:
    """Riemann-Liouville h-difference of order ``0 < alpha < 1``."""
    if not 0.0 < alpha < 1.0:
        raise InputError(f"Riemann-Liouville order must lie in (0, 1), got {alpha}")
    _require_steps(f)
    return backward_difference(fractional_sum(1.0 - alpha, f))


def caputo_difference(alpha: float, f: MeshSequence) -> MeshSequence:
    """Caputo h-difference of order ``0 < alpha <= 1``.

    The order-(1 - alpha) sum is applied to the backward difference; at
    ``alpha = 1`` this is the backward difference itself.
    """
    if not 0.0 < alpha <= 1.0:
        raise InputError(f"Caputo order must lie in (0, 1], got {alpha}")
    _require_steps(f)
    diff = backward_difference(f)
    if alpha == 1.0:
        return diff
    out = fractional_sum(1.0 - alpha, diff).values
    out[0] = ABSENT
    return MeshSequence(f.h, out)
