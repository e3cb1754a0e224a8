"""Executable identity checks over fixed parameter sweeps.

Each check returns an :class:`IdentityResult` with the largest observed
error and the tolerance it is held to.  Used by ``dtfrac verify`` and by the
acceptance suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cesaro import cauchy_convolve, cesaro_gamma_ratio, cesaro_values
from .fracdiff import MeshSequence, caputo_difference, fractional_sum, rl_difference
from .specfun import (
    FracParams,
    ml_discrete,
    ml_sequence,
    wright_binomial,
    wright_rows,
    wright_table,
)


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_error: float
    tolerance: float
    kind: str = "abs"

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)

    def as_dict(self) -> dict:
        return {"name": self.name, "max_error": self.max_error, "tolerance": self.tolerance,
                "kind": self.kind, "pass": self.passed}


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


# -- Cesaro numbers ----------------------------------------------------------


def cesaro_semigroup() -> IdentityResult:
    orders = (0.3, 0.5, 1.0, 1.5)
    err = 0.0
    for a in orders:
        for b in orders:
            conv = cauchy_convolve(cesaro_values(a, 256), cesaro_values(b, 256))
            err = max(err, _rel(conv, cesaro_values(a + b, 256)))
    return IdentityResult("cesaro semigroup k^a * k^b = k^(a+b)", err, 1e-12, "rel")


def cesaro_asymptotic() -> IdentityResult:
    err = 0.0
    for a in (0.3, 0.7):
        n = 4096
        ratio = cesaro_values(a, n)[n] * math.gamma(a) / n ** (a - 1.0)
        err = max(err, abs(ratio - 1.0))
    return IdentityResult("cesaro asymptotics k^a(n) ~ n^(a-1)/Gamma(a) at n=4096", err, 0.02, "rel")


def cesaro_gamma_form() -> IdentityResult:
    err = 0.0
    n = np.arange(1025)
    for a in (0.1, 0.5, 1.0, 1.5, 2.0):
        err = max(err, _rel(cesaro_values(a, 1024), cesaro_gamma_ratio(a, n)))
    return IdentityResult("cesaro recurrence vs Gamma ratio", err, 1e-10, "rel")


# -- fractional sums and differences -----------------------------------------


def _random_sequences(count: int, n_max: int, h: float, seed: int):
    rng = np.random.default_rng(seed)
    return [MeshSequence(h, rng.uniform(-1.0, 1.0, n_max + 1)) for _ in range(count)]


def sum_rl_inversion(h: float = 0.5, seed: int = 7) -> IdentityResult:
    err = 0.0
    for a in (0.2, 0.5, 0.8):
        for f in _random_sequences(50, 64, h, seed):
            back = fractional_sum(a, rl_difference(a, f)).values[1:]
            err = max(err, float(np.max(np.abs(back - f.values[1:])) / np.max(np.abs(f.values))))
    return IdentityResult("fractional sum inverts Riemann-Liouville difference", err, 1e-9, "rel")


def caputo_rl_relation(h: float = 0.5, seed: int = 11) -> IdentityResult:
    err = 0.0
    for a in (0.2, 0.5, 0.8):
        for f in _random_sequences(20, 64, h, seed):
            c = caputo_difference(a, f).values[1:]
            r = rl_difference(a, f - f.values[0]).values[1:]
            err = max(err, float(np.max(np.abs(c - r))))
    return IdentityResult("Caputo difference = RL difference of f - f(0)", err, 1e-11)


def caputo_sum_corollary(h: float = 0.5, seed: int = 13) -> IdentityResult:
    err = 0.0
    for a in (0.2, 0.5, 0.8):
        for f in _random_sequences(20, 64, h, seed):
            back = fractional_sum(a, caputo_difference(a, f)).values[1:]
            err = max(err, float(np.max(np.abs(back - (f.values[1:] - f.values[0])))))
    return IdentityResult("fractional sum of Caputo difference = f - f(0)", err, 1e-9)


def mixed_identity(h: float = 0.5, seed: int = 17) -> IdentityResult:
    err = 0.0
    for a in (0.2, 0.5, 0.8):
        for b in (0.0, 0.5, 1.0):
            for f in _random_sequences(10, 64, h, seed):
                lhs = fractional_sum(b + 1.0, rl_difference(1.0 - a, f)).values[1:]
                rhs = fractional_sum(b + a, f).values[1:]
                err = max(err, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))))
    return IdentityResult("sum of order b+1 of RL difference of order 1-a = sum of order a+b",
                          err, 1e-9, "rel")


def ml_eigen_sequence(alphas=(0.3, 0.7), hs=(0.5, 1.0), n_max: int = 128) -> IdentityResult:
    """Caputo difference of the Mittag-Leffler sequence is lambda times it."""
    err = 0.0
    for a in alphas:
        for h in hs:
            for lam in (-0.5, 0.3 * h ** (-a)):
                e = MeshSequence(h, ml_sequence(a, lam, n_max, h))
                d = caputo_difference(a, e).values[1:]
                err = max(err, _rel(d, lam * e.values[1:]))
    return IdentityResult("Caputo difference of Mittag-Leffler sequence = lambda * sequence",
                          err, 1e-9, "rel")


# -- discrete Wright function ------------------------------------------------


def wright_dual_algorithm(alpha: float | None = None, h: float | None = None) -> IdentityResult:
    alphas = (alpha,) if alpha is not None else (0.25, 0.5, 0.75)
    hs = (h,) if h is not None else (0.25, 1.0)
    err = 0.0
    for a in alphas:
        for hh in hs:
            for b in (0.0, 1.0 - a):
                p = FracParams(a, b, hh)
                tab = wright_table(p, 64, 20).entries
                bino = np.array([[wright_binomial(p, n, j) for j in range(21)] for n in range(65)])
                err = max(err, float(np.max(np.abs(tab - bino))))
    return IdentityResult("binomial and contour evaluations agree (n<=64, j<=20)", err, 1e-9)


def wright_convolution_lift(alpha: float = 0.5, h: float = 0.5) -> IdentityResult:
    err = 0.0
    for gamma in (0.0, 1.0 - alpha):
        for b in (0.5, 1.0):
            lo = wright_table(FracParams(alpha, gamma, h), 64, 24).entries
            hi = wright_table(FracParams(alpha, b + gamma, h), 64, 24).entries
            k = h**b * cesaro_values(b, 64)
            lifted = np.column_stack([cauchy_convolve(k, lo[:, j]) for j in range(lo.shape[1])])
            err = max(err, float(np.max(np.abs(lifted - hi))))
    return IdentityResult("convolution lift in beta", err, 1e-9)


def wright_generating(alpha: float = 0.5, h: float = 0.5, beta: float = 0.5) -> IdentityResult:
    """sum_{j>=1} phi(n-1, j-1) (1 - h lambda)^-j = E^h_{a,a+b}(lambda, n) / h."""
    err = 0.0
    rows = np.arange(0, 32)
    for lam in (0.0, -0.5, 0.3 * h ** (-alpha)):
        ratio = 1.0 / (1.0 - h * lam)
        tab = wright_rows(FracParams(alpha, beta, h), rows, tol=1e-13, growth=max(ratio, 1.0))
        J = tab.weights.shape[1]
        lhs = (tab.weights * ratio ** np.arange(1, J + 1)).sum(axis=1)
        rhs = np.array([ml_discrete(alpha, alpha + beta, lam, int(n) + 1, h) / h for n in rows])
        err = max(err, _rel(lhs, rhs))
    return IdentityResult("generating identity against Mittag-Leffler sequence", err, 1e-10, "rel")


def wright_difference_recurrence(alpha: float = 0.5, h: float = 0.5) -> IdentityResult:
    err = 0.0
    for b in (alpha, 1.0, 1.5):
        t = wright_table(FracParams(alpha, b, h), 64, 25).entries
        d = wright_table(FracParams(alpha, b - alpha, h), 64, 24).entries
        err = max(err, float(np.max(np.abs(t[:, :-1] - t[:, 1:] - h * d))))
    return IdentityResult("phi(n,j) - phi(n,j+1) = h phi_(beta-alpha)(n,j)", err, 1e-10)


def wright_j_semigroup(alpha: float = 0.5, h: float = 0.5) -> IdentityResult:
    t = wright_table(FracParams(alpha, 0.0, h), 64, 24).entries
    err = 0.0
    for j in range(24):
        rhs = cauchy_convolve(t[:, j], t[:, 1])
        err = max(err, float(np.max(np.abs(t[:, j + 1] - rhs))))
    return IdentityResult("j-semigroup phi_0(.,j+1) = phi_0(.,j) * phi_0(.,1)", err, 1e-10)


def wright_nonnegative(alpha: float | None = None, h: float | None = None) -> IdentityResult:
    alphas = (alpha,) if alpha is not None else (0.25, 0.5, 0.75)
    hs = (h,) if h is not None else (0.25, 0.5, 1.0)
    worst = 0.0
    for a in alphas:
        for hh in hs:
            if hh > 1:
                continue
            for b in (0.0, 1.0 - a, 1.0):
                t = wright_table(FracParams(a, b, hh), 64, 96).entries
                worst = max(worst, float(-t.min()))
    return IdentityResult("nonnegativity for h <= 1 (largest negative part)", worst, 1e-12)


def wright_moments(alpha: float = 0.5, h: float = 0.5) -> IdentityResult:
    err = 0.0
    for b in (0.0, 1.0 - alpha, 1.0):
        rows = np.arange(0, 65)
        tab = wright_rows(FracParams(alpha, b, h), rows, tol=1e-14)
        J = tab.weights.shape[1]
        for gamma in (1.0, 2.0):
            lhs = tab.weights @ cesaro_values(gamma, J - 1)
            rhs = np.array([h ** (b + gamma * (alpha - 1.0)) * cesaro_values(b + gamma * alpha, 64)[n]
                            for n in rows])
            err = max(err, _rel(lhs, rhs))
    return IdentityResult("moment identity sum_j phi(n,j) k^g(j)", err, 1e-7, "rel")


def wright_row_sums(alpha: float | None = None, h: float | None = None) -> IdentityResult:
    alphas = (alpha,) if alpha is not None else (0.25, 0.5, 0.75)
    hs = (h,) if h is not None else (0.25, 0.5, 1.0)
    err = 0.0
    for a in alphas:
        for hh in hs:
            tab = wright_rows(FracParams(a, 1.0 - a, hh), np.arange(0, 65), tol=1e-12)
            err = max(err, float(np.max(np.abs(tab.weights.sum(axis=1) - 1.0))))
    return IdentityResult("row sums of subordination weights equal 1", err, 1e-8)


def wright_column_sums(alpha: float = 0.5, h: float = 0.5) -> IdentityResult:
    # sum over n of phi_0(n, j) -> 1; the column tails decay like n^(-1-alpha)
    t = wright_table(FracParams(alpha, 0.0, h), 4096, 4).entries
    err = float(np.max(np.abs(t.sum(axis=0) - 1.0)))
    return IdentityResult("column sums of phi_0 (n <= 4096) approach 1", err, 5e-2)


SUITES = {
    "cesaro": (cesaro_semigroup, cesaro_asymptotic, cesaro_gamma_form),
    "fracdiff": (sum_rl_inversion, caputo_rl_relation, caputo_sum_corollary, mixed_identity),
    "ml-eigen": (ml_eigen_sequence,),
    "wright-identities": (
        wright_dual_algorithm,
        wright_convolution_lift,
        wright_generating,
        wright_difference_recurrence,
        wright_j_semigroup,
        wright_nonnegative,
        wright_moments,
        wright_row_sums,
    ),
}
