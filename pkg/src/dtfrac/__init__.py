"""Discrete-in-time fractional diffusion.

Cesaro numbers, fractional sums and differences on a uniform time mesh,
discrete Mittag-Leffler and scaled Wright functions, the subordinated heat
kernel and spectral solvers for ``C-delta^alpha u = Laplace u``.
"""

from .cesaro import cauchy_convolve, cesaro_number, cesaro_sequence, cesaro_values
from .errors import (
    DivergentError,
    DomainError,
    DtfracError,
    InputError,
    NumericalError,
    QuadratureError,
    TruncationError,
)
from .fracdiff import (
    MeshSequence,
    backward_difference,
    caputo_difference,
    fractional_sum,
    rl_difference,
)
from .kernels import (
    KernelQuery,
    discrete_gaussian,
    discrete_gaussian_multiplier,
    frac_fundamental,
    frac_multiplier,
    frac_second_moment,
    gaussian_kernel,
)
from .specfun import (
    FracParams,
    ml_continuous,
    ml_discrete,
    ml_sequence,
    scaled_wright_continuous,
    subordination_weights,
    wright_discrete,
    wright_table,
)
from .solver import (
    Field,
    GridSpec,
    SolveConfig,
    solve,
    solve_multiplier,
    solve_subordination,
    solve_timestep,
)

__version__ = "0.1.0"
