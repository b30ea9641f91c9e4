"""Numerical laboratory for time-slicing approximations of Schrodinger propagators.

Modules
-------
core
    Grids, fields, Fourier conventions, kernel matrices and norms.
tfa
    STFT, Gabor frames, modulation norms, Wigner distribution, Gabor matrices.
oracles
    Free, oscillator, metaplectic and split-step reference propagators.
actions, slicing
    Short-time action models, parametrices, their compositions and Trotter products.
lab
    Distances, rate fits, pointwise reports, L^p probes and hbar sweeps.
experiments, cli
    Named experiment catalog and the ``pathlab`` command-line runner.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Convention,
    Field,
    Grid,
    KernelMatrix,
    PhysicsConfig,
    bessel_multiplier,
    field_norm,
    fourier,
    identity_kernel,
    kernel_compose,
    kernel_from_operator,
    operator_norm,
)
from .errors import (  # noqa: E402
    ConfigError,
    ExceptionalTime,
    GridMismatch,
    GuardViolation,
    InvalidInput,
    NoClassicalPath,
    NotFreeSymplectic,
    PathlabError,
)
from .potentials import PotentialSpec  # noqa: E402
from .oracles import (  # noqa: E402
    QuadraticHamiltonian,
    SymplecticBlocks,
    classical_flow,
    exact_kernel,
    free_kernel,
    free_propagate,
    mehler_kernel,
    metaplectic_kernel,
    reference_propagate,
)
from .actions import ActionModel, WSeries, hj_coefficients, approx_action  # noqa: E402
from .slicing import Subdivision, compose_over_subdivision, mesh, parametrix_kernel, trotter_approx  # noqa: E402
from .lab import distance_opnorm, rate_fit, pointwise_report  # noqa: E402

__all__ = [
    "__version__",
    "Convention",
    "Field",
    "Grid",
    "KernelMatrix",
    "PhysicsConfig",
    "bessel_multiplier",
    "field_norm",
    "fourier",
    "identity_kernel",
    "kernel_compose",
    "kernel_from_operator",
    "operator_norm",
    "ConfigError",
    "ExceptionalTime",
    "GridMismatch",
    "GuardViolation",
    "InvalidInput",
    "NoClassicalPath",
    "NotFreeSymplectic",
    "PathlabError",
    "PotentialSpec",
    "QuadraticHamiltonian",
    "SymplecticBlocks",
    "classical_flow",
    "exact_kernel",
    "free_kernel",
    "free_propagate",
    "mehler_kernel",
    "metaplectic_kernel",
    "reference_propagate",
    "ActionModel",
    "WSeries",
    "hj_coefficients",
    "approx_action",
    "Subdivision",
    "compose_over_subdivision",
    "mesh",
    "parametrix_kernel",
    "trotter_approx",
    "distance_opnorm",
    "rate_fit",
    "pointwise_report",
]
