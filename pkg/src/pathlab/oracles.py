"""Exact and high-accuracy reference propagators.

Quadratic propagators (free particle, oscillator, general metaplectic
operators) are realized on the grid as chirp * free-multiplier * chirp,
which is exactly unitary; the sampled closed-form kernels are available
with ``method="closed"``. Bounded and harmonic potentials without a closed
form are handled by a Strang split-step oracle.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    Convention,
    Field,
    Grid,
    KernelMatrix,
    apply_multiplier,
    identity_kernel,
    kernel_from_operator,
    multiplier_kernel,
)
from .errors import ExceptionalTime, InvalidInput, NotFreeSymplectic

__all__ = [
    "EXCEPTIONAL_THRESHOLD",
    "is_exceptional_block",
    "QuadraticHamiltonian",
    "SymplecticBlocks",
    "classical_flow",
    "free_kernel",
    "free_kernel_value",
    "free_propagate",
    "quadratic_kernel",
    "quadratic_propagate",
    "metaplectic_kernel",
    "mehler_kernel",
    "mehler_value",
    "to_pde_kernel",
    "reference_propagate",
    "strang_step_matrix",
    "exact_kernel",
]

logger = logging.getLogger(__name__)

EXCEPTIONAL_THRESHOLD = 1e-6


def is_exceptional_block(b):
    """``|b| <= 1e-6`` with a 1e-8 relative slack absorbing rounding of ``t``."""
    return abs(b) <= EXCEPTIONAL_THRESHOLD * (1.0 + 1e-8)


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Symbol ``a(x, xi) = A x^2/2 + B x xi + C xi^2/2``."""

    A: float = 0.0
    B: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        if not all(np.isfinite([self.A, self.B, self.C])):
            raise InvalidInput("quadratic Hamiltonian coefficients must be finite")

    @classmethod
    def free(cls):
        return cls(0.0, 0.0, 1.0)

    @classmethod
    def harmonic(cls, omega=1.0):
        return cls(omega**2, 0.0, 1.0)

    @property
    def generator(self):
        """Hamiltonian matrix of the linear flow ``dz/dt = gen z``, ``z = (x, xi)``."""
        return np.array([[self.B, self.C], [-self.A, -self.B]], dtype=float)

    @property
    def frequency(self):
        """Oscillation frequency when the flow is elliptic, else 0."""
        d = self.A * self.C - self.B**2
        return float(np.sqrt(d)) if d > 0 else 0.0


@dataclass(frozen=True)
class SymplecticBlocks:
    """Blocks of a 2x2 symplectic matrix, ``x' = A x + B xi``, ``xi' = C x + D xi``.

    ``winding`` counts the zeros of the B block crossed along the flow that
    produced the matrix and ``orientation`` is the sign of B just after the
    start; together they fix the continuous branch of ``|B|^{-1/2}``.
    """

    A: float
    B: float
    C: float
    D: float
    winding: int = 0
    orientation: int = 1

    def __post_init__(self):
        det = self.A * self.D - self.B * self.C
        if not np.isfinite(det) or abs(det - 1.0) > 1e-10:
            raise InvalidInput(f"blocks are not symplectic: AD - BC = {det!r}")

    @property
    def matrix(self):
        return np.array([[self.A, self.B], [self.C, self.D]])

    @classmethod
    def from_matrix(cls, m, winding=0, orientation=1):
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]), winding, orientation)


def _flow_scale(cfg):
    return 1.0 if cfg is None or cfg.is_pde else 1.0 / (2.0 * np.pi)


def classical_flow(h, t, cfg=None):
    """Linear Hamiltonian flow of a quadratic symbol after time ``t``.

    Under the HA convention the generator is scaled by ``1/(2 pi)``.
    """
    if not np.isfinite(t):
        raise InvalidInput("time must be finite")
    tau = _flow_scale(cfg) * t
    m = scipy.linalg.expm(tau * h.generator)
    omega = h.frequency
    winding = int(np.floor(abs(tau) * omega / np.pi)) if omega > 0 else 0
    orientation = 1 if h.C * tau >= 0 else -1
    return SymplecticBlocks.from_matrix(m, winding, orientation)


def _effective_hbar(cfg):
    if cfg is None:
        return 1.0
    return cfg.hbar if cfg.is_pde else 1.0 / (2.0 * np.pi)


def _branch_correction(blocks):
    """Unit factor turning the principal branch of (i B)^{-1/2} into the continuous one."""
    desired = -blocks.orientation * (0.25 * np.pi + 0.5 * np.pi * blocks.winding)
    principal = -np.sign(blocks.B) * 0.25 * np.pi
    return np.exp(1j * (desired - principal))


def _check_free(blocks):
    if is_exceptional_block(blocks.B):
        raise NotFreeSymplectic(
            f"B block {blocks.B:.3e} is within {EXCEPTIONAL_THRESHOLD:.0e} of zero"
        )


def _pde_grid_check(cfg, what):
    if cfg is not None and not cfg.is_pde:
        raise InvalidInput(f"{what} is defined under the PDE convention")


def _free_symbol(grid, t, hbar_eff):
    xi = grid.frequencies(Convention.PDE)
    return np.exp(-0.5j * hbar_eff * t * xi**2)


def free_kernel_value(x, y, t, hbar=1.0):
    """Closed-form free kernel ``(2 pi i hbar t)^{-1/2} e^{i |x-y|^2/(2 hbar t)}``."""
    return (2j * np.pi * hbar * t) ** -0.5 * np.exp(1j * (x - y) ** 2 / (2.0 * hbar * t))


def free_kernel(t, grid, cfg=None, method="spectral"):
    """Free propagator kernel ``e^{-(i/hbar) t H_0}``, ``H_0 = -hbar^2 Laplacian/2``.

    ``method="spectral"`` materializes the multiplier ``e^{-i hbar t xi^2/2}``
    (exactly unitary on the grid); ``method="closed"`` samples the
    closed-form kernel.
    """
    _pde_grid_check(cfg, "free_kernel")
    hbar = 1.0 if cfg is None else cfg.hbar
    if t == 0:
        return identity_kernel(grid)
    if method == "spectral":
        return multiplier_kernel(_free_symbol(grid, t, hbar), grid)
    if method == "closed":
        x = grid.points
        return KernelMatrix(grid, free_kernel_value(x[:, None], x[None, :], t, hbar))
    raise InvalidInput(f"unknown method {method!r}")


def free_propagate(f, t, cfg=None):
    """Free evolution through the Fourier multiplier ``e^{-i hbar t xi^2/2}``."""
    _pde_grid_check(cfg, "free_propagate")
    hbar = 1.0 if cfg is None else cfg.hbar
    if t == 0:
        return Field(f.grid, f.samples.copy())
    return Field(f.grid, apply_multiplier(f.samples, _free_symbol(f.grid, t, hbar)))


def _chirps(blocks, grid, hbar_eff):
    x = grid.points
    left = np.exp(0.5j * (blocks.D - 1.0) * x**2 / (hbar_eff * blocks.B))
    right = np.exp(0.5j * (blocks.A - 1.0) * x**2 / (hbar_eff * blocks.B))
    return left, right


def quadratic_kernel(blocks, grid, cfg=None, method="spectral"):
    """Kernel ``c |2 pi hbar B|^{-1/2} exp((i/hbar)(D x^2/2 - x y + A y^2/2)/B)``.

    Works under either convention (HA corresponds to ``hbar = 1/(2 pi)`` in
    the phase). The spectral realization writes the phase as
    ``(x-y)^2/(2B) + (D-1)x^2/(2B) + (A-1)y^2/(2B)`` and uses the free
    multiplier for the first term.
    """
    _check_free(blocks)
    he = _effective_hbar(cfg)
    corr = _branch_correction(blocks)
    if method == "spectral":
        left, right = _chirps(blocks, grid, he)
        mid = multiplier_kernel(_free_symbol(grid, blocks.B, he), grid).entries
        return KernelMatrix(grid, corr * left[:, None] * mid * right[None, :])
    if method == "closed":
        x = grid.points
        X, Y = x[:, None], x[None, :]
        phase = (0.5 * blocks.D * X**2 - X * Y + 0.5 * blocks.A * Y**2) / (he * blocks.B)
        amp = (2j * np.pi * he * blocks.B) ** -0.5 * corr
        return KernelMatrix(grid, amp * np.exp(1j * phase))
    raise InvalidInput(f"unknown method {method!r}")


def quadratic_propagate(f, blocks, cfg=None):
    """Apply the spectral realization of :func:`quadratic_kernel` to a field."""
    _check_free(blocks)
    he = _effective_hbar(cfg)
    left, right = _chirps(blocks, f.grid, he)
    out = apply_multiplier(right * f.samples, _free_symbol(f.grid, blocks.B, he))
    return Field(f.grid, _branch_correction(blocks) * left * out)


def metaplectic_kernel(blocks, grid, cfg, method="spectral"):
    """Metaplectic operator of a free symplectic matrix under the HA convention.

    Raises
    ------
    NotFreeSymplectic
        If ``|B| <= 1e-6``.
    """
    if cfg.is_pde:
        raise InvalidInput("metaplectic_kernel uses the HA convention")
    return quadratic_kernel(blocks, grid, cfg, method)


def to_pde_kernel(kernel_ha):
    """Rewrite an HA-convention kernel as the unitarily equivalent PDE kernel.

    ``K_PDE(x, y) = K_HA(x/sqrt(2 pi), y/sqrt(2 pi)) / sqrt(2 pi)``, so the
    result lives on the grid dilated by ``sqrt(2 pi)``.
    """
    s = np.sqrt(2.0 * np.pi)
    g = kernel_ha.grid
    return KernelMatrix(Grid(g.n_points, g.x_min * s, g.x_max * s), kernel_ha.entries / s)


def _mehler_blocks(t):
    s = np.sin(t)
    k = int(np.rint(t / np.pi))
    blocks = classical_flow(QuadraticHamiltonian.harmonic(1.0), t)
    # test both the closed form and the computed block so the guards agree at the threshold
    if is_exceptional_block(s) or is_exceptional_block(blocks.B):
        raise ExceptionalTime(t, k, s, EXCEPTIONAL_THRESHOLD)
    return blocks


def mehler_value(x, y, t):
    """Closed-form oscillator kernel with the continuity phase (hbar = 1)."""
    b = _mehler_blocks(t)
    corr = _branch_correction(b)
    return (
        corr
        * (2j * np.pi * np.sin(t)) ** -0.5
        * np.exp(1j * ((x**2 + y**2) * np.cos(t) - 2.0 * x * y) / (2.0 * np.sin(t)))
    )


def mehler_kernel(t, grid, cfg=None, method="spectral"):
    """Oscillator propagator ``e^{-itH}``, ``H = (-d^2/dx^2 + x^2)/2``, hbar = 1.

    Raises
    ------
    ExceptionalTime
        When ``|sin t| <= 1e-6``; the propagator is then a phased delta
        supported on ``y = (-1)^k x``.
    """
    if cfg is not None and (cfg.hbar != 1.0 or not cfg.is_pde):
        raise InvalidInput("mehler_kernel is defined for hbar = 1 under the PDE convention")
    blocks = _mehler_blocks(t)
    return quadratic_kernel(blocks, grid, None, method)


def _potential_values(V, grid):
    return np.asarray(V(grid.points), dtype=float)


def reference_propagate(V, f, t, cfg=None, substeps=4096):
    """Strang split-step evolution under ``-hbar^2 Laplacian/2 + V``.

    Each step is ``e^{-i dt V/2hbar} F^{-1} e^{-i hbar dt xi^2/2} F e^{-i dt V/2hbar}``
    with ``dt = t/substeps``; adjacent potential half steps are merged.
    """
    _pde_grid_check(cfg, "reference_propagate")
    if substeps < 1:
        raise InvalidInput("substeps must be >= 1")
    hbar = 1.0 if cfg is None else cfg.hbar
    if t == 0:
        return Field(f.grid, f.samples.copy())
    dt = t / substeps
    v = _potential_values(V, f.grid)
    half = np.exp(-0.5j * dt * v / hbar)
    full = half * half
    kin = _free_symbol(f.grid, dt, hbar)
    psi = half * f.samples
    for step in range(substeps):
        psi = np.fft.ifft(kin * np.fft.fft(psi))
        psi = psi * (full if step < substeps - 1 else half)
    if not np.all(np.isfinite(psi)):
        raise InvalidInput("split-step evolution diverged")
    return Field(f.grid, psi)


def strang_step_matrix(V, dt, grid, cfg=None):
    """Operator matrix of one Strang step (acting on sample vectors)."""
    hbar = 1.0 if cfg is None else cfg.hbar
    half = np.exp(-0.5j * dt * _potential_values(V, grid) / hbar)
    kin = multiplier_kernel(_free_symbol(grid, dt, hbar), grid).matrix
    return half[:, None] * kin * half[None, :]


def exact_kernel(V, t, grid, cfg=None, substeps=8192, method="power"):
    """Kernel of the split-step oracle.

    ``method="power"`` raises the one-step matrix to the ``substeps`` power by
    repeated squaring; ``method="columns"`` propagates every unit column with
    :func:`reference_propagate`. Both give the same operator.
    """
    _pde_grid_check(cfg, "exact_kernel")
    if t == 0:
        return identity_kernel(grid)
    if method == "power":
        step = strang_step_matrix(V, t / substeps, grid, cfg)
        m = np.linalg.matrix_power(step, int(substeps))
        if not np.all(np.isfinite(m)):
            raise InvalidInput("split-step evolution diverged")
        return KernelMatrix.from_matrix(grid, m)
    if method == "columns":
        return kernel_from_operator(lambda f: reference_propagate(V, f, t, cfg, substeps), grid)
    raise InvalidInput(f"unknown method {method!r}")
