"""Grids, fields, Fourier conventions and quadrature kernel matrices.

Everything in the lab lives on a uniform periodic grid ``x_j = x_min + j*dx``.
Operators are stored as :class:`KernelMatrix` objects whose entries sample
the integral kernel ``k(x_i, x_j)``; the quadrature weight ``dx`` is carried
explicitly so that application, composition and norms agree with the
continuous pairing ``(Kf)(x) = int k(x, y) f(y) dy``.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import GridMismatch, InvalidInput
from .io import write_csv

__all__ = [
    "Convention",
    "PhysicsConfig",
    "Grid",
    "Field",
    "KernelMatrix",
    "ResolvedBasis",
    "fourier",
    "bessel_multiplier",
    "field_norm",
    "kernel_compose",
    "operator_norm",
    "kernel_from_operator",
    "identity_kernel",
    "diagonal_kernel",
    "multiplier_kernel",
    "apply_multiplier",
    "spectral_derivative",
    "resolved_basis",
    "japanese_bracket",
]


class Convention(str, Enum):
    """Fourier phase convention.

    ``PDE`` uses ``e^{-i x xi}`` with the unitary ``(2 pi)^{-1/2}`` factor and
    angular frequencies; ``HA`` uses ``e^{-2 pi i x xi}`` with ordinary
    frequencies and no prefactor.
    """

    PDE = "PDE"
    HA = "HA"

    @property
    def phase_scale(self):
        """Factor theta in ``e^{-i theta x xi}``."""
        return 1.0 if self is Convention.PDE else 2.0 * np.pi

    @property
    def prefactor(self):
        return (2.0 * np.pi) ** -0.5 if self is Convention.PDE else 1.0


@dataclass(frozen=True)
class PhysicsConfig:
    """Semiclassical parameter and Fourier convention of an experiment."""

    hbar: float = 1.0
    convention: Convention = Convention.PDE

    def __post_init__(self):
        object.__setattr__(self, "convention", Convention(self.convention))
        if not (0.0 < self.hbar <= 1.0):
            raise InvalidInput(f"hbar must lie in (0, 1], got {self.hbar!r}")

    @property
    def is_pde(self):
        return self.convention is Convention.PDE


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n_points`` samples on ``[x_min, x_max)``."""

    n_points: int = 1024
    x_min: float = -16.0
    x_max: float = 16.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidInput(f"n_points must be an integer >= 2, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_max <= self.x_min:
            raise InvalidInput("grid requires finite x_min < x_max")

    @property
    def spacing(self):
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self):
        return self.x_max - self.x_min

    @cached_property
    def points(self):
        return self.x_min + self.spacing * np.arange(self.n_points)

    def dual_spacing(self, convention=Convention.PDE):
        """Frequency step of the discrete transform under ``convention``."""
        base = 1.0 / (self.n_points * self.spacing)
        return 2.0 * np.pi * base if Convention(convention) is Convention.PDE else base

    def frequencies(self, convention=Convention.PDE):
        """Frequencies in FFT (unshifted) order."""
        f = np.fft.fftfreq(self.n_points, d=self.spacing)
        return 2.0 * np.pi * f if Convention(convention) is Convention.PDE else f

    def nyquist(self, convention=Convention.PDE):
        return 0.5 * self.n_points * self.dual_spacing(convention)

    def dual(self, convention=Convention.PDE):
        """Centered frequency grid on which :func:`fourier` returns its output."""
        d = self.dual_spacing(convention)
        lo = -(self.n_points // 2) * d
        return Grid(self.n_points, lo, lo + self.n_points * d)

    def contains(self, x):
        return self.x_min <= x <= self.x_max

    def index_of(self, x):
        """Index of the grid point nearest to ``x``."""
        return int(np.clip(np.rint((x - self.x_min) / self.spacing), 0, self.n_points - 1))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a grid."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.n_points,):
            raise InvalidInput(
                f"field needs {self.grid.n_points} samples, got shape {s.shape}"
            )
        if not np.all(np.isfinite(s)):
            raise InvalidInput("field samples must be finite")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.points))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n_points, dtype=complex))

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatch("fields live on different grids")

    def inner(self, other):
        """Quadrature inner product, linear in ``self``: int f conj(g) dx."""
        self._check(other)
        return self.grid.spacing * np.vdot(other.samples, self.samples)

    def norm(self):
        return float(np.sqrt(self.grid.spacing) * np.linalg.norm(self.samples))

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise InvalidInput("cannot normalize the zero field")
        return Field(self.grid, self.samples / n)

    def __add__(self, other):
        self._check(other)
        return Field(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        self._check(other)
        return Field(self.grid, self.samples - other.samples)

    def __mul__(self, c):
        return Field(self.grid, self.samples * c)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.samples)


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Quadrature discretization of an integral operator.

    ``entries[i, j]`` approximates the kernel ``k(x_i, x_j)``; the operator
    acting on samples is ``weight * entries`` with ``weight = dx``.
    """

    grid: Grid
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        n = self.grid.n_points
        if e.shape != (n, n):
            raise InvalidInput(f"kernel needs shape ({n}, {n}), got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise InvalidInput("kernel entries must be finite")
        object.__setattr__(self, "entries", e)

    @property
    def weight(self):
        return self.grid.spacing

    @property
    def matrix(self):
        """Matrix of the discretized operator acting on sample vectors."""
        return self.weight * self.entries

    @classmethod
    def from_matrix(cls, grid, matrix):
        """Kernel whose operator matrix (``weight * entries``) is ``matrix``."""
        return cls(grid, np.asarray(matrix) / grid.spacing)

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatch("kernels live on different grids")

    def apply(self, f):
        if f.grid != self.grid:
            raise GridMismatch("field and kernel live on different grids")
        return Field(self.grid, self.weight * (self.entries @ f.samples))

    def apply_array(self, samples):
        """Apply to raw sample arrays (columns along axis 0)."""
        return self.weight * (self.entries @ samples)

    def __matmul__(self, other):
        if isinstance(other, KernelMatrix):
            return kernel_compose(self, other)
        if isinstance(other, Field):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other):
        self._check(other)
        return KernelMatrix(self.grid, self.entries + other.entries)

    def __sub__(self, other):
        self._check(other)
        return KernelMatrix(self.grid, self.entries - other.entries)

    def __mul__(self, c):
        return KernelMatrix(self.grid, self.entries * c)

    __rmul__ = __mul__

    def power(self, n):
        """n-fold composition, by repeated squaring."""
        if n < 0:
            raise InvalidInput("kernel powers must be nonnegative")
        m = np.linalg.matrix_power(self.matrix, int(n))
        return KernelMatrix.from_matrix(self.grid, m)

    def window(self, lo, hi):
        """Entries with both arguments inside ``[lo, hi]``, plus the coordinates."""
        x = self.grid.points
        idx = np.nonzero((x >= lo) & (x <= hi))[0]
        return x[idx], self.entries[np.ix_(idx, idx)]

    def to_csv(self, path, lo, hi, extra=None):
        """Write the window ``[lo, hi]^2`` as ``x, y, re, im`` rows."""
        xw, sub = self.window(lo, hi)
        X, Y = np.meshgrid(xw, xw, indexing="ij")
        rows = zip(X.ravel(), Y.ravel(), sub.real.ravel(), sub.imag.ravel())
        return write_csv(path, ["x", "y", "re", "im"], rows, extra)


@dataclass(frozen=True, eq=False)
class ResolvedBasis:
    """Orthonormal basis of grid vectors spanning a well-resolved subspace.

    ``vectors`` has Euclidean-orthonormal columns, so restricted norms can be
    computed directly from ``matrix @ vectors``.
    """

    grid: Grid
    vectors: np.ndarray
    hbar: float
    radius: float

    @property
    def size(self):
        return self.vectors.shape[1]


def japanese_bracket(v):
    """``(1 + |v|^2)^{1/2}``."""
    return np.sqrt(1.0 + np.abs(v) ** 2)


def _convention(cfg):
    return Convention.PDE if cfg is None else cfg.convention


def fourier(f, cfg=None, direction="forward", grid=None):
    """Unitary discrete Fourier transform under the active convention.

    Parameters
    ----------
    f : Field
        Input samples. For the forward direction ``f`` lives on a spatial
        grid; for the inverse direction it lives on a frequency grid.
    cfg : PhysicsConfig, optional
        Selects the convention (PDE by default).
    direction : {"forward", "inverse"}
    grid : Grid, optional
        Output grid. Defaults to the centered dual grid for ``forward`` and
        to the centered spatial grid whose dual is ``f.grid`` for ``inverse``.

    Returns
    -------
    Field
        Forward: ``c * dx * sum_j f_j e^{-i theta x_j xi_k}`` on the frequency
        grid. Inverse: the adjoint sum, which inverts the forward map.
    """
    conv = _convention(cfg)
    theta, pref = conv.phase_scale, conv.prefactor
    n = f.grid.n_points
    if direction == "forward":
        src = f.grid
        dst = grid if grid is not None else src.dual(conv)
        sign = -1.0
    elif direction == "inverse":
        src = f.grid
        if grid is None:
            dx = 2.0 * np.pi / (theta * n * src.spacing)
            lo = -(n // 2) * dx
            grid = Grid(n, lo, lo + n * dx)
        dst = grid
        sign = 1.0
    else:
        raise InvalidInput(f"unknown direction {direction!r}")
    if dst.n_points != n or not np.isclose(
        theta * src.spacing * dst.spacing * n, 2.0 * np.pi, rtol=1e-12
    ):
        raise GridMismatch("output grid is not dual to the input grid")
    j = np.arange(n)
    a0, b0 = src.x_min, dst.x_min
    da, db = src.spacing, dst.spacing
    pre = f.samples * np.exp(sign * 1j * theta * b0 * da * j)
    if sign < 0:
        core = np.fft.fft(pre)
    else:
        core = np.fft.ifft(pre) * n
    out = pref * da * np.exp(sign * 1j * theta * (a0 * b0 + a0 * db * j)) * core
    return Field(dst, out)


def apply_multiplier(samples, symbol):
    """Apply a Fourier multiplier given in FFT order (along axis 0)."""
    s = np.asarray(samples)
    if s.ndim == 1:
        return np.fft.ifft(symbol * np.fft.fft(s))
    return np.fft.ifft(symbol[:, None] * np.fft.fft(s, axis=0), axis=0)


def _angular(grid, cfg):
    return grid.frequencies(Convention.PDE)


def bessel_multiplier(f, k, cfg=None):
    """Apply ``(1 - hbar Laplacian)^{k/2}``.

    The symbol is ``(1 + hbar xi^2)^{k/2}`` in angular frequency, which is
    ``(1 + 4 pi^2 hbar xi^2)^{k/2}`` in ordinary frequency; the operator does
    not depend on the convention.
    """
    if not np.isfinite(k):
        raise InvalidInput("order k must be finite")
    hbar = 1.0 if cfg is None else cfg.hbar
    if k == 0:
        return Field(f.grid, f.samples.copy())
    xi = _angular(f.grid, cfg)
    sym = (1.0 + hbar * xi**2) ** (0.5 * k)
    return Field(f.grid, apply_multiplier(f.samples, sym))


def spectral_derivative(f, order=1):
    """Spectral derivative ``d^order f/dx^order`` on the periodic grid."""
    xi = f.grid.frequencies(Convention.PDE)
    sym = (1j * xi) ** order
    if order % 2 == 1 and f.grid.n_points % 2 == 0:
        sym[f.grid.n_points // 2] = 0.0
    return Field(f.grid, apply_multiplier(f.samples, sym))


def field_norm(f, p=2.0, k=0.0, cfg=None):
    """Quadrature ``L^p`` norm of ``(1 - hbar Laplacian)^{k/2} f``."""
    if not (p == np.inf or p >= 1.0):
        raise InvalidInput(f"p must lie in [1, inf], got {p!r}")
    g = bessel_multiplier(f, k, cfg).samples if k != 0 else f.samples
    a = np.abs(g)
    if p == np.inf:
        return float(a.max())
    return float((f.grid.spacing * np.sum(a**p)) ** (1.0 / p))


def kernel_compose(k1, k2):
    """Kernel of the composition ``K1 o K2`` (apply ``K2`` first)."""
    if k1.grid != k2.grid:
        raise GridMismatch("cannot compose kernels on different grids")
    return KernelMatrix(k1.grid, k1.weight * (k1.entries @ k2.entries))


def _restricted(matrix, basis):
    if basis is None:
        return matrix
    return matrix @ basis.vectors


def operator_norm(k, basis=None):
    """Largest singular value of ``weight * entries`` (a grid estimate).

    With a :class:`ResolvedBasis`, the norm of the operator restricted to that
    subspace is returned instead.
    """
    if basis is not None and basis.grid != k.grid:
        raise GridMismatch("basis and kernel live on different grids")
    m = _restricted(k.matrix, basis)
    return float(scipy.linalg.svdvals(m, check_finite=False)[0])


def kernel_from_operator(apply, grid):
    """Materialize the kernel of a linear map by propagating unit columns.

    Column ``j`` is ``apply(e_j) / weight`` where ``e_j`` is the unit sample at
    ``x_j``.
    """
    n = grid.n_points
    cols = np.empty((n, n), dtype=complex)
    e = np.zeros(n, dtype=complex)
    for j in range(n):
        e[j] = 1.0
        out = apply(Field(grid, e.copy()))
        if not isinstance(out, Field) or out.grid != grid:
            raise GridMismatch("operator must map fields on the grid to the same grid")
        cols[:, j] = out.samples
        e[j] = 0.0
    if not np.all(np.isfinite(cols)):
        raise InvalidInput("operator produced non-finite output")
    return KernelMatrix(grid, cols / grid.spacing)


def identity_kernel(grid):
    return KernelMatrix(grid, np.eye(grid.n_points) / grid.spacing)


def diagonal_kernel(values, grid):
    """Kernel of multiplication by ``values`` (entries ``values/weight`` on the diagonal)."""
    return KernelMatrix(grid, np.diag(np.asarray(values, dtype=complex)) / grid.spacing)


def multiplier_kernel(symbol, grid):
    """Circulant kernel of a Fourier multiplier given in FFT order."""
    n = grid.n_points
    col = np.fft.ifft(symbol) / grid.spacing
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return KernelMatrix(grid, col[idx])


def _hermite_functions(u, count):
    """Orthonormal Hermite functions psi_0..psi_{count-1} at points u (stable recursion)."""
    out = np.empty((u.size, count))
    out[:, 0] = np.pi**-0.25 * np.exp(-0.5 * u**2)
    if count > 1:
        out[:, 1] = np.sqrt(2.0) * u * out[:, 0]
    for n in range(2, count):
        out[:, n] = np.sqrt(2.0 / n) * u * out[:, n - 1] - np.sqrt((n - 1.0) / n) * out[:, n - 2]
    return out


def resolved_basis(grid, hbar=1.0, radius=None):
    """Orthonormal hbar-scaled Hermite functions inside a phase-space disk.

    The n-th function concentrates on the circle of radius
    ``sqrt(hbar (2n+1))`` in ``(x, p)`` with ``p = hbar xi``, so keeping
    ``n < radius^2/(2 hbar)`` selects states that are resolved both by the
    box and by the frequency grid. The default radius is 0.6 of the smaller
    of the half box length and ``hbar`` times the Nyquist frequency.
    """
    if radius is None:
        radius = 0.6 * min(0.5 * grid.length, hbar * grid.nyquist(Convention.PDE))
    count = max(1, int(radius**2 / (2.0 * hbar)))
    centre = 0.5 * (grid.x_min + grid.x_max)
    u = (grid.points - centre) / np.sqrt(hbar)
    h = _hermite_functions(u, count) * (hbar**-0.25) * np.sqrt(grid.spacing)
    q, _ = np.linalg.qr(h.astype(complex))
    return ResolvedBasis(grid, q, float(hbar), float(radius))
