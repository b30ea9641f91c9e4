"""Time-frequency analysis: shifts, STFT, Gabor frames, modulation norms, Wigner and Gabor matrices.

Phase-space points are ``(x, xi)`` with ``xi`` in the frequency unit of the
active convention (ordinary frequency under HA, angular under PDE). The
time-frequency shift is ``pi(x, xi) g(t) = e^{i theta xi t} g(t - x)`` with
``theta = 2 pi`` (HA) or ``1`` (PDE); translations are spectral so that they
stay unitary off the sampling lattice.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import Convention, Field, PhysicsConfig, _hermite_functions, japanese_bracket
from .errors import GridMismatch, InvalidInput
from .io import write_csv

__all__ = [
    "PhasePoint",
    "GaborSystem",
    "STFTGrid",
    "CanonicalMap",
    "GaborMatrixSamples",
    "ModulationNorm",
    "FrameWarning",
    "WignerDistribution",
    "FioDecay",
    "gaussian_window",
    "hermite_window",
    "tf_shift",
    "stft",
    "modulation_norm",
    "frame_bounds",
    "frame_operator",
    "wigner",
    "gabor_matrix",
    "fio_decay_fit",
    "phase_cloud",
    "bump_partition",
]

MAX_ORDER_S = 10.0


class FrameWarning(UserWarning):
    """The Gabor system is (numerically) not a frame."""


def _conv(cfg, default=Convention.HA):
    return default if cfg is None else cfg.convention


@dataclass(frozen=True)
class PhasePoint:
    """Point ``(x, xi)`` of phase space."""

    x: float
    xi: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "xi", float(self.xi))
        if not (np.isfinite(self.x) and np.isfinite(self.xi)):
            raise InvalidInput("phase-space points must be finite")

    def as_array(self):
        return np.array([self.x, self.xi])


def _as_points(zs):
    """``(n, 2)`` array from PhasePoints, pairs or an array."""
    if isinstance(zs, np.ndarray) and zs.ndim == 2 and zs.shape[1] == 2:
        return zs.astype(float)
    return np.array([[z.x, z.xi] if isinstance(z, PhasePoint) else list(z) for z in zs], dtype=float)


def gaussian_window(grid, cfg=None):
    """L2-normalized Gaussian: ``2^{1/4} e^{-pi x^2}`` (HA) or ``pi^{-1/4} e^{-x^2/2}`` (PDE)."""
    x = grid.points
    if _conv(cfg) is Convention.HA:
        return Field(grid, 2**0.25 * np.exp(-np.pi * x**2))
    return Field(grid, np.pi**-0.25 * np.exp(-0.5 * x**2))


def hermite_window(grid, n, cfg=None):
    """n-th L2-normalized Hermite function, scaled like :func:`gaussian_window`."""
    x = grid.points
    scale = np.sqrt(2.0 * np.pi) if _conv(cfg) is Convention.HA else 1.0
    h = _hermite_functions(scale * x, n + 1)[:, n] * np.sqrt(scale)
    return Field(grid, h)


def _check_point(grid, x, xi, conv):
    half = 0.5 * grid.length
    centre = 0.5 * (grid.x_min + grid.x_max)
    if np.any(np.abs(np.asarray(x) - centre) > half * (1 + 1e-12)):
        raise InvalidInput("time shift beyond the grid box (wrap-around would corrupt norms)")
    if np.any(np.abs(np.asarray(xi)) > grid.nyquist(conv) * (1 + 1e-12)):
        raise InvalidInput("frequency shift beyond the Nyquist frequency")


def _shift_columns(g, xs, xis, conv):
    """Matrix whose columns are ``pi(x_k, xi_k) g`` (x and xi paired)."""
    grid = g.grid
    xs = np.asarray(xs, dtype=float)
    xis = np.asarray(xis, dtype=float)
    _check_point(grid, xs, xis, conv)
    ang = grid.frequencies(Convention.PDE)
    t = grid.points
    gh = np.fft.fft(g.samples)
    cols = np.fft.ifft(gh[:, None] * np.exp(-1j * np.outer(ang, xs)), axis=0)
    return cols * np.exp(1j * conv.phase_scale * np.outer(t, xis))


def tf_shift(g, z, cfg=None):
    """``pi(z) g = M_xi T_x g``.

    Raises
    ------
    InvalidInput
        If ``z`` lies outside the representable phase-space box.
    """
    conv = _conv(cfg)
    col = _shift_columns(g, [z.x], [z.xi], conv)[:, 0]
    return Field(g.grid, col)


@dataclass(frozen=True, eq=False)
class STFTGrid:
    """STFT values ``V_g f(x_m, xi_n)`` on a product lattice.

    ``values[m, n]`` belongs to ``(xs[m], xis[n])``.
    """

    xs: np.ndarray
    xis: np.ndarray
    values: np.ndarray
    convention: Convention = Convention.HA

    @property
    def magnitude(self):
        return np.abs(self.values)

    def points(self):
        X, XI = np.meshgrid(self.xs, self.xis, indexing="ij")
        return [PhasePoint(a, b) for a, b in zip(X.ravel(), XI.ravel())]

    def rows(self):
        X, XI = np.meshgrid(self.xs, self.xis, indexing="ij")
        v = self.values.ravel()
        return zip(X.ravel(), XI.ravel(), v.real, v.imag)

    def to_csv(self, path, extra=None):
        return write_csv(path, ["x", "xi", "re", "im"], self.rows(), extra)


def _lattice_axes(grid, alpha, beta, conv):
    """Time lattice covering the periodic box and a frequency lattice inside Nyquist."""
    xs = grid.x_min + alpha * np.arange(int(np.floor(grid.length / alpha + 1e-9)))
    xs = xs[xs < grid.x_max - 1e-12]
    nu = grid.nyquist(conv)
    n_lo = int(np.ceil(-nu / beta - 1e-9))
    n_hi = int(np.ceil(nu / beta - 1e-9))
    xis = beta * np.arange(n_lo, n_hi)
    return xs, xis


def _stft_values(f, g, xs, xis, conv):
    grid = f.grid
    t = grid.points
    shifted = _shift_columns(g, xs, np.zeros_like(xs), conv)  # T_x g, (N, nx)
    h = f.samples[:, None] * np.conj(shifted)
    e = np.exp(-1j * conv.phase_scale * np.outer(xis, t))  # (nxi, N)
    return grid.spacing * (e @ h).T  # (nx, nxi)


def stft(f, g, lattice, cfg=None):
    """``V_g f(x, xi) = <f, pi(x, xi) g>`` on the lattice ``alpha Z x beta Z``.

    The time lattice covers the periodic box; the frequency lattice covers
    ``[-Nyquist, Nyquist)``.
    """
    if f.grid != g.grid:
        raise GridMismatch("field and window live on different grids")
    if g.norm() == 0.0:
        raise InvalidInput("the STFT window must be nonzero")
    alpha, beta = lattice
    if not (alpha > 0 and beta > 0):
        raise InvalidInput("lattice parameters must be positive")
    conv = _conv(cfg)
    xs, xis = _lattice_axes(f.grid, alpha, beta, conv)
    return STFTGrid(xs, xis, _stft_values(f, g, xs, xis, conv), conv)


@dataclass(frozen=True, eq=False)
class GaborSystem:
    """Window and lattice ``(alpha, beta)`` of a Gabor system."""

    window: Field
    alpha: float
    beta: float
    convention: Convention = Convention.HA

    def __post_init__(self):
        object.__setattr__(self, "convention", Convention(self.convention))
        if self.window.norm() == 0.0:
            raise InvalidInput("Gabor window must be nonzero")
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidInput("lattice parameters must be positive")
        if self.alpha > self.window.grid.length or self.beta > 2 * self.window.grid.nyquist(
            self.convention
        ):
            raise InvalidInput("lattice has no point inside the phase-space box besides 0")

    @classmethod
    def gaussian(cls, grid, alpha=0.5, beta=0.5, convention=Convention.HA):
        return cls(gaussian_window(grid, PhysicsConfig(1.0, convention)), alpha, beta, convention)

    @property
    def grid(self):
        return self.window.grid

    @property
    def density(self):
        """``alpha beta`` in units of the critical density (1 means critical)."""
        return self.alpha * self.beta * self.convention.phase_scale / (2.0 * np.pi)

    def lattice(self):
        return _lattice_axes(self.grid, self.alpha, self.beta, self.convention)

    def atoms(self):
        """Matrix of all ``pi(z) g`` over the lattice (N x |lattice|)."""
        xs, xis = self.lattice()
        X, XI = np.meshgrid(xs, xis, indexing="ij")
        return _shift_columns(self.window, X.ravel(), XI.ravel(), self.convention)


class ModulationNorm(float):
    """Nonnegative float carrying the warnings raised while computing it."""

    def __new__(cls, value, method, warnings_=()):
        obj = super().__new__(cls, value)
        obj.method = method
        obj.warnings = tuple(warnings_)
        return obj


def _mixed(A, p, q, wx, wxi, weight):
    """``( sum_n ( sum_m |A_mn|^p wx )^{q/p} weight_n^q wxi )^{1/q}`` with inf handling."""
    a = np.abs(A)
    if p == np.inf:
        inner = a.max(axis=0)
    else:
        inner = (wx * np.sum(a**p, axis=0)) ** (1.0 / p)
    inner = inner * weight
    if q == np.inf:
        return float(inner.max())
    return float((wxi * np.sum(inner**q)) ** (1.0 / q))


def _smooth_step(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def _bump(xi):
    """Equal to 1 on ``|xi| <= 1/4``, supported in ``|xi| < 3/4``."""
    return _smooth_step((0.75 - np.abs(xi)) / 0.5)


def bump_partition(xi, centres):
    """Rows ``psi_k(xi)`` of the integer-centred smooth partition of unity."""
    xi = np.asarray(xi, dtype=float)
    raw = np.array([_bump(xi - k) for k in centres])
    total = np.sum([_bump(xi - k) for k in np.arange(np.floor(xi.min()) - 1, np.ceil(xi.max()) + 2)], axis=0)
    return raw / total


def _validate_pqs(p, q, s):
    for name, v in (("p", p), ("q", q)):
        if not (v == np.inf or v >= 1.0):
            raise InvalidInput(f"{name} must lie in [1, inf], got {v!r}")
    if not np.isfinite(s) or abs(s) > MAX_ORDER_S:
        raise InvalidInput(f"s must be finite with |s| <= {MAX_ORDER_S}")


def modulation_norm(f, p, q, s, method="stft", sys=None, cfg=None):
    """Modulation-space norm ``||f||_{M^{p,q}_s}`` by one of three routes.

    Parameters
    ----------
    method : {"stft", "gabor", "freqdecomp"}
        ``stft``: mixed-norm quadrature of ``|V_g f(x, xi)| <xi>^s`` with the
        time step 8 dx over the periodic box and every dual frequency.
        ``gabor``: lattice sum ``(sum_n (sum_m |V_g f(alpha m, beta n)|^p)^{q/p} <beta n>^{qs})^{1/q}``.
        ``freqdecomp``: ``(sum_k (||box_k f||_{L^p} <k>^s)^q)^{1/q}`` with
        smooth unit-width frequency boxes ``box_k``.
    sys : GaborSystem, optional
        Window and lattice (default: Gaussian window, ``alpha = beta = 1/2``).

    Returns
    -------
    ModulationNorm
        A float; ``.warnings`` lists frame-failure warnings for ``gabor``.
    """
    _validate_pqs(p, q, s)
    conv = _conv(cfg, sys.convention if sys is not None else Convention.HA)
    grid = f.grid
    if sys is None:
        sys = GaborSystem.gaussian(grid, convention=conv)
    if sys.convention is not conv:
        raise InvalidInput("Gabor system and config use different conventions")
    if sys.grid != grid:
        raise GridMismatch("field and Gabor window live on different grids")
    if method == "stft":
        xs = grid.points[::8]
        dxi = grid.dual_spacing(conv)
        xis = grid.dual(conv).points
        V = _stft_values(f, sys.window, xs, xis, conv)
        w = japanese_bracket(xis) ** s
        return ModulationNorm(_mixed(V, p, q, xs[1] - xs[0], dxi, w), method)
    if method == "gabor":
        notes = []
        if sys.density >= 1.0:
            msg = (
                f"alpha*beta = {sys.alpha * sys.beta:.4g} is at or above the critical "
                "density; the discrete norm need not be equivalent"
            )
            notes.append(msg)
            warnings.warn(msg, FrameWarning, stacklevel=2)
        xs, xis = sys.lattice()
        V = _stft_values(f, sys.window, xs, xis, conv)
        w = japanese_bracket(xis) ** s
        return ModulationNorm(_mixed(V, p, q, 1.0, 1.0, w), method, notes)
    if method == "freqdecomp":
        freq = grid.frequencies(conv)
        centres = np.arange(np.floor(freq.min()) - 1, np.ceil(freq.max()) + 2)
        psi = bump_partition(freq, centres)
        keep = np.any(psi > 0, axis=1)
        centres, psi = centres[keep], psi[keep]
        fh = np.fft.fft(f.samples)
        pieces = np.fft.ifft(psi * fh[None, :], axis=1)
        a = np.abs(pieces)
        if p == np.inf:
            lp = a.max(axis=1)
        else:
            lp = (grid.spacing * np.sum(a**p, axis=1)) ** (1.0 / p)
        lp = lp * japanese_bracket(centres) ** s
        val = float(lp.max()) if q == np.inf else float(np.sum(lp**q) ** (1.0 / q))
        return ModulationNorm(val, method)
    raise InvalidInput(f"unknown modulation-norm method {method!r}")


def frame_operator(sys):
    """Matrix of ``S f = sum_z <f, pi(z) g> pi(z) g`` acting on samples."""
    phi = sys.atoms()
    return sys.grid.spacing * (phi @ phi.conj().T)


def frame_bounds(sys):
    """Extreme eigenvalues ``(A, B)`` of the frame operator assembled on the grid.

    The lattice is taken on the periodic box, so for commensurate
    parameters the system is the exact finite Gabor system of the torus.
    ``A`` close to zero signals frame failure.
    """
    ev = scipy.linalg.eigvalsh(frame_operator(sys), check_finite=False)
    return float(max(ev[0], 0.0)), float(ev[-1])


@dataclass(frozen=True, eq=False)
class WignerDistribution:
    """``W(f, g)(x_j, xi_k)``; ``values[j, k]``."""

    xs: np.ndarray
    xis: np.ndarray
    values: np.ndarray

    @property
    def dxi(self):
        return self.xis[1] - self.xis[0]

    def marginal_x(self):
        """``int W dxi`` at each x."""
        return np.sum(self.values, axis=1) * self.dxi

    def total(self, dx):
        return np.sum(self.values) * self.dxi * dx


def wigner(f, g=None, cfg=None):
    """Cross-Wigner distribution ``int e^{-2 pi i y xi} f(x+y/2) conj(g(x-y/2)) dy``.

    Samples at the grid points with ``y = 2 m dx`` (periodic indices), so the
    frequency step is ``1/(2 N dx)``. Lags are restricted to ``|y| < L/2``:
    longer lags only pair a point with periodic images of the field.

    Raises
    ------
    InvalidInput
        Under the PDE convention.
    """
    if cfg is None or cfg.is_pde:
        raise InvalidInput("wigner uses the HA convention (pass cfg with convention=HA)")
    if g is None:
        g = f
    if f.grid != g.grid:
        raise GridMismatch("fields live on different grids")
    grid = f.grid
    n = grid.n_points
    j = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    lag = np.minimum(m, n - m)
    prod = np.where(lag < n // 4, f.samples[(j + m) % n] * np.conj(g.samples[(j - m) % n]), 0.0)
    w = np.fft.fftshift(np.fft.fft(prod, axis=1), axes=1) * (2.0 * grid.spacing)
    k = np.arange(n) - n // 2
    xis = k / (2.0 * n * grid.spacing)
    vals = w.real if g is f or np.array_equal(g.samples, f.samples) else w
    return WignerDistribution(grid.points.copy(), xis, vals)


@dataclass(frozen=True)
class CanonicalMap:
    """Affine phase-space map ``z -> M z + c``."""

    matrix: tuple
    offset: tuple = (0.0, 0.0)
    name: str = "affine"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(2, 2)
        c = np.asarray(self.offset, dtype=float).reshape(2)
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(c))):
            raise InvalidInput("canonical map must be finite")
        object.__setattr__(self, "matrix", tuple(map(tuple, m)))
        object.__setattr__(self, "offset", tuple(c))

    @classmethod
    def identity(cls):
        return cls(((1.0, 0.0), (0.0, 1.0)), name="identity")

    @classmethod
    def from_blocks(cls, blocks, name="flow"):
        """``(x, xi) -> (A x + B xi, C x + D xi)``."""
        return cls(((blocks.A, blocks.B), (blocks.C, blocks.D)), name=name)

    @classmethod
    def shear(cls, t):
        """Free flow ``(x, xi) -> (x + t xi, xi)``."""
        return cls(((1.0, t), (0.0, 1.0)), name=f"shear({t!r})")

    @property
    def jacobian(self):
        return np.array(self.matrix)

    @property
    def determinant(self):
        return float(np.linalg.det(self.jacobian))

    def is_symplectic(self, tol=1e-10):
        return abs(self.determinant - 1.0) <= tol

    def __call__(self, points):
        pts = _as_points(points) if not isinstance(points, np.ndarray) else points
        return pts @ self.jacobian.T + np.array(self.offset)

    def compose(self, other):
        """``self o other``."""
        m = self.jacobian @ other.jacobian
        c = self.jacobian @ np.array(other.offset) + np.array(self.offset)
        return CanonicalMap(m, c, f"{self.name}*{other.name}")


@dataclass(frozen=True, eq=False)
class GaborMatrixSamples:
    """``|<T pi(z) g, pi(w) g>|`` on a product of sample clouds; ``magnitude[i, j]`` for ``(z_i, w_j)``."""

    zs: np.ndarray
    ws: np.ndarray
    magnitude: np.ndarray

    def __len__(self):
        return self.magnitude.size

    def __iter__(self):
        for i, z in enumerate(self.zs):
            for j, w in enumerate(self.ws):
                yield PhasePoint(*z), PhasePoint(*w), float(self.magnitude[i, j])

    def rows(self):
        for i, z in enumerate(self.zs):
            for j, w in enumerate(self.ws):
                yield (z[0], z[1], w[0], w[1], self.magnitude[i, j])

    def to_csv(self, path, extra=None):
        return write_csv(path, ["z_x", "z_xi", "w_x", "w_xi", "magnitude"], self.rows(), extra)


def phase_cloud(lo, hi, count):
    """``count x count`` square cloud of phase-space points in ``[lo, hi]^2``."""
    a = np.linspace(lo, hi, count)
    X, XI = np.meshgrid(a, a, indexing="ij")
    return np.column_stack([X.ravel(), XI.ravel()])


def gabor_matrix(T, g, zs, ws, cfg=None):
    """Gabor matrix magnitudes ``|<T pi(z) g, pi(w) g>|`` by quadrature pairings."""
    if T.grid != g.grid:
        raise GridMismatch("operator and window live on different grids")
    conv = _conv(cfg)
    z = _as_points(zs)
    w = _as_points(ws)
    gz = _shift_columns(g, z[:, 0], z[:, 1], conv)
    gw = _shift_columns(g, w[:, 0], w[:, 1], conv)
    tg = T.matrix @ gz
    m = T.grid.spacing * (gw.conj().T @ tg)  # (nw, nz)
    return GaborMatrixSamples(z, w, np.abs(m).T)


@dataclass
class FioDecay:
    """Seminorm lower bounds ``sup <w - chi(z)>^s M`` and a fitted decay exponent."""

    s_grid: list
    seminorms: list
    exponent: float
    chi: str
    n_fit: int
    notes: list = field(default_factory=list)

    @property
    def growth(self):
        """Seminorm at the last s over the first."""
        return self.seminorms[-1] / self.seminorms[0]


def fio_decay_fit(samples, chi, s_grid=(0, 1, 2, 3, 4, 5, 6), floor=1e-12):
    """Seminorm estimates and decay exponent of a Gabor matrix relative to ``chi``.

    The exponent is ``-slope`` of the least-squares fit of ``log M`` against
    ``log <w - chi(z)>`` over samples with ``M`` above ``floor`` times the
    largest magnitude and ``<w - chi(z)> > sqrt(2)`` (off the graph).
    Seminorms are sups over a finite cloud and therefore lower bounds.
    """
    if len(samples) == 0:
        raise InvalidInput("no Gabor-matrix samples")
    cz = chi(samples.zs)  # (nz, 2)
    d = samples.ws[None, :, :] - cz[:, None, :]
    br = japanese_bracket(np.hypot(d[..., 0], d[..., 1]))
    mag = samples.magnitude
    semis = [float(np.max(br**s * mag)) for s in s_grid]
    notes = ["seminorms are sups over a finite sample cloud (lower bounds)"]
    mask = (mag > floor * mag.max()) & (br > np.sqrt(2.0))
    if np.count_nonzero(mask) >= 3:
        slope, _ = np.polyfit(np.log(br[mask]), np.log(mag[mask]), 1)
        exponent = float(-slope)
    else:
        exponent = np.inf
        notes.append("fewer than 3 off-graph samples above the floor; decay exponent set to inf")
    return FioDecay(list(s_grid), semis, exponent, chi.name, int(np.count_nonzero(mask)), notes)
