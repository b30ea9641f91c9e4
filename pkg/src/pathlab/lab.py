"""Convergence measurements: distances, rate fits, window reports and probes."""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .actions import ActionModel
from .core import (
    Convention,
    Field,
    Grid,
    KernelMatrix,
    PhysicsConfig,
    field_norm,
    fourier,
    multiplier_kernel,
    operator_norm,
    resolved_basis,
)
from .errors import GridMismatch, InvalidInput
from .oracles import (
    QuadraticHamiltonian,
    exact_kernel,
    free_kernel,
    free_propagate,
    mehler_kernel,
)
from .potentials import PotentialSpec
from .slicing import Subdivision, compose_over_subdivision, trotter_approx

__all__ = [
    "RateReport",
    "WindowReport",
    "ProbeTable",
    "ExperimentSpec",
    "HbarSweep",
    "distance_opnorm",
    "family_distance",
    "gaussian_family",
    "rate_fit",
    "band_limit",
    "pointwise_report",
    "lp_probe",
    "fourier_sharpness_probe",
    "dilated_gaussians",
    "focusing_family",
    "modulated_gaussians",
    "build_oracle",
    "build_approximation",
    "run_rate_experiment",
    "hbar_sweep",
]

logger = logging.getLogger(__name__)

DROP_RESIDUAL = 0.1


def distance_opnorm(k1, k2, basis=None):
    """``operator_norm(K1 - K2)``, optionally restricted to a resolved subspace."""
    if k1.grid != k2.grid:
        raise GridMismatch("kernels live on different grids")
    return operator_norm(k1 - k2, basis)


def gaussian_family(grid, hbar=1.0, count=5):
    """Normalized coherent states spread over the central phase-space region."""
    sq = np.sqrt(hbar)
    x = grid.points
    centres = np.linspace(-2.0, 2.0, count)
    momenta = np.linspace(1.5, -1.5, count)
    out = []
    for x0, p0 in zip(centres, momenta):
        f = np.exp(-((x - x0) ** 2) / (2.0 * hbar) + 1j * p0 * x / sq) * (np.pi * hbar) ** -0.25
        out.append(Field(grid, f).normalized())
    return out


def family_distance(k1, k2, family):
    """``max_f ||(K1 - K2) f|| / ||f||`` over a test family."""
    diff = k1 - k2
    return max(diff.apply(f).norm() / f.norm() for f in family)


@dataclass
class RateReport:
    """Least-squares power-law fit ``error ~ exp(intercept) * mesh^slope``."""

    meshes: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    residual: float
    dropped: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def fitted_meshes(self):
        return self.meshes[1:] if self.dropped else self.meshes


def _fit(m, e):
    lm, le = np.log(m), np.log(e)
    slope, intercept = np.polyfit(lm, le, 1)
    resid = float(np.max(np.abs(le - (slope * lm + intercept))))
    return float(slope), float(intercept), resid


def rate_fit(meshes, errors, metadata=None, drop_residual=DROP_RESIDUAL):
    """Fit ``log(error)`` against ``log(mesh)`` by least squares.

    The residual is the largest absolute log-deviation from the fitted line.
    When it exceeds ``drop_residual`` and at least four points are present,
    the coarsest mesh is dropped and the fit repeated; the drop is recorded.
    """
    m = np.asarray(meshes, dtype=float)
    e = np.asarray(errors, dtype=float)
    if m.size < 3 or m.size != e.size:
        raise InvalidInput("rate_fit needs at least 3 (mesh, error) pairs")
    if np.any(m <= 0) or np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise InvalidInput("rate_fit needs positive finite meshes and errors")
    order = np.argsort(-m)
    m, e = m[order], e[order]
    slope, intercept, resid = _fit(m, e)
    dropped = False
    if resid > drop_residual and m.size >= 4:
        s2, i2, r2 = _fit(m[1:], e[1:])
        slope, intercept, resid, dropped = s2, i2, r2, True
    return RateReport(m, e, slope, intercept, resid, dropped, dict(metadata or {}))


def band_limit(kernel, cutoff=None, power=8):
    """Smoothly band-limited kernel ``P K P`` with ``P = exp(-(xi/cutoff)^power)``.

    The default cutoff is a quarter of the Nyquist frequency. Raw grid
    kernels carry periodic wrap-around in their highest frequencies; the
    smoothed kernels have well-defined pointwise limits.
    """
    g = kernel.grid
    if cutoff is None:
        cutoff = 0.25 * g.nyquist(Convention.PDE)
    xi = g.frequencies(Convention.PDE)
    p = multiplier_kernel(np.exp(-np.abs(xi / cutoff) ** power), g).matrix
    return KernelMatrix.from_matrix(g, p @ kernel.matrix @ p)


@dataclass
class WindowReport:
    """Windowed sup-norm kernel errors per Trotter index."""

    window: tuple
    ns: list
    sup_errors: list
    sup_moduli: list
    cutoff: float
    snapshots: dict = field(default_factory=dict)

    @property
    def boundedness_proxy(self):
        return max(self.sup_moduli)

    @property
    def boundedness_variation(self):
        return max(self.sup_moduli) / min(self.sup_moduli) - 1.0


def pointwise_report(kernels, ns, oracle, window=None, cutoff=None, keep_snapshots=False):
    """Sup over the window of ``|e_n - u|`` for each kernel, after band-limiting."""
    g = oracle.grid
    if window is None:
        window = (0.5 * g.x_min, 0.5 * g.x_max)
    lo, hi = window
    if not (g.contains(lo) and g.contains(hi) and lo < hi):
        raise InvalidInput(f"window {window!r} is not inside the grid")
    if len(kernels) != len(ns):
        raise InvalidInput("one kernel per index is required")
    if cutoff is None:
        cutoff = 0.25 * g.nyquist(Convention.PDE)
    _, ref = band_limit(oracle, cutoff).window(lo, hi)
    errs, mods, snaps = [], [], {}
    for n, k in zip(ns, kernels):
        if k.grid != g:
            raise GridMismatch("kernel and oracle live on different grids")
        _, w = band_limit(k, cutoff).window(lo, hi)
        errs.append(float(np.max(np.abs(w - ref))))
        mods.append(float(np.max(np.abs(w))))
        if keep_snapshots:
            snaps[n] = w
    return WindowReport((lo, hi), list(ns), errs, mods, float(cutoff), snaps)


@dataclass
class ProbeTable:
    """Ratios of a norm inequality over a test family."""

    labels: list
    numerators: list
    denominators: list
    ratios: list
    notes: list = field(default_factory=list)

    @property
    def max_ratio(self):
        return max(self.ratios)

    @property
    def spread(self):
        """max/min of the ratios."""
        return max(self.ratios) / min(self.ratios)

    @property
    def growth(self):
        """Last ratio over the first."""
        return self.ratios[-1] / self.ratios[0]


def lp_probe(apply, p, family, cfg=None, k=None, labels=None):
    """Ratios ``||apply(f)||_{L^p} / ||(1 - hbar Laplacian)^{k/2} f||_{L^p}``.

    ``k`` defaults to ``2 |1/2 - 1/p|`` (d = 1). Zero-norm members are skipped
    with a note.
    """
    if not (1.0 < p < np.inf):
        raise InvalidInput("lp_probe needs 1 < p < inf")
    if k is None:
        k = 2.0 * abs(0.5 - 1.0 / p)
    labels = list(labels) if labels is not None else [str(i) for i in range(len(family))]
    out = ProbeTable([], [], [], [])
    for lab, f in zip(labels, family):
        den = field_norm(f, p, k, cfg)
        if den == 0.0:
            out.notes.append(f"skipped {lab}: zero norm")
            continue
        num = field_norm(apply(f), p, 0.0, cfg)
        out.labels.append(lab)
        out.numerators.append(num)
        out.denominators.append(den)
        out.ratios.append(num / den)
    return out


def fourier_sharpness_probe(p, k1, k2, family, cfg=None, labels=None):
    """Ratios ``||F f||_{L^p_{k2}} / ||f||_{L^p_{k1}}`` for the unitary transform."""
    if not (1.0 < p < np.inf):
        raise InvalidInput("fourier_sharpness_probe needs 1 < p < inf")
    labels = list(labels) if labels is not None else [str(i) for i in range(len(family))]
    out = ProbeTable([], [], [], [])
    for lab, f in zip(labels, family):
        den = field_norm(f, p, k1, cfg)
        if den == 0.0:
            out.notes.append(f"skipped {lab}: zero norm")
            continue
        ff = fourier(f, cfg)
        # the Sobolev weight on the transform side acts on the (dual) variable
        num = field_norm(ff, p, k2, cfg)
        out.labels.append(lab)
        out.numerators.append(num)
        out.denominators.append(den)
        out.ratios.append(num / den)
    return out


def dilated_gaussians(grid, lambdas):
    """``exp(-lambda^2 x^2/2)`` for each dilation factor."""
    x = grid.points
    return [Field(grid, np.exp(-0.5 * (lam * x) ** 2)) for lam in lambdas]


def modulated_gaussians(grid, xis):
    """``e^{i xi x} e^{-x^2/2}`` for each frequency."""
    x = grid.points
    return [Field(grid, np.exp(1j * xi * x - 0.5 * x**2)) for xi in xis]


def focusing_family(grid, lambdas, t=1.0, cfg=None):
    """Chirped Gaussians that the free flow focuses at time ``t``.

    Member ``lambda`` is ``U(-t)`` applied to ``exp(-lambda^2 x^2/2)``, so
    ``U(t)`` maps it back to a Gaussian of width ``1/lambda``.
    """
    return [free_propagate(f, -t, cfg) for f in dilated_gaussians(grid, lambdas)]


@dataclass(frozen=True)
class ExperimentSpec:
    """A mesh-refinement experiment against an oracle.

    ``scheme`` is an action-model name or ``"trotter"``. ``meshes`` lists the
    slice counts L (or Trotter indices n); the mesh values ``horizon/L``
    must decrease. With ``horizon_in_hbar`` the horizon is multiplied by
    ``hbar``.
    """

    potential: PotentialSpec
    scheme: str
    horizon: float
    meshes: tuple
    oracle: str = "split_step"
    hbar: float = 1.0
    grid: Grid = Grid()
    substeps: int = 8192
    horizon_in_hbar: bool = False
    quadratic: QuadraticHamiltonian = QuadraticHamiltonian.free()

    def __post_init__(self):
        m = tuple(int(v) for v in self.meshes)
        if len(m) < 3:
            raise InvalidInput("a rate experiment needs at least 3 meshes")
        if any(b <= a for a, b in zip(m, m[1:])):
            raise InvalidInput("slice counts must increase (meshes strictly decreasing)")
        object.__setattr__(self, "meshes", m)
        if self.oracle not in ("mehler", "split_step", "free"):
            raise InvalidInput(f"unknown oracle {self.oracle!r}")

    def with_hbar(self, hbar):
        return replace(self, hbar=float(hbar))

    @property
    def time(self):
        return self.horizon * (self.hbar if self.horizon_in_hbar else 1.0)

    @property
    def cfg(self):
        return PhysicsConfig(self.hbar, Convention.PDE)


def build_oracle(spec):
    """Reference kernel for the experiment's horizon."""
    g, t, cfg = spec.grid, spec.time, spec.cfg
    if spec.oracle == "free":
        return free_kernel(t, g, cfg)
    if spec.oracle == "mehler":
        if spec.potential != PotentialSpec.harmonic(1.0) or spec.hbar != 1.0:
            raise InvalidInput("the Mehler oracle needs the unit oscillator and hbar = 1")
        return mehler_kernel(t, g)
    full = spec.potential
    if spec.quadratic.A != 0.0:
        full = full + PotentialSpec.harmonic(np.sqrt(spec.quadratic.A))
    return exact_kernel(full, t, g, cfg, spec.substeps)


def build_approximation(spec, count):
    g, t, cfg = spec.grid, spec.time, spec.cfg
    if spec.scheme == "trotter":
        return trotter_approx(spec.potential, spec.quadratic, t, count, g, cfg)
    model = ActionModel(spec.scheme, spec.potential)
    return compose_over_subdivision(model, Subdivision.uniform(0.0, t, count), g, cfg)


def run_rate_experiment(spec, oracle=None, full_grid=True, basis=None):
    """Errors per mesh (subspace, full grid, Gaussian family) and the fitted rate.

    The rate is fitted on the resolved-subspace distance.

    Returns
    -------
    report : RateReport
    rows : list of dict
    """
    if oracle is None:
        oracle = build_oracle(spec)
    if basis is None:
        basis = resolved_basis(spec.grid, spec.hbar)
    family = gaussian_family(spec.grid, spec.hbar)
    rows = []
    for count in spec.meshes:
        approx = build_approximation(spec, count)
        row = {
            "slices": count,
            "mesh": spec.time / count,
            "mesh_over_hbar": spec.time / count / spec.hbar,
            "error_subspace": distance_opnorm(approx, oracle, basis),
            "error_gaussians": family_distance(approx, oracle, family),
        }
        if full_grid:
            row["error_grid"] = distance_opnorm(approx, oracle)
        rows.append(row)
        logger.info("%s L=%d error=%.3e", spec.scheme, count, row["error_subspace"])
    meta = {
        "scheme": spec.scheme,
        "potential": str(spec.potential),
        "hbar": spec.hbar,
        "horizon": spec.time,
        "oracle": spec.oracle,
        "norm": f"resolved subspace ({basis.size} states, radius {basis.radius:.3g})",
    }
    report = rate_fit([r["mesh"] for r in rows], [r["error_subspace"] for r in rows], meta)
    return report, rows


@dataclass
class HbarSweep:
    """One rate report per hbar plus uniformity summaries."""

    hbars: list
    reports: list
    rows: list
    order: float

    @property
    def slopes(self):
        return [r.slope for r in self.reports]

    @property
    def slope_spread(self):
        return max(self.slopes) - min(self.slopes)

    def _matched(self, scale):
        # rows share slice counts, hence matched mesh/hbar across hbar values
        table = np.array([[r["error_subspace"] / scale(r) for r in rows] for rows in self.rows])
        return table

    @property
    def error_spread(self):
        """Largest max/min ratio of raw errors at matched mesh/hbar."""
        t = self._matched(lambda r: 1.0)
        return float(np.max(t.max(axis=0) / t.min(axis=0)))

    @property
    def scaled_error_spread(self):
        """Same for errors divided by mesh^order (the constants of the bound)."""
        t = self._matched(lambda r: r["mesh"] ** self.order)
        return float(np.max(t.max(axis=0) / t.min(axis=0)))


def hbar_sweep(spec, hbars=(1.0, 0.5, 0.25), order=None):
    """Run ``spec`` for each hbar with horizons measured in units of hbar."""
    if not spec.horizon_in_hbar:
        raise InvalidInput("hbar sweeps need horizons measured in units of hbar")
    if any(not (0 < h <= 1) for h in hbars):
        raise InvalidInput("hbar values must lie in (0, 1]")
    if order is None:
        model = ActionModel(spec.scheme, spec.potential) if spec.scheme != "trotter" else None
        order = float(model.taylor_order or 1) if model is not None else 1.0
    reports, rows = [], []
    for h in hbars:
        rep, rw = run_rate_experiment(spec.with_hbar(h), full_grid=False)
        rep.metadata["hbar"] = h
        reports.append(rep)
        rows.append(rw)
    return HbarSweep(list(hbars), reports, rows, float(order))
