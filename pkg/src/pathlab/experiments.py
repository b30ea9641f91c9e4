"""Catalog of named experiments.

Each experiment declares typed parameters with defaults and returns an
:class:`ExperimentResult` holding plot-ready data rows, summary (report)
rows and metadata. The CLI writes these to CSV files; the acceptance tests
call the same functions.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._accel import backend
from .actions import (
    MODEL_NAMES,
    ActionModel,
    approx_action,
    classical_action,
    harmonic_action,
    harmonic_quantum_action,
    hj_coefficients,
    midpoint_action,
)
from .core import (
    Convention,
    Field,
    Grid,
    PhysicsConfig,
    kernel_from_operator,
    operator_norm,
    resolved_basis,
)
from .errors import ConfigError, ExceptionalTime, NotFreeSymplectic
from .lab import (
    ExperimentSpec,
    band_limit,
    distance_opnorm,
    dilated_gaussians,
    focusing_family,
    fourier_sharpness_probe,
    gaussian_family,
    hbar_sweep,
    lp_probe,
    modulated_gaussians,
    pointwise_report,
    rate_fit,
    run_rate_experiment,
)
from .oracles import (
    EXCEPTIONAL_THRESHOLD,
    QuadraticHamiltonian,
    SymplecticBlocks,
    classical_flow,
    exact_kernel,
    free_kernel,
    free_propagate,
    mehler_kernel,
    mehler_value,
    metaplectic_kernel,
    quadratic_propagate,
    reference_propagate,
    to_pde_kernel,
)
from .potentials import PotentialSpec
from .slicing import Subdivision, compose_over_subdivision, trotter_approx
from .tfa import (
    CanonicalMap,
    GaborSystem,
    frame_bounds,
    frame_operator,
    gabor_matrix,
    gaussian_window,
    hermite_window,
    modulation_norm,
    phase_cloud,
    fio_decay_fit,
)

__all__ = [
    "Param",
    "Experiment",
    "ExperimentResult",
    "CATALOG",
    "get_experiment",
    "list_experiments",
    "run_experiment",
    "modulation_test_suite",
    "CONVENTIONS",
    "FORMAT_VERSION",
]

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"

CONVENTIONS = (
    "fourier=PDE e^{-ix.xi} unitary (HA e^{-2 pi i x.xi} where noted)"
    "; W1=-Vbar (exact-action sign)"
    "; metaplectic/Mehler phase fixed by continuity from t->0+"
    "; operator distances are grid estimates on the resolved Hermite subspace"
)


def _floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text):
    out = []
    for v in str(text).split(","):
        v = v.strip()
        if not v:
            continue
        f = float(v)
        if f != int(f):
            raise ValueError(f"{v!r} is not an integer")
        out.append(int(f))
    return tuple(out)


def _int(text):
    vals = _ints(text)
    if len(vals) != 1:
        raise ValueError("expected a single integer")
    return vals[0]


_PARSERS = {
    "float": float,
    "int": _int,
    "str": str,
    "floats": _floats,
    "ints": _ints,
    "potential": lambda v: PotentialSpec.parse(str(v)),
}


@dataclass(frozen=True)
class Param:
    """Typed experiment parameter."""

    name: str
    kind: str
    default: object
    help: str = ""

    def parse(self, value):
        if not isinstance(value, str):
            value = _render(value)
        try:
            out = _PARSERS[self.kind](value)
        except Exception as exc:  # noqa: BLE001 - any parse failure is a config error
            raise ConfigError(self.name, f"expected {self.kind}, got {value!r} ({exc})") from None
        if self.kind in ("floats", "ints") and len(out) == 0:
            raise ConfigError(self.name, "expected a non-empty comma-separated list")
        return out


def _render(v):
    if isinstance(v, (tuple, list)):
        return ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


@dataclass
class ExperimentResult:
    """Data rows, report rows and metadata of one experiment run."""

    name: str
    data_columns: list
    data_rows: list
    report_columns: list
    report_rows: list
    metadata: dict = field(default_factory=dict)

    def report(self, key, column="value", name_column="quantity"):
        """Value of ``column`` in the report row whose ``name_column`` equals ``key``."""
        for r in self.report_rows:
            if r.get(name_column) == key:
                return r[column]
        raise KeyError(key)


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    anchor: str
    params: tuple
    func: object

    def defaults(self):
        return {p.name: p.parse(p.default) for p in self.params}

    def resolve(self, overrides=None):
        """Defaults updated by type-checked overrides; unknown keys are rejected."""
        known = {p.name: p for p in self.params}
        values = self.defaults()
        for k, v in (overrides or {}).items():
            key = k.replace("-", "_")
            if key not in known:
                raise ConfigError(k, f"unknown parameter for experiment {self.name!r}")
            values[key] = known[key].parse(v)
        return values

    def run(self, overrides=None):
        values = self.resolve(overrides)
        res = self.func(values)
        res.metadata = {
            "experiment": self.name,
            "anchor": self.anchor,
            "format_version": FORMAT_VERSION,
            "package_version": __version__,
            "conventions": CONVENTIONS,
            **{f"param.{k}": _render(v) for k, v in sorted(values.items())},
            **res.metadata,
        }
        return res


def _grid(p):
    return Grid(p["n_points"], -16.0, 16.0)


def _pde(hbar=1.0):
    return PhysicsConfig(hbar, Convention.PDE)


_HA = PhysicsConfig(1.0, Convention.HA)
# a = pi (x^2 + xi^2): under the HA flow normalization its flow is the rotation by angle t
_HA_ROTATION = QuadraticHamiltonian(2.0 * np.pi, 0.0, 2.0 * np.pi)

_N_POINTS = Param("n_points", "int", 1024, "grid size on [-16, 16)")


def _rate_rows(rep, expected, tol, label):
    return {
        "scheme": label,
        "slope": rep.slope,
        "expected_slope": expected,
        "tolerance": tol,
        "intercept": rep.intercept,
        "residual": rep.residual,
        "dropped_coarsest": rep.dropped,
        "fit_points": len(rep.fitted_meshes),
    }


_RATE_REPORT = [
    "scheme",
    "slope",
    "expected_slope",
    "tolerance",
    "intercept",
    "residual",
    "dropped_coarsest",
    "fit_points",
]
_VALUE_REPORT = ["quantity", "value", "target"]


def _value(quantity, value, target=""):
    return {"quantity": quantity, "value": value, "target": target}


# free-sanity


def _free_sanity(p):
    grid = _grid(p)
    cfg = _pde(p["hbar"])
    t = p["t"]
    ref = free_kernel(t, grid, cfg)
    zero = PotentialSpec.zero()
    rows = []
    for L in p["slices"]:
        omega = Subdivision.uniform(0.0, t, L)
        for kind in MODEL_NAMES:
            if kind == "exact_harmonic":
                continue  # needs a harmonic potential
            model = ActionModel(kind, zero)
            if omega.gaps.max() > model.guard(cfg.hbar):
                continue
            k = compose_over_subdivision(model, omega, grid, cfg)
            rows.append({"scheme": kind, "slices": L, "error": distance_opnorm(k, ref)})
        k = trotter_approx(zero, QuadraticHamiltonian.free(), t, L, grid, cfg)
        rows.append({"scheme": "trotter", "slices": L, "error": distance_opnorm(k, ref)})
    worst = max(r["error"] for r in rows)
    report = [_value("max_error", worst, "< 1e-6"), _value("schemes_checked", len(rows))]
    return ExperimentResult("free-sanity", ["scheme", "slices", "error"], rows, _VALUE_REPORT, report)


# time-slicing rates on the oscillator


def _ho_rate(name, scheme):
    def run(p):
        grid = _grid(p)
        spec = ExperimentSpec(
            PotentialSpec.harmonic(1.0), scheme, p["t"], p["slices"], oracle="mehler", grid=grid
        )
        rep, rows = run_rate_experiment(spec, full_grid=p["full_grid"] == "yes")
        cols = ["slices", "mesh", "error_subspace", "error_gaussians"]
        if p["full_grid"] == "yes":
            cols.append("error_grid")
        return ExperimentResult(
            name, cols, rows, _RATE_REPORT, [_rate_rows(rep, 1.0, 0.3, scheme)], dict(rep.metadata)
        )

    return run


# midpoint rules, action level


def _midpoint_orders(p):
    pts = np.linspace(-p["box"], p["box"], 9)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    V = PotentialSpec.harmonic(1.0)
    hbar = p["hbar"]
    rules = {"midpoint_v1": "V1", "midpoint_v2": "V2", "midpoint_avg": "avg"}
    rows = []
    errs = {r: [] for r in rules}
    errs_cl = {r: [] for r in rules}
    for tau in p["gaps"]:
        s_quantum = harmonic_quantum_action(1.0, tau, X, Y, hbar)
        s_cl = harmonic_action(1.0, tau, X, Y)
        row = {"gap": tau}
        for name, rule in rules.items():
            s = midpoint_action(V, rule, tau, 0.0, X, Y)
            e = float(np.max(np.abs(s - s_quantum)))
            e_cl = float(np.max(np.abs(s - s_cl)))
            errs[name].append(e)
            errs_cl[name].append(e_cl)
            row[f"{name}_error"] = e
            row[f"{name}_error_classical"] = e_cl
        rows.append(row)
    report = []
    for name in rules:
        expected = 2.0 if name == "midpoint_avg" else 1.0
        rep = rate_fit(p["gaps"], errs[name])
        report.append(_rate_rows(rep, expected, 0.2, name))
        rep_cl = rate_fit(p["gaps"], errs_cl[name])
        report.append(_rate_rows(rep_cl, float("nan"), float("nan"), f"{name}(classical reference)"))
    cols = ["gap"] + [f"{n}_error" for n in rules] + [f"{n}_error_classical" for n in rules]
    meta = {
        "reference": "complex action of the modified Hamilton-Jacobi equation, S_cl - (i hbar/2) log(wt/sin wt)",
        "endpoint_box": f"[-{p['box']}, {p['box']}]^2",
    }
    return ExperimentResult("midpoint-rule-orders", cols, rows, _RATE_REPORT, report, meta)


# rough parametrices


def _taylor_rate(name, order):
    def run(p):
        grid = _grid(p)
        spec = ExperimentSpec(
            p["potential"],
            f"taylor{order}",
            p["horizon"],
            p["slices"],
            oracle="split_step",
            hbar=p["hbar"],
            grid=grid,
            substeps=p["substeps"],
            horizon_in_hbar=True,
        )
        rep, rows = run_rate_experiment(spec, full_grid=False)
        cols = ["slices", "mesh", "mesh_over_hbar", "error_subspace", "error_gaussians"]
        return ExperimentResult(
            name, cols, rows, _RATE_REPORT, [_rate_rows(rep, float(order), 0.4, f"taylor{order}")],
            dict(rep.metadata),
        )

    return run


def _hbar_uniformity(p):
    grid = _grid(p)
    rows, report = [], []
    for order in p["orders"]:
        spec = ExperimentSpec(
            p["potential"],
            f"taylor{order}",
            p["horizon"],
            p["slices"],
            oracle="split_step",
            hbar=p["hbars"][0],
            grid=grid,
            substeps=p["substeps"],
            horizon_in_hbar=True,
        )
        sweep = hbar_sweep(spec, p["hbars"], order=order)
        for h, rr in zip(sweep.hbars, sweep.rows):
            for r in rr:
                rows.append(
                    {
                        "order": order,
                        "hbar": h,
                        "slices": r["slices"],
                        "mesh_over_hbar": r["mesh_over_hbar"],
                        "error_subspace": r["error_subspace"],
                        "scaled_error": r["error_subspace"] / r["mesh"] ** order,
                    }
                )
        for h, rep in zip(sweep.hbars, sweep.reports):
            report.append(
                {"order": order, "quantity": f"slope(hbar={h!r})", "value": rep.slope, "target": f"{order} +- 0.4"}
            )
        report.append({"order": order, "quantity": "slope_spread", "value": sweep.slope_spread, "target": "<= 0.8"})
        report.append(
            {"order": order, "quantity": "scaled_error_spread", "value": sweep.scaled_error_spread, "target": "< 3"}
        )
        report.append({"order": order, "quantity": "raw_error_spread", "value": sweep.error_spread, "target": ""})
    cols = ["order", "hbar", "slices", "mesh_over_hbar", "error_subspace", "scaled_error"]
    meta = {"scaled_error": "error / mesh^order at equal slice counts (matched mesh/hbar)"}
    return ExperimentResult("hbar-uniformity", cols, rows, ["order", "quantity", "value", "target"], report, meta)


# Trotter products


def _split_testbed(V):
    """Quadratic part -> H_0, bounded part -> perturbation."""
    a = V.quadratic_coefficient
    h0 = QuadraticHamiltonian.harmonic(np.sqrt(a)) if a > 0 else QuadraticHamiltonian.free()
    return h0, V.bounded_part()


def _trotter_strong(p):
    grid = _grid(p)
    cfg = _pde(1.0)
    h0, Vb = _split_testbed(p["potential"])
    t = p["t"]
    states = gaussian_family(grid, 1.0)
    exact = [reference_propagate(p["potential"], f, t, cfg, p["substeps"]) for f in states]
    rows = []
    per_state = [[] for _ in states]
    for n in p["n"]:
        k = trotter_approx(Vb, h0, t, n, grid, cfg)
        errs = [(k.apply(f) - u).norm() for f, u in zip(states, exact)]
        for j, e in enumerate(errs):
            per_state[j].append(e)
        row = {"n": n, "mesh": t / n, "max_error": max(errs)}
        row.update({f"error_state{j}": e for j, e in enumerate(errs)})
        rows.append(row)
    report = [_rate_rows(rate_fit([t / n for n in p["n"]], [r["max_error"] for r in rows]), 1.0, 0.3, "trotter(max)")]
    for j, e in enumerate(per_state):
        report.append(_rate_rows(rate_fit([t / n for n in p["n"]], e), 1.0, 0.3, f"trotter(state{j})"))
    cols = ["n", "mesh", "max_error"] + [f"error_state{j}" for j in range(len(states))]
    meta = {"oracle": f"Strang split-step, {p['substeps']} substeps", "h0": repr(h0), "perturbation": str(Vb)}
    return ExperimentResult("trotter-strong-convergence", cols, rows, _RATE_REPORT, report, meta)


def resolvability_check(h0, t, grid, window, cfg=None, cutoff=None):
    """Raise ExceptionalTime when the propagator kernel cannot be resolved on the window.

    The kernel phase of a quadratic flow oscillates in ``y`` at frequency
    ``|A y - x| / |B|``; near an exceptional time this exceeds any fixed
    frequency band, so pointwise values are meaningless on the grid.
    """
    blocks = classical_flow(h0, t, cfg)
    if cutoff is None:
        cutoff = 0.25 * grid.nyquist(Convention.PDE)
    half = max(abs(window[0]), abs(window[1]))
    bound = (abs(blocks.A) + 1.0) * half / cutoff
    if abs(blocks.B) <= max(bound, EXCEPTIONAL_THRESHOLD):
        omega = h0.frequency
        k = int(np.rint(t * omega / np.pi)) if omega > 0 else 0
        raise ExceptionalTime(
            t,
            k,
            blocks.B,
            bound,
            "kernel oscillation near the exceptional time exceeds the grid band on the window",
        )
    return blocks


def _trotter_pointwise(p):
    grid = _grid(p)
    cfg = _pde(1.0)
    V = p["potential"]
    h0, Vb = _split_testbed(V)
    t = p["t"]
    window = (-p["window"], p["window"])
    resolvability_check(h0, t, grid, window)
    if Vb.is_zero and h0 == QuadraticHamiltonian.harmonic(1.0):
        oracle, oracle_name = mehler_kernel(t, grid), "Mehler"
    elif Vb.is_zero and h0 == QuadraticHamiltonian.free():
        oracle, oracle_name = free_kernel(t, grid, cfg), "free"
    else:
        oracle, oracle_name = exact_kernel(V, t, grid, cfg, p["substeps"]), "split-step"
    ns = list(p["n"])
    kernels = [trotter_approx(Vb, h0, t, n, grid, cfg) for n in ns]
    rep = pointwise_report(kernels, ns, oracle, window)
    rows = [
        {"n": n, "sup_error": e, "sup_modulus": m}
        for n, e, m in zip(rep.ns, rep.sup_errors, rep.sup_moduli)
    ]
    inversions = sum(1 for a, b in zip(rep.sup_errors, rep.sup_errors[1:]) if b >= a)
    report = [
        _value("final_over_initial", rep.sup_errors[-1] / rep.sup_errors[0], "< 0.1"),
        _value("non_decreasing_steps", inversions, "<= 1 (within 10%)"),
        _value("boundedness_proxy", rep.boundedness_proxy),
        _value("boundedness_variation", rep.boundedness_variation, "< 0.5"),
        _value("slope", rate_fit([t / n for n in ns], rep.sup_errors).slope),
    ]
    meta = {
        "oracle": oracle_name,
        "window": f"[{window[0]}, {window[1]}]^2",
        "mollifier": f"exp(-(xi/{rep.cutoff:.6g})^8) on both sides",
    }
    return ExperimentResult("trotter-pointwise", ["n", "sup_error", "sup_modulus"], rows, _VALUE_REPORT, report, meta)


# exceptional times


def _exceptional_times(p):
    grid = _grid(p)
    rows = []
    for k in p["k"]:
        for delta in p["offsets"]:
            t = k * np.pi + delta
            outcome = {"k": k, "offset": delta, "t": t, "abs_sin": abs(np.sin(t))}
            try:
                mehler_kernel(t, grid)
                outcome.update(outcome="kernel", parity="", reported_k="")
            except ExceptionalTime as exc:
                outcome.update(outcome="exceptional", parity=exc.parity, reported_k=exc.k)
            try:
                blocks = classical_flow(_HA_ROTATION, t, _HA)
                metaplectic_kernel(blocks, grid, _HA)
                outcome["metaplectic"] = "kernel"
            except NotFreeSymplectic:
                outcome["metaplectic"] = "not free symplectic"
            try:
                trotter_approx(PotentialSpec.cosine(), QuadraticHamiltonian.harmonic(1.0), t, 1, grid)
                outcome["trotter_step"] = "kernel"
            except ExceptionalTime:
                outcome["trotter_step"] = "exceptional"
            rows.append(outcome)
    guarded = [r for r in rows if abs(r["offset"]) <= EXCEPTIONAL_THRESHOLD]
    leaks = sum(
        1 for r in guarded if "kernel" in (r["outcome"], r["metaplectic"], r["trotter_step"])
    )
    report = [
        _value("cases_within_threshold", len(guarded)),
        _value("kernels_returned_within_threshold", leaks, "0"),
    ]
    cols = ["k", "offset", "t", "abs_sin", "outcome", "parity", "reported_k", "metaplectic", "trotter_step"]
    return ExperimentResult("exceptional-times", cols, rows, _VALUE_REPORT, report)


# oracle cross-agreement


def _oracle_agreement(p):
    grid = _grid(p)
    cfg = _pde(1.0)
    rows = []
    x = grid.points
    states = gaussian_family(grid, 1.0)
    # free: multiplier vs kernel
    kf = free_kernel(1.0, grid, cfg, method="closed")
    e = max((kf.apply(f) - free_propagate(f, 1.0, cfg)).norm() for f in states)
    rows.append({"check": "free kernel vs multiplier (L2, t=1)", "value": e, "tolerance": 1e-7})
    # Mehler vs split step
    V = PotentialSpec.harmonic(1.0)
    km = mehler_kernel(0.7, grid, method="closed")
    e = max(
        (km.apply(f) - reference_propagate(V, f, 0.7, cfg, p["substeps"])).norm() for f in states
    )
    rows.append({"check": "Mehler vs split-step (L2, t=0.7)", "value": e, "tolerance": 1e-6})
    # metaplectic vs Mehler at t = pi/2: moduli of the closed forms on the grid
    blocks = classical_flow(_HA_ROTATION, np.pi / 2, _HA)
    kmeta = to_pde_kernel(metaplectic_kernel(blocks, grid, _HA, method="closed"))
    xs = kmeta.grid.points
    inside = np.abs(xs) <= 16.0
    ref = mehler_value(xs[inside][:, None], xs[inside][None, :], np.pi / 2)
    sub = kmeta.entries[np.ix_(inside, inside)]
    e = float(np.max(np.abs(np.abs(sub) - np.abs(ref))))
    phase = sub / ref
    rel = float(np.max(np.abs(phase - phase.flat[0])))
    rows.append({"check": "metaplectic vs Mehler modulus (t=pi/2)", "value": e, "tolerance": 1e-8})
    rows.append({"check": "metaplectic vs Mehler relative phase (t=pi/2)", "value": rel, "tolerance": 1e-8})
    # spectral realizations (unitary on the grid) vs closed forms on fields
    ks = mehler_kernel(0.7, grid)
    e = max((ks.apply(f) - km.apply(f)).norm() for f in states)
    rows.append({"check": "Mehler spectral vs closed (L2, t=0.7)", "value": e, "tolerance": 1e-7})
    report = [
        _value("all_within_tolerance", all(r["value"] < r["tolerance"] for r in rows), "true")
    ]
    return ExperimentResult("oracle-agreement", ["check", "value", "tolerance"], rows, _VALUE_REPORT, report)


# time-frequency experiments


def modulation_test_suite(grid, count=20, seed=20240611):
    """Fixed deterministic suite of smooth, well-localized test functions (HA units)."""
    rng = np.random.default_rng(seed)
    x = grid.points
    suite = []
    for j in range(count):
        kind = j % 4
        x0, xi0 = rng.uniform(-4, 4), rng.uniform(-4, 4)
        w = rng.uniform(0.5, 2.0)
        if kind == 0:
            f = np.exp(-np.pi * ((x - x0) / w) ** 2 + 2j * np.pi * xi0 * x)
        elif kind == 1:
            f = hermite_window(grid, 1 + j % 5, _HA).samples * np.exp(2j * np.pi * xi0 * x)
        elif kind == 2:
            c = rng.uniform(-1, 1)
            f = np.exp(-np.pi * ((x - x0) / w) ** 2 + 1j * np.pi * c * (x - x0) ** 2)
        else:
            x1 = rng.uniform(-4, 4)
            f = np.exp(-np.pi * (x - x0) ** 2) + 0.5 * np.exp(-np.pi * (x - x1) ** 2 + 2j * np.pi * xi0 * x)
        suite.append(Field(grid, f * rng.uniform(0.5, 2.0)))
    return suite


def _gabor_norms(p):
    grid = _grid(p)
    suite = modulation_test_suite(grid, p["count"])
    sys = GaborSystem.gaussian(grid, p["alpha"], p["beta"], Convention.HA)
    methods = ("stft", "gabor", "freqdecomp")
    rows = []
    pqs = [tuple(v) for v in np.array(p["pqs"]).reshape(-1, 3)]
    report = []
    for pq in pqs:
        sp, sq, ss = pq
        vals = {m: [] for m in methods}
        for j, f in enumerate(suite):
            row = {"p": sp, "q": sq, "s": ss, "function": j, "l2": f.norm()}
            for m in methods:
                v = float(modulation_norm(f, sp, sq, ss, m, sys, _HA))
                vals[m].append(v)
                row[m] = v
            rows.append(row)
        for a, b in (("stft", "gabor"), ("stft", "freqdecomp"), ("gabor", "freqdecomp")):
            r = np.array(vals[a]) / np.array(vals[b])
            report.append(
                {"p": sp, "q": sq, "s": ss, "quantity": f"{a}/{b}", "min": r.min(), "max": r.max(),
                 "constant": max(r.max(), 1.0 / r.min())}
            )
        if (sp, sq, ss) == (2.0, 2.0, 0.0):
            l2 = np.array([f.norm() for f in suite])
            for m in methods:
                r = np.array(vals[m]) / l2
                report.append(
                    {"p": sp, "q": sq, "s": ss, "quantity": f"{m}/L2", "min": r.min(), "max": r.max(),
                     "constant": r.max() / r.min() - 1.0}
                )
    cols = ["p", "q", "s", "function", "l2", *methods]
    meta = {
        "convention": "HA",
        "window": "2^{1/4} exp(-pi x^2)",
        "lattice": f"alpha={p['alpha']!r}, beta={p['beta']!r}",
        "constant": "pairs: max(max r, 1/min r); X/L2 rows: relative spread max/min - 1",
    }
    return ExperimentResult(
        "gabor-norm-equivalence", cols, rows, ["p", "q", "s", "quantity", "min", "max", "constant"], report, meta
    )


def _frame_bounds(p):
    grid = _grid(p)
    sys = GaborSystem.gaussian(grid, p["alpha"], p["beta"], Convention.HA)
    A, B = frame_bounds(sys)
    S = frame_operator(sys)
    rng = np.random.default_rng(p["seed"])
    rows = []
    worst = 0.0
    for j in range(p["count"]):
        w = rng.uniform(0.3, 3.0)
        x0, xi0 = rng.uniform(-6, 6), rng.uniform(-6, 6)
        noise = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
        f = np.exp(-np.pi * ((grid.points - x0) / w) ** 2 + 2j * np.pi * xi0 * grid.points) * (1 + 0.3 * noise)
        fld = Field(grid, f)
        energy = float(np.real(grid.spacing * np.vdot(f, S @ f)))
        nrm2 = fld.norm() ** 2
        lo = (A * nrm2 - energy) / nrm2
        hi = (energy - B * nrm2) / nrm2
        worst = max(worst, lo, hi)
        rows.append({"field": j, "norm2": nrm2, "frame_energy": energy, "ratio": energy / nrm2})
    sweep = []
    for P in p["critical_sizes"]:
        g2 = Grid(P * P, -P / 2.0, P / 2.0)
        a, b = frame_bounds(GaborSystem.gaussian(g2, 1.0, 1.0, Convention.HA))
        sweep.append((P, a / b))
    report = [
        _value("A", A),
        _value("B", B),
        _value("A_over_B", A / B, "> 0.1"),
        _value("max_relative_violation", worst, "<= 1e-8"),
    ]
    report += [_value(f"critical_A_over_B(box={P})", r, "< 1e-2") for P, r in sweep]
    return ExperimentResult(
        "frame-bounds", ["field", "norm2", "frame_energy", "ratio"], rows, _VALUE_REPORT, report,
        {"convention": "HA", "lattice": f"alpha={p['alpha']!r}, beta={p['beta']!r}"},
    )


def _fio_decay(p):
    grid = _grid(p)
    g = gaussian_window(grid, _HA)
    zs = phase_cloud(-p["z_box"], p["z_box"], p["z_count"])
    ws = phase_cloud(-p["w_box"], p["w_box"], p["w_count"])
    s_grid = list(p["s_grid"])
    ops = {
        "shear": SymplecticBlocks(1.0, p["shear"], 0.0, 1.0),
        "rotation": classical_flow(_HA_ROTATION, p["rotation"], _HA),
    }
    rows, report = [], []
    exps = {}
    for name, blocks in ops.items():
        K = metaplectic_kernel(blocks, grid, _HA)
        samples = gabor_matrix(K, g, zs, ws, _HA)
        for chi_name, chi in (("matching", CanonicalMap.from_blocks(blocks, name)), ("identity", CanonicalMap.identity())):
            fit = fio_decay_fit(samples, chi, s_grid)
            exps[(name, chi_name)] = fit.exponent
            rows += [
                {"operator": name, "chi": chi_name, "s": s, "seminorm": v} for s, v in zip(s_grid, fit.seminorms)
            ]
            i4 = s_grid.index(4.0) if 4.0 in s_grid else len(s_grid) - 1
            report.append(
                {"operator": name, "chi": chi_name, "decay_exponent": fit.exponent,
                 "growth_s0_to_s4": fit.seminorms[i4] / fit.seminorms[0], "max_seminorm": max(fit.seminorms)}
            )
    # composition of the two metaplectic operators
    Kc = metaplectic_kernel(ops["shear"], grid, _HA) @ metaplectic_kernel(ops["rotation"], grid, _HA)
    chic = CanonicalMap.from_blocks(ops["shear"]).compose(CanonicalMap.from_blocks(ops["rotation"]))
    fit = fio_decay_fit(gabor_matrix(Kc, g, zs, ws, _HA), chic, s_grid)
    rows += [{"operator": "shear*rotation", "chi": "matching", "s": s, "seminorm": v} for s, v in zip(s_grid, fit.seminorms)]
    i4 = s_grid.index(4.0) if 4.0 in s_grid else len(s_grid) - 1
    report.append(
        {"operator": "shear*rotation", "chi": "matching", "decay_exponent": fit.exponent,
         "growth_s0_to_s4": fit.seminorms[i4] / fit.seminorms[0], "max_seminorm": max(fit.seminorms)}
    )
    meta = {"convention": "HA", "note": "seminorms are sups over finite clouds (lower bounds)",
            "z_cloud": f"{p['z_count']}x{p['z_count']} on [-{p['z_box']}, {p['z_box']}]^2",
            "w_cloud": f"{p['w_count']}x{p['w_count']} on [-{p['w_box']}, {p['w_box']}]^2"}
    return ExperimentResult(
        "fio-decay-metaplectic", ["operator", "chi", "s", "seminorm"], rows,
        ["operator", "chi", "decay_exponent", "growth_s0_to_s4", "max_seminorm"], report, meta,
    )


def _lp_loss(p):
    grid = _grid(p)
    cfg = _pde(1.0)
    t = p["t"]
    lams = p["lambdas"]
    apply = lambda f: free_propagate(f, t, cfg)  # noqa: E731
    k_crit = 2.0 * abs(0.5 - 1.0 / p["p"])
    rows, report = [], []
    families = {
        "focusing": (focusing_family(grid, lams, t, cfg), [f"lambda={v!r}" for v in lams]),
        "modulated": (modulated_gaussians(grid, p["xis"]), [f"xi={v!r}" for v in p["xis"]]),
    }
    for fam, (members, labels) in families.items():
        for k in (k_crit, 0.0):
            tab = lp_probe(apply, p["p"], members, cfg, k, labels)
            for lab, r in zip(tab.labels, tab.ratios):
                rows.append({"family": fam, "k": k, "member": lab, "ratio": r})
            report.append(
                {"family": fam, "k": k, "max_ratio": tab.max_ratio, "spread": tab.spread, "growth": tab.growth}
            )
    tab = lp_probe(apply, 2.0, families["focusing"][0], cfg, 0.0)
    report.append({"family": "focusing (p=2)", "k": 0.0, "max_ratio": tab.max_ratio, "spread": tab.spread, "growth": tab.growth})
    meta = {
        "focusing_family": "U(-t) applied to exp(-lambda^2 x^2/2): U(t) refocuses to width 1/lambda",
        "modulated_family": "e^{i xi x} e^{-x^2/2}; the free flow maps it to a translate of U(t)g (ratios at k=0 are xi-independent)",
    }
    return ExperimentResult(
        "lp-loss-probe", ["family", "k", "member", "ratio"], rows,
        ["family", "k", "max_ratio", "spread", "growth"], report, meta,
    )


def _fourier_sharpness(p):
    grid = _grid(p)
    cfg = _pde(1.0)
    fam = dilated_gaussians(grid, p["lambdas"])
    labels = [f"lambda={v!r}" for v in p["lambdas"]]
    kc = 2.0 * (1.0 / p["p"] - 0.5)
    rows, report = [], []
    for pp, k1 in ((p["p"], 0.0), (p["p"], kc), (2.0, 0.0)):
        tab = fourier_sharpness_probe(pp, k1, 0.0, fam, cfg, labels)
        for lab, r in zip(tab.labels, tab.ratios):
            rows.append({"p": pp, "k1": k1, "k2": 0.0, "member": lab, "ratio": r})
        report.append({"p": pp, "k1": k1, "k2": 0.0, "growth": tab.growth, "spread": tab.spread, "max_ratio": tab.max_ratio})
    return ExperimentResult(
        "fourier-sharpness", ["p", "k1", "k2", "member", "ratio"], rows,
        ["p", "k1", "k2", "growth", "spread", "max_ratio"], report,
        {"family": "exp(-lambda^2 x^2/2)", "transform": "unitary PDE convention"},
    )


_CV = "harmonic(1)+cosine(0.3,1,0)"

CATALOG = {
    e.name: e
    for e in [
        Experiment(
            "free-sanity",
            "V = 0: every action model, rough parametrix and Trotter product reproduces the free propagator",
            "free evolution and the time-slicing operators (§3.1, §3.2, §5)",
            (_N_POINTS, Param("t", "float", 0.8), Param("hbar", "float", 1.0), Param("slices", "ints", "2,4,8")),
            _free_sanity,
        ),
        Experiment(
            "ho-slicing-rate",
            "E^(0) with the classical action on the oscillator vs Mehler: first-order rate in the mesh",
            "convergence theorem for time slicing, N = 0 (§3.2 Thm.)",
            (_N_POINTS, Param("t", "float", 0.8), Param("slices", "ints", "4,8,16,32"), Param("full_grid", "str", "no")),
            _ho_rate("ho-slicing-rate", "classical_bvp"),
        ),
        Experiment(
            "ho-broken-line-rate",
            "E^(0) with the broken-line (left-endpoint potential) action on the oscillator vs Mehler",
            "broken-line paths and time slicing (§3.1, §3.2 Thm.)",
            (_N_POINTS, Param("t", "float", 0.8), Param("slices", "ints", "4,8,16,32"), Param("full_grid", "str", "no")),
            _ho_rate("ho-broken-line-rate", "broken_line"),
        ),
        Experiment(
            "midpoint-rule-orders",
            "Action errors of the midpoint rules V1, V2 and the segment average on the oscillator",
            "midpoint rules and the first-order rule (§5)",
            (
                Param("gaps", "floats", "0.4,0.2,0.1,0.05"),
                Param("box", "float", 2.0),
                Param("hbar", "float", 1.0),
            ),
            _midpoint_orders,
        ),
        Experiment(
            "taylor-rate-N1",
            "Rough parametrix with S^(1) on a cosine potential vs split-step, horizon in units of hbar",
            "rough parametrix convergence theorem (§5 Thm.)",
            (
                _N_POINTS,
                Param("potential", "potential", "cosine(0.3,1,0)"),
                Param("hbar", "float", 0.25),
                Param("horizon", "float", 0.4, "horizon in units of hbar"),
                Param("slices", "ints", "2,4,8,16"),
                Param("substeps", "int", 8192),
            ),
            _taylor_rate("taylor-rate-N1", 1),
        ),
        Experiment(
            "taylor-rate-N2",
            "Rough parametrix with S^(2) on a cosine potential vs split-step, horizon in units of hbar",
            "rough parametrix convergence theorem (§5 Thm.)",
            (
                _N_POINTS,
                Param("potential", "potential", "cosine(0.3,1,0)"),
                Param("hbar", "float", 0.25),
                Param("horizon", "float", 0.4, "horizon in units of hbar"),
                Param("slices", "ints", "2,4,8,16"),
                Param("substeps", "int", 8192),
            ),
            _taylor_rate("taylor-rate-N2", 2),
        ),
        Experiment(
            "hbar-uniformity",
            "Rough-parametrix rates and scaled errors across hbar with horizons in units of hbar",
            "uniformity in hbar of the rough parametrix estimates (§5)",
            (
                _N_POINTS,
                Param("potential", "potential", "cosine(0.3,1,0)"),
                Param("orders", "ints", "1,2"),
                Param("hbars", "floats", "1.0,0.5,0.25"),
                Param("horizon", "float", 0.4),
                Param("slices", "ints", "2,4,8,16"),
                Param("substeps", "int", 8192),
            ),
            _hbar_uniformity,
        ),
        Experiment(
            "trotter-strong-convergence",
            "Trotter products on Gaussian states for an oscillator plus bounded perturbation",
            "Trotter product formula, strong convergence (§3.1, §6)",
            (
                _N_POINTS,
                Param("potential", "potential", _CV),
                Param("t", "float", 0.7),
                Param("n", "ints", "8,16,32,64"),
                Param("substeps", "int", 8192),
            ),
            _trotter_strong,
        ),
        Experiment(
            "trotter-pointwise",
            "Windowed sup-norm convergence of Trotter kernels (mollified) to the propagator kernel",
            "pointwise convergence of Trotter kernels on compact sets (§6 Thm.)",
            (
                _N_POINTS,
                Param("potential", "potential", _CV),
                Param("t", "float", 0.7),
                Param("n", "ints", "4,8,16,32,64"),
                Param("window", "float", 4.0, "half-width of the square window"),
                Param("substeps", "int", 8192),
            ),
            _trotter_pointwise,
        ),
        Experiment(
            "exceptional-times",
            "Oscillator propagators near t = k pi return structured exceptional-time outcomes",
            "Mehler kernel at exceptional times (§4.3, §6)",
            (_N_POINTS, Param("k", "ints", "1,2,3"), Param("offsets", "floats", "-1e-6,-3e-7,0.0,5e-7,1e-6,1e-3")),
            _exceptional_times,
        ),
        Experiment(
            "oracle-agreement",
            "Cross-checks between independent routes to the free, oscillator and metaplectic propagators",
            "free propagator (§3.1), Mehler kernel (§4.3), quadratic Fourier transforms (§6.2)",
            (_N_POINTS, Param("substeps", "int", 4096)),
            _oracle_agreement,
        ),
        Experiment(
            "gabor-norm-equivalence",
            "Modulation norms by STFT, Gabor lattice sums and frequency decomposition on a fixed suite",
            "modulation spaces and their discrete norm (§2)",
            (
                _N_POINTS,
                Param("count", "int", 20),
                Param("alpha", "float", 0.5),
                Param("beta", "float", 0.5),
                Param("pqs", "floats", "2,2,0,1,1,0,2,1,0,1,2,1", "flattened (p, q, s) triples"),
            ),
            _gabor_norms,
        ),
        Experiment(
            "frame-bounds",
            "Frame bounds of the Gaussian Gabor system and the frame inequality on random fields",
            "Gabor frames (§2)",
            (
                _N_POINTS,
                Param("alpha", "float", 0.5),
                Param("beta", "float", 0.5),
                Param("count", "int", 20),
                Param("seed", "int", 7),
                Param("critical_sizes", "ints", "8,16,32"),
            ),
            _frame_bounds,
        ),
        Experiment(
            "fio-decay-metaplectic",
            "Gabor-matrix decay of metaplectic operators around the graph of their canonical map",
            "Gabor matrices of FIOs of type chi (§4.2 Thm.)",
            (
                _N_POINTS,
                Param("shear", "float", 1.0),
                Param("rotation", "float", 1.0, "rotation time in HA units"),
                Param("z_box", "float", 2.0),
                Param("z_count", "int", 9),
                Param("w_box", "float", 6.0),
                Param("w_count", "int", 41),
                Param("s_grid", "floats", "0,1,2,3,4,5,6"),
            ),
            _fio_decay,
        ),
        Experiment(
            "lp-loss-probe",
            "L^p loss of derivatives of the free flow on refocusing and modulated Gaussian families",
            "L^p bounds with loss of derivatives (§4 Thm.)",
            (
                _N_POINTS,
                Param("p", "float", 4.0),
                Param("t", "float", 1.0),
                Param("lambdas", "floats", "1,2,4,8"),
                Param("xis", "floats", "0,4,8,16"),
            ),
            _lp_loss,
        ),
        Experiment(
            "fourier-sharpness",
            "L^p Sobolev bounds of the Fourier transform on dilated Gaussians",
            "sharpness of the Fourier transform bounds (§4.3 Prop.)",
            (_N_POINTS, Param("p", "float", 4.0 / 3.0), Param("lambdas", "floats", "1,2,4,8")),
            _fourier_sharpness,
        ),
    ]
}


def get_experiment(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigError("experiment", f"unknown experiment {name!r}") from None


def list_experiments():
    """``(name, description, anchor)`` for every catalog entry."""
    return [(e.name, e.description, e.anchor) for e in CATALOG.values()]


def run_experiment(name, overrides=None):
    exp = get_experiment(name)
    res = exp.run(overrides)
    res.metadata["backend"] = backend()
    return res
