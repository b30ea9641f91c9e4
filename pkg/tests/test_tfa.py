import warnings

import numpy as np
import pytest

from pathlab import Convention, Field, Grid, GridMismatch, InvalidInput, PhysicsConfig
from pathlab.core import identity_kernel
from pathlab.experiments import modulation_test_suite
from pathlab.oracles import SymplecticBlocks, metaplectic_kernel
from pathlab.tfa import (
    CanonicalMap,
    FrameWarning,
    GaborSystem,
    PhasePoint,
    fio_decay_fit,
    frame_bounds,
    frame_operator,
    gabor_matrix,
    gaussian_window,
    hermite_window,
    modulation_norm,
    phase_cloud,
    stft,
    tf_shift,
    wigner,
)


@pytest.fixture(scope="module")
def g(grid, ha):
    return gaussian_window(grid, ha)


@pytest.fixture(scope="module")
def sys_half(grid):
    return GaborSystem.gaussian(grid, 0.5, 0.5, Convention.HA)


class TestShift:
    def test_zero_shift(self, g, ha):
        assert np.max(np.abs(tf_shift(g, PhasePoint(0, 0), ha).samples - g.samples)) < 1e-13

    def test_unitary(self, g, ha, rng):
        for _ in range(10):
            z = PhasePoint(rng.uniform(-8, 8), rng.uniform(-8, 8))
            assert tf_shift(g, z, ha).norm() == pytest.approx(g.norm(), abs=1e-10)

    def test_reproducing(self, g, ha, rng):
        for _ in range(5):
            z = PhasePoint(rng.uniform(-4, 4), rng.uniform(-4, 4))
            gz = tf_shift(g, z, ha)
            assert abs(gz.inner(gz) - g.norm() ** 2) < 1e-8

    def test_rejects_outside_box(self, g, ha):
        with pytest.raises(InvalidInput):
            tf_shift(g, PhasePoint(20.0, 0.0), ha)
        with pytest.raises(InvalidInput):
            tf_shift(g, PhasePoint(0.0, 40.0), ha)

    def test_phase_point_finite(self):
        with pytest.raises(InvalidInput):
            PhasePoint(np.nan, 0.0)


class TestSTFT:
    def test_gaussian_oracle(self, g, ha):
        S = stft(g, g, (0.5, 0.5), ha)
        X, XI = np.meshgrid(S.xs, S.xis, indexing="ij")
        assert np.max(np.abs(S.magnitude - np.exp(-np.pi * (X**2 + XI**2) / 2))) < 1e-6

    def test_matches_inner_products(self, g, ha, rng):
        f = modulation_test_suite(g.grid, 4)[3]
        S = stft(f, g, (1.0, 1.0), ha)
        for _ in range(5):
            m, n = rng.integers(8, S.xs.size - 8), rng.integers(4, S.xis.size - 4)
            direct = f.inner(tf_shift(g, PhasePoint(S.xs[m], S.xis[n]), ha))
            assert abs(S.values[m, n] - direct) < 1e-8

    def test_zero_field(self, g, ha):
        assert np.all(stft(Field.zeros(g.grid), g, (1, 1), ha).values == 0)

    def test_covariance(self, g, ha):
        f = tf_shift(g, PhasePoint(0.5, -1.0), ha) + tf_shift(g, PhasePoint(-2.0, 2.0), ha) * 0.5
        m0, n0 = 3, -2  # lattice shift by (1.5, -1.0)
        fz = tf_shift(f, PhasePoint(0.5 * m0, 0.5 * n0), ha)
        A = stft(f, g, (0.5, 0.5), ha).magnitude
        B = stft(fz, g, (0.5, 0.5), ha).magnitude
        shifted = np.roll(np.roll(A, m0, axis=0), n0, axis=1)
        inner = (slice(8, -8), slice(8, -8))
        assert np.max(np.abs(B[inner] - shifted[inner])) < 1e-6

    def test_cauchy_schwarz(self, g, ha):
        for f in modulation_test_suite(g.grid, 8):
            assert stft(f, g, (1, 1), ha).magnitude.max() <= f.norm() * g.norm() + 1e-9

    def test_zero_window(self, g, ha):
        with pytest.raises(InvalidInput):
            stft(g, Field.zeros(g.grid), (1, 1), ha)

    def test_csv(self, g, ha, tmp_path):
        S = stft(g, g, (4.0, 4.0), ha)
        path = S.to_csv(tmp_path / "stft.csv")
        lines = open(path).read().splitlines()
        assert lines[0] == "x,xi,re,im" and len(lines) == 1 + S.values.size


class TestModulationNorm:
    def test_l2_ratio_constant(self, grid, sys_half, ha, rng):
        fields = []
        for _ in range(10):
            x0, xi0, w = rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0.5, 2)
            fields.append(Field(grid, np.exp(-np.pi * ((grid.points - x0) / w) ** 2 + 2j * np.pi * xi0 * grid.points)))
        r = [modulation_norm(f, 2, 2, 0, "stft", sys_half, ha) / f.norm() for f in fields]
        assert max(r) / min(r) - 1 < 1e-6

    @pytest.mark.parametrize("method", ["stft", "gabor", "freqdecomp"])
    def test_zero(self, grid, sys_half, ha, method):
        assert modulation_norm(Field.zeros(grid), 1, 2, 1, method, sys_half, ha) == 0.0

    @pytest.mark.parametrize("method", ["stft", "gabor", "freqdecomp"])
    def test_homogeneous(self, grid, sys_half, ha, method):
        f = modulation_test_suite(grid, 3)[2]
        a = modulation_norm(f, 1, 2, 1, method, sys_half, ha)
        b = modulation_norm(f * (2 - 3j), 1, 2, 1, method, sys_half, ha)
        assert b == pytest.approx(abs(2 - 3j) * a, rel=1e-10)

    def test_equivalence_on_suite(self, grid, sys_half, ha):
        suite = modulation_test_suite(grid, 20)
        vals = {m: np.array([modulation_norm(f, 1, 2, 1, m, sys_half, ha) for f in suite]) for m in ("stft", "gabor", "freqdecomp")}
        for a, b in (("stft", "gabor"), ("stft", "freqdecomp"), ("gabor", "freqdecomp")):
            r = vals[a] / vals[b]
            assert max(r.max(), 1 / r.min()) < 10.0

    def test_critical_density_warns(self, grid, ha):
        sys1 = GaborSystem.gaussian(grid, 1.0, 1.0, Convention.HA)
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            v = modulation_norm(gaussian_window(grid, ha), 2, 2, 0, "gabor", sys1, ha)
        assert any(issubclass(w.category, FrameWarning) for w in rec)
        assert v.warnings and v.method == "gabor"

    def test_bad_exponent(self, grid, sys_half, ha):
        with pytest.raises(InvalidInput):
            modulation_norm(gaussian_window(grid, ha), 0.5, 2, 0, "stft", sys_half, ha)
        with pytest.raises(InvalidInput):
            modulation_norm(gaussian_window(grid, ha), 2, 2, 0, "wavelet", sys_half, ha)


class TestFrames:
    def test_healthy_frame(self, sys_half):
        A, B = frame_bounds(sys_half)
        assert 0 < A <= B and A > 0.1 * B

    def test_critical_trend(self):
        for P in (8, 16):
            A, B = frame_bounds(GaborSystem.gaussian(Grid(P * P, -P / 2, P / 2), 1.0, 1.0))
            assert A / B < 1e-2

    def test_sandwich_on_window(self, sys_half, g):
        A, B = frame_bounds(sys_half)
        S = frame_operator(sys_half)
        e = float(np.real(g.grid.spacing * np.vdot(g.samples, S @ g.samples)))
        n2 = g.norm() ** 2
        assert A * n2 * (1 - 1e-8) <= e <= B * n2 * (1 + 1e-8)

    def test_window_required(self, grid):
        with pytest.raises(InvalidInput):
            GaborSystem(Field.zeros(grid), 0.5, 0.5)
        with pytest.raises(InvalidInput):
            GaborSystem(gaussian_window(grid), -1, 0.5)


class TestWigner:
    def test_gaussian_oracle(self, g, ha):
        W = wigner(g, cfg=ha)
        X, XI = np.meshgrid(W.xs, W.xis, indexing="ij")
        assert np.max(np.abs(W.values - 2 * np.exp(-2 * np.pi * (X**2 + XI**2)))) < 1e-6

    def test_zero(self, grid, ha):
        assert np.all(wigner(Field.zeros(grid), cfg=ha).values == 0)

    def test_marginal(self, grid, ha):
        f = modulation_test_suite(grid, 4)[3]
        W = wigner(f, cfg=ha)
        err = grid.spacing * np.sum(np.abs(W.marginal_x() - np.abs(f.samples) ** 2))
        assert err < 1e-6

    def test_real_and_mass(self, grid, ha):
        for f in modulation_test_suite(grid, 6):
            W = wigner(f, f, ha)
            assert np.max(np.abs(np.imag(W.values))) < 1e-10
            assert W.total(grid.spacing) == pytest.approx(f.norm() ** 2, abs=1e-6)

    def test_cross_wigner_mass(self, grid, ha):
        f, h = modulation_test_suite(grid, 2)
        W = wigner(f, h, ha)
        assert abs(W.total(grid.spacing) - f.inner(h)) < 1e-6

    def test_rejects_pde(self, g, pde):
        with pytest.raises(InvalidInput):
            wigner(g, cfg=pde)
        with pytest.raises(InvalidInput):
            wigner(g)


class TestGaborMatrix:
    def test_identity(self, g, ha):
        zs, ws = phase_cloud(-2, 2, 5), phase_cloud(-3, 3, 7)
        M = gabor_matrix(identity_kernel(g.grid), g, zs, ws, ha)
        d2 = np.sum((ws[None] - zs[:, None]) ** 2, axis=-1)
        assert np.max(np.abs(M.magnitude - np.exp(-np.pi * d2 / 2))) < 1e-6

    def test_free_flow_concentrates(self, g, ha):
        t = 1.0
        T = metaplectic_kernel(SymplecticBlocks(1.0, t, 0.0, 1.0), g.grid, ha)
        chi = CanonicalMap.shear(t)
        for z in ([0.0, 0.0], [1.0, -1.0], [-0.5, 2.0]):
            on = chi(np.array([z]))
            off = on + np.array([[3.0, 0.0]])
            m_on = gabor_matrix(T, g, [z], on, ha).magnitude[0, 0]
            m_off = gabor_matrix(T, g, [z], off, ha).magnitude[0, 0]
            assert m_off < 1e-3 * m_on

    def test_zero_operator(self, g, ha):
        M = gabor_matrix(identity_kernel(g.grid) * 0.0, g, phase_cloud(-1, 1, 3), phase_cloud(-1, 1, 3), ha)
        assert np.all(M.magnitude == 0)

    def test_samples_iterate(self, g, ha, tmp_path):
        M = gabor_matrix(identity_kernel(g.grid), g, phase_cloud(-1, 1, 2), phase_cloud(-1, 1, 2), ha)
        items = list(M)
        assert len(items) == len(M) == 16 and all(m >= 0 for _, _, m in items)
        lines = open(M.to_csv(tmp_path / "m.csv")).read().splitlines()
        assert lines[0] == "z_x,z_xi,w_x,w_xi,magnitude" and len(lines) == 17


@pytest.fixture(scope="module")
def shear_samples(g, ha):
    T = metaplectic_kernel(SymplecticBlocks(1.0, 1.0, 0.0, 1.0), g.grid, ha)
    return gabor_matrix(T, g, phase_cloud(-2, 2, 9), phase_cloud(-6, 6, 41), ha)


class TestFioDecay:
    def test_matching(self, shear_samples):
        fit = fio_decay_fit(shear_samples, CanonicalMap.shear(1.0))
        assert fit.exponent > 6 and np.all(np.isfinite(fit.seminorms))
        assert max(fit.seminorms) < 10 * fit.seminorms[0]

    def test_mismatched(self, shear_samples):
        fit = fio_decay_fit(shear_samples, CanonicalMap.identity(), s_grid=[0, 1, 2, 3, 4])
        assert np.all(np.diff(fit.seminorms) > 0) and fit.seminorms[-1] / fit.seminorms[0] > 10

    def test_identity_identity(self, g, ha):
        M = gabor_matrix(identity_kernel(g.grid), g, phase_cloud(-2, 2, 5), phase_cloud(-6, 6, 25), ha)
        fit = fio_decay_fit(M, CanonicalMap.identity())
        assert np.all(np.isfinite(fit.seminorms)) and max(fit.seminorms) < 10

    def test_composition_exponent(self, g, ha):
        from pathlab.oracles import classical_flow
        from pathlab.experiments import _HA_ROTATION

        sh = SymplecticBlocks(1.0, 1.0, 0.0, 1.0)
        rot = classical_flow(_HA_ROTATION, 1.0, ha)
        zs, ws = phase_cloud(-2, 2, 7), phase_cloud(-6, 6, 31)
        Ks, Kr = metaplectic_kernel(sh, g.grid, ha), metaplectic_kernel(rot, g.grid, ha)
        cs, cr = CanonicalMap.from_blocks(sh), CanonicalMap.from_blocks(rot)
        e1 = fio_decay_fit(gabor_matrix(Ks, g, zs, ws, ha), cs).exponent
        e2 = fio_decay_fit(gabor_matrix(Kr, g, zs, ws, ha), cr).exponent
        ec = fio_decay_fit(gabor_matrix(Ks @ Kr, g, zs, ws, ha), cs.compose(cr)).exponent
        assert ec >= min(e1, e2) - 0.5

    def test_empty(self):
        from pathlab.tfa import GaborMatrixSamples

        with pytest.raises(InvalidInput):
            fio_decay_fit(GaborMatrixSamples(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros((0, 0))), CanonicalMap.identity())


class TestCanonicalMap:
    def test_builtins_symplectic(self):
        from pathlab.oracles import QuadraticHamiltonian, classical_flow

        maps = [CanonicalMap.identity(), CanonicalMap.shear(2.5),
                CanonicalMap.from_blocks(classical_flow(QuadraticHamiltonian.harmonic(1.0), 0.9))]
        for m in maps:
            assert m.is_symplectic()
        assert not CanonicalMap(((2.0, 0.0), (0.0, 1.0))).is_symplectic()

    def test_compose(self):
        a, b = CanonicalMap.shear(1.0), CanonicalMap.shear(2.0)
        pts = phase_cloud(-1, 1, 3)
        assert np.allclose(a.compose(b)(pts), a(b(pts)))
        assert np.allclose(a.compose(b)(pts), CanonicalMap.shear(3.0)(pts))


def test_hermite_window_normalized(grid, ha, pde):
    for n in range(4):
        assert hermite_window(grid, n, ha).norm() == pytest.approx(1.0, abs=1e-10)
        assert hermite_window(grid, n, pde).norm() == pytest.approx(1.0, abs=1e-10)


def test_grid_mismatch(g, small_grid, ha):
    with pytest.raises(GridMismatch):
        stft(gaussian_window(small_grid, ha), g, (1, 1), ha)
