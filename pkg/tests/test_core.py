import numpy as np
import pytest

from pathlab import (
    Convention,
    Field,
    Grid,
    GridMismatch,
    InvalidInput,
    KernelMatrix,
    PhysicsConfig,
    bessel_multiplier,
    field_norm,
    fourier,
    free_kernel,
    free_propagate,
    identity_kernel,
    kernel_compose,
    kernel_from_operator,
    operator_norm,
)
from pathlab.core import diagonal_kernel, resolved_basis, spectral_derivative


def gaussian(grid, x0=0.0, xi0=0.0, w=1.0):
    x = grid.points
    return Field(grid, np.exp(-((x - x0) / w) ** 2 / 2 + 1j * xi0 * x))


class TestTypes:
    def test_grid_spacing(self, grid):
        assert grid.spacing == pytest.approx(1 / 32)
        assert grid.points[0] == -16.0 and grid.points.size == 1024

    @pytest.mark.parametrize("args", [(1, 0.0, 1.0), (16, 1.0, 1.0), (16, 2.0, 1.0), (16, 0.0, np.inf)])
    def test_grid_rejects(self, args):
        with pytest.raises(InvalidInput):
            Grid(*args)

    @pytest.mark.parametrize("hbar", [0.0, -0.1, 1.5])
    def test_hbar_range(self, hbar):
        with pytest.raises(InvalidInput):
            PhysicsConfig(hbar)

    def test_field_rejects_bad_samples(self, small_grid):
        with pytest.raises(InvalidInput):
            Field(small_grid, np.zeros(3))
        s = np.zeros(small_grid.n_points)
        s[4] = np.nan
        with pytest.raises(InvalidInput):
            Field(small_grid, s)

    def test_dual_grid_consistent(self, grid):
        for conv in Convention:
            d = grid.dual(conv)
            assert d.spacing == pytest.approx(grid.dual_spacing(conv))
            assert conv.phase_scale * grid.spacing * d.spacing * grid.n_points == pytest.approx(2 * np.pi)


class TestFourier:
    def test_inversion(self, grid, pde):
        f = gaussian(grid, 1.0, 2.0)
        back = fourier(fourier(f, pde), pde, "inverse")
        assert np.max(np.abs(back.samples - f.samples)) < 1e-12

    def test_ha_gaussian_is_fixed(self, grid, ha):
        f = Field(grid, np.exp(-np.pi * grid.points**2))
        F = fourier(f, ha)
        expect = np.exp(-np.pi * F.grid.points**2)
        assert np.max(np.abs(F.samples - expect)) < 1e-8

    def test_pde_gaussian(self, grid, pde):
        F = fourier(gaussian(grid), pde)
        assert np.max(np.abs(F.samples - np.exp(-F.grid.points**2 / 2))) < 1e-8

    def test_zero(self, grid, pde):
        F = fourier(Field.zeros(grid), pde)
        assert np.all(F.samples == 0)

    def test_unknown_direction(self, grid):
        with pytest.raises(InvalidInput):
            fourier(gaussian(grid), direction="sideways")

    def test_rejects_wrong_output_grid(self, grid):
        with pytest.raises(GridMismatch):
            fourier(gaussian(grid), grid=grid)


class TestBessel:
    def test_order_zero(self, grid, pde):
        f = gaussian(grid, 0.5, 1.0)
        assert np.max(np.abs(bessel_multiplier(f, 0.0, pde).samples - f.samples)) < 1e-13

    def test_inverse_pair(self, grid, pde):
        f = gaussian(grid, 0.5, 1.0)
        g = bessel_multiplier(bessel_multiplier(f, 1.5, pde), -1.5, pde)
        assert (g - f).norm() / f.norm() < 1e-10

    def test_order_two_is_one_minus_laplacian(self, grid, pde):
        f = gaussian(grid)
        expect = f.samples - spectral_derivative(f, 2).samples
        assert np.max(np.abs(bessel_multiplier(f, 2.0, pde).samples - expect)) < 1e-8
        analytic = (2 - grid.points**2) * np.exp(-grid.points**2 / 2)
        assert np.max(np.abs(bessel_multiplier(f, 2.0, pde).samples - analytic)) < 1e-8

    def test_ha_scaling(self, grid, ha):
        # under HA the symbol is (1 + 4 pi^2 hbar xi^2)^{k/2}; e^{-pi x^2} is an eigen-Gaussian test
        f = Field(grid, np.exp(-np.pi * grid.points**2))
        g = bessel_multiplier(f, 2.0, ha)
        lap = (4 * np.pi**2 * grid.points**2 - 2 * np.pi) * np.exp(-np.pi * grid.points**2)
        assert np.max(np.abs(g.samples - (f.samples - lap))) < 1e-8


class TestNorms:
    def test_unit_gaussian(self, grid):
        assert field_norm(gaussian(grid).normalized(), 2) == pytest.approx(1.0, abs=1e-10)

    def test_sup(self, grid):
        x = grid.points
        bump = 0.7 * 0.5 * (np.tanh(4 * (x + 1)) - np.tanh(4 * (x - 1)))
        assert field_norm(Field(grid, bump), np.inf) == pytest.approx(np.max(np.abs(bump)))

    def test_l1_gaussian(self, grid):
        f = Field(grid, np.exp(-np.pi * grid.points**2))
        assert field_norm(f, 1) == pytest.approx(1.0, abs=1e-8)

    def test_rejects_p(self, grid):
        with pytest.raises(InvalidInput):
            field_norm(gaussian(grid), 0.5)


class TestKernels:
    def test_identity_is_neutral(self, small_grid, rng):
        n = small_grid.n_points
        K = KernelMatrix(small_grid, rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        assert np.array_equal(kernel_compose(K, identity_kernel(small_grid)).entries, K.entries)

    def test_free_group_law(self, grid, pde):
        K = kernel_compose(free_kernel(0.3, grid, pde), free_kernel(0.5, grid, pde))
        ref = free_kernel(0.8, grid, pde)
        assert operator_norm(K - ref) / operator_norm(ref) < 1e-6

    def test_associativity(self, small_grid, rng):
        n = small_grid.n_points
        ks = [KernelMatrix(small_grid, rng.standard_normal((n, n)) / n) for _ in range(3)]
        left = (ks[0] @ ks[1]) @ ks[2]
        right = ks[0] @ (ks[1] @ ks[2])
        assert np.max(np.abs(left.entries - right.entries)) <= 1e-12 * np.max(np.abs(left.entries))

    def test_compose_grid_mismatch(self, small_grid, grid):
        with pytest.raises(GridMismatch):
            kernel_compose(identity_kernel(small_grid), identity_kernel(grid))

    def test_identity_norm(self, grid):
        assert operator_norm(identity_kernel(grid)) == pytest.approx(1.0, abs=1e-10)

    def test_free_unitary(self, grid, pde):
        assert operator_norm(free_kernel(1.0, grid, pde)) == pytest.approx(1.0, abs=1e-3)

    def test_homogeneity(self, grid, pde):
        K = free_kernel(0.4, grid, pde)
        assert operator_norm(K * 2) == pytest.approx(2 * operator_norm(K), rel=1e-12)

    def test_restricted_norm(self, grid, pde):
        basis = resolved_basis(grid, 1.0)
        assert operator_norm(free_kernel(0.4, grid, pde), basis) == pytest.approx(1.0, abs=1e-8)


class TestKernelFromOperator:
    def test_identity(self, small_grid):
        K = kernel_from_operator(lambda f: f, small_grid)
        assert np.array_equal(K.entries, identity_kernel(small_grid).entries)

    def test_free(self, grid, pde):
        K = kernel_from_operator(lambda f: free_propagate(f, 0.6, pde), grid)
        assert np.max(np.abs(K.entries - free_kernel(0.6, grid, pde).entries)) < 1e-8

    def test_multiplication(self, small_grid):
        V = np.cos(small_grid.points)
        K = kernel_from_operator(lambda f: Field(small_grid, V * f.samples), small_grid)
        assert np.max(np.abs(K.entries - diagonal_kernel(V, small_grid).entries)) < 1e-12

    def test_application_reproduces(self, grid, pde):
        K = kernel_from_operator(lambda f: free_propagate(f, 0.6, pde), grid)
        f = gaussian(grid, 1.0, 1.0)
        assert np.max(np.abs(K.apply(f).samples - free_propagate(f, 0.6, pde).samples)) < 1e-10

    def test_non_finite(self, small_grid):
        with pytest.raises(InvalidInput), np.errstate(divide="ignore", invalid="ignore"):
            kernel_from_operator(lambda f: Field(small_grid, f.samples / 0.0), small_grid)
