import cmath
import math

import numpy as np
import pytest

import trapscat as ts
from trapscat.errors import DomainError, GridOverflowError, UsageError
from trapscat.grids import mass_near_boundary, mass_outside_box

from conftest import l2_diff, random_packet


class TestGridSpec:
    def test_spacing_identity(self, grid2):
        assert grid2.dx * grid2.dp * grid2.points == pytest.approx(2 * math.pi, rel=1e-12)

    def test_validation(self):
        with pytest.raises(DomainError):
            ts.GridSpec(points=7)
        with pytest.raises(DomainError):
            ts.GridSpec(points=9)
        with pytest.raises(DomainError):
            ts.GridSpec(half_width=-1.0)


class TestFourier:
    def test_gaussian_self_transform(self, grid1):
        x = grid1.axis()
        psi = ts.WaveFunction(grid1, np.exp(-x ** 2 / 2) / math.pi ** 0.25)
        hat = ts.fft_forward(psi)
        xi = grid1.momentum_axis()
        want = np.exp(-xi ** 2 / 2) / math.pi ** 0.25
        assert np.max(np.abs(hat.values - want)) <= 1e-8

    def test_unitarity_random(self, grid2):
        rng = np.random.default_rng(0)
        wf = random_packet(grid2, rng)
        hat = ts.fft_forward(wf)
        assert abs(hat.norm() - wf.norm()) <= 1e-12

    def test_roundtrip(self, grid2):
        rng = np.random.default_rng(1)
        wf = random_packet(grid2, rng)
        back = ts.fft_inverse(ts.fft_forward(wf))
        assert l2_diff(back, wf) <= 1e-12

    def test_space_tag_enforced(self, grid1):
        wf = ts.WaveFunction(grid1, np.ones(grid1.shape))
        with pytest.raises(UsageError):
            ts.fft_inverse(wf)
        hat = ts.fft_forward(wf)
        with pytest.raises(UsageError):
            ts.fft_forward(hat)


class TestInnerProduct:
    def test_norm_is_self_inner(self, grid2):
        rng = np.random.default_rng(2)
        wf = random_packet(grid2, rng)
        val = ts.inner_product(wf, wf)
        assert val.imag == pytest.approx(0.0, abs=1e-14)
        assert val.real >= 0
        assert val.real == pytest.approx(wf.norm_sq(), rel=1e-12)

    def test_orthogonal_modes(self, grid1):
        x = grid1.axis()
        k = 2 * math.pi / grid1.half_width
        s = ts.WaveFunction(grid1, np.sin(k * x).astype(complex))
        c = ts.WaveFunction(grid1, np.cos(k * x).astype(complex))
        assert abs(ts.inner_product(s, c)) <= 1e-12

    def test_parseval(self, grid2):
        rng = np.random.default_rng(3)
        a = random_packet(grid2, rng)
        b = random_packet(grid2, rng)
        direct = ts.inner_product(a, b)
        spectral = ts.inner_product(ts.fft_forward(a), ts.fft_forward(b))
        assert abs(direct - spectral) <= 1e-10

    def test_conjugate_linear_first(self, grid1):
        x = grid1.axis()
        a = ts.WaveFunction(grid1, np.exp(-x ** 2).astype(complex))
        b = ts.WaveFunction(grid1, (1j * np.exp(-x ** 2)).astype(complex))
        # (a, i a) = +i |a|^2: linear in the second argument
        assert ts.inner_product(a, b).imag > 0


class TestQuadraticPhase:
    def test_zero_is_identity(self, grid2):
        rng = np.random.default_rng(4)
        wf = random_packet(grid2, rng)
        assert l2_diff(ts.quadratic_phase(wf, 0.0), wf) == 0.0

    def test_pure_phase(self, grid2):
        rng = np.random.default_rng(5)
        wf = random_packet(grid2, rng)
        out = ts.quadratic_phase(wf, 0.37)
        np.testing.assert_allclose(np.abs(out.values), np.abs(wf.values),
                                   rtol=0, atol=1e-15)

    def test_inverse(self, grid2):
        rng = np.random.default_rng(6)
        wf = random_packet(grid2, rng)
        back = ts.quadratic_phase(ts.quadratic_phase(wf, 0.9), -0.9)
        assert np.max(np.abs(back.values - wf.values)) <= 1e-15


class TestLinearPhase:
    def test_zero_identity(self, grid2):
        rng = np.random.default_rng(7)
        wf = random_packet(grid2, rng)
        assert l2_diff(ts.linear_phase(wf, (0.0, 0.0)), wf) == 0.0

    def test_momentum_shift(self, grid1):
        g = ts.GaussianState.envelope(1.0, n=1)
        wf = ts.sample_to_grid(g, ts.GridSpec(1, 256, 12.0))
        v = 3.1
        hat = ts.fft_forward(ts.linear_phase(wf, v))
        xi = wf.grid.momentum_axis()
        peak = xi[np.argmax(np.abs(hat.values))]
        assert abs(peak - v) <= wf.grid.dp

    def test_norm_preserved(self, grid2):
        rng = np.random.default_rng(8)
        wf = random_packet(grid2, rng)
        assert abs(ts.linear_phase(wf, (2.0, -1.0)).norm() - wf.norm()) <= 1e-13


class TestFreeFlow:
    def test_zero_identity(self, grid2):
        rng = np.random.default_rng(9)
        wf = random_packet(grid2, rng)
        assert l2_diff(ts.free_flow(wf, 0.0), wf) == 0.0

    def test_gaussian_spreading(self):
        grid = ts.GridSpec(1, 256, 12.0)
        g = ts.GaussianState.envelope(1.0, n=1)
        wf = ts.sample_to_grid(g, grid)
        out = ts.free_flow(wf, 1.0)
        x = grid.axis()
        dens = np.abs(out.values) ** 2 * grid.dx
        second = float(np.sum(x ** 2 * dens))
        # <x^2> = (1 + tau^2)/2 for the unit-width packet
        assert second == pytest.approx(0.5 * (1 + 1.0 ** 2), abs=1e-6)

    def test_group_law(self, grid2):
        rng = np.random.default_rng(10)
        wf = random_packet(grid2, rng)
        one = ts.free_flow(wf, 0.7)
        two = ts.free_flow(ts.free_flow(wf, 0.3), 0.4)
        assert l2_diff(one, two) <= 1e-12


class TestDilation:
    def test_zero_identity(self, grid2):
        rng = np.random.default_rng(11)
        wf = random_packet(grid2, rng)
        assert l2_diff(ts.dilation(wf, 0.0), wf) == 0.0

    def test_unitarity_on_gaussian(self):
        grid = ts.GridSpec(1, 256, 12.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(1.0, n=1), grid)
        out = ts.dilation(wf, 0.3)
        assert abs(out.norm() - 1.0) <= 1e-9

    def test_group_law(self):
        grid = ts.GridSpec(1, 256, 12.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(1.0, n=1), grid)
        one = ts.dilation(wf, 0.3)
        two = ts.dilation(ts.dilation(wf, 0.17), 0.13)
        assert l2_diff(one, two) <= 1e-8

    def test_against_brute_force_interpolant(self):
        # exact band-limited evaluation oracle, O(N^2)
        grid = ts.GridSpec(1, 128, 10.0)
        rng = np.random.default_rng(12)
        wf = random_packet(grid, rng, max_center=1.0, max_p=2.0)
        theta = 0.21
        out = ts.dilation(wf, theta)
        s = math.exp(-theta)
        N = grid.points
        C = np.fft.fft(wf.values)
        k = np.fft.fftfreq(N) * N
        xik = 2 * math.pi * k / (N * grid.dx)
        y = s * grid.axis()
        brute = np.zeros(N, dtype=complex)
        for j in range(N):
            brute[j] = np.sum(C * np.exp(1j * xik * (y[j] + grid.half_width))) / N
        brute *= math.exp(-theta / 2)
        assert np.max(np.abs(out.values - brute)) <= 1e-9

    def test_overflow_guard(self):
        grid = ts.GridSpec(1, 128, 6.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(0.9, center=4.0, n=1),
                               grid, fit_widths=2.0)
        with pytest.raises(GridOverflowError):
            ts.dilation(wf, -0.8)


class TestTranslate:
    def test_zero_identity(self, grid2):
        rng = np.random.default_rng(13)
        wf = random_packet(grid2, rng)
        assert l2_diff(ts.translate(wf, (0.0, 0.0)), wf) == 0.0

    def test_double_shift_composes(self, grid2):
        rng = np.random.default_rng(14)
        wf = random_packet(grid2, rng, max_center=1.0)
        one = ts.translate(wf, (1.0, -0.5))
        two = ts.translate(ts.translate(wf, (0.4, -0.2)), (0.6, -0.3))
        assert l2_diff(one, two) <= 1e-11

    def test_centroid_moves(self):
        grid = ts.GridSpec(2, 128, 10.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(1.0, n=2), grid)
        a = np.array([1.25, -0.75])
        out = ts.translate(wf, a)
        dens = np.abs(out.values) ** 2 * grid.dx ** 2
        ax = grid.axis()
        cx = float(np.sum(ax[:, None] * dens))
        cy = float(np.sum(ax[None, :] * dens))
        assert abs(cx - a[0]) <= 1e-8
        assert abs(cy - a[1]) <= 1e-8

    def test_overflow_guard(self):
        grid = ts.GridSpec(1, 128, 6.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(1.0, n=1), grid)
        with pytest.raises(GridOverflowError):
            ts.translate(wf, 5.5)


class TestMehlerDecompositionOracle:
    """free_flow must equal M(tau) D(tau) F M(tau), evaluated exactly.

    The middle pair D(tau) F is the scaled Fourier transform
    (i tau)^(-1/2) phi_hat(x / tau); applying it after the chirp M(tau)
    demands a grid resolving frequencies up to L/tau, so the oracle sums the
    kernel quadrature directly at that resolution (O(N^2), n = 1).
    """

    @pytest.mark.parametrize("tau", [0.1, 1.0])
    def test_free_flow_factorization(self, tau):
        grid = ts.GridSpec(1, 2048, 12.0)
        g = ts.GaussianState.envelope(1.0, momentum=1.0, n=1)
        wf = ts.sample_to_grid(g, grid)
        direct = ts.free_flow(wf, tau)

        x = grid.axis()
        chirped = np.exp(1j * x ** 2 / (2 * tau)) * wf.values      # M(tau)
        kernel = np.exp(-1j * np.outer(x / tau, x))                 # D F core
        vals = kernel @ chirped * grid.dx / math.sqrt(2 * math.pi)
        vals *= cmath.exp(-1j * math.pi / 4) / math.sqrt(tau)       # (i tau)^(-1/2)
        vals *= np.exp(1j * x ** 2 / (2 * tau))                     # M(tau)
        oracle = ts.WaveFunction(grid, vals)
        assert l2_diff(oracle, direct) <= 1e-8


class TestInvariants:
    def test_norm_preservation_sweep(self, grid2):
        rng = np.random.default_rng(15)
        ops = [lambda w: ts.quadratic_phase(w, 0.8),
               lambda w: ts.linear_phase(w, (1.0, -2.0)),
               lambda w: ts.free_flow(w, 0.45),
               lambda w: ts.dilation(w, 0.2),
               lambda w: ts.translate(w, (0.5, 0.25))]
        for _ in range(10):
            wf = random_packet(grid2, rng, max_center=1.0, max_p=3.0)
            for op in ops:
                assert abs(op(wf).norm() - 1.0) <= 1e-9

    def test_global_phase_commutes(self, grid2):
        rng = np.random.default_rng(16)
        wf = random_packet(grid2, rng)
        phase = cmath.exp(0.7j)
        rotated = ts.WaveFunction(grid2, phase * wf.values)
        for op in (lambda w: ts.free_flow(w, 0.3),
                   lambda w: ts.dilation(w, 0.15),
                   lambda w: ts.quadratic_phase(w, 0.5)):
            a = op(rotated)
            b = ts.WaveFunction(grid2, phase * op(wf).values)
            assert l2_diff(a, b) <= 1e-13

    def test_boundary_monitor(self):
        grid = ts.GridSpec(1, 128, 6.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(1.0, center=5.0, n=1),
                               grid, fit_widths=1.0)
        assert mass_near_boundary(wf) > 1e-6
        with pytest.raises(GridOverflowError):
            ts.grids.check_boundary(wf, tol=1e-12)

    def test_mass_outside_box(self):
        grid = ts.GridSpec(1, 256, 12.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(1.0, n=1), grid)
        assert mass_outside_box(wf, 11.0) <= 1e-12
        assert mass_outside_box(wf, 0.5) > 0.3
