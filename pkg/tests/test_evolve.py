import math

import numpy as np
import pytest

import trapscat as ts
from trapscat.evolve import evolve_window_comoving, sweep_center

from conftest import l2_diff, random_packet


def bump(amp=0.3, center=(0.0, 0.0), width=1.0):
    return ts.PotentialSpec([ts.GaussianBump(amp, center, width)])


class TestStrangStep:
    def test_zero_potential_is_exact_u0(self, grid2, params):
        rng = np.random.default_rng(0)
        wf = random_packet(grid2, rng)
        a = ts.strang_step(wf, 0.1, 1e-3, ts.PotentialSpec([]), params)
        b = ts.u0_compose(wf, 0.1, 0.1 + 1e-3, params)
        assert np.array_equal(a.values, b.values)

    def test_norm_preserved(self, grid2, params):
        rng = np.random.default_rng(1)
        wf = random_packet(grid2, rng)
        out = ts.strang_step(wf, 0.0, 1e-3, bump(), params)
        assert abs(out.norm() - wf.norm()) <= 1e-12

    def test_dt_halving_second_order(self, params):
        """Richardson self-oracle: error(dt)/error(dt/2) ~ 4."""
        grid = ts.GridSpec(2, 128, 12.0)
        g = ts.GaussianState.envelope(1.0, center=(-1.5, 0.0), momentum=(4.0, 0.0))
        wf = ts.sample_to_grid(g, grid)
        pot = bump(amp=0.5)
        t0, t1 = -0.3, 0.3

        def run(dt):
            return ts.evolve(wf, t0, t1, ts.EvolveConfig(dt=dt), pot, params)

        ref = run(0.4e-3)
        err1 = l2_diff(run(3.2e-3), ref)
        err2 = l2_diff(run(1.6e-3), ref)
        assert 3.0 <= err1 / err2 <= 5.0


class TestEvolve:
    def test_identity_interval(self, grid2, params):
        rng = np.random.default_rng(2)
        wf = random_packet(grid2, rng)
        out = ts.evolve(wf, 0.2, 0.2, ts.EvolveConfig(dt=1e-3), bump(), params)
        assert l2_diff(out, wf) == 0.0

    def test_reversal(self, params):
        grid = ts.GridSpec(2, 128, 12.0)
        wf = ts.sample_to_grid(ts.GaussianState.envelope(1.0, momentum=(2.0, 0.0)),
                               grid)
        cfg = ts.EvolveConfig(dt=1e-3)
        fwd = ts.evolve(wf, -0.2, 0.4, cfg, bump(), params)
        back = ts.evolve(fwd, 0.4, -0.2, cfg, bump(), params)
        assert l2_diff(back, wf) <= 1e-8

    def test_matches_refined_reference(self, params):
        grid = ts.GridSpec(2, 128, 12.0)
        g = ts.GaussianState.envelope(1.0, center=(-1.0, 0.3), momentum=(4.0, 0.0))
        wf = ts.sample_to_grid(g, grid)
        pot = bump(amp=0.5)
        cfg = ts.EvolveConfig(dt=1e-3)
        ref = ts.evolve(wf, -0.25, 0.25, ts.EvolveConfig(dt=1e-3 / 8), pot, params)
        out = ts.evolve(wf, -0.25, 0.25, cfg, pot, params)
        assert l2_diff(out, ref) <= 1e-5

    def test_zero_potential_equals_u0_compose_across_regions(self, params):
        grid = ts.GridSpec(2, 320, 20.0)
        rng = np.random.default_rng(3)
        wf = random_packet(grid, rng, max_center=0.5, max_p=0.8,
                           width_range=(1.0, 1.4))
        cfg = ts.EvolveConfig(dt=2e-2)
        a = ts.evolve(wf, -0.5, 2.5, cfg, ts.PotentialSpec([]), params)
        b = ts.u0_compose(wf, -0.5, 2.5, params)
        assert l2_diff(a, b) <= 1e-10

    def test_unitarity_any_dt(self, grid2, params):
        rng = np.random.default_rng(4)
        wf = random_packet(grid2, rng)
        for dt in (5e-3, 1e-3):
            out = ts.evolve(wf, -0.2, 0.3, ts.EvolveConfig(dt=dt), bump(), params)
            assert abs(out.norm() - 1.0) <= 1e-10


class TestInteractionWindow:
    def probe(self, speed, width=1.0, center=(0.0, 0.0)):
        return ts.build_probe(ts.ProbeSpec(width=width, center=center,
                                           velocity=(speed, 0.0)))

    def test_reference_geometry(self, params):
        # probe radius 8 (w=1) plus bump support: t* must be at least the
        # closed-form asin(10/32) sweep time and comfortably inside the plateau
        win = ts.interaction_window(self.probe(32.0), bump(amp=0.5), params)
        assert not win.empty and not win.capped
        assert win.t_star >= math.asin(10.0 / 32.0)
        assert win.t_star <= math.asin(18.0 / 32.0)
        assert win.t_star < params.r0

    def test_empty_window_far_potential(self, params):
        pot = bump(amp=0.5, center=(0.0, 60.0))
        win = ts.interaction_window(self.probe(32.0), pot, params)
        assert win.empty

    def test_speed_halving_scaling(self, params):
        pot = bump(amp=0.5)
        t32 = ts.interaction_window(self.probe(32.0), pot, params).t_star
        t64 = ts.interaction_window(self.probe(64.0), pot, params).t_star
        assert abs(t64 / t32 - 0.5) <= 0.2 * 0.5

    def test_slow_probe_caps_at_plateau(self, params):
        win = ts.interaction_window(self.probe(8.0), bump(amp=0.5), params)
        assert win.capped
        assert win.t_star == pytest.approx(params.r0, rel=1e-6)

    def test_strict_mode_raises(self, params):
        with pytest.raises(ts.DomainError):
            ts.interaction_window(self.probe(8.0), bump(amp=0.5), params,
                                  strict=True)

    def test_window_edge_mass_below_tolerance(self, params):
        """V-weighted probe mass at +-t* is below tol x its window maximum."""
        pot = bump(amp=0.5)
        for speed in (16.0, 32.0):
            probe = self.probe(speed)
            win = ts.interaction_window(probe, pot, params, tol=1e-10)
            vals = []
            for t in np.linspace(-win.t_star, win.t_star, 201):
                moved = probe.apply_map(ts.flow_harmonic(t, params.omega))
                # integral |V| |psi|^2 of two isotropic Gaussians, closed form
                d2 = float(np.sum(moved.center ** 2))
                wv2 = 1.0  # bump width^2
                wp2 = moved.width() ** 2
                s2 = wv2 + wp2
                vals.append(0.5 * (wv2 / s2) * math.exp(-d2 / s2))
            edge = max(vals[0], vals[-1])
            assert edge <= 1e-10 * max(vals)


class TestComovingWindow:
    def test_sweep_center_formula(self, params):
        y = np.array([0.3, -0.2])
        v = np.array([24.0, 7.0])
        t = 0.31
        got = sweep_center(t, y, v, params)
        want = math.cos(t) * y + math.sin(t) * v / params.omega
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_free_run_is_plateau_rotation(self, params):
        grid = ts.GridSpec(2, 128, 8.0)
        chi = ts.sample_to_grid(ts.GaussianState.envelope(0.8, n=2), grid)
        out = evolve_window_comoving(chi, -0.3, 0.3, 1e-3, ts.PotentialSpec([]),
                                     params, (0.0, 0.0), (32.0, 0.0))
        ref = ts.mehler_evolve(chi, -0.3, 0.3, params)
        assert l2_diff(out, ref) <= 1e-5
        assert abs(out.norm() - 1.0) <= 1e-12

    def test_outside_plateau_rejected(self, params):
        grid = ts.GridSpec(2, 64, 8.0)
        chi = ts.sample_to_grid(ts.GaussianState.envelope(0.8, n=2), grid)
        with pytest.raises(ts.DomainError):
            evolve_window_comoving(chi, -1.5, 1.5, 1e-3, ts.PotentialSpec([]),
                                   params, (0.0, 0.0), (32.0, 0.0))

    def test_lab_and_comoving_elements_agree(self, params):
        """The two routes compute the same operator in different frames."""
        pot = bump(amp=0.3, width=0.7)
        spec = ts.ProbeSpec(width=0.6, center=(0.0, 0.4), velocity=(12.0, 0.0))
        cfg = ts.EvolveConfig(dt=1e-3)
        lab_grid = ts.GridSpec(2, 448, 20.0)
        frame_grid = ts.GridSpec(2, 192, 10.0)
        a = ts.s_tilde_element(spec, pot, params, cfg=cfg, grid=frame_grid,
                               method="comoving")
        b = ts.s_tilde_element(spec, pot, params, cfg=cfg, grid=lab_grid,
                               method="lab-grid")
        assert a.t_star == b.t_star
        assert not a.window_empty
        assert abs(a.value - b.value) <= 1e-5 * abs(a.value)
