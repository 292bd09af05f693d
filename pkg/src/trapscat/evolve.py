"""Interacting evolution: Strang splitting around the exact trap propagators.

Two steppers are provided.  The lab-frame `evolve` wraps the exact free
propagator between potential half-phases and is the reference route; it is
limited to speeds whose carrier momentum the grid can hold.  The co-moving
stepper removes the probe's classical motion first, so the grid only ever
resolves the slow envelope while the potential sweeps past; this is the
production route for high-velocity scattering elements.  Both are plain
products of unitaries and preserve the norm to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import grids, propagators
from .backend import cis_mul
from .errors import DomainError, ParameterError
from .gaussian import GaussianState, flow_harmonic
from .model import DecayParams, PotentialSpec


@dataclass(frozen=True)
class EvolveConfig:
    """Stepping controls for the interacting propagator."""

    dt: float = 1e-3
    tol_window: float = 1e-10
    boundary_tol: float = 1e-12
    clamp_scale: float = 1.0  # singular clamp = clamp_scale / dx

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if not 0 < self.tol_window < 1:
            raise ParameterError(f"tol_window must be in (0,1), got {self.tol_window}")

    def clamp_for(self, grid: grids.GridSpec) -> float:
        return self.clamp_scale / grid.dx


def dt_for_speed(speed: float, base: float = 2e-3) -> float:
    """Default step rule: the probe crosses features in time ~ 1/|v|."""
    return base / (1.0 + abs(speed))


def strang_step(wf: grids.WaveFunction, tau: float, dt: float,
                potential: PotentialSpec, params: DecayParams,
                cfg: EvolveConfig | None = None,
                v_grid: np.ndarray | None = None) -> grids.WaveFunction:
    """One step exp(-i dt/2 V) U0(tau+dt, tau) exp(-i dt/2 V)."""
    cfg = cfg or EvolveConfig(dt=dt)
    g = wf.grid
    if v_grid is None:
        axes = [g.axis()] * g.n
        v_grid = potential.evaluate_on_grid(axes, clamp=cfg.clamp_for(g))
    out = wf.copy()
    if not potential.is_zero:
        cis_mul(out.values, v_grid, -0.5 * dt)
    out = propagators.u0_compose(out, tau, tau + dt, params, cfg.boundary_tol)
    if not potential.is_zero:
        cis_mul(out.values, v_grid, -0.5 * dt)
    return out


def evolve(wf: grids.WaveFunction, t0: float, t1: float, cfg: EvolveConfig,
           potential: PotentialSpec, params: DecayParams) -> grids.WaveFunction:
    """Compose Strang steps from t0 to t1, splitting at the plateau edges.

    Interior potential half-phases from consecutive steps are merged; the free
    sub-propagator is the exact U0 over each step, so with V = 0 the result is
    exactly u0_compose.
    """
    if t1 == t0:
        return wf.copy()
    g = wf.grid
    axes = [g.axis()] * g.n
    v_grid = None if potential.is_zero else \
        potential.evaluate_on_grid(axes, clamp=cfg.clamp_for(g))

    r0 = params.r0
    lo, hi = min(t0, t1), max(t0, t1)
    cuts = sorted({lo, hi, *[c for c in (-r0, r0) if lo < c < hi]})
    panels = list(zip(cuts[:-1], cuts[1:]))
    if t1 < t0:
        panels = [(b, a) for a, b in reversed(panels)]

    out = wf
    for a, b in panels:
        nsteps = max(1, math.ceil(abs(b - a) / cfg.dt))
        h = (b - a) / nsteps
        # cache the u0 plan: inside the plateau it only depends on h
        inner = abs(a) <= r0 and abs(b) <= r0
        plan = propagators.plan_mehler(0.0, h, params) if inner else None
        out = out.copy()
        if v_grid is not None:
            cis_mul(out.values, v_grid, -0.5 * h)
        t = a
        for k in range(nsteps):
            step_plan = plan if plan is not None else \
                propagators.plan_u0_compose(t, t + h, params)
            out = propagators.apply_plan(out, step_plan, cfg.boundary_tol)
            t += h
            if v_grid is not None:
                cis_mul(out.values, v_grid, -h if k < nsteps - 1 else -0.5 * h)
    return out


# ---------------------------------------------------------------------------
# interaction window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowResult:
    """Symmetric interaction window [-t_star, t_star]; empty means no contact.

    `capped` marks windows clipped at the plateau edge: the probe cannot fully
    clear the potential inside |t| < r0 (slow probe or wide supports), so the
    truncation tail is larger; the high-velocity limit is unaffected.
    """

    t_star: float
    empty: bool
    probe_radius: float
    support_radius: float
    cap: float
    capped: bool = False


def sweep_center(t: float, center, velocity, params: DecayParams) -> np.ndarray:
    """Classical probe center under the plateau flow: cos(wt) y + sin(wt) v/w."""
    rot = flow_harmonic(t, params.omega)
    x, _ = rot.apply(np.asarray(center, float), np.asarray(velocity, float))
    return x


def interaction_window(probe: GaussianState, potential: PotentialSpec,
                       params: DecayParams, tol: float = 1e-10,
                       margin_stds: float = 8.0,
                       strict: bool = False) -> WindowResult:
    """Smallest symmetric window outside which the probe misses the potential.

    The transported probe center sweeps cos(wt) y + sin(wt) v / w inside the
    plateau; the window edge is the last time either sweep direction comes
    within (probe radius + component support radius) of a component center.
    A window that cannot close inside the plateau is clipped to the plateau
    edge and flagged `capped` (error instead when `strict`, advising a larger
    |v| or smaller supports).
    """
    if potential.is_zero:
        return WindowResult(0.0, True, probe.radius(margin_stds), 0.0, params.r0)
    omega, r0 = params.omega, params.r0
    cap = r0 * (1.0 - 1e-9)
    stds = max(margin_stds, math.sqrt(max(-math.log(tol), 1.0)))

    comps = [(np.asarray(getattr(c, "center", np.zeros(probe.n)), float),
              c.support_radius(tol)) for c in potential.components if c.amplitude != 0]

    ts = np.linspace(0.0, cap, 4097)
    t_star = 0.0
    capped = False
    for sign in (+1.0, -1.0):
        clear_from = None
        for t in ts[::-1]:
            # widths change little inside the plateau; transport them exactly
            rot = flow_harmonic(sign * t, omega)
            moved = probe.apply_map(rot)
            rad = moved.radius(stds)
            x = moved.center
            hit = any(np.linalg.norm(x - c) <= rad + rc for c, rc in comps)
            if hit:
                break
            clear_from = t
        if clear_from is None:
            if strict:
                raise DomainError(
                    "interaction window would exceed the plateau: increase "
                    "|v| or shrink the potential/probe supports")
            clear_from = cap
            capped = True
        t_star = max(t_star, clear_from)
    psup = potential.support_radius(tol)
    if t_star <= ts[1] and not capped:
        # never in contact on either side
        if all(np.linalg.norm(probe.center - c) > probe.radius(stds) + rc
               for c, rc in comps):
            return WindowResult(0.0, True, probe.radius(stds), psup, cap)
    return WindowResult(float(t_star), False, probe.radius(stds), psup, cap,
                        capped=capped)


# ---------------------------------------------------------------------------
# co-moving-frame stepper
# ---------------------------------------------------------------------------

def evolve_window_comoving(chi: grids.WaveFunction, t0: float, t1: float,
                           dt: float, potential: PotentialSpec,
                           params: DecayParams, center, velocity,
                           boundary_tol: float = 1e-12,
                           clamp: float | None = None,
                           check_every: int = 25) -> grids.WaveFunction:
    """Evolve the envelope chi(u) in the frame riding the classical trajectory.

    In that frame the trap plateau acts unchanged on u while the potential
    sweeps through as V(u + x_c(t)); the carrier momentum never appears, so a
    modest grid resolves the whole collision at any probe speed.  The window
    must lie inside the plateau.
    """
    r0, omega = params.r0, params.omega
    if max(abs(t0), abs(t1)) > r0:
        raise DomainError(f"co-moving window must lie inside |t| <= r0 = {r0}")
    g = chi.grid
    if clamp is None:
        clamp = 1.0 / g.dx
    ax = g.axis()
    axes = [ax] * g.n
    nsteps = max(1, math.ceil(abs(t1 - t0) / dt))
    h = (t1 - t0) / nsteps

    # per-axis diagonal factors; boundary/normalization phases of the unitary
    # FFT cancel against the inverse, so raw transforms suffice here
    kin_ax = np.exp((-0.5j * h) * g.momentum_axis() ** 2)
    harm_full_ax = np.exp((-0.5j * h * omega ** 2) * ax ** 2)
    harm_half_ax = np.exp((-0.25j * h * omega ** 2) * ax ** 2)
    has_v = not potential.is_zero
    y = np.asarray(center, float)
    v = np.asarray(velocity, float)

    def vx(t):
        return potential.evaluate_on_grid(axes, shift=sweep_center(t, y, v, params),
                                          clamp=clamp)

    def mul_axis(valarr, axvec):
        for d in range(g.n):
            valarr *= grids._axis_view(axvec, d, g.n)

    vals = chi.values.copy()
    mul_axis(vals, harm_half_ax)
    if has_v:
        cis_mul(vals, vx(t0), -0.5 * h)
    t = t0
    for k in range(nsteps):
        work = np.fft.fftn(vals)
        mul_axis(work, kin_ax)
        vals = np.fft.ifftn(work)
        t += h
        last = k == nsteps - 1
        mul_axis(vals, harm_half_ax if last else harm_full_ax)
        if has_v:
            cis_mul(vals, vx(t), -0.5 * h if last else -h)
        if (k + 1) % check_every == 0 or last:
            grids.check_boundary(grids.WaveFunction(g, vals), tol=boundary_tol,
                                 context="co-moving window")
    return grids.WaveFunction(g, vals, grids.POSITION)
