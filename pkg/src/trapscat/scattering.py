"""Scattering elements at high probe velocity and the sinogram scan.

The reported quantity per (direction, offset, speed) sample is the truncated
scattering matrix element

    element = i ( Psi_out, (U - U0)(t*, -t*) Phi_in )

with the pairing conjugate-linear in its second slot (the convention the
limit formula is stated in), Phi_in/Psi_out the probes transported to the
window edges by the exact plateau flow, U the interacting and U0 the free
window propagator.  With V = 0 both evolutions coincide and the element is
exactly zero; for V != 0 the |v|-scaled real part converges to the envelope-
smeared X-ray transform of V along the probe line at the O(1/|v|) rate, which
is what the inversion consumes.

Numerically the window evolution runs in the frame riding the classical probe
trajectory (see evolve.evolve_window_comoving), so the grid holds only the
envelope and the element cost is speed-independent.  A lab-frame route exists
for cross-validation at small speeds.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import grids, propagators
from .errors import ParameterError, ScanHoleError, TrapscatError
from .evolve import (EvolveConfig, WindowResult, dt_for_speed, evolve,
                     evolve_window_comoving, interaction_window)
from .gaussian import GaussianState, overlap, sample_to_grid
from .model import DecayParams, PotentialSpec


@dataclass(frozen=True)
class ProbeSpec:
    """Gaussian probe: envelope width, impact-offset center y, boost velocity v."""

    width: float
    center: tuple = (0.0, 0.0)
    velocity: tuple = (32.0, 0.0)

    def __post_init__(self):
        if self.width <= 0:
            raise ParameterError(f"width must be > 0, got {self.width}")
        if self.speed == 0:
            raise ParameterError("probe velocity must be nonzero")

    @property
    def n(self) -> int:
        return len(self.velocity)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    @property
    def direction(self) -> np.ndarray:
        return np.asarray(self.velocity, float) / self.speed

    @property
    def fourier_radius(self) -> float:
        """Effective momentum support radius (8 sigma), recorded in metadata."""
        return 8.0 / self.width


def build_probe(spec: ProbeSpec) -> GaussianState:
    """Phi_v = e^(i v.x) Phi_0(. - y), normalized."""
    env = GaussianState.envelope(spec.width, center=spec.center,
                                 momentum=0.0, n=spec.n)
    return env.apply_linear(spec.velocity)


def dressed_states(spec: ProbeSpec, params: DecayParams,
                   t_star: float) -> tuple[GaussianState, GaussianState]:
    """Probes carried to the window edges by the exact plateau flow.

    Phi_in = U0(-t*, 0) Phi_v arrives at the incoming edge with centroid
    -sin(w t*) v / w + cos(w t*) y; Psi_out = U0(t*, 0) Psi_v is the outgoing
    partner.  Both stay exactly Gaussian, so no grid is involved.
    """
    probe = build_probe(spec)
    g_in = propagators.apply_plan_gaussian(
        probe, propagators.plan_mehler(0.0, -t_star, params))
    g_out = propagators.apply_plan_gaussian(
        probe, propagators.plan_mehler(0.0, +t_star, params))
    return g_in, g_out


@dataclass
class ElementResult:
    """One scattering sample; `value` is the complex truncated element."""

    value: complex
    speed: float
    t_star: float
    window_empty: bool
    value_naive: complex | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def scaled(self) -> complex:
        return self.speed * self.value

    @property
    def reported(self) -> float:
        """Real part of the |v|-scaled element: the X-ray data point."""
        return (self.speed * self.value).real

    @property
    def quality(self) -> float:
        """|v| x imaginary residual; vanishes in the high-velocity limit."""
        return abs((self.speed * self.value).imag)


def _frame_envelope(spec: ProbeSpec) -> GaussianState:
    """The probe as seen from its own classical frame: centered, at rest.

    Carries the constant phase v.y from the boost so that frame inner
    products reproduce lab ones exactly.
    """
    env = GaussianState.envelope(spec.width, center=0.0, momentum=0.0, n=spec.n)
    vy = float(np.asarray(spec.velocity, float) @ np.asarray(spec.center, float))
    return replace(env, log_amp=env.log_amp + vy)


def s_tilde_element(spec: ProbeSpec, potential: PotentialSpec,
                    params: DecayParams, cfg: EvolveConfig | None = None,
                    grid: grids.GridSpec | None = None,
                    method: str = "comoving",
                    compute_naive: bool = False) -> ElementResult:
    """Truncated scattering element for one probe against one potential.

    The window edge is rounded up to a multiple of r0/64 (a larger window only
    shrinks the truncation tail), which lets scan samples with equal windows
    share the free reference run.
    """
    if method not in ("comoving", "lab-grid"):
        raise ParameterError(f"unknown method {method!r}")
    cfg = cfg or EvolveConfig(dt=dt_for_speed(spec.speed))
    grid = grid or grids.GridSpec(n=spec.n, points=256, half_width=12.0)

    probe = build_probe(spec)
    if potential.is_zero:
        return ElementResult(0.0 + 0.0j, spec.speed, 0.0, True,
                             value_naive=0.0j if compute_naive else None,
                             diagnostics={"reason": "V = 0"})
    window = interaction_window(probe, potential, params, tol=cfg.tol_window)
    if window.empty:
        naive = None
        if compute_naive:
            naive = 0.0j  # U = U0 exactly when the probe never meets V
        return ElementResult(0.0 + 0.0j, spec.speed, 0.0, True,
                             value_naive=naive,
                             diagnostics={"reason": "empty interaction window"})
    quantum = params.r0 / 64.0
    t_star = min(math.ceil(window.t_star / quantum) * quantum, window.cap)

    if method == "comoving":
        return _element_comoving(spec, potential, params, cfg, grid, t_star,
                                 window, compute_naive)
    return _element_lab(spec, potential, params, cfg, grid, t_star,
                        window, compute_naive)


_REFERENCE_CACHE: dict = {}


def _free_reference(wf_in, spec, params, cfg, grid, t_star):
    """Free window run chi_0(t*); shared across samples with equal windows.

    The free run never sees the trajectory, so it only depends on the probe
    envelope, the window and the stepping; scans reuse it across angles and
    offsets.  Cache hits change nothing observable (identical inputs give
    identical runs), so determinism is preserved.
    """
    key = (round(t_star, 12), cfg.dt, grid, spec.width, params.omega,
           params.sigma, params.r0,
           float(np.asarray(spec.velocity) @ np.asarray(spec.center)))
    hit = _REFERENCE_CACHE.get(key)
    if hit is not None:
        return hit
    out = evolve_window_comoving(wf_in, -t_star, t_star, cfg.dt,
                                 PotentialSpec([]), params, spec.center,
                                 spec.velocity, boundary_tol=cfg.boundary_tol)
    if len(_REFERENCE_CACHE) > 16:
        _REFERENCE_CACHE.clear()
    _REFERENCE_CACHE[key] = out
    return out


def _element_comoving(spec, potential, params, cfg, grid, t_star, window,
                      compute_naive) -> ElementResult:
    chi0 = _frame_envelope(spec)
    chi_in = propagators.apply_plan_gaussian(
        chi0, propagators.plan_mehler(0.0, -t_star, params))
    chi_out = propagators.apply_plan_gaussian(
        chi0, propagators.plan_mehler(0.0, +t_star, params))
    wf_in = sample_to_grid(chi_in, grid)
    wf_out = sample_to_grid(chi_out, grid)
    clamp = cfg.clamp_for(grid)

    wf_v = evolve_window_comoving(wf_in, -t_star, t_star, cfg.dt, potential,
                                  params, spec.center, spec.velocity,
                                  boundary_tol=cfg.boundary_tol, clamp=clamp)
    wf_0 = _free_reference(wf_in, spec, params, cfg, grid, t_star)

    diff = grids.WaveFunction(grid, wf_v.values - wf_0.values)
    value = 1j * grids.inner_product(wf_out, diff)
    naive = None
    if compute_naive:
        probe_pair = np.conj(overlap(chi0, chi0))
        naive = 1j * (grids.inner_product(wf_out, wf_v) - probe_pair)
    nsteps = max(1, math.ceil(2 * t_star / cfg.dt))
    return ElementResult(value, spec.speed, t_star, False, value_naive=naive,
                         diagnostics={"method": "comoving", "steps": nsteps,
                                      "dt": cfg.dt, "grid_points": grid.points,
                                      "grid_half_width": grid.half_width,
                                      "probe_radius": window.probe_radius,
                                      "support_radius": window.support_radius,
                                      "window_capped": window.capped})


def _element_lab(spec, potential, params, cfg, grid, t_star, window,
                 compute_naive) -> ElementResult:
    g_in, g_out = dressed_states(spec, params, t_star)
    wf_in = sample_to_grid(g_in, grid)
    wf_out = sample_to_grid(g_out, grid)
    wf_v = evolve(wf_in, -t_star, t_star, cfg, potential, params)
    wf_0 = evolve(wf_in, -t_star, t_star, cfg, PotentialSpec([]), params)
    diff = grids.WaveFunction(grid, wf_v.values - wf_0.values)
    value = 1j * grids.inner_product(wf_out, diff)
    naive = None
    if compute_naive:
        probe = build_probe(spec)
        naive = 1j * (grids.inner_product(wf_out, wf_v)
                      - np.conj(overlap(probe, probe)))
    return ElementResult(value, spec.speed, t_star, False, value_naive=naive,
                         diagnostics={"method": "lab-grid", "dt": cfg.dt,
                                      "grid_points": grid.points,
                                      "grid_half_width": grid.half_width})


# ---------------------------------------------------------------------------
# high-velocity extrapolation
# ---------------------------------------------------------------------------

@dataclass
class ExtrapolationResult:
    limit: complex
    slope: float | None
    velocities: list
    scaled_values: list
    warning: str | None = None


def highv_extrapolate(spec: ProbeSpec, potential: PotentialSpec,
                      params: DecayParams, velocities,
                      cfg_factory=None, grid: grids.GridSpec | None = None,
                      method: str = "comoving") -> ExtrapolationResult:
    """Run the element over increasing speeds and fit |v| el = a + b/|v|.

    Returns the limit estimate a and the log-log slope of |v_i el_i - a|
    against |v_i| (the rate the tail bounds predict is -1).
    """
    velocities = [float(v) for v in velocities]
    if len(velocities) < 3 or any(b <= a for a, b in zip(velocities, velocities[1:])):
        raise ParameterError("need >= 3 strictly increasing velocities")
    vhat = spec.direction
    scaled = []
    for v in velocities:
        s = replace(spec, velocity=tuple(v * vhat))
        cfg = cfg_factory(v) if cfg_factory else None
        res = s_tilde_element(s, potential, params, cfg=cfg, grid=grid,
                              method=method)
        scaled.append(res.scaled)
    ys = np.asarray(scaled)
    if np.allclose(ys, 0.0):
        return ExtrapolationResult(0.0j, None, velocities, scaled,
                                   warning="all elements vanish; slope undefined")
    A = np.stack([np.ones(len(velocities)), 1.0 / np.asarray(velocities)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    a = complex(coef[0])
    resid = np.abs(ys - a)
    warning = None
    ok = resid > 1e-15 * max(1.0, abs(a))
    slope = None
    if np.count_nonzero(ok) >= 2:
        slope = float(np.polyfit(np.log(np.asarray(velocities)[ok]),
                                 np.log(resid[ok]), 1)[0])
    if np.any(np.diff(resid) > 0):
        warning = "residuals not monotonically decreasing with |v|"
    return ExtrapolationResult(a, slope, velocities, scaled, warning)


# ---------------------------------------------------------------------------
# sinogram scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanConfig:
    """Direction/offset sampling of the scattering data (n = 2)."""

    angles: int = 48
    offsets: int = 65
    offset_step: float = 0.15
    speed: float = 32.0
    probe_width: float = 0.4
    dt: float = 1e-3  # convergence-checked default; far below the sweep scale
    frame_points: int = 128
    frame_half_width: float = 8.0
    workers: int = 1

    def __post_init__(self):
        if self.angles < 1 or self.offsets < 1:
            raise ParameterError("angles and offsets must be >= 1")
        if self.offsets % 2 == 0:
            raise ParameterError("offsets must be odd so the grid is symmetric about 0")
        if self.offset_step <= 0 or self.speed <= 0 or self.probe_width <= 0:
            raise ParameterError("offset_step, speed, probe_width must be > 0")
        if self.offset_step > self.probe_width / 2:
            raise ParameterError(
                f"offset step {self.offset_step} exceeds probe_width/2 "
                f"= {self.probe_width / 2}: transversal sampling too coarse")

    @property
    def angle_values(self) -> np.ndarray:
        return np.pi * np.arange(self.angles) / self.angles

    @property
    def offset_values(self) -> np.ndarray:
        half = (self.offsets - 1) // 2
        return self.offset_step * (np.arange(self.offsets) - half)

    def effective_dt(self) -> float:
        return self.dt


@dataclass
class Sinogram:
    """(direction, offset) matrix of |v|-scaled scattering values."""

    angles: np.ndarray          # K angles in [0, pi)
    offsets: np.ndarray         # M symmetric offsets
    values: np.ndarray          # K x M, |v| Re(element)
    errors: np.ndarray          # K x M, |v| |Im(element)| quality metric
    speed: float
    probe_width: float
    holes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def smear(self) -> dict:
        """Transversal smear: the line-projected probe density |Phi_0|^2."""
        return {"kind": "projected_gaussian", "width": self.probe_width}


def _sample_spec(scan: ScanConfig, k: int, m: int) -> ProbeSpec:
    theta = float(scan.angle_values[k])
    s = float(scan.offset_values[m])
    vhat = np.array([math.cos(theta), math.sin(theta)])
    perp = np.array([-math.sin(theta), math.cos(theta)])
    return ProbeSpec(width=scan.probe_width, center=tuple(s * perp),
                     velocity=tuple(scan.speed * vhat))


def _scan_sample(args):
    scan, potential, params, k, m = args
    spec = _sample_spec(scan, k, m)
    cfg = EvolveConfig(dt=scan.effective_dt())
    grid = grids.GridSpec(n=2, points=scan.frame_points,
                          half_width=scan.frame_half_width)
    try:
        res = s_tilde_element(spec, potential, params, cfg=cfg, grid=grid)
        return k, m, res.reported, res.quality, None
    except TrapscatError as exc:
        return k, m, math.nan, math.nan, f"{type(exc).__name__}: {exc}"


def sinogram_scan(potential: PotentialSpec, params: DecayParams,
                  scan: ScanConfig, known: dict | None = None,
                  hole_budget: float = 0.05) -> Sinogram:
    """Scan every (angle, offset) sample; deterministic reduce by index.

    `known` maps (k, m) -> (value, error) for samples already computed (the
    resume path); they are copied through untouched.  More than `hole_budget`
    failed samples abort the scan.
    """
    K, M = scan.angles, scan.offsets
    values = np.full((K, M), np.nan)
    errors = np.full((K, M), np.nan)
    holes = []
    known = known or {}
    todo = [(k, m) for k in range(K) for m in range(M) if (k, m) not in known]
    for (k, m), (val, err) in known.items():
        values[k, m] = val
        errors[k, m] = err

    tasks = [(scan, potential, params, k, m) for k, m in todo]
    if scan.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=scan.workers) as pool:
            results = list(pool.map(_scan_sample, tasks, chunksize=4))
    else:
        results = [_scan_sample(t) for t in tasks]
    for k, m, val, err, fail in results:
        if fail is not None:
            holes.append((k, m, fail))
        values[k, m] = val
        errors[k, m] = err

    sino = Sinogram(scan.angle_values.copy(), scan.offset_values.copy(),
                    values, errors, scan.speed, scan.probe_width, holes,
                    meta={"dt": scan.effective_dt(),
                          "frame_points": scan.frame_points,
                          "frame_half_width": scan.frame_half_width})
    if len(holes) > hole_budget * K * M:
        exc = ScanHoleError(
            f"{len(holes)} of {K * M} samples failed (> {hole_budget:.0%})")
        exc.sinogram = sino
        raise exc
    return sino
