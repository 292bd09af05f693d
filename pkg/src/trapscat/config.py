"""Run configuration: one JSON document, strictly validated, hashable.

Unknown keys are rejected everywhere so that typos fail loudly; every value
check reports the dotted path of the offending key.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TrapscatError
from .evolve import EvolveConfig, dt_for_speed, interaction_window
from .gaussian import GaussianState
from .grids import GridSpec
from .model import (DecayParams, GaussianBump, PotentialSpec, PowerTail,
                    SmoothCompactBump, TruncatedSingular, check_admissibility)
from .scattering import ProbeSpec, ScanConfig

_COMPONENT_TYPES = {
    "gaussian_bump": (GaussianBump, {"amplitude": float, "center": list, "width": float}),
    "smooth_compact_bump": (SmoothCompactBump, {"amplitude": float, "center": list, "radius": float}),
    "power_tail": (PowerTail, {"amplitude": float, "rho": float}),
    "truncated_singular": (TruncatedSingular, {"amplitude": float, "center": list,
                                               "alpha": float, "radius": float, "q": float}),
}

_SECTIONS = {
    "decay": {"omega": float, "sigma": float, "r0": float},
    "potential": {"components": list},
    "grid": {"dimension": int, "points": int, "half_width": float},
    "probe": {"width": float},
    "scan": {"angles": int, "offsets": int, "offset_step": float, "speed": float,
             "dt": float, "frame_points": int, "frame_half_width": float},
    "evolve": {"dt_scale": float, "window_tol": float, "boundary_tol": float},
    "velocities": list,
    "output": {"directory": str},
    "workers": int,
    "seed": int,
}


def _check_keys(d: dict, allowed: dict, path: str):
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}.{key}'" if path else
                              f"unknown key '{key}'")


def _get(d: dict, key: str, typ, path: str, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing key '{path}.{key}'")
        return default
    val = d[key]
    types = typ if isinstance(typ, tuple) else (typ,)
    if float in types and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, types) or isinstance(val, bool) and bool not in types:
        names = "/".join(t.__name__ for t in types)
        raise ConfigError(f"'{path}.{key}' must be {names}, got {type(val).__name__}")
    return val


def _build_components(entries: list, path: str) -> list:
    comps = []
    for i, entry in enumerate(entries):
        here = f"{path}[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"'{here}' must be an object")
        kind = entry.get("type")
        if kind not in _COMPONENT_TYPES:
            raise ConfigError(
                f"'{here}.type' must be one of {sorted(_COMPONENT_TYPES)}, got {kind!r}")
        cls, fields = _COMPONENT_TYPES[kind]
        _check_keys({k: v for k, v in entry.items() if k != "type"}, fields, here)
        kwargs = {}
        for name, typ in fields.items():
            if name in entry:
                val = _get(entry, name, typ, here)
                kwargs[name] = tuple(val) if name == "center" else val
        try:
            comps.append(cls(**kwargs))
        except TrapscatError as exc:
            raise ConfigError(f"'{here}': {exc}") from exc
    return comps


@dataclass
class RunConfig:
    decay: DecayParams
    potential: PotentialSpec
    grid: GridSpec
    probe_width: float
    scan: ScanConfig
    dt_scale: float
    window_tol: float
    boundary_tol: float
    velocities: list
    output_dir: str
    workers: int
    seed: int
    raw: dict = field(repr=False, default_factory=dict)

    def evolve_config(self, speed: float | None = None,
                      dt: float | None = None) -> EvolveConfig:
        if dt is None:
            dt = dt_for_speed(speed if speed is not None else self.scan.speed,
                              base=self.dt_scale)
        return EvolveConfig(dt=dt, tol_window=self.window_tol,
                            boundary_tol=self.boundary_tol)

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top-level document must be an object")
    _check_keys(doc, _SECTIONS, "")

    decay_doc = _get(doc, "decay", dict, "", default={})
    _check_keys(decay_doc, _SECTIONS["decay"], "decay")
    try:
        decay = DecayParams(
            omega=_get(decay_doc, "omega", float, "decay", 1.0),
            sigma=_get(decay_doc, "sigma", float, "decay", 3.0 / 16.0),
            r0=_get(decay_doc, "r0", float, "decay", 1.0))
    except TrapscatError as exc:
        raise ConfigError(f"'decay': {exc}") from exc

    pot_doc = _get(doc, "potential", dict, "", default={"components": []})
    _check_keys(pot_doc, _SECTIONS["potential"], "potential")
    potential = PotentialSpec(_build_components(
        _get(pot_doc, "components", list, "potential", []), "potential.components"))

    grid_doc = _get(doc, "grid", dict, "", default={})
    _check_keys(grid_doc, _SECTIONS["grid"], "grid")
    try:
        grid = GridSpec(n=_get(grid_doc, "dimension", int, "grid", 2),
                        points=_get(grid_doc, "points", int, "grid", 256),
                        half_width=_get(grid_doc, "half_width", float, "grid", 12.0))
    except TrapscatError as exc:
        raise ConfigError(f"'grid': {exc}") from exc

    probe_doc = _get(doc, "probe", dict, "", default={})
    _check_keys(probe_doc, _SECTIONS["probe"], "probe")
    probe_width = _get(probe_doc, "width", float, "probe", 1.0)
    if probe_width <= 0:
        raise ConfigError("'probe.width' must be > 0")

    scan_doc = _get(doc, "scan", dict, "", default={})
    _check_keys(scan_doc, _SECTIONS["scan"], "scan")
    workers = _get(doc, "workers", int, "", 1)
    try:
        scan = ScanConfig(
            angles=_get(scan_doc, "angles", int, "scan", 48),
            offsets=_get(scan_doc, "offsets", int, "scan", 65),
            offset_step=_get(scan_doc, "offset_step", float, "scan", 0.15),
            speed=_get(scan_doc, "speed", float, "scan", 32.0),
            probe_width=probe_width,
            dt=_get(scan_doc, "dt", float, "scan", 1e-3),
            frame_points=_get(scan_doc, "frame_points", int, "scan", 128),
            frame_half_width=_get(scan_doc, "frame_half_width", float, "scan", 8.0),
            workers=workers)
    except TrapscatError as exc:
        raise ConfigError(f"'scan': {exc}") from exc

    ev_doc = _get(doc, "evolve", dict, "", default={})
    _check_keys(ev_doc, _SECTIONS["evolve"], "evolve")
    dt_scale = _get(ev_doc, "dt_scale", float, "evolve", 2e-3)
    window_tol = _get(ev_doc, "window_tol", float, "evolve", 1e-10)
    boundary_tol = _get(ev_doc, "boundary_tol", float, "evolve", 1e-12)

    velocities = _get(doc, "velocities", list, "", [8.0, 16.0, 32.0, 64.0])
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
               for v in velocities):
        raise ConfigError("'velocities' must be a list of numbers")
    velocities = [float(v) for v in velocities]

    out_doc = _get(doc, "output", dict, "", default={})
    _check_keys(out_doc, _SECTIONS["output"], "output")
    output_dir = _get(out_doc, "directory", str, "output", "out")

    seed = _get(doc, "seed", int, "", 0)
    return RunConfig(decay, potential, grid, probe_width, scan, dt_scale,
                     window_tol, boundary_tol, velocities, output_dir,
                     workers, seed, raw=doc)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return parse_config(doc)


@dataclass
class ValidationReport:
    lines: list
    passed: bool

    def text(self) -> str:
        status = "ALL CHECKS PASSED" if self.passed else "VALIDATION FAILED"
        return "\n".join([*self.lines, status])


def validate_run(cfg: RunConfig) -> ValidationReport:
    """Admissibility + grid budget + window feasibility for the configured runs."""
    lines = []
    ok = True

    report = check_admissibility(cfg.potential, cfg.decay, n=cfg.grid.n)
    lines.extend(report.lines())
    ok &= report.passed

    # frame-grid budget: the envelope (and its momentum content) must fit
    frame = GridSpec(n=2, points=cfg.scan.frame_points,
                     half_width=cfg.scan.frame_half_width)
    w = cfg.probe_width
    need_p = 8.0 / w + 12.0
    have_p = frame.momentum_max
    cond = need_p <= have_p
    lines.append(f"[{'PASS' if cond else 'FAIL'}] frame momentum budget: "
                 f"need ~{need_p:.1f}, grid Nyquist {have_p:.1f}")
    ok &= cond
    need_x = 8.0 * w + 2.0
    cond = need_x <= cfg.scan.frame_half_width
    lines.append(f"[{'PASS' if cond else 'FAIL'}] frame extent budget: "
                 f"need ~{need_x:.1f}, half_width {cfg.scan.frame_half_width:.1f}")
    ok &= cond

    # smear acceptance rule: probe width at most a quarter of the finest feature
    feat = cfg.potential.feature_size()
    if math.isfinite(feat):
        cond = w <= feat / 4.0
        lines.append(f"[{'PASS' if cond else 'FAIL'}] probe width {w:g} <= "
                     f"feature/4 = {feat / 4.0:g} (smear accepted without deconvolution)")
        ok &= cond

    # predicted interaction windows per velocity
    speeds = sorted({cfg.scan.speed, *cfg.velocities})
    for v in speeds:
        probe = GaussianState.envelope(w, center=0.0, momentum=0.0, n=2) \
            .apply_linear((v, 0.0))
        try:
            win = interaction_window(probe, cfg.potential, cfg.decay,
                                     tol=cfg.window_tol)
            if win.empty:
                lines.append(f"[PASS] window at |v|={v:g}: empty (no contact)")
            elif win.capped:
                lines.append(f"[PASS] window at |v|={v:g}: capped at the plateau "
                             "edge (slow probe; expect a larger truncation tail)")
            else:
                frac = win.t_star / cfg.decay.r0
                cond = win.t_star < cfg.decay.r0
                lines.append(f"[{'PASS' if cond else 'FAIL'}] window at |v|={v:g}: "
                             f"t* = {win.t_star:.4f} ({frac:.0%} of r0)")
                ok &= cond
        except TrapscatError as exc:
            lines.append(f"[FAIL] window at |v|={v:g}: {exc}")
            ok = False
    return ValidationReport(lines, ok)
