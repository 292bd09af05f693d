"""Batch command-line front end.

Subcommands: validate | element | sinogram | reconstruct | compare.
Exit codes: 0 success, 2 config error, 3 numeric-budget error, 4 scan holes
over threshold.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import RunConfig, load_config, validate_run
from .errors import (ConfigError, DomainError, GridOverflowError,
                     ScanHoleError, TrapscatError)
from .grids import GridSpec
from .model import PotentialSpec
from .recon import (compare_potentials, deconvolve_smear, fbp_invert,
                    sinogram_rms)
from .scattering import ProbeSpec, ScanConfig, s_tilde_element, sinogram_scan
from . import storage

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_HOLES = 4


def _out_dir(cfg: RunConfig, override: str | None) -> str:
    return override or cfg.output_dir


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = validate_run(cfg)
    print(report.text())
    return EXIT_OK if report.passed else EXIT_CONFIG


def cmd_element(args) -> int:
    cfg = load_config(args.config)
    speed = args.speed if args.speed is not None else cfg.scan.speed
    theta = args.angle
    vhat = np.array([math.cos(theta), math.sin(theta)])
    perp = np.array([-math.sin(theta), math.cos(theta)])
    spec = ProbeSpec(width=cfg.probe_width, center=tuple(args.offset * perp),
                     velocity=tuple(speed * vhat))
    grid = GridSpec(n=2, points=cfg.scan.frame_points,
                    half_width=cfg.scan.frame_half_width)
    res = s_tilde_element(spec, cfg.potential, cfg.decay,
                          cfg=cfg.evolve_config(speed=speed), grid=grid,
                          compute_naive=args.naive)
    print(f"|v| * element = {res.reported:.12g}  "
          f"(imaginary residual {res.quality:.3g}, t* = {res.t_star:.6g})")
    if args.naive and res.value_naive is not None:
        print(f"naive-subtraction real part = {(res.speed * res.value_naive).real:.12g}")
    outdir = _out_dir(cfg, args.out)
    os.makedirs(outdir, exist_ok=True)
    record = {
        "angle": theta, "offset": args.offset, "speed": speed,
        "value_real": res.reported, "value_imag": (res.speed * res.value).imag,
        "t_star": res.t_star, "window_empty": res.window_empty,
        "diagnostics": res.diagnostics,
    }
    with open(os.path.join(outdir, "element.json"), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    storage.write_provenance(outdir, cfg.raw, {"command": "element"})
    return EXIT_OK


def cmd_sinogram(args) -> int:
    cfg = load_config(args.config)
    outdir = _out_dir(cfg, args.out)
    scan = cfg.scan
    if args.workers is not None:
        scan = ScanConfig(**{**scan.__dict__, "workers": args.workers})
    known = storage.load_samples(outdir) if args.resume else {}
    if known:
        print(f"resuming: {len(known)} of {scan.angles * scan.offsets} samples on file")
    sino = sinogram_scan(cfg.potential, cfg.decay, scan, known=known)
    fresh = [{"k": k, "m": m, "value": float(sino.values[k, m]),
              "error": float(sino.errors[k, m])}
             for k in range(scan.angles) for m in range(scan.offsets)
             if (k, m) not in known and np.isfinite(sino.values[k, m])]
    storage.append_samples(outdir, fresh)
    storage.write_sinogram(outdir, sino)
    storage.write_provenance(outdir, cfg.raw, {"command": "sinogram",
                                               "workers": scan.workers})
    if sino.holes:
        print(f"scan finished with {len(sino.holes)} holes:")
        for k, m, reason in sino.holes:
            print(f"  ({k},{m}): {reason}")
    print(f"sinogram written to {outdir} "
          f"({scan.angles} angles x {scan.offsets} offsets, |v| = {scan.speed:g})")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    cfg = load_config(args.config)
    sino = storage.load_sinogram(args.sinogram)
    if args.deconvolve:
        sino = deconvolve_smear(sino, regularization=args.regularization)
    field, axis = fbp_invert(sino, points=args.points)
    outdir = _out_dir(cfg, args.out)
    os.makedirs(outdir, exist_ok=True)
    storage.write_array(os.path.join(outdir, "field"), field,
                        {"axis_min": float(axis[0]), "axis_step": float(axis[1] - axis[0])})
    storage.write_pgm(os.path.join(outdir, "field.pgm"), field)
    with open(os.path.join(outdir, "field.csv"), "w", encoding="utf-8") as fh:
        fh.write("i,j,x,y,value\n")
        for i, x in enumerate(axis):
            for j, y in enumerate(axis):
                fh.write(f"{i},{j},{storage.FLOAT_FMT % x},{storage.FLOAT_FMT % y},"
                         f"{storage.FLOAT_FMT % field[i, j]}\n")

    pts = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1)
    reference = np.asarray(cfg.potential.evaluate(pts, clamp=1.0 / (axis[1] - axis[0])),
                           dtype=float)
    support = cfg.potential.support_radius(1e-6)
    mask = np.sqrt(np.sum(pts ** 2, axis=-1)) <= max(support, axis[-1] * 0.25)
    metrics = compare_potentials(field, reference, mask)
    metrics["support_radius"] = support
    metrics["points"] = args.points
    doc = {"metrics": metrics, "sinogram_dir": args.sinogram,
           "deconvolved": bool(args.deconvolve)}
    with open(os.path.join(outdir, "metrics.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    storage.write_provenance(outdir, cfg.raw, {"command": "reconstruct"})
    print(f"reconstruction written to {outdir}: rel_l2 = {metrics['rel_l2']:.4f}, "
          f"linf = {metrics['linf']:.4g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg_a = load_config(args.config_a)
    cfg_b = load_config(args.config_b)
    outdir = args.out or cfg_a.output_dir

    sino_a = sinogram_scan(cfg_a.potential, cfg_a.decay, cfg_a.scan)
    sino_b = sinogram_scan(cfg_b.potential, cfg_b.decay, cfg_b.scan)
    if sino_a.values.shape != sino_b.values.shape:
        raise ConfigError("compare requires matching scan shapes")

    floor_scan = sinogram_scan(PotentialSpec([]), cfg_a.decay, cfg_a.scan)
    floor = max(sinogram_rms(floor_scan.values),
                1e-12 * max(1.0, float(np.max(np.abs(sino_a.values)))))
    dist = sinogram_rms(sino_a.values, sino_b.values)

    field_a, axis = fbp_invert(sino_a, points=args.points)
    field_b, _ = fbp_invert(sino_b, points=args.points)
    field_metrics = compare_potentials(field_a, field_b)

    if dist >= 10.0 * floor:
        verdict = "distinguishable"
    elif dist <= 2.0 * floor:
        verdict = "indistinguishable at this scale"
    else:
        verdict = "marginal"
    doc = {
        "sinogram_rms_distance": dist,
        "noise_floor": floor,
        "thresholds": {"distinguishable": 10.0 * floor,
                       "indistinguishable": 2.0 * floor},
        "field_metrics": field_metrics,
        "verdict": verdict,
    }
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "compare.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"sinogram RMS distance = {dist:.6g} (floor {floor:.3g}); {verdict}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trapscat",
                                description="scattering laboratory for the "
                                            "time-decaying harmonic trap")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a run configuration")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("element", help="single scattering matrix element")
    e.add_argument("--config", required=True)
    e.add_argument("--angle", type=float, default=0.0, help="beam angle (radians)")
    e.add_argument("--offset", type=float, default=0.0, help="impact offset")
    e.add_argument("--speed", type=float, default=None)
    e.add_argument("--naive", action="store_true",
                   help="also report the naive-subtraction variant")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_element)

    s = sub.add_parser("sinogram", help="full (angle, offset) scan")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--resume", action="store_true")
    s.set_defaults(func=cmd_sinogram)

    r = sub.add_parser("reconstruct", help="invert a sinogram to a field")
    r.add_argument("sinogram", help="directory holding a scanned sinogram")
    r.add_argument("--config", required=True)
    r.add_argument("--points", type=int, default=128)
    r.add_argument("--deconvolve", action="store_true")
    r.add_argument("--regularization", type=float, default=1e-3)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_reconstruct)

    c = sub.add_parser("compare", help="uniqueness check between two configs")
    c.add_argument("config_a")
    c.add_argument("config_b")
    c.add_argument("--points", type=int, default=128)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScanHoleError as exc:
        print(f"scan failed: {exc}", file=sys.stderr)
        sino = getattr(exc, "sinogram", None)
        for k, m, reason in (sino.holes if sino is not None else []):
            print(f"  ({k},{m}): {reason}", file=sys.stderr)
        return EXIT_HOLES
    except (GridOverflowError, DomainError) as exc:
        print(f"numeric budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except TrapscatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
