"""Artifact persistence: raw little-endian arrays, CSV, PGM previews, provenance.

Binary arrays are written as little-endian 8-byte floats in C (row-major)
order with a JSON sidecar describing shape and axes; complex arrays are the
interleaved (re, im) pairs of numpy's complex128.  All text output uses %.17g
so values round-trip bit-exactly.
"""
from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .errors import ConfigError
from .grids import GridSpec, WaveFunction
from .scattering import Sinogram

FLOAT_FMT = "%.17g"


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_array(base: str, arr: np.ndarray, meta: dict | None = None) -> None:
    """base.f64 (raw LE bytes) + base.json (shape/dtype sidecar)."""
    arr = np.ascontiguousarray(arr)
    if arr.dtype == np.complex128:
        dtype = "<c16"
        arr = arr.astype("<c16")
    else:
        dtype = "<f8"
        arr = arr.astype("<f8")
    arr.tofile(base + ".f64")
    doc = {"dtype": dtype, "shape": list(arr.shape), "order": "C"}
    if dtype == "<c16":
        doc["layout"] = "interleaved little-endian float64 (re, im)"
    if meta:
        doc.update(meta)
    _write_json(base + ".json", doc)


def load_array(base: str) -> np.ndarray:
    with open(base + ".json", "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    arr = np.fromfile(base + ".f64", dtype=doc["dtype"])
    return arr.reshape(doc["shape"])


def write_wavefunction(base: str, wf: WaveFunction) -> None:
    meta = {"grid": {"dimension": wf.grid.n, "points": wf.grid.points,
                     "half_width": wf.grid.half_width},
            "space": wf.space}
    write_array(base, wf.values, meta)
    if wf.grid.n == 1:
        ax = wf.grid.axis()
        with open(base + ".csv", "w", encoding="utf-8") as fh:
            fh.write("x,re,im\n")
            for x, v in zip(ax, wf.values):
                fh.write(f"{FLOAT_FMT % x},{FLOAT_FMT % v.real},{FLOAT_FMT % v.imag}\n")


def load_wavefunction(base: str) -> WaveFunction:
    with open(base + ".json", "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    g = doc["grid"]
    grid = GridSpec(n=g["dimension"], points=g["points"], half_width=g["half_width"])
    values = np.fromfile(base + ".f64", dtype=doc["dtype"]).reshape(doc["shape"])
    return WaveFunction(grid, values, doc["space"])


# ---------------------------------------------------------------------------
# sinograms
# ---------------------------------------------------------------------------

def write_sinogram(outdir: str, sino: Sinogram) -> None:
    os.makedirs(outdir, exist_ok=True)
    write_array(os.path.join(outdir, "sinogram"), sino.values)
    write_array(os.path.join(outdir, "sinogram_errors"), sino.errors)
    with open(os.path.join(outdir, "sinogram.csv"), "w", encoding="utf-8") as fh:
        fh.write("angle_index,offset_index,angle,offset,value,error,speed\n")
        for k, theta in enumerate(sino.angles):
            for m, s in enumerate(sino.offsets):
                fh.write(",".join([
                    str(k), str(m), FLOAT_FMT % theta, FLOAT_FMT % s,
                    FLOAT_FMT % sino.values[k, m], FLOAT_FMT % sino.errors[k, m],
                    FLOAT_FMT % sino.speed]) + "\n")
    _write_json(os.path.join(outdir, "sinogram_meta.json"), {
        "angles": [float(a) for a in sino.angles],
        "offsets": [float(s) for s in sino.offsets],
        "speed": sino.speed,
        "probe_width": sino.probe_width,
        "smear": sino.smear,
        "holes": [list(h) for h in sino.holes],
        "meta": sino.meta,
    })


def load_sinogram(outdir: str) -> Sinogram:
    meta_path = os.path.join(outdir, "sinogram_meta.json")
    if not os.path.exists(meta_path):
        raise ConfigError(f"no sinogram found under {outdir}")
    with open(meta_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    values = load_array(os.path.join(outdir, "sinogram"))
    errors = load_array(os.path.join(outdir, "sinogram_errors"))
    return Sinogram(np.asarray(doc["angles"]), np.asarray(doc["offsets"]),
                    values, errors, doc["speed"], doc["probe_width"],
                    [tuple(h) for h in doc["holes"]], doc.get("meta", {}))


# sample records for resumable scans (one JSON object per line)

def samples_path(outdir: str) -> str:
    return os.path.join(outdir, "samples.jsonl")


def append_samples(outdir: str, records: list) -> None:
    os.makedirs(outdir, exist_ok=True)
    with open(samples_path(outdir), "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_samples(outdir: str) -> dict:
    """Completed (k, m) -> (value, error) records from a previous run."""
    path = samples_path(outdir)
    known = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                known[(rec["k"], rec["m"])] = (rec["value"], rec["error"])
    return known


# ---------------------------------------------------------------------------
# images and provenance
# ---------------------------------------------------------------------------

def write_pgm(path: str, field: np.ndarray) -> None:
    """8-bit P5 preview: linear [min, max] -> [0, 255], bit-exact given the field."""
    lo = float(np.min(field))
    hi = float(np.max(field))
    if hi > lo:
        scaled = np.floor((field - lo) / (hi - lo) * 255.0 + 0.5)
    else:
        scaled = np.zeros_like(field)
    data = np.clip(scaled, 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def write_provenance(outdir: str, config_raw: dict, extras: dict | None = None) -> None:
    import numpy
    import scipy

    from . import __version__
    from .backend import BACKEND
    canonical = json.dumps(config_raw, sort_keys=True, separators=(",", ":"))
    doc = {
        "config": config_raw,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "trapscat_version": __version__,
        "kernel_backend": BACKEND,
        "numpy_version": numpy.__version__,
        "scipy_version": scipy.__version__,
    }
    if extras:
        doc.update(extras)
    os.makedirs(outdir, exist_ok=True)
    _write_json(os.path.join(outdir, "provenance.json"), doc)
