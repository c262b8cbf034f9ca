"""On-disk dataset format.

A dataset is a directory holding ``manifest.json`` and raw binary arrays:
64-bit little-endian floats, row-major (source-major, time-minor).  One
file per view; ground truth, when present, adds the shared sources, one
mixing matrix and one noise realization per view, and the integer delays
(64-bit little-endian, ``(m, p)`` row-major).
"""

import json
from pathlib import Path

import numpy as np

from .errors import (ManifestError, MissingFileError, NonFiniteError,
                     SizeMismatchError)
from .simulation import GroundTruth, ViewSet

FORMAT_VERSION = 1
FLOAT = np.dtype("<f8")
INT = np.dtype("<i8")


def _write(path, array, dtype=FLOAT):
    np.ascontiguousarray(array, dtype=dtype).tofile(path)


def write_dataset(path, views, gt=None, metadata=None):
    """Write ``views`` (and optional ground truth) under directory ``path``.

    Returns the manifest as a dict.
    """
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create dataset directory {path}: {exc}") from exc
    m, p, n = views.X.shape
    manifest = {
        "format_version": FORMAT_VERSION,
        "m": m,
        "p": p,
        "n": n,
        "dtype": "float64-le",
        "views": [f"view_{i:03d}.bin" for i in range(m)],
        "ground_truth": None,
        "metadata": dict(metadata or {}),
    }
    for i, name in enumerate(manifest["views"]):
        _write(path / name, views.X[i])
    if gt is not None:
        truth = {
            "sources": "sources.bin",
            "mixing": [f"mixing_{i:03d}.bin" for i in range(m)],
            "noise": [f"noise_{i:03d}.bin" for i in range(m)],
            "delays": "delays.bin",
            "sigma": float(gt.sigma),
        }
        _write(path / truth["sources"], gt.S)
        for i in range(m):
            _write(path / truth["mixing"][i], gt.A[i])
            _write(path / truth["noise"][i], gt.N[i])
        _write(path / truth["delays"], gt.tau, INT)
        manifest["ground_truth"] = truth
    with open(path / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _read(path, shape, dtype=FLOAT, check_finite=True):
    if not path.is_file():
        raise MissingFileError(f"missing data file {path}")
    expected = int(np.prod(shape)) * dtype.itemsize
    actual = path.stat().st_size
    if actual != expected:
        raise SizeMismatchError(
            f"{path}: expected {expected} bytes for shape {shape}, "
            f"found {actual}")
    data = np.fromfile(path, dtype=dtype).reshape(shape)
    if check_finite and not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{path} contains non-finite values")
    return data.astype(data.dtype.newbyteorder("="))


def read_manifest(path):
    path = Path(path)
    mpath = path / "manifest.json"
    if not mpath.is_file():
        raise MissingFileError(f"no manifest.json in {path}")
    try:
        with open(mpath, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{mpath}: invalid JSON ({exc})") from exc
    for key in ("format_version", "m", "p", "n", "views"):
        if key not in manifest:
            raise ManifestError(f"{mpath}: missing key {key!r}")
    if manifest["format_version"] != FORMAT_VERSION:
        raise ManifestError(
            f"{mpath}: unsupported format_version {manifest['format_version']}")
    m, p, n = manifest["m"], manifest["p"], manifest["n"]
    if not (isinstance(m, int) and m >= 1):
        raise ManifestError(f"{mpath}: m must be a positive integer, got {m}")
    if not (isinstance(p, int) and p >= 1 and isinstance(n, int) and n >= 2):
        raise ManifestError(f"{mpath}: invalid shape p={p}, n={n}")
    if len(manifest["views"]) != m:
        raise ManifestError(
            f"{mpath}: {len(manifest['views'])} view files listed, m={m}")
    return manifest


def read_dataset(path):
    """Inverse of :func:`write_dataset`: returns ``(views, gt_or_None)``."""
    path = Path(path)
    manifest = read_manifest(path)
    m, p, n = manifest["m"], manifest["p"], manifest["n"]
    X = np.stack([_read(path / name, (p, n)) for name in manifest["views"]])
    truth = manifest.get("ground_truth")
    if not truth:
        return ViewSet(X), None
    S = _read(path / truth["sources"], (p, n))
    A = np.stack([_read(path / name, (p, p)) for name in truth["mixing"]])
    N = np.stack([_read(path / name, (p, n)) for name in truth["noise"]])
    tau = _read(path / truth["delays"], (m, p), INT, check_finite=False)
    gt = GroundTruth(S=S, A=A, tau=tau, N=N,
                     sigma=float(truth.get("sigma", 0.0)))
    return ViewSet(X, A=A.copy(), tau=tau.copy()), gt
