"""File formats: curves (CSV/JSON), radial profiles (CSV), bitmaps, voxel lists,
result tables (CSV), JSON reports and dense matrix export."""
import csv
import json
import math
import os

import numpy as np

from .curves import SphericalCurve
from .hardy import RadialProfile
from .perimeter import GridSet

__all__ = [
    "write_curve_csv", "read_curve_csv", "write_curve_json", "read_curve_json",
    "write_profile_csv", "read_profile_csv", "write_table_csv", "read_bitmap", "read_voxel_csv",
    "write_matrices", "dump_json", "to_jsonable",
]


def write_curve_csv(curve, path):
    t = curve.arclength[:len(curve)]
    rows = [(float(a), *map(float, x)) for a, x in zip(t, curve.samples)]
    write_table_csv(path, ("t", "x", "y", "z"), rows)


def read_curve_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no samples")
    pts = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
    return SphericalCurve(pts)


def write_curve_json(curve, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"samples": curve.samples.tolist(), "closed": bool(curve.closed)}, fh)


def read_curve_json(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return SphericalCurve(np.asarray(data["samples"], dtype=float), bool(data.get("closed", True)))


def write_profile_csv(profile, path):
    write_table_csv(path, ("r", "zeta"), zip(profile.r.tolist(), profile.values.tolist()))


def read_profile_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return RadialProfile(np.array([float(r["r"]) for r in rows]), np.array([float(r["zeta"]) for r in rows]))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_table_csv(path, header, rows):
    """RFC-4180 CSV (CRLF line ends); floats written with full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def read_bitmap(path, h, origin=(0.0, 0.0), threshold=0.5):
    """2-D GridSet from an image: dark pixels (gray < threshold) are inside.

    Pixel row 0 is the top of the image, so rows are flipped to make y point up.
    """
    from skimage import io as skio
    img = np.asarray(skio.imread(path), dtype=float)
    if img.ndim == 3:
        img = img[..., :3].mean(axis=2)
    if img.max() > 1:
        img = img / 255.0
    return GridSet(origin, h, (img < threshold)[::-1, :].T)


def read_voxel_csv(path, h, origin=None, pad=1):
    """3-D GridSet from a CSV of filled voxel indices (columns i, j, k)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no voxels")
    idx = np.array([[int(r["i"]), int(r["j"]), int(r["k"])] for r in rows])
    if idx.min() < 0:
        raise ValueError("voxel indices must be nonnegative")
    shape = tuple(idx.max(axis=0) + 1 + 2 * pad)
    b = np.zeros(shape, dtype=bool)
    b[tuple((idx + pad).T)] = True
    if origin is None:
        origin = tuple(-pad * h for _ in range(3))
    return GridSet(origin, h, b)


def write_matrices(form, directory):
    """K, M, G as dense text (one row per line, %.17e) plus the basis labels."""
    os.makedirs(directory, exist_ok=True)
    for name, mat in (("K", form.seminorm_matrix), ("M", form.potential_matrix), ("G", form.mass_matrix)):
        np.savetxt(os.path.join(directory, f"{name}.txt"), mat, fmt="%.17e")
    with open(os.path.join(directory, "basis.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(form.labels) + "\n")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
