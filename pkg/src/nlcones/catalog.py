"""Built-in cone traces and rasterised sets, addressed by string ids.

Ids have the form ``name`` or ``name:key=value,key=value``; for example
``parallel-circles:h=0.25`` or ``perturbed-circle:a2=0.05``.
"""
import math

import numpy as np

from .curves import ConeTrace, CylinderBand, make_circle, make_perturbed_circle, make_double_loop
from . import perimeter

__all__ = ["CatalogError", "parse_id", "list_catalog", "build_trace", "build_set", "build_curve"]


class CatalogError(ValueError):
    """Unknown catalog id or malformed parameters."""


TRACES = {
    "maximal-circle": ({}, "equator: the trace of a half space (flat cone)"),
    "tilted-circle": ({"angle": 0.3}, "great circle with axis tilted by `angle` from e3"),
    "parallel-circles": ({"h": 0.25}, "two latitude circles at heights +h and -h"),
    "perturbed-circle": ({"a2": 0.05}, "graph z = sum a_k cos(k theta) over the equator"),
}
CURVES = {
    "double-loop": ({"b": 0.01, "eps_factor": 0.5}, "double helical loop inside a band of half-height b"),
}
SETS = {
    "disk": ({"radius": 1.0, "half_width": 3.0}, "disk in R^2"),
    "square": ({"side": 1.0, "half_width": 2.0}, "axis-aligned square in R^2"),
    "half-plane": ({"angle": 0.0, "half_width": 2.0}, "half plane {x . (cos a, sin a) > 0}"),
    "double-cone": ({"slope": 1.0, "half_width": 1.0}, "voxel set {x3^2 > slope^2 (x1^2 + x2^2)} in R^3"),
}


def parse_id(ident):
    """'name:k=v,...' -> (name, {k: float})."""
    name, _, rest = str(ident).partition(":")
    params = {}
    if rest:
        for part in rest.split(","):
            k, eq, v = part.partition("=")
            if not eq:
                raise CatalogError(f"malformed parameter {part!r} in {ident!r}")
            try:
                params[k.strip()] = float(v)
            except ValueError as exc:
                raise CatalogError(f"parameter {k!r} is not a number") from exc
    return name.strip(), params


def _merge(table, name, params, ident):
    if name not in table:
        raise CatalogError(f"unknown catalog id {ident!r}")
    defaults = dict(table[name][0])
    for k in params:
        if k not in defaults and not (name == "perturbed-circle" and k.startswith("a") and k[1:].isdigit()):
            raise CatalogError(f"unknown parameter {k!r} for {name}")
    if name == "perturbed-circle" and any(k.startswith("a") for k in params):
        defaults = {}
    defaults.update(params)
    return defaults


def list_catalog():
    """Sorted list of {id, kind, defaults, description}."""
    out = []
    for kind, table in (("trace", TRACES), ("curve", CURVES), ("set", SETS)):
        for name, (defaults, desc) in table.items():
            out.append({"id": name, "kind": kind, "defaults": dict(defaults), "description": desc})
    return sorted(out, key=lambda e: (e["kind"], e["id"]))


def build_trace(ident, n=1024):
    name, params = parse_id(ident)
    p = _merge(TRACES, name, params, ident)
    if name == "maximal-circle":
        return ConeTrace([make_circle(n=n)], name=ident)
    if name == "tilted-circle":
        a = p["angle"]
        return ConeTrace([make_circle(axis=(math.sin(a), 0.0, math.cos(a)), n=n)], name=ident)
    if name == "parallel-circles":
        h = p["h"]
        if not (0 < h < 1):
            raise CatalogError("parallel-circles needs 0 < h < 1")
        th = math.acos(h)
        up = make_circle(polar=th, n=n)
        lo = make_circle(polar=math.pi - th, n=n).reversed()
        return ConeTrace([up, lo], name=ident)
    ks = sorted(int(k[1:]) for k in p)
    if not ks or ks[0] < 1:
        raise CatalogError("perturbed-circle needs amplitudes a1, a2, ...")
    amps = np.zeros(ks[-1])
    for k in ks:
        amps[k - 1] = p[f"a{k}"]
    return ConeTrace([make_perturbed_circle(amplitudes=amps, n=n)], name=ident)


def build_curve(ident):
    """Non-trace curves; returns (curve, band, window) for the double loop."""
    name, params = parse_id(ident)
    p = _merge(CURVES, name, params, ident)
    band = CylinderBand((0.0, 0.0, 1.0), p["b"])
    curve, window = make_double_loop(band, eps_factor=p["eps_factor"])
    return curve, band, window


def build_set(ident, h=None):
    name, params = parse_id(ident)
    p = _merge(SETS, name, params, ident)
    if name == "disk":
        return perimeter.disk_set(p["radius"], half_width=p["half_width"], h=h or 1 / 128)
    if name == "square":
        return perimeter.square_set(p["side"], half_width=p["half_width"], h=h or 1 / 128)
    if name == "half-plane":
        return perimeter.half_plane_set(p["angle"], half_width=p["half_width"], h=h or 1 / 128)
    return perimeter.double_cone_set(p["slope"], half_width=p["half_width"], h=h or 1 / 16)
