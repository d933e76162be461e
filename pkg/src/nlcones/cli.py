"""Command-line scenario runner: ``nlcones <command> [options]``.

Every run writes ``report.json`` (sorted keys, no timestamps) and CSV tables
to ``--out``; without ``--out`` the report goes to stdout. Exit codes: 0 ok,
1 domain error, 2 configuration error. Errors are reported as JSON on stdout.
"""
import argparse
import json
import math
import os
import platform
import sys

import numpy as np
import scipy
import yaml

from . import __version__
from . import catalog, hardy, kernels, perimeter, seminorms, stability
from .curves import CurveError, cylinder_crossing_measure, crossing_report
from .io import dump_json, write_table_csv, write_matrices, read_curve_csv, read_curve_json
from .specfun import DomainError, FracOrder, hardy_constant
from .curves import ConeTrace

COMMANDS = ("kernel", "hardy", "stability", "flatness", "perimeter", "crossing", "catalog")

DEFAULTS = {
    "kernel": {"s": [0.5, 0.75, 0.9, 0.95], "resolution": 200, "tol": 1e-10},
    "hardy": {"sigma": [0.6, 0.75, 0.9], "cutoff": 50.0, "resolution": 100},
    "stability": {"trace": "maximal-circle", "s": [0.9], "resolution": 32, "modes": 8,
                  "samples": 256, "eps": 1 / 16, "R": 16.0, "tol": 1e-6, "cutoff": 100.0,
                  "radial_gap": True, "export_matrices": False, "trace_file": None},
    "flatness": {"trace": "perturbed-circle:a2=0.05", "s": [0.9], "resolution": 1024},
    "perimeter": {"set": "disk", "s": [0.8, 0.9, 0.95], "resolution": None, "omega_radius": None,
                  "radii": None},
    "crossing": {"curve": "double-loop"},
    "catalog": {},
}


class ConfigError(ValueError):
    """Invalid command-line or configuration-file input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser():
    p = _Parser(prog="nlcones", description="Numerical laboratory for nonlocal minimal cones.")
    p.add_argument("--version", action="version", version=f"nlcones {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="output directory (report.json and CSV files)")
        sp.add_argument("--config", help="YAML or JSON file with option values; flags win")
        sp.add_argument("--resolution", type=int)
        sp.add_argument("--tol", type=float)
        return sp

    k = common(sub.add_parser("kernel", help="scan k_s(a) and its lower-bound ratio"))
    k.add_argument("--s", type=_floats)
    h = common(sub.add_parser("hardy", help="Hardy ratios and the I/J constant"))
    h.add_argument("--sigma", type=_floats)
    h.add_argument("--cutoff", type=float, help="near-optimizer cutoff k")
    st = common(sub.add_parser("stability", help="second-variation report for a cone trace"))
    st.add_argument("--trace")
    st.add_argument("--trace-file", dest="trace_file", help="CSV or JSON curve file (one component)")
    st.add_argument("--s", type=_floats)
    st.add_argument("--modes", type=int)
    st.add_argument("--samples", type=int)
    st.add_argument("--eps", type=float)
    st.add_argument("--R", type=float)
    st.add_argument("--cutoff", type=float, help="near-optimizer cutoff for the radial gap")
    st.add_argument("--no-radial-gap", dest="radial_gap", action="store_const", const=False)
    st.add_argument("--export-matrices", dest="export_matrices", action="store_const", const=True)
    f = common(sub.add_parser("flatness", help="axis fit of the normal field"))
    f.add_argument("--trace")
    f.add_argument("--s", type=_floats)
    pe = common(sub.add_parser("perimeter", help="fractional perimeter and BBM scan of a set"))
    pe.add_argument("--set")
    pe.add_argument("--s", type=_floats)
    pe.add_argument("--omega-radius", dest="omega_radius", type=float)
    pe.add_argument("--radii", type=_floats)
    c = common(sub.add_parser("crossing", help="crossing measure of a curve in a band"))
    c.add_argument("--curve")
    common(sub.add_parser("catalog", help="list built-in traces, curves and sets"))
    return p


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (OSError, ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def resolve_config(args):
    """Built-in defaults < config file < flags."""
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    if args.config:
        file_cfg = _load_config(args.config)
        unknown = set(file_cfg) - set(cfg) - {"out", "resolution", "tol"}
        if unknown:
            raise ConfigError(f"unknown config keys for {cmd}: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    for key in ("s", "sigma", "radii"):
        if key in cfg and cfg[key] is not None and not isinstance(cfg[key], list):
            cfg[key] = _floats(cfg[key]) if isinstance(cfg[key], str) else [float(cfg[key])]
    for v in cfg.get("s") or []:
        if not (0 < v < 1):
            raise ConfigError(f"s must lie in (0, 1), got {v}")
    for v in cfg.get("sigma") or []:
        if not (0.5 < v < 1):
            raise ConfigError(f"sigma must lie in (1/2, 1), got {v}")
    res = cfg.get("resolution")
    if res is not None and (not isinstance(res, int) or res < 3 or res > 100000):
        raise ConfigError(f"resolution out of range: {res}")
    return cfg


# ---------------------------------------------------------------- scenarios

def run_kernel(cfg):
    tol = cfg["tol"]
    a = np.linspace(-1.0, 1.0 - 1e-3, cfg["resolution"])
    rows, results = [], []
    for s in cfg["s"]:
        prm = kernels.KernelParams(s, quad_rel_tol=tol)
        vals = [kernels.kernel_ks(x, prm) for x in a]
        ratio = [v * (2 - 2 * x) ** ((2 + s) / 2) for v, x in zip(vals, a)]
        rows += [(s, float(x), v, r) for x, v, r in zip(a, vals, ratio)]
        exact = 1 / ((1 + s) * (2 + s))
        results.append({"s": s, "ks_at_minus_one": vals[0],
                        "closed_form_rel_error": abs(vals[0] - exact) / exact,
                        "min_lower_bound_ratio": min(ratio), "diagonal_constant": kernels.diagonal_constant(s)})
    tables = {"kernel.csv": (("s", "a", "k_s", "k_s_times_chord_power"), rows)}
    return {"scan": results}, tables, {"quad_rel_tol": tol}


def run_hardy(cfg):
    k = cfg["cutoff"]
    ppu = cfg["resolution"]
    rows, results = [], []
    corpus = hardy.profile_corpus()
    for sig in cfg["sigma"]:
        H = hardy_constant(FracOrder(sig, 2))
        opt = hardy.near_optimizer(sig, k, points_per_unit=ppu)
        entry = {"sigma": sig, "H": H, "near_optimizer": {
            "cutoff": k, "hardy_ratio": hardy.hardy_ratio(opt, sig),
            "C": hardy.corollary_check(opt, sig)}, "corpus": {}}
        rows.append((sig, H, "near-optimizer", entry["near_optimizer"]["hardy_ratio"],
                     entry["near_optimizer"]["hardy_ratio"] / H, entry["near_optimizer"]["C"]))
        for name, prof in corpus.items():
            r = hardy.hardy_ratio(prof, sig)
            C = hardy.corollary_check(prof, sig)
            entry["corpus"][name] = {"hardy_ratio": r, "ratio_over_H": r / H, "C": C}
            rows.append((sig, H, name, r, r / H, C))
        results.append(entry)
    tables = {"hardy.csv": (("sigma", "H", "profile", "hardy_ratio", "ratio_over_H", "C"), rows)}
    return {"sweep": results}, tables, {"far_extension_log_units": hardy.EXTENSION}


def _trace_from_cfg(cfg, n):
    if cfg.get("trace_file"):
        path = cfg["trace_file"]
        curve = read_curve_json(path) if path.endswith(".json") else read_curve_csv(path)
        return ConeTrace([curve], name=os.path.basename(path))
    return catalog.build_trace(cfg["trace"], n=n)


def run_stability(cfg, out=None):
    st = stability.StabilitySettings(radial_nodes=cfg["resolution"], angular_modes=cfg["modes"],
                                     eps=cfg["eps"], R=cfg["R"], angular_samples=cfg["samples"],
                                     tol=cfg["tol"])
    trace = stability.prepare_trace(_trace_from_cfg(cfg, 1024), st.angular_samples)
    reports, rows, c2rows = [], [], []
    for s in cfg["s"]:
        rep = stability.stability_report(trace, s, st).to_dict()
        prof = stability.c2_profile(trace, s)
        for ci, f in enumerate(prof.components):
            c2rows += [(s, ci, float(t), float(v)) for t, v in zip(f.grid, f.values[:, 0])]
        if cfg["radial_gap"]:
            zeta = hardy.near_optimizer((1 + s) / 2, cfg["cutoff"])
            lhs, rhs = stability.radial_stability_gap(trace, zeta, s)
            rep["radial_gap"] = {"lhs": lhs, "rhs": rhs, "violated": bool(lhs > rhs), "cutoff": cfg["cutoff"]}
        if cfg["export_matrices"] and out:
            write_matrices(stability.assemble_form(trace, s, st), os.path.join(out, f"matrices_s{s:g}"))
        reports.append(rep)
        rows.append((s, rep["A_total"], rep["trace_length"], rep["crucial_ratio"], rep["min_rayleigh"],
                     rep["verdict"]))
    tables = {"stability.csv": (("s", "A_total", "trace_length", "crucial_ratio", "min_rayleigh", "verdict"), rows),
              "c2.csv": (("s", "component", "t", "c2"), c2rows)}
    tol = {"verdict_rel_tol": cfg["tol"], "far_reach_log_units": stability.FAR_REACH,
           "local_model_width": stability.CHART_CUTOFF}
    return {"trace": trace.name, "reports": reports}, tables, tol


def run_flatness(cfg):
    trace = catalog.build_trace(cfg["trace"], n=cfg["resolution"])
    results, rows = [], []
    for s in cfg["s"]:
        for ci, (c, o) in enumerate(zip(trace.components, trace.orientation)):
            fit = seminorms.flatness_fit(c, s, o)
            results.append({"s": s, "component": ci, "axis": fit.axis, "dev": fit.dev,
                            "seminorm": fit.seminorm, "grid_scale": fit.grid_scale})
            rows.append((s, ci, *map(float, fit.axis), fit.dev, fit.seminorm))
    tables = {"flatness.csv": (("s", "component", "e1", "e2", "e3", "dev", "seminorm"), rows)}
    return {"trace": trace.name, "fits": results}, tables, {}


def run_perimeter(cfg):
    name, _ = catalog.parse_id(cfg["set"])
    res = cfg["resolution"] or (16 if name == "double-cone" else 128)
    E = catalog.build_set(cfg["set"], h=1.0 / res)
    lo, hi = np.asarray(E.origin), np.asarray(E.upper)
    half = float(np.min(hi - lo) / 2)
    centre = 0.5 * (lo + hi)
    rad = min(cfg["omega_radius"] or half, half - E.h)
    Omega = perimeter.GridSet.from_predicate(lambda x: np.sum((x - centre) ** 2, axis=-1) < rad ** 2,
                                             E.origin, E.upper, E.h)
    rows, scan = [], []
    for s in cfg["s"]:
        r = perimeter.fractional_perimeter(E, Omega, s)
        scan.append({"s": s, "P_s": r.value, "one_minus_s_P_s": (1 - s) * r.value, "tail": r.tail,
                     "tail_bound": r.tail_bound, "tail_exact": r.tail_exact})
        rows.append((s, r.value, (1 - s) * r.value, r.tail, r.tail_bound, r.tail_exact))
    classical = perimeter.classical_perimeter(E, Omega)
    radii = cfg["radii"] or [2 * rad * f for f in (0.25, 0.5, 0.75, 1.0)]
    dens = perimeter.perimeter_density_scan(E, centre, radii)
    tables = {"bbm.csv": (("s", "P_s", "one_minus_s_P_s", "tail", "tail_bound", "tail_exact"), rows),
              "density.csv": (("r", "density"), dens)}
    results = {"set": cfg["set"], "h": E.h, "dim": E.dim, "omega_radius": rad, "scan": scan,
               "classical_perimeter": classical, "density": [{"r": a, "density": b} for a, b in dens]}
    return results, tables, {"near_offsets": perimeter.NEAR, "tail_directions": perimeter.TAIL_DIRECTIONS}


def run_crossing(cfg):
    curve, band, window = catalog.build_curve(cfg["curve"])
    rep = crossing_report(curve, band, window)
    meas = cylinder_crossing_measure(curve, band, window)
    results = {"curve": cfg["curve"], "measure": meas, "ratio_to_2pi": meas / (2 * math.pi),
               "sphere_measure": rep.sphere_measure, "reparam_error": rep.reparam_error,
               "hypotheses": dict(rep.hypotheses), "band_half_height": band.b}
    tables = {"crossing.csv": (("measure", "sphere_measure", "ratio_to_2pi"),
                               [(meas, rep.sphere_measure, meas / (2 * math.pi))])}
    return results, tables, {}


def run_catalog(cfg):
    entries = catalog.list_catalog()
    for e in entries:
        if e["kind"] == "trace":
            catalog.build_trace(e["id"], n=256)
        elif e["kind"] == "curve":
            catalog.build_curve(e["id"])
        else:
            catalog.build_set(e["id"], h=1 / 16)
    rows = [(e["id"], e["kind"], e["description"]) for e in entries]
    return {"entries": entries}, {"catalog.csv": (("id", "kind", "description"), rows)}, {}


RUNNERS = {"kernel": run_kernel, "hardy": run_hardy, "flatness": run_flatness,
           "perimeter": run_perimeter, "crossing": run_crossing, "catalog": run_catalog}


def run_scenario(command, cfg):
    """Run one scenario; returns (report dict, csv tables)."""
    if command == "stability":
        results, tables, tol = run_stability(cfg, cfg.get("out"))
    else:
        results, tables, tol = RUNNERS[command](cfg)
    report = {
        "command": command,
        "config": {k: v for k, v in cfg.items() if k != "out"},
        "versions": {"nlcones": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "tolerances": tol,
        "results": results,
    }
    return report, tables


def _emit_error(kind, exc, code):
    sys.stdout.write(dump_json({"error": {"type": kind, "class": type(exc).__name__, "message": str(exc)}}))
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        if cfg.get("out"):
            os.makedirs(cfg["out"], exist_ok=True)
    except (ConfigError, catalog.CatalogError) as exc:
        return _emit_error("config", exc, 2)
    except OSError as exc:
        return _emit_error("config", exc, 2)
    try:
        report, tables = run_scenario(args.command, cfg)
    except catalog.CatalogError as exc:
        return _emit_error("config", exc, 2)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, DomainError, CurveError) as exc:
        return _emit_error("domain", exc, 1)
    text = dump_json(report)
    out = cfg.get("out")
    if out:
        with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(text)
        for name, (header, rows) in tables.items():
            write_table_csv(os.path.join(out, name), header, rows)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
