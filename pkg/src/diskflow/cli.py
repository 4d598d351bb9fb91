"""Batch experiment driver.

Three subcommands, all driven by a single JSON config document:

    diskflow simulate --config cfg.json --out results/
    diskflow report   --config cfg.json --out results/
    diskflow field    --config cfg.json --out results/

simulate integrates one trajectory per initial point and writes each as a
CSV with header t,re,im,err (full double precision).  report runs one of
the experiment suites and writes report_<kind>.json plus per-cell curve
CSVs.  field samples the generator on a rectangle and writes the direction
field as CSV.

Config schema (JSON object; unknown keys rejected):

    generator   one generator object, or
    generators  list of generator objects (as in generator_to_dict:
                {"a": [re,im], "alpha": x, "b": [re,im], "beta": x,
                 "remainder": {"kind": "zero"|"extra_power"|"rational", ...}})
    points      list of [re, im] initial points
    frame       "disk" or "halfplane": how to read points (default depends
                on the experiment; see below)
    grid        {"t_max": x, "t0": x, "ratio": x, "include_zero": bool}
                or {"times": [t0, t1, ...]} (strictly increasing)
    tolerances  {"rel_tol": x, "abs_tol": x}
    kind        report experiment: asymptotics | geometry | omega |
                asymptote | rigidity | appendix
    out         output directory (the --out flag overrides)
    im_zero     optional bool forcing the Im(.)=0 dichotomy branch
    c_values    rigidity only: list of [re, im] perturbations
    theta       rigidity only: angle for the strong scaled limit (unused
                by the weak experiment; recorded)
    region      field only: [re_min, re_max, im_min, im_max]
    nx, ny      field only: grid resolution

Flags override config fields: --t-max replaces grid.t_max, --tol replaces
both integrator tolerances (rel_tol=tol, abs_tol=tol/100), --out replaces
out.  --parallel N fans simulate cells out to N worker threads; outputs
are written in config order afterwards, so parallelism never changes
bytes.  Report suites run their cells sequentially (each cell already
batches its orbits through the vectorized kernel).

Report JSON schema, per cell: {"regime": ..., "limit": {"value": [re, im],
"error": x, "model": ..., "divergent": bool}, "prediction_error_curve":
[[t, err], ...]} plus kind-specific fields, wrapped in a document carrying
{"meta": {"config_sha256", "version", "backend", "tolerances"}}.  Geometry
curve CSVs have header t,d,gap,kappa.

Exit codes: 0 success, 2 config error, 3 numeric failure.

Points default to the disk frame for simulate, geometry, and rigidity, and
to the half-plane frame for asymptotics, asymptote, and appendix (those
experiments live naturally on the conjugate flow).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from ._kernel import BACKEND
from .asymptotics import (
    appendix_limit,
    classify_regime,
    estimate_limit,
    predict_disk,
    predict_halfplane,
    remainder_decay,
)
from .errors import (
    AdmissibilityError,
    IntegrationError,
    QuadratureError,
    ValidationError,
)
from .flow import (
    ExplicitGrid,
    GeometricGrid,
    IntegratorConfig,
    direction_field,
    integrate_trajectory,
)
from .generators import cayley, cayley_inverse, generator_from_dict, generator_to_dict
from .geometry import (
    _im_dichotomy,
    classify_omega,
    contact_order_for,
    contact_order_theory,
    curvature_value,
    asymptote_report,
    limit_curvature_class,
    limit_slope,
    resolved_im_dichotomy,
    tangent_distance,
)
from .rigidity import weak_rigidity_experiment

REPORT_KINDS = ("asymptotics", "geometry", "omega", "asymptote", "rigidity", "appendix")

_CONFIG_KEYS = {
    "generator",
    "generators",
    "points",
    "frame",
    "grid",
    "tolerances",
    "kind",
    "out",
    "im_zero",
    "c_values",
    "theta",
    "region",
    "nx",
    "ny",
}

_DEFAULT_FRAME = {
    "simulate": "disk",
    "geometry": "disk",
    "rigidity": "disk",
    "omega": "disk",
    "asymptotics": "halfplane",
    "asymptote": "halfplane",
    "appendix": "halfplane",
}


def _fail_config(msg):
    raise ValidationError(msg)


def _pair(v, what):
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 2
        or not all(isinstance(x, (int, float)) for x in v)
    ):
        _fail_config(f"{what} must be a [re, im] pair, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def load_config(path, overrides):
    """Parse and validate the config document, applying flag overrides.

    Returns (config_dict, sha256_of_effective_config).  The hash covers
    the merged document, so runs that differ only in flags hash apart.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        _fail_config(f"cannot read config {path}: {exc}")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        _fail_config(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        _fail_config("config must be a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        _fail_config(f"unknown config keys: {sorted(unknown)}")

    if overrides.get("t_max") is not None:
        grid = dict(cfg.get("grid", {}))
        if "times" in grid:
            _fail_config("--t-max cannot override an explicit times grid")
        grid["t_max"] = overrides["t_max"]
        cfg["grid"] = grid
    if overrides.get("tol") is not None:
        tol = overrides["tol"]
        cfg["tolerances"] = {"rel_tol": tol, "abs_tol": tol / 100.0}
    if overrides.get("out") is not None:
        cfg["out"] = overrides["out"]
    if "out" not in cfg:
        _fail_config("no output directory: set config key 'out' or pass --out")

    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return cfg, hashlib.sha256(canon).hexdigest()


def _generators(cfg):
    if ("generator" in cfg) == ("generators" in cfg):
        _fail_config("config needs exactly one of 'generator' or 'generators'")
    raw = [cfg["generator"]] if "generator" in cfg else cfg["generators"]
    if not isinstance(raw, list) or not raw:
        _fail_config("'generators' must be a non-empty list")
    return [generator_from_dict(d) for d in raw]


def _points(cfg, required=True):
    pts = cfg.get("points")
    if pts is None:
        if required:
            _fail_config("config key 'points' is required for this command")
        return []
    if not isinstance(pts, list) or not pts:
        _fail_config("'points' must be a non-empty list of [re, im] pairs")
    return [_pair(p, "point") for p in pts]


def _grid(cfg):
    g = cfg.get("grid", {})
    if not isinstance(g, dict):
        _fail_config("'grid' must be an object")
    if "times" in g:
        times = g["times"]
        if not isinstance(times, list) or len(times) < 2:
            _fail_config("grid.times must list at least two times")
        arr = [float(t) for t in times]
        if any(b <= a for a, b in zip(arr, arr[1:])):
            _fail_config("grid.times must be strictly increasing")
        return ExplicitGrid(tuple(arr))
    return GeometricGrid.to_horizon(
        float(g.get("t_max", 1e6)),
        t0=float(g.get("t0", 1.0)),
        ratio=float(g.get("ratio", 2.0**0.25)),
        include_zero=bool(g.get("include_zero", True)),
    )


def _integrator(cfg):
    t = cfg.get("tolerances", {})
    if not isinstance(t, dict):
        _fail_config("'tolerances' must be an object")
    return IntegratorConfig(
        rel_tol=float(t.get("rel_tol", 1e-10)),
        abs_tol=float(t.get("abs_tol", 1e-12)),
    )


def _meta(cfg, sha):
    tol = cfg.get("tolerances", {})
    return {
        "config_sha256": sha,
        "version": __version__,
        "backend": BACKEND,
        "tolerances": {
            "rel_tol": float(tol.get("rel_tol", 1e-10)),
            "abs_tol": float(tol.get("abs_tol", 1e-12)),
        },
    }


def _jfloat(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _jcomplex(z):
    z = complex(z)
    return [_jfloat(z.real), _jfloat(z.imag)]


def _jestimate(est):
    return {
        "value": _jcomplex(est.value),
        "error": _jfloat(est.error),
        "model": est.model,
        "divergent": bool(est.divergent),
    }


def _atomic_write(path, data):
    if isinstance(data, str):
        data = data.encode()
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_json(path, doc):
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    _atomic_write(path, text)


def _csv_rows(header, rows):
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(f"{float(v):.17g}" for v in row) + "\n")
    return buf.getvalue()


def _map_cells(fn, cells, parallel):
    if parallel > 1 and len(cells) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(fn, cells))
    return [fn(c) for c in cells]


def _frame(cfg, command_or_kind):
    frame = cfg.get("frame", _DEFAULT_FRAME[command_or_kind])
    if frame not in ("disk", "halfplane"):
        _fail_config(f"frame must be 'disk' or 'halfplane', got {frame!r}")
    return frame


def cmd_simulate(cfg, sha, parallel):
    gens = _generators(cfg)
    points = _points(cfg)
    grid = _grid(cfg)
    config = _integrator(cfg)
    frame = _frame(cfg, "simulate")
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)

    cells = [(gi, pj) for gi in range(len(gens)) for pj in range(len(points))]

    def run(cell):
        gi, pj = cell
        traj = integrate_trajectory(
            gens[gi], points[pj], grid=grid, config=config, frame=frame
        )
        buf = io.StringIO()
        traj.to_csv(buf)
        return buf.getvalue()

    results = _map_cells(run, cells, parallel)
    files = []
    for (gi, pj), text in zip(cells, results):
        name = f"traj_g{gi}_p{pj}.csv"
        _atomic_write(os.path.join(out, name), text)
        files.append(name)
    _write_json(
        os.path.join(out, "sim_manifest.json"),
        {"meta": _meta(cfg, sha), "files": files, "frame": frame},
    )
    return 0


def cmd_field(cfg, sha, parallel):
    gens = _generators(cfg)
    if len(gens) != 1:
        _fail_config("field wants exactly one generator")
    region = cfg.get("region")
    if region is None:
        _fail_config("field needs config key 'region'")
    if not isinstance(region, list) or len(region) != 4:
        _fail_config("region must be [re_min, re_max, im_min, im_max]")
    nx = int(cfg.get("nx", 24))
    ny = int(cfg.get("ny", 18))
    z, fz = direction_field(gens[0], tuple(float(v) for v in region), nx=nx, ny=ny)
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    rows = np.column_stack([z.real, z.imag, fz.real, fz.imag])
    _atomic_write(os.path.join(out, "field.csv"), _csv_rows("re,im,f_re,f_im", rows))
    _write_json(
        os.path.join(out, "field_manifest.json"),
        {
            "meta": _meta(cfg, sha),
            "files": ["field.csv"],
            "region": [float(v) for v in region],
            "nx": nx,
            "ny": ny,
            "samples": int(z.size),
        },
    )
    return 0


def _report_asymptotics(cfg, gens, points, grid, frame):
    cells = []
    for gi, gen in enumerate(gens):
        regime = classify_regime(gen)
        predict = predict_halfplane if frame == "halfplane" else predict_disk
        for pj, p in enumerate(points):
            times, scaled = remainder_decay(gen, p, grid, frame=frame)
            est = estimate_limit(list(zip(times, np.abs(scaled))))
            w0 = p if frame == "halfplane" else cayley(p)
            traj = integrate_trajectory(gen, w0, grid=grid, frame="halfplane")
            sel = traj.times > 0
            pred = predict(gen, p, traj.times[sel])
            numeric = (
                traj.points[sel]
                if frame == "halfplane"
                else cayley_inverse(traj.points[sel])
            )
            # relative error: the prediction tracks a quantity growing like
            # a power of t, and its own residual is the O(1) Koenigs offset
            err_curve = np.abs(numeric - pred) / np.maximum(np.abs(numeric), 1e-300)
            cells.append(
                {
                    "generator_index": gi,
                    "point": _jcomplex(p),
                    "regime": regime.variant,
                    "limit": _jestimate(est),
                    "prediction_error_curve": [
                        [_jfloat(t), _jfloat(e)]
                        for t, e in zip(traj.times[sel], err_curve)
                    ],
                }
            )
    return cells, {}


def _report_geometry(cfg, gens, points, grid, frame):
    im_zero = cfg.get("im_zero")
    cells = []
    curves = {}
    for gi, gen in enumerate(gens):
        for pj, z in enumerate(points):
            zd = z if frame == "disk" else cayley_inverse(z)
            rep = contact_order_for(gen, zd, t_grid=grid, im_zero=im_zero)
            theo_order, theo_const, logc = contact_order_theory(gen, zd, im_zero=im_zero)
            traj = integrate_trajectory(gen, zd, grid=grid, frame="disk")
            sel = traj.times > 0
            dist = np.abs(tangent_distance(gen, traj)[sel, 1])
            gap = np.abs(1.0 - traj.points[sel])
            f_vals = gen.f(traj.points[sel])
            fp_vals = gen.f_prime(traj.points[sel])
            kap = np.array(
                [curvature_value(fv, fpv) for fv, fpv in zip(f_vals, fp_vals)]
            )
            name = f"geometry_g{gi}_p{pj}.csv"
            curves[name] = _csv_rows(
                "t,d,gap,kappa",
                np.column_stack([traj.times[sel], dist, gap, kap]),
            )
            cells.append(
                {
                    "generator_index": gi,
                    "point": _jcomplex(zd),
                    "omega": classify_omega(gen.alpha, gen.beta).variant,
                    "tangent_slope": _jfloat(limit_slope(gen)),
                    "estimated_order": _jfloat(rep.estimated_order),
                    "theoretical_order": _jfloat(theo_order),
                    "limit_constant": (
                        None if rep.limit_constant is None else _jestimate(rep.limit_constant)
                    ),
                    "theoretical_constant": (
                        None if theo_const is None else _jfloat(theo_const)
                    ),
                    "log_corrected": bool(logc),
                    "fit_r2": _jfloat(rep.fit_r2),
                    "above_all": bool(rep.above_all),
                    "unreliable": bool(rep.unreliable),
                    "curve_csv": name,
                }
            )
    return cells, curves


def _report_omega(cfg, gens, points, grid, frame):
    im_zero = cfg.get("im_zero")
    cells = []
    for gi, gen in enumerate(gens):
        value, _scale = _im_dichotomy(gen)
        cells.append(
            {
                "generator_index": gi,
                "omega": classify_omega(gen.alpha, gen.beta).variant,
                "im_dichotomy": _jfloat(value),
                "im_dichotomy_zero": resolved_im_dichotomy(gen, im_zero=im_zero),
                "curvature_class": (
                    limit_curvature_class(gen, im_zero=im_zero) if gen.b != 0 else None
                ),
            }
        )
    return cells, {}


def _report_asymptote(cfg, gens, points, grid, frame):
    im_zero = cfg.get("im_zero")
    cells = []
    for gi, gen in enumerate(gens):
        for pj, p in enumerate(points):
            w = p if frame == "halfplane" else cayley(p)
            rep = asymptote_report(gen, w, t_grid=grid, im_zero=im_zero)
            cells.append(
                {
                    "generator_index": gi,
                    "point": _jcomplex(w),
                    "exists": rep.exists,
                    "shared_across_initial_points": rep.shared_across_initial_points,
                    "passes_through_minus_one": rep.passes_through_minus_one,
                    "intercept": (
                        None if rep.intercept is None else _jfloat(rep.intercept)
                    ),
                    "limit": _jestimate(rep.numeric_limit),
                    "inconsistent": bool(rep.inconsistent),
                }
            )
    return cells, {}


def _report_rigidity(cfg, gens, points, grid, frame):
    raw_cs = cfg.get("c_values")
    if not isinstance(raw_cs, list) or not raw_cs:
        _fail_config("rigidity reports need a non-empty 'c_values' list")
    c_values = [_pair(c, "c value") for c in raw_cs]
    cells = []
    curves = {}
    for gi, gen in enumerate(gens):
        for pj, z in enumerate(points):
            zd = z if frame == "disk" else cayley_inverse(z)
            for ci, c in enumerate(c_values):
                res = weak_rigidity_experiment(gen, c, zd, t_grid=grid)
                rep = res.report
                name = f"rigidity_g{gi}_p{pj}_c{ci}.csv"
                curves[name] = _csv_rows("t,d,gap", rep.gap_curve)
                cells.append(
                    {
                        "generator_index": gi,
                        "point": _jcomplex(zd),
                        "c": _jcomplex(c),
                        "verdict": res.verdict,
                        "exceeds_beta": bool(res.exceeds_beta),
                        "estimated_order": _jfloat(rep.estimated_order),
                        "fit_r2": _jfloat(rep.fit_r2),
                        "above_all": bool(rep.above_all),
                        "unreliable": bool(rep.unreliable),
                        "curve_csv": name,
                    }
                )
    return cells, curves


def _report_appendix(cfg, gens, points, grid, frame):
    cells = []
    for gi, gen in enumerate(gens):
        for pj, p in enumerate(points):
            w = p if frame == "halfplane" else cayley(p)
            est, closed = appendix_limit(gen, w, t_grid=grid)
            diff = abs(complex(est.value) - closed)
            cells.append(
                {
                    "generator_index": gi,
                    "point": _jcomplex(w),
                    "limit": _jestimate(est),
                    "closed_form": _jcomplex(closed),
                    "abs_difference": _jfloat(diff),
                    "within_error": bool(diff <= max(5.0 * est.error, 1e-8)),
                }
            )
    return cells, {}


_REPORTS = {
    "asymptotics": _report_asymptotics,
    "geometry": _report_geometry,
    "omega": _report_omega,
    "asymptote": _report_asymptote,
    "rigidity": _report_rigidity,
    "appendix": _report_appendix,
}


def cmd_report(cfg, sha, parallel):
    kind = cfg.get("kind")
    if kind not in REPORT_KINDS:
        _fail_config(f"report kind must be one of {REPORT_KINDS}, got {kind!r}")
    gens = _generators(cfg)
    points = _points(cfg, required=kind not in ("omega",))
    grid = _grid(cfg)
    frame = _frame(cfg, kind)
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    try:
        cells, curves = _REPORTS[kind](cfg, gens, points, grid, frame)
    except (ValidationError, AdmissibilityError) as exc:
        raise type(exc)(f"report kind={kind}: {exc}") from exc
    except (IntegrationError, QuadratureError) as exc:
        raise type(exc)(f"report kind={kind}: {exc}") from exc
    for name in sorted(curves):
        _atomic_write(os.path.join(out, name), curves[name])
    doc = {
        "meta": _meta(cfg, sha),
        "kind": kind,
        "frame": frame,
        "generators": [generator_to_dict(g) for g in gens],
        "cells": cells,
    }
    _write_json(os.path.join(out, f"report_{kind}.json"), doc)
    return 0


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="diskflow",
        description="batch driver for disk semigroup experiments",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "integrate trajectories to CSV"),
        ("report", "run an experiment suite to JSON + CSV"),
        ("field", "sample the direction field to CSV"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config document")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--t-max", type=float, default=None, help="override grid.t_max")
        p.add_argument(
            "--tol",
            type=float,
            default=None,
            help="override tolerances (rel_tol=TOL, abs_tol=TOL/100)",
        )
        p.add_argument("--parallel", type=int, default=1, help="worker threads")
    return ap


def main(argv=None):
    args = _build_parser().parse_args(argv)
    overrides = {"t_max": args.t_max, "tol": args.tol, "out": args.out}
    try:
        cfg, sha = load_config(args.config, overrides)
        if args.parallel < 1:
            _fail_config("--parallel must be at least 1")
        dispatch = {"simulate": cmd_simulate, "report": cmd_report, "field": cmd_field}
        return dispatch[args.command](cfg, sha, args.parallel)
    except (ValidationError, AdmissibilityError) as exc:
        print(f"diskflow: config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, QuadratureError, FloatingPointError, OverflowError) as exc:
        print(f"diskflow: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
