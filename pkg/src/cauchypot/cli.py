"""Command-line front end: configs in, CSV tables and JSON summaries out.

One run is one JSON config naming a command, a geometry, and the data it
needs.  Results land in the output directory as ``solution.csv`` (or a
grid/atom table for the recovery commands) plus ``summary.json``.  All
floating-point output is printed with 17 significant digits so files
round-trip losslessly; serial reruns of the same config are byte-identical.

Exit codes: 0 for success (including "no bounded solution", which is an
answer, not a failure), 64 for config/schema violations (message carries a
config line number), 65 for numerical non-convergence (message carries the
failing node index when one exists).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .arcs import (
    ComplexPolynomial,
    bounded_solution,
    general_solution,
    solvability_moments,
)
from .cauchy import singular_S
from .closed import solve_closed
from .errors import (
    AlignmentError,
    CauchypotError,
    GeometryError,
    ResolutionError,
    SchemaError,
)
from .geometry import ArcSystem, ClosedContour, parse_geometry
from .potential import (
    PotentialField,
    detect_point_masses,
    equilibrium_density,
    read_potential_binary,
    read_potential_csv,
    recover_area_density,
    recover_curve_density,
)
from .sampling import (
    SampledDensity,
    read_density_csv,
    read_solution_csv,
    write_solution_csv,
)

__all__ = ["main", "run_config"]

_COMMANDS = (
    "solve-closed", "solve-arcs", "bounded", "moments",
    "recover-curve", "recover-area", "point-masses", "equilibrium",
)


class _ConfigError(Exception):
    """Schema-level complaint, annotated with the offending config key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


def _key_line(text, key):
    """1-based line of the first occurrence of a config key, for messages."""
    if key:
        needle = f'"{key}"'
        for ln, line in enumerate(text.splitlines(), start=1):
            if needle in line:
                return ln
    return 1


def _fmt(x):
    return format(float(x), ".17g")


def _json17(obj, indent=0):
    """Deterministic JSON with floats at 17 significant digits."""
    pad = "  " * indent
    pad_in = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{pad_in}"{k}": {_json17(v, indent + 1)}'
                for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{pad_in}{_json17(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_summary(out_dir, doc):
    (out_dir / "summary.json").write_text(_json17(doc) + "\n", encoding="ascii")


def _pairs(values):
    return [[float(v.real), float(v.imag)] for v in np.atleast_1d(values)]


# ---------------------------------------------------------------------------
# config ingestion
# ---------------------------------------------------------------------------

def _geometry(config):
    spec = config.get("geometry")
    if not isinstance(spec, dict):
        raise _ConfigError("config needs a 'geometry' mapping", key="geometry")
    return parse_geometry(spec)


def _rhs_values(spec, host):
    if not isinstance(spec, dict):
        raise _ConfigError("config needs an 'rhs' mapping", key="rhs")
    family = spec.get("family")
    t = host.nodes
    if family == "monomial":
        n = int(spec.get("degree", -1))
        if n < 0:
            raise _ConfigError("monomial rhs needs a degree >= 0", key="rhs")
        return t ** n
    if family == "chebyshev-T":
        n = int(spec.get("degree", -1))
        if n < 0:
            raise _ConfigError("chebyshev-T rhs needs a degree >= 0", key="rhs")
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        return np.polynomial.chebyshev.chebval(t, coeffs).astype(complex)
    if family == "constant":
        v = spec.get("value", 1.0)
        if isinstance(v, (list, tuple)):
            v = complex(float(v[0]), float(v[1]))
        return np.full(t.size, complex(v))
    if family == "csv":
        path = spec.get("path")
        if not path:
            raise _ConfigError("csv rhs needs a 'path'", key="rhs")
        # accept both the 3-column density table and the 6-column solution
        # table, so solver outputs feed straight back in as right-hand sides
        with open(path, newline="") as fh:
            ncols = len(fh.readline().split(","))
        if ncols >= 6:
            return read_solution_csv(path, host=host)
        return read_density_csv(path, expect=host.n_nodes)
    raise _ConfigError(f"unknown rhs family {family!r}", key="rhs")


def _potential_evaluator(spec):
    """Analytic potential families for the normal-derivative recovery."""
    if not isinstance(spec, dict):
        raise _ConfigError("config needs a 'potential' mapping", key="potential")
    family = spec.get("family")
    if family == "point-charges":
        charges = [(complex(float(c[0]), float(c[1])), float(c[2]))
                   for c in spec.get("charges", [])]
        if not charges:
            raise _ConfigError("point-charges needs a nonempty 'charges' list",
                               key="potential")

        def u(z):
            return math.fsum(m * math.log(abs(z - a)) for a, m in charges)

        return u
    if family == "disk-wall":
        r = float(spec.get("radius", 1.0))
        c = spec.get("center", [0.0, 0.0])
        c = complex(float(c[0]), float(c[1]))
        if r <= 0:
            raise _ConfigError("disk-wall needs a positive radius", key="potential")
        # equilibrium potential of the uniform circle measure
        return lambda z: max(math.log(abs(z - c)), math.log(r))
    if family == "segment-green":
        a = float(spec.get("a", -1.0))
        b = float(spec.get("b", 1.0))
        if not b > a:
            raise _ConfigError("segment-green needs b > a", key="potential")
        mid, half = 0.5 * (a + b), 0.5 * (b - a)

        def u(z):
            w = (complex(z) - mid) / half
            s = np.sqrt(w - 1.0) * np.sqrt(w + 1.0)
            return math.log(abs(w + s)) + math.log(half / 2.0)

        return u
    raise _ConfigError(f"unknown potential family {family!r}", key="potential")


def _potential_grid(spec):
    if not isinstance(spec, dict):
        raise _ConfigError("config needs a 'potential' mapping", key="potential")
    family = spec.get("family")
    if family == "csv":
        if "path" not in spec:
            raise _ConfigError("csv potential needs a 'path'", key="potential")
        return read_potential_csv(spec["path"])
    if family == "binary":
        if "data" not in spec or "header" not in spec:
            raise _ConfigError("binary potential needs 'data' and 'header' "
                               "paths", key="potential")
        return read_potential_binary(spec["data"], spec["header"])
    raise _ConfigError(
        f"grid commands need a csv or binary potential, not {family!r}",
        key="potential")


# ---------------------------------------------------------------------------
# command handlers: each returns (exit_code, summary dict)
# ---------------------------------------------------------------------------

def _cmd_solve_closed(config, out_dir, tols):
    tol = tols["residual"]
    host = _geometry(config)
    if not isinstance(host, ClosedContour):
        raise _ConfigError("solve-closed needs a closed-contour geometry",
                           key="geometry")
    g = SampledDensity(host, _rhs_values(config.get("rhs"), host))
    f = solve_closed(g, tolerance=None)
    residual = f.meta["residual"]
    write_solution_csv(out_dir / "solution.csv", host, f.values)
    summary = {
        "command": "solve-closed",
        "n_nodes": host.n_nodes,
        "residual": residual,
        "tolerance": tol,
    }
    if residual > tol:
        back = singular_S(f)
        worst = int(np.argmax(np.abs(back.values - g.values)))
        print(f"solve-closed did not converge: residual {residual:.3g} "
              f"exceeds {tol:.3g} at node {worst}", file=sys.stderr)
        return 65, summary
    return 0, summary


def _cmd_solve_arcs(config, out_dir, tols):
    tol = tols["residual"]
    host = _geometry(config)
    if not isinstance(host, ArcSystem):
        raise _ConfigError("solve-arcs needs an arc-system geometry",
                           key="geometry")
    if "defect_poly" not in config:
        raise _ConfigError(
            "solve-arcs requires 'defect_poly' (kernel polynomial "
            "coefficients as [re, im] pairs; use [[0.0, 0.0]] for none)",
            key="defect_poly")
    P = ComplexPolynomial.from_json(config["defect_poly"])
    g = SampledDensity(host, _rhs_values(config.get("rhs"), host))
    f = general_solution(g, system=host, P=P)
    applied = singular_S(f, density_class="inverse_sqrt")
    residual = float(np.max(np.abs(applied.values - g.values)))
    write_solution_csv(out_dir / "solution.csv", host, f.values)
    summary = {
        "command": "solve-arcs",
        "n_nodes": host.n_nodes,
        "kernel_poly": [[float(c.real), float(c.imag)]
                        for c in P.coefficients],
        "residual": residual,
        "tolerance": tol,
    }
    if residual > tol:
        worst = int(np.argmax(np.abs(applied.values - g.values)))
        print(f"solve-arcs did not converge: residual {residual:.3g} "
              f"exceeds {tol:.3g} at node {worst}", file=sys.stderr)
        return 65, summary
    return 0, summary


def _cmd_bounded(config, out_dir, tols):
    host = _geometry(config)
    if not isinstance(host, ArcSystem):
        raise _ConfigError("bounded needs an arc-system geometry", key="geometry")
    g = SampledDensity(host, _rhs_values(config.get("rhs"), host))
    report = bounded_solution(g, system=host)
    write_solution_csv(out_dir / "solution.csv", host, report.solution.values)
    summary = {"command": "bounded"}
    summary.update(report.to_json("solution.csv"))
    # no bounded solution is a result, not a tool failure: exit 0 either way
    return 0, summary


def _cmd_moments(config, out_dir, tols):
    host = _geometry(config)
    if not isinstance(host, ArcSystem):
        raise _ConfigError("moments needs an arc-system geometry", key="geometry")
    g = SampledDensity(host, _rhs_values(config.get("rhs"), host))
    m = solvability_moments(g, system=host)
    write_solution_csv(out_dir / "solution.csv", host, g.values)
    return 0, {
        "command": "moments",
        "n_nodes": host.n_nodes,
        "moments": _pairs(m),
    }


def _cmd_recover_curve(config, out_dir, tols):
    host = _geometry(config)
    u = _potential_evaluator(config.get("potential"))
    # gap flagging only runs when a flag tolerance was actually requested;
    # evaluation blow-ups are always flagged by the library
    est = recover_curve_density(u, host, tol=tols["flag"])
    write_solution_csv(out_dir / "solution.csv", host,
                       est.curve_density.values)
    summary = {
        "command": "recover-curve",
        "n_nodes": host.n_nodes,
        "total_mass": est.total_mass,
        "flagged_nodes": [int(k) for k in est.flagged_nodes],
    }
    if est.flagged_nodes:
        print("recover-curve: one-sided derivatives did not converge at node "
              f"{est.flagged_nodes[0]} "
              f"({len(est.flagged_nodes)} nodes flagged)", file=sys.stderr)
        return 65, summary
    return 0, summary


def _grid_table(out_dir, name, est):
    ny, nx = est.area_density.shape
    x0, y0 = est.area_origin
    h = est.area_h
    with open(out_dir / name, "w", encoding="ascii") as fh:
        fh.write("x,y,density\n")
        for iy in range(ny):
            for ix in range(nx):
                fh.write(f"{_fmt(x0 + ix * h)},{_fmt(y0 + iy * h)},"
                         f"{_fmt(est.area_density[iy, ix])}\n")


def _cmd_recover_area(config, out_dir, tols):
    grid = _potential_grid(config.get("potential"))
    h_max = config.get("tolerances", {}).get("h_max")
    est = recover_area_density(grid, h_max=h_max)
    _grid_table(out_dir, "density.csv", est)
    ny, nx = est.area_density.shape
    return 0, {
        "command": "recover-area",
        "total_mass": est.total_mass,
        "grid": {"nx": nx, "ny": ny, "x0": est.area_origin[0],
                 "y0": est.area_origin[1], "h": est.area_h},
    }


def _cmd_point_masses(config, out_dir, tols):
    grid = _potential_grid(config.get("potential"))
    radius = config.get("cluster_radius")
    if radius is None:
        raise _ConfigError("point-masses needs 'cluster_radius'",
                           key="cluster_radius")
    overlaps = []
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        est = detect_point_masses(grid, cluster_radius=float(radius))
        overlaps = [str(w.message) for w in rec]
    with open(out_dir / "masses.csv", "w", encoding="ascii") as fh:
        fh.write("index,re_a,im_a,mass\n")
        for k, (a, m) in enumerate(est.point_masses):
            fh.write(f"{k},{_fmt(a.real)},{_fmt(a.imag)},{_fmt(m)}\n")
    return 0, {
        "command": "point-masses",
        "point_masses": [[float(a.real), float(a.imag), float(m)]
                         for a, m in est.point_masses],
        "total_mass": est.total_mass,
        "warnings": overlaps,
    }


def _cmd_equilibrium(config, out_dir, tols):
    shape = config.get("shape")
    if not isinstance(shape, dict):
        raise _ConfigError("equilibrium needs a 'shape' mapping", key="shape")
    est = equilibrium_density(shape)
    host = est.curve_density.host
    write_solution_csv(out_dir / "solution.csv", host,
                       est.curve_density.values)
    return 0, {
        "command": "equilibrium",
        "n_nodes": host.n_nodes,
        "total_mass": est.total_mass,
    }


_HANDLERS = {
    "solve-closed": _cmd_solve_closed,
    "solve-arcs": _cmd_solve_arcs,
    "bounded": _cmd_bounded,
    "moments": _cmd_moments,
    "recover-curve": _cmd_recover_curve,
    "recover-area": _cmd_recover_area,
    "point-masses": _cmd_point_masses,
    "equilibrium": _cmd_equilibrium,
}


def run_config(config, out_dir, tol=None, serial=False):
    """Run one validated config mapping; returns the process exit code."""
    command = config.get("command")
    if command not in _COMMANDS:
        raise _ConfigError(
            f"unknown command {command!r}; expected one of {', '.join(_COMMANDS)}",
            key="command")
    tolerances = config.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise _ConfigError("'tolerances' must be a mapping", key="tolerances")
    for name, val in tolerances.items():
        if not (isinstance(val, (int, float)) and not isinstance(val, bool)
                and val > 0):
            raise _ConfigError(f"tolerance '{name}' must be positive",
                               key="tolerances")
    flag_tol = tol if tol is not None else tolerances.get("flag")
    tols = {
        "residual": float(tol if tol is not None
                          else tolerances.get("residual", 1e-8)),
        "flag": None if flag_tol is None else float(flag_tol),
    }
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    code, summary = _HANDLERS[command](config, out_dir, tols)
    summary["serial"] = bool(serial)
    _write_summary(out_dir, summary)
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cauchypot",
        description="Singular integral equations with Cauchy kernel, and "
                    "measure recovery from logarithmic potentials.")
    parser.add_argument("--config", required=True, help="JSON run config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--serial", action="store_true",
                        help="force bit-reproducible serial mode")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the residual/flagging tolerance")
    args = parser.parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        print("config:1: --tol must be positive", file=sys.stderr)
        return 64
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"{args.config}:1: cannot read config: {exc}", file=sys.stderr)
        return 64
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"{args.config}:{exc.lineno}: {exc.msg}", file=sys.stderr)
        return 64
    if not isinstance(config, dict):
        print(f"{args.config}:1: config must be a JSON object", file=sys.stderr)
        return 64
    try:
        return run_config(config, args.out, tol=args.tol, serial=args.serial)
    except _ConfigError as exc:
        print(f"{args.config}:{_key_line(text, exc.key)}: {exc}",
              file=sys.stderr)
        return 64
    except ResolutionError as exc:
        # under-resolution outranks the GeometryError base it derives from:
        # the config parsed fine, the numerics just cannot be done on it
        print(f"numerical resolution failure: {exc}", file=sys.stderr)
        return 65
    except (SchemaError, GeometryError, AlignmentError, KeyError,
            TypeError, OSError) as exc:
        print(f"{args.config}:1: {exc}", file=sys.stderr)
        return 64
    except CauchypotError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 65


if __name__ == "__main__":
    sys.exit(main())
