"""Command-line interface.

Every command writes a CSV table (``--out``, default stdout) and a JSON
manifest (``--manifest``, default next to the CSV) holding the resolved
configuration, the library version, diagnostics and wall time.

Exit status: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    BUILTIN_DATA,
    builtin_datum,
    decay_experiment,
    longtime_experiment,
    lp_norm,
)
from .cesaro import cesaro_values
from .errors import DtfracError, InputError, NumericalError
from .fracdiff import (
    MeshSequence,
    backward_difference,
    caputo_difference,
    fractional_sum,
    rl_difference,
)
from .identities import SUITES
from .kernels import (
    KernelQuery,
    discrete_gaussian,
    discrete_gaussian_multiplier,
    frac_fundamental,
    frac_multiplier,
    gaussian_kernel,
)
from .solver import SCHEMES, Field, GridSpec, SolveConfig, solve
from .specfun import FracParams, ml_discrete_series, wright_table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

DEFAULTS = {
    "alpha": 0.5,
    "beta": 1.0,
    "h": 1.0,
    "lam": 0.0,
    "n": 1,
    "n_max": 16,
    "j_max": 16,
    "t": 1.0,
    "N": 1,
    "L": 40.0,
    "M": 256,
    "p": 2.0,
    "scheme": "multiplier",
    "tol": 1e-10,
    "x": "-10:10:201",
    "n_range": None,
    "datum": "gaussian",
    "width": 1.0,
    "shift": 2.0,
    "quantity": "kernel",
    "suite": "all",
    "op": "caputo",
    "seed": 0,
    "every": 1,
    "spectral": False,
}

# grids sized for long runs (kernel tails below the fit tolerance at n = 4096)
COMMAND_DEFAULTS = {
    "decay": {"L": 500.0, "M": 16384},
    "longtime": {"L": 400.0, "M": 8192},
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _float_or_inf(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    if str(text).lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("output")
    g.add_argument("--config", help="JSON file with parameters; flags take precedence")
    g.add_argument("--out", help="CSV output path (default: stdout)")
    g.add_argument("--manifest", help="JSON manifest path (default: <out>.json, or stderr)")
    g.add_argument("--seed", type=int, default=None)


def _params(p: argparse.ArgumentParser, *names: str) -> None:
    spec = {
        "alpha": dict(type=float), "beta": dict(type=float), "h": dict(type=float),
        "lam": dict(type=float, help="Mittag-Leffler argument lambda"),
        "n": dict(type=int, help="time index"), "n_max": dict(type=int), "j_max": dict(type=int),
        "t": dict(type=float), "N": dict(type=int, help="space dimension"),
        "L": dict(type=float, help="half-extent of the periodic box"),
        "M": dict(type=int, help="grid points per axis (power of two)"),
        "p": dict(type=_float_or_inf, help="norm exponent, 'inf' allowed"),
        "scheme": dict(choices=SCHEMES), "tol": dict(type=float),
        "x": dict(help="sample points 'start:stop:count' or comma list"),
        "n_range": dict(help="'lo:hi' time-index range"),
        "datum": dict(help=f"built-in datum {BUILTIN_DATA} or a CSV path"),
        "width": dict(type=float), "shift": dict(type=float),
        "quantity": dict(choices=("kernel", "gradient", "solution")),
        "suite": dict(choices=("all",) + tuple(SUITES)),
        "op": dict(choices=("backward", "sum", "rl", "caputo")),
        "every": dict(type=int, help="write every k-th step"),
        "spectral": dict(action="store_const", const=True, help="evaluate the multiplier instead"),
    }
    for name in names:
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, default=None, **spec[name])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dtfrac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    table = sub.add_parser("table", help="sequence tables")
    table.add_argument("kind", choices=("cesaro", "ml", "wright"))
    _params(table, "alpha", "beta", "h", "lam", "n_max", "j_max", "tol")
    _common(table)

    kern = sub.add_parser("kernel", help="heat kernels on a set of points")
    kern.add_argument("kind", choices=("gaussian", "discrete", "fractional"))
    _params(kern, "alpha", "h", "n", "t", "N", "x", "tol", "spectral")
    _common(kern)

    sol = sub.add_parser("solve", help="solve on a periodic grid")
    _params(sol, "alpha", "h", "n", "N", "L", "M", "scheme", "tol", "datum", "width", "shift",
            "every")
    _common(sol)

    dec = sub.add_parser("decay", help="fit L^p decay exponents")
    _params(dec, "alpha", "h", "p", "N", "L", "M", "n_range", "quantity")
    _common(dec)

    lt = sub.add_parser("longtime", help="scaled distance to the mass times the kernel")
    _params(lt, "alpha", "h", "p", "N", "L", "M", "n_range", "width", "shift")
    _common(lt)

    ver = sub.add_parser("verify", help="run identity checks")
    _params(ver, "suite", "alpha", "h")
    _common(ver)

    op = sub.add_parser("apply-op", help="apply a fractional operator to a sequence CSV")
    op.add_argument("input", help="CSV with a 'value' column, one row per n = 0, 1, ...")
    _params(op, "op", "alpha", "h")
    _common(op)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the JSON config file and explicit flags (in that order)."""
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if value is not None and key != "config":
            cfg[key] = value
    cfg["p"] = _float_or_inf(cfg["p"])
    return cfg


def _points(spec) -> np.ndarray:
    if isinstance(spec, (list, tuple)):
        return np.asarray(spec, dtype=float)
    spec = str(spec)
    try:
        if ":" in spec:
            lo, hi, count = spec.split(":")
            return np.linspace(float(lo), float(hi), int(count))
        return np.array([float(v) for v in spec.split(",")])
    except ValueError as exc:
        raise InputError(f"cannot parse points {spec!r}") from exc


def _n_range(spec, default) -> tuple[int, int]:
    if spec is None:
        return default
    if isinstance(spec, (list, tuple)):
        lo, hi = spec
    else:
        lo, hi = str(spec).split(":")
    return int(lo), int(hi)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# -- commands ----------------------------------------------------------------


def cmd_table(cfg: dict):
    kind = cfg["kind"]
    a, b, h = cfg["alpha"], cfg["beta"], cfg["h"]
    if kind == "cesaro":
        vals = cesaro_values(a, cfg["n_max"])
        return ["n", "value"], list(enumerate(vals)), {}
    if kind == "ml":
        FracParams(min(a, 1.0), 0.0, h)
        rows, diag = [], {"terms": [], "precision": []}
        for n in range(1, cfg["n_max"] + 1):
            res = ml_discrete_series(a, b, cfg["lam"], n, h, tol=cfg["tol"])
            rows.append((n, res.value, res.err_estimate))
            diag["terms"].append(res.terms)
            diag["precision"].append(res.precision)
        return ["n", "value", "err_estimate"], rows, diag
    tab = wright_table(FracParams(a, b, h), cfg["n_max"], cfg["j_max"])
    rows = [(n, j, tab.entries[n, j], tab.err_bound)
            for n in range(tab.n_max + 1) for j in range(tab.j_max + 1)]
    return ["n", "j", "value", "err_bound"], rows, {"method": tab.method, "err_bound": tab.err_bound}


def cmd_kernel(cfg: dict):
    kind, N = cfg["kind"], int(cfg["N"])
    x = _points(cfg["x"])
    pts = x if N == 1 else np.column_stack([x] + [np.zeros_like(x)] * (N - 1))
    diag: dict = {}
    if cfg["spectral"]:
        n = int(cfg["n"])
        if kind == "gaussian":
            vals = np.exp(-cfg["t"] * x**2)
        elif kind == "discrete":
            vals = discrete_gaussian_multiplier(n, cfg["h"], x)
        else:
            vals = frac_multiplier(cfg["alpha"], n, cfg["h"], x, tol=cfg["tol"])
        return ["xi", "value"], list(zip(x, np.atleast_1d(vals))), diag
    if kind == "gaussian":
        vals = gaussian_kernel(cfg["t"], pts, N)
    elif kind == "discrete":
        vals = discrete_gaussian(cfg["n"], cfg["h"], pts, N)
    else:
        a = cfg["alpha"]
        q = KernelQuery(N, int(cfg["n"]), FracParams(a, 1.0 - a if a < 1 else 0.0, cfg["h"]), x=pts)
        res = frac_fundamental(q, tol=cfg["tol"])
        vals, diag = res.values, res.diagnostics()
    header = ["x"] if N == 1 else [f"x{i + 1}" for i in range(N)]
    coords = pts.reshape(len(x), -1)
    rows = [tuple(c) + (v,) for c, v in zip(coords, np.atleast_1d(vals))]
    return header + ["value"], rows, diag


def _load_datum(grid: GridSpec, cfg: dict) -> Field:
    name = str(cfg["datum"])
    if name in BUILTIN_DATA:
        return builtin_datum(grid, name, width=cfg["width"], shift=cfg["shift"])
    path = Path(name)
    if not path.exists():
        raise InputError(f"unknown datum {name!r}: not a built-in and no such file")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.M**grid.N, grid.N + 1):
        raise InputError(f"datum CSV must have {grid.M ** grid.N} rows of x1..xN,value")
    return Field(grid, data[:, -1])


def cmd_solve(cfg: dict):
    grid = GridSpec(int(cfg["N"]), cfg["L"], int(cfg["M"]))
    f = _load_datum(grid, cfg)
    sc = SolveConfig(cfg["alpha"], cfg["h"], int(cfg["n"]), cfg["scheme"], cfg["tol"], history=True)
    traj = solve(f, sc)
    every = max(int(cfg["every"]), 1)
    coords = [c.ravel() for c in grid.coords()]
    header = ["step"] + [f"x{i + 1}" for i in range(grid.N)] + ["value"]
    rows = []
    for n in range(0, len(traj), every):
        vals = traj[n].samples.ravel()
        rows.extend((n,) + tuple(c[k] for c in coords) + (vals[k],) for k in range(vals.size))
    m0 = f.mass()
    diag = {
        "norms": {str(p): [lp_norm(u, p) for u in traj] for p in (1.0, 2.0, math.inf)},
        "mass_drift": max(abs(u.mass() - m0) for u in traj) / max(abs(m0), 1e-300),
        "first_moment_drift": max(float(np.max(np.abs(u.first_moment() - f.first_moment())))
                                  for u in traj),
    }
    return header, rows, diag


def cmd_decay(cfg: dict):
    N = int(cfg["N"])
    grid = GridSpec(N, cfg["L"], int(cfg["M"]))
    lo, hi = _n_range(cfg["n_range"], (64, 4096))
    rep = decay_experiment(cfg["quantity"], cfg["alpha"], cfg["p"], (lo, hi), cfg["h"], grid)
    rows = list(zip(rep.times / cfg["h"], rep.times, rep.norms))
    return ["n", "t", "norm"], rows, {"verdict": rep.verdict(0.10)}


def cmd_longtime(cfg: dict):
    grid = GridSpec(int(cfg["N"]), cfg["L"], int(cfg["M"]))
    lo, hi = _n_range(cfg["n_range"], (16, 1024))
    datum = builtin_datum(grid, "shifted-gaussian", width=cfg["width"], shift=cfg["shift"])
    rep = longtime_experiment(cfg["alpha"], cfg["p"], (lo, hi), cfg["h"], grid, datum=datum)
    decreasing = bool(np.all(np.diff(rep.norms) < 0))
    verdict = rep.verdict(0.15)
    verdict["decreasing"] = decreasing
    verdict["pass"] = verdict["pass"] and decreasing
    rows = list(zip(rep.times / cfg["h"], rep.times, rep.norms))
    return ["n", "t", "scaled_gap"], rows, {"verdict": verdict}


def cmd_verify(cfg: dict):
    names = list(SUITES) if cfg["suite"] == "all" else [cfg["suite"]]
    results = []
    for name in names:
        for check in SUITES[name]:
            kwargs = {}
            code = check.__code__.co_varnames[: check.__code__.co_argcount]
            if "alpha" in code and cfg.get("_alpha_set"):
                kwargs["alpha"] = cfg["alpha"]
            if "h" in code and cfg.get("_h_set"):
                kwargs["h"] = cfg["h"]
            if "seed" in code and cfg.get("_seed_set"):
                kwargs["seed"] = cfg["seed"]
            res = check(**kwargs)
            results.append((name, res))
    rows = [(s, r.name, r.max_error, r.tolerance, "pass" if r.passed else "fail") for s, r in results]
    diag = {"identities": [dict(suite=s, **r.as_dict()) for s, r in results],
            "all_pass": all(r.passed for _, r in results)}
    return ["suite", "identity", "max_error", "tolerance", "status"], rows, diag


def cmd_apply_op(cfg: dict):
    try:
        with open(cfg["input"], newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "value" not in reader.fieldnames:
                raise InputError("input CSV needs a 'value' column")
            values = [float(row["value"]) for row in reader]
    except OSError as exc:
        raise InputError(f"cannot read {cfg['input']}: {exc}") from exc
    f = MeshSequence(cfg["h"], np.array(values))
    op, a = cfg["op"], cfg["alpha"]
    if op == "backward":
        out = backward_difference(f)
    elif op == "sum":
        out = fractional_sum(a, f)
    elif op == "rl":
        out = rl_difference(a, f)
    else:
        out = caputo_difference(a, f)
    return ["n", "value"], list(enumerate(out.values)), {}


COMMANDS = {
    "table": cmd_table,
    "kernel": cmd_kernel,
    "solve": cmd_solve,
    "decay": cmd_decay,
    "longtime": cmd_longtime,
    "verify": cmd_verify,
    "apply-op": cmd_apply_op,
}


def _emit(cfg: dict, text: str, manifest: dict) -> None:
    out = cfg.get("out")
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    blob = json.dumps(_jsonable(manifest), sort_keys=True, indent=2) + "\n"
    target = cfg.get("manifest") or (str(Path(out).with_suffix(".json")) if out and out != "-" else None)
    if target:
        Path(target).write_text(blob)
    else:
        sys.stderr.write(blob)


def _emit_config_error(argv, message: str) -> None:
    # best effort: recover the output paths from a command line that did not parse
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out")
    p.add_argument("--manifest")
    known, _ = p.parse_known_args(sys.argv[1:] if argv is None else argv)
    out = known.out if known.out != "-" else None
    target = known.manifest or (str(Path(out).with_suffix(".json")) if out else None)
    if not target:
        return
    manifest = {"config": None, "version": __version__, "diagnostics": {"error": message},
                "wall_time_s": 0.0, "exit_status": EXIT_CONFIG}
    try:
        Path(target).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    except OSError:
        pass


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve(args)
    except ConfigError as exc:
        sys.stderr.write(f"dtfrac: invalid configuration: {exc}\n")
        _emit_config_error(argv, str(exc))
        return EXIT_CONFIG
    for key in ("alpha", "h", "seed"):
        cfg[f"_{key}_set"] = getattr(args, key, None) is not None
    start = time.perf_counter()
    status = EXIT_OK
    try:
        header, rows, diag = COMMANDS[cfg["command"]](cfg)
    except NumericalError as exc:
        sys.stderr.write(f"dtfrac: numerical failure: {exc}\n")
        header, rows, diag, status = None, None, {"error": str(exc)}, EXIT_NUMERIC
    except (DtfracError, ValueError) as exc:
        sys.stderr.write(f"dtfrac: invalid configuration: {exc}\n")
        header, rows, diag, status = None, None, {"error": str(exc)}, EXIT_CONFIG
    if status == EXIT_OK and cfg["command"] == "verify" and not diag["all_pass"]:
        status = EXIT_NUMERIC
    manifest = {
        "config": {k: v for k, v in cfg.items() if not k.startswith("_")},
        "version": __version__,
        "diagnostics": diag,
        "wall_time_s": time.perf_counter() - start,
        "exit_status": status,
    }
    _emit(cfg, write_csv(header, rows) if header else "", manifest)
    return status


if __name__ == "__main__":
    sys.exit(main())
