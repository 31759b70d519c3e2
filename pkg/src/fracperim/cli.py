"""Command-line driver: ``fracperim <subcommand> [flags]``.

Exit status is 0 when every check passes, 1 on a check violation and 2 on a
configuration or I/O error.  Tables go to ``--out`` (or stdout); summaries
go to stdout, or to stderr when the table itself is on stdout.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys

import numpy as np

from .coercivity import compute_constants, default_param_grid, scan_positivity, scan_rows_csv, SCAN_FIELDS
from .experiments import (
    STABILITY_FIELDS,
    VARIATION_FIELDS,
    admissible_sample,
    sample_rng,
    stability_experiment,
    variation_checks,
)
from .functionals import fractional_perimeter
from .geometry import RegraphError, regraph
from .quadrature import QuadratureError, Resolution, default_resolution
from .specfun import FracParams, A_coefficient, dim_harmonic, lambda_eigenvalue, perimeter_ball
from .sphere import SphereFunction, c1_norm_estimate

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

# option name -> (type, built-in default)
OPTIONS = {
    "n": (int, 2),
    "s": (float, 0.25),
    "t": (float, 0.75),
    "alpha": (float, 0.5),
    "K": (int, None),
    "grid": (int, None),
    "samples": (int, 50),
    "seed": (int, 0),
    "eps": (float, 0.05),
    "tol": (float, 1e-6),
    "out": (str, None),
    "format": (str, "csv"),
    "input": (str, None),
}
K_DEFAULTS = {
    "spectrum": 10,
    "coercivity-scan": 200,
    "perimeter": 8,
    "variation-check": 8,
    "stability-experiment": 8,
    "regraph": None,
}


class ConfigError(Exception):
    pass


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[config]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    raw = dict(parser["config"])
    out = {}
    for key, val in raw.items():
        key = key.strip().lstrip("-").replace("-", "_")
        if key not in OPTIONS:
            raise ConfigError(f"unknown config key {key!r}")
        typ = OPTIONS[key][0]
        try:
            out[key] = typ(val.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return out


def resolve(args: argparse.Namespace) -> dict:
    cfg = read_config(args.config) if args.config else {}
    opts = {}
    for key, (_, default) in OPTIONS.items():
        flag = getattr(args, key, None)
        opts[key] = flag if flag is not None else cfg.get(key, default)
    if opts["K"] is None:
        opts["K"] = K_DEFAULTS[args.command]
    if opts["format"] not in ("csv", "json"):
        raise ConfigError("--format must be csv or json")
    return opts


def _params(o) -> FracParams:
    try:
        return FracParams(o["n"], o["s"], o["t"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolution(o, u) -> Resolution | None:
    if o["grid"] is None:
        return None
    base = default_resolution(u.n, u.K, c1_norm_estimate(u))
    return Resolution(o["grid"], base.radial, base.angular, base.box)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def table_text(fields, rows, fmt) -> str:
    if fmt == "json":
        return json.dumps([{k: _plain(r[k]) for k in fields} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in fields])
    return buf.getvalue()


class Emitter:
    """Writes the table to ``--out`` or stdout and the summary to the other stream."""

    def __init__(self, out_path):
        self.out_path = out_path
        self.summary_stream = sys.stdout if out_path else sys.stderr

    def table(self, text: str):
        if self.out_path:
            try:
                with open(self.out_path, "w", newline="") as fh:
                    fh.write(text)
            except OSError as exc:
                raise ConfigError(f"cannot write {self.out_path}: {exc}") from exc
        else:
            sys.stdout.write(text)

    def summary(self, obj):
        self.summary_stream.write(json.dumps(obj, indent=1, sort_keys=True, default=_fmt) + "\n")


def _load_function(path) -> SphereFunction:
    if not path:
        raise ConfigError("--input FILE with a serialized function is required")
    try:
        with open(path) as fh:
            return SphereFunction.from_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load function from {path}: {exc}") from exc


# --------------------------------------------------------------------------- commands


def cmd_spectrum(o) -> int:
    n, alpha, K = o["n"], o["alpha"], o["K"]
    try:
        ks = np.arange(K + 1)
        lam = lambda_eigenvalue(n, alpha, ks)
        A = A_coefficient(n, alpha, ks)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [{"k": int(k), "dim": dim_harmonic(n, int(k)), "lambda": float(l), "A": float(a)} for k, l, a in zip(ks, lam, A)]
    Emitter(o["out"]).table(table_text(("k", "dim", "lambda", "A"), rows, o["format"]))
    return EXIT_OK


def cmd_coercivity_scan(o, explicit: set) -> int:
    single = bool({"n", "s", "t"} & explicit)
    grid = [_params(o)] if single else default_param_grid()
    reports = [scan_positivity(p, o["K"]) for p in grid]
    em = Emitter(o["out"])
    if o["format"] == "json":
        rows = [dict(zip(SCAN_FIELDS, r)) for rep in reports for r in rep.rows]
        em.table(json.dumps(rows, indent=1) + "\n")
    else:
        em.table(scan_rows_csv(reports))
    bad = [rep.summary() for rep in reports if not rep.ok]
    summary = {
        "grid_points": len(reports),
        "Kmax": o["K"],
        "points_with_violations": len(bad),
        "gap_violations": sum(len(r.gap_violations) for r in reports),
        "ratio_violations": sum(len(r.ratio_violations) for r in reports),
        "monotonicity_violations": sum(len(r.monotonicity_violations) for r in reports),
        "min_margin": min(r.min_margin for r in reports),
    }
    if single:
        summary["constants"] = compute_constants(grid[0]).to_dict()
        summary["scan"] = reports[0].summary()
    em.summary(summary)
    return EXIT_OK if not bad else EXIT_VIOLATION


def cmd_perimeter(o) -> int:
    if o["input"]:
        u = _load_function(o["input"])
    else:
        u = admissible_sample(o["n"], o["K"], o["alpha"], o["eps"], sample_rng(o["seed"], 0))
    alpha = o["alpha"]
    em = Emitter(o["out"])
    try:
        val, err = fractional_perimeter(u, alpha, tol=o["tol"], resolution=_resolution(o, u), full_output=True)
        status = EXIT_OK
    except QuadratureError as exc:
        val, err, status = exc.value, exc.error, EXIT_VIOLATION
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    row = {
        "n": u.n,
        "alpha": alpha,
        "K": u.K,
        "c1_norm": c1_norm_estimate(u),
        "perimeter": val,
        "error": err,
        "ball_perimeter": perimeter_ball(u.n, alpha),
    }
    em.table(table_text(tuple(row), [row], o["format"]))
    return status


def cmd_variation_check(o) -> int:
    p = _params(o)
    rows = variation_checks(p, K=o["K"], seed=o["seed"], tol=o["tol"])
    em = Emitter(o["out"])
    em.table(table_text(VARIATION_FIELDS, rows, o["format"]))
    worst = {}
    for r in rows:
        key = r["check"].split("[")[0].split("(")[0]
        err = r["abs_error"] if r["reference"] == 0 else r["rel_error"]
        worst[key] = max(worst.get(key, 0.0), err)
    failed = [r["check"] for r in rows if not r["ok"]]
    em.summary({"max_errors": worst, "failed": failed})
    return EXIT_OK if not failed else EXIT_VIOLATION


def cmd_stability_experiment(o) -> int:
    p = _params(o)
    res = stability_experiment(p, K=o["K"], samples=o["samples"], seed=o["seed"], eps=o["eps"], tol=o["tol"])
    em = Emitter(o["out"])
    em.table(table_text(STABILITY_FIELDS, res.rows, o["format"]))
    em.summary(res.summary)
    return EXIT_OK if res.ok else EXIT_VIOLATION


def cmd_regraph(o) -> int:
    u = _load_function(o["input"])
    em = Emitter(o["out"])
    try:
        r = regraph(u)
    except RegraphError as exc:
        em.summary({"error": str(exc)})
        return EXIT_VIOLATION
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    info = {
        "y": [float(c) for c in r.y],
        "r": r.r,
        "c1_norm_u": c1_norm_estimate(u),
        "c1_norm_v": c1_norm_estimate(r.v),
        "c1_ratio": r.c1_ratio,
        "residual": r.residual,
        "min_jacobian": r.min_jacobian,
    }
    if o["format"] == "json":
        info["v"] = r.v.to_dict()
        em.table(json.dumps(info, indent=1) + "\n")
    else:
        row = dict(info, y=" ".join(repr(c) for c in info["y"]))
        em.table(table_text(tuple(row), [row], "csv"))
    return EXIT_OK if r.residual <= 1e-8 else EXIT_VIOLATION


COMMANDS = {
    "spectrum": ("eigenvalues and normalized coefficients per degree", cmd_spectrum),
    "coercivity-scan": ("positivity scan of the damped spectral gap", cmd_coercivity_scan),
    "perimeter": ("fractional perimeter of a nearly spherical set", cmd_perimeter),
    "variation-check": ("finite-difference and closed-form oracles for all variations", cmd_variation_check),
    "stability-experiment": ("seeded local stability experiment around the ball", cmd_stability_experiment),
    "regraph": ("re-express a set as a graph over its barycentric ball", cmd_regraph),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracperim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, _) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--n", type=int, help="dimension (default 2)")
        sp.add_argument("--s", type=float, help="lower order (default 0.25)")
        sp.add_argument("--t", type=float, help="upper order (default 0.75)")
        sp.add_argument("--alpha", type=float, help="order of a single perimeter (default 0.5)")
        sp.add_argument("--K", type=int, help="band limit or scan cutoff")
        sp.add_argument("--grid", type=int, help="outer quadrature nodes (default: automatic)")
        sp.add_argument("--samples", type=int, help="number of random samples (default 50)")
        sp.add_argument("--seed", type=int, help="RNG seed (default 0)")
        sp.add_argument("--eps", type=float, help="perturbation size in C1 norm (default 0.05)")
        sp.add_argument("--tol", type=float, help="relative quadrature tolerance (default 1e-6)")
        sp.add_argument("--out", help="write the table here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), help="table format (default csv)")
        sp.add_argument("--input", help="JSON file with a serialized sphere function")
        sp.add_argument("--config", help="flat key=value file; flags override it")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        opts = resolve(args)
        explicit = {k for k in OPTIONS if getattr(args, k, None) is not None}
        if args.config:
            explicit |= set(read_config(args.config))
        func = COMMANDS[args.command][1]
        if args.command == "coercivity-scan":
            return func(opts, explicit)
        return func(opts)
    except ConfigError as exc:
        print(f"fracperim: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
