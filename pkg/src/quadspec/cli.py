"""
Command-line interface.

Subcommands read a JSON symbol file and write JSON (or CSV for grids).
Exit codes: 0 success, 1 parse error, 2 non-elliptic symbol, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .brackets import (NoWitnessWithinHorizon, PreconditionError,
                       bichar_witness, is_normal, order_at_halfline)
from .fock import BudgetExceeded
from .reduction import reduce_1d
from .resolvent import (FitAborted, fit_sc_index, halfline_profile,
                        pseudospectrum_grid)
from .spectrum import spectrum_lattice
from .symbol import (NonEllipticError, SectorKind, SymbolFormatError,
                     is_elliptic, numerical_range, symbol_from_dict,
                     symbol_to_dict)

EXIT_OK, EXIT_PARSE, EXIT_NONELLIPTIC, EXIT_BUDGET = 0, 1, 2, 3
SCHEMA_VERSION = 1


class CliError(Exception):
    def __init__(self, code, message, payload=None):
        super().__init__(message)
        self.code = code
        self.payload = payload


def load_schema(name):
    """Published JSON schema ``name`` (e.g. ``"analysis_report"``)."""
    from importlib.resources import files

    return json.loads(files("quadspec").joinpath("schemas", f"{name}.schema.json").read_text())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj):
    """Deterministic JSON text."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_symbol(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_PARSE, f"cannot read symbol file: {exc}") from exc
    try:
        return symbol_from_dict(data)
    except SymbolFormatError as exc:
        raise CliError(EXIT_PARSE, f"invalid symbol: {exc}") from exc


def _require_elliptic(q):
    ok, cert = is_elliptic(q)
    if not ok:
        raise CliError(EXIT_NONELLIPTIC, "symbol is not elliptic",
                       {"elliptic": False, "certificate": cert.to_dict()})
    return cert


def _floats(text):
    try:
        return [float(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(EXIT_PARSE, f"bad number list {text!r}") from exc


def _complex_arg(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"bad complex number {text!r}") from exc


def _etas(text):
    # "geom:a,b,m" gives m log-spaced values
    if text.startswith("geom:"):
        a, b, m = _floats(text[5:])
        return list(np.geomspace(a, b, int(m)))
    return _floats(text)


def _symbol_echo(q):
    return {**symbol_to_dict(q), "hash": q.digest()}


def analyze(q, radius=15.0, seed=0):
    """AnalysisReport as a plain dict."""
    cert = _require_elliptic(q)
    sector = numerical_range(q)
    normal = bool(is_normal(q))
    report = {"schema_version": SCHEMA_VERSION, "symbol": _symbol_echo(q),
              "elliptic": True, "certificate": cert.to_dict(),
              "numerical_range": sector.to_dict(), "normal": normal,
              "verdict": "Normal-Stable" if normal else "NonNormal-Unstable"}
    if sector.kind is SectorKind.FULL_PLANE:
        report["spectrum"] = {"available": False,
                              "note": "numerical range is the whole plane; no lattice formula"}
    else:
        report["spectrum"] = {"available": True, **spectrum_lattice(q, radius).to_dict()}
    if normal or sector.kind is not SectorKind.SECTOR:
        report["boundary_orders"] = "n/a"
    else:
        report["boundary_orders"] = [order_at_halfline(q, j, seed=seed).to_dict() for j in (1, 2)]
    if q.n == 1:
        report["normal_form_1d"] = reduce_1d(q).to_dict()
    return report


def cmd_analyze(args):
    q = load_symbol(args.symbol)
    return analyze(q, radius=args.radius, seed=args.seed)


def cmd_grid(args):
    q = load_symbol(args.symbol)
    _require_elliptic(q)
    region = _floats(args.region)
    res = [int(v) for v in _floats(args.res)]
    if len(region) != 4 or len(res) != 2 or region[0] >= region[1] or region[2] >= region[3]:
        raise CliError(EXIT_PARSE, "region needs re_min<re_max,im_min<im_max and res nx,ny")
    if min(res) < 2 or res[0] * res[1] > args.max_points:
        raise CliError(EXIT_PARSE, f"resolution must be >= 2 and at most {args.max_points} points")
    eps = _floats(args.eps_levels) if args.eps_levels else []
    grid = pseudospectrum_grid(q, region, res, eps, workers=args.workers, seed=args.seed)
    if np.all(np.isnan(grid.values)):
        raise CliError(EXIT_BUDGET, "matrix budget exceeded at every grid point")
    grid.write_csv(args.out)
    lines = args.lines or (args.out.rsplit(".", 1)[0] + "_levels.json")
    with open(lines, "w") as fh:
        fh.write(dumps(grid.level_lines_json()))
    return {"csv": args.out, "level_lines": lines, "validation_error": grid.validation_error,
            "converged_fraction": float(np.mean(grid.converged)),
            "budget_masked": int(np.sum(np.isnan(grid.values)))}


def cmd_profile(args):
    q = load_symbol(args.symbol)
    _require_elliptic(q)
    direction = np.exp(1j * args.angle) if args.angle is not None else _complex_arg(args.direction)
    if direction == 0:
        raise CliError(EXIT_PARSE, "direction must be nonzero")
    try:
        prof = halfline_profile(q, direction, _etas(args.etas))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    out = {"schema_version": SCHEMA_VERSION, "symbol_hash": q.digest(), **prof.to_dict()}
    if not all(prof.converged):
        raise CliError(EXIT_BUDGET, "some profile points did not converge within the budget", out)
    return out


def cmd_scindex(args):
    q = load_symbol(args.symbol)
    _require_elliptic(q)
    try:
        fit = fit_sc_index(q, _complex_arg(args.z), _floats(args.hs))
    except FitAborted as exc:
        raise CliError(EXIT_BUDGET, str(exc),
                       {"schema_version": SCHEMA_VERSION, "symbol_hash": q.digest(),
                        "partial": True, **exc.partial.to_dict()}) from exc
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    return {"schema_version": SCHEMA_VERSION, "symbol_hash": q.digest(),
            "partial": False, **fit.to_dict()}


def cmd_reduce1d(args):
    q = load_symbol(args.symbol)
    _require_elliptic(q)
    if q.n != 1:
        raise CliError(EXIT_PARSE, "reduce1d needs a one-dimensional symbol")
    return {"schema_version": SCHEMA_VERSION, "symbol_hash": q.digest(), **reduce_1d(q).to_dict()}


def cmd_witness(args):
    q = load_symbol(args.symbol)
    _require_elliptic(q)
    try:
        w = bichar_witness(q, _complex_arg(args.z), horizon=args.horizon, seed=args.seed)
    except PreconditionError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    except NoWitnessWithinHorizon as exc:
        return {"schema_version": SCHEMA_VERSION, "symbol_hash": q.digest(),
                "found": False, "reason": str(exc)}
    return {"schema_version": SCHEMA_VERSION, "symbol_hash": q.digest(),
            "found": True, **w.to_dict()}


def build_parser():
    p = argparse.ArgumentParser(prog="quadspec",
                                description="Spectral analysis of quadratic differential operators.")
    p.add_argument("--seed", type=int, default=0, help="seed for all random sampling")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp_ = sub.add_parser(name, help=help_)
        sp_.add_argument("symbol", help="JSON symbol file")
        sp_.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        sp_.set_defaults(func=func)
        return sp_

    a = add("analyze", cmd_analyze, "ellipticity, numerical range, normality, spectrum, orders")
    a.add_argument("--radius", type=float, default=15.0)
    a.add_argument("--out")

    g = add("grid", cmd_grid, "resolvent norms on a grid and epsilon level lines")
    g.add_argument("--region", required=True, help="re_min,re_max,im_min,im_max")
    g.add_argument("--res", required=True, help="nx,ny")
    g.add_argument("--eps-levels", default="", help="comma-separated epsilons")
    g.add_argument("--out", default="grid.csv")
    g.add_argument("--lines", help="level-line JSON path")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--max-points", type=int, default=250_000)

    pr = add("profile", cmd_profile, "resolvent norms along a half-line")
    pr.add_argument("--direction", default="1")
    pr.add_argument("--angle", type=float, help="direction as an angle in radians")
    pr.add_argument("--etas", required=True, help="list, or geom:a,b,count")
    pr.add_argument("--out")

    s = add("scindex", cmd_scindex, "semiclassical growth exponent at z")
    s.add_argument("--z", required=True)
    s.add_argument("--hs", required=True, help="comma-separated h values (fractions allowed)")
    s.add_argument("--out")

    r = add("reduce1d", cmd_reduce1d, "one-dimensional normal form")
    r.add_argument("--out")

    w = add("witness", cmd_witness, "bicharacteristic sign-change witness at interior z")
    w.add_argument("--z", required=True)
    w.add_argument("--horizon", type=float, default=200.0)
    w.add_argument("--out")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        result = args.func(args)
        code = EXIT_OK
    except CliError as exc:
        print(f"quadspec: {exc}", file=sys.stderr)
        if exc.payload is None:
            return exc.code
        result, code = exc.payload, exc.code
    except NonEllipticError as exc:
        print(f"quadspec: {exc}", file=sys.stderr)
        return EXIT_NONELLIPTIC
    except BudgetExceeded as exc:
        print(f"quadspec: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    text = dumps(result)
    out = getattr(args, "out", None)
    if out and args.command != "grid":
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
