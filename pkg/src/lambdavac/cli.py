"""Command-line front end.

    lambdavac verify --builtin space_periodic --lambda 1 --m 1
    lambdavac curvature --builtin space_periodic --at t=0,x=0
    lambdavac weyl --metric my.metric --at t=1,x=0.3
    lambdavac signmap --builtin singular_periodic --grid 0:12*pi:200,0:2*pi:200 --format csv
    lambdavac catalog

Exit status: 0 success, 1 verification failure, 2 input error.  Reports are
deterministic: keys are emitted in a fixed order and floats with 17
significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import analysis, ansatz, curvature, metriclang, newmanpenrose
from .symcore import (
    DomainPointError,
    Expr,
    InconclusiveError,
    Num,
    evaluate,
    prob_zero_test,
    serialize,
    simplify,
)
from .symcore.zerotest import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL

VERSION = "0.1.0"
DEFAULT_GRID = "0:12*pi:200,0:2*pi:200"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad flags or input; reported with exit status 2."""


# ---------------------------------------------------------------------------
# deterministic JSON
# ---------------------------------------------------------------------------


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    if v == 0:
        return "0"
    s = "%.17g" % v
    if "e" not in s and "." not in s and abs(v) >= 1e17:
        s += ".0"
    return s


def dumps(obj, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits and nan/inf as strings."""
    out: list = []

    def emit(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None:
            out.append(json.dumps(o))
        elif isinstance(o, (int, np.integer)):
            out.append(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            out.append(_fmt_float(float(o)))
        elif isinstance(o, Fraction):
            out.append(_fmt_float(float(o)) if o.denominator != 1 else str(o.numerator))
        elif isinstance(o, str):
            out.append(json.dumps(o, ensure_ascii=False))
        elif isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            items = list(o.items())
            for k, (key, val) in enumerate(items):
                out.append(pad + json.dumps(str(key), ensure_ascii=False) + ": ")
                emit(val, level + 1)
                out.append(",\n" if k < len(items) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(o, (list, tuple, np.ndarray)):
            seq = list(o)
            if not seq:
                out.append("[]")
                return
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
                parts = []
                for v in seq:
                    buf_start = len(out)
                    emit(v, level + 1)
                    parts.append("".join(out[buf_start:]))
                    del out[buf_start:]
                out.append("[" + ", ".join(parts) + "]")
                return
            out.append("[\n")
            for k, v in enumerate(seq):
                out.append(pad)
                emit(v, level + 1)
                out.append(",\n" if k < len(seq) - 1 else "\n")
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    return "".join(out) + "\n"


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _number(text: str, flag: str):
    try:
        e = metriclang.parse_expression(text)
    except metriclang.ParseError as err:
        raise InputError(f"{flag}: {err}\n  {err.pointer()}") from None
    if not isinstance(e, Num):
        raise InputError(f"{flag}: expected a number, got {text!r}")
    return e.value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--builtin", metavar="NAME", help="catalog solution name")
    src.add_argument("--metric", metavar="FILE", help=".metric file")
    common.add_argument("--lambda", dest="lam", metavar="R", help="cosmological constant (overrides the input)")
    common.add_argument("--m", dest="m", metavar="R", help="integration constant m (overrides the input)")
    common.add_argument("--grid", metavar="t0:t1:nt,x0:x1:nx", help=f"lattice for grid commands (default {DEFAULT_GRID})")
    common.add_argument("--at", metavar="t=..,x=..", help="evaluation point, or fixed coordinates for 'slice'")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="zero-test tolerance")
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="zero-test sample count")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="zero-test seed")
    common.add_argument("--k-threshold", type=float, default=analysis.DEFAULT_K_THRESHOLD, help="|K| threshold for physical loci")
    common.add_argument("--det-threshold", type=float, default=analysis.DEFAULT_DET_THRESHOLD, help="|det g| threshold for chart loci")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="lambdavac", description="Exact vacuum solutions with cosmological constant.")
    p.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "check R_mn - Lambda g_mn = 0 componentwise",
        "curvature": "scalar curvature, Kretschmann invariant and Riemann components",
        "weyl": "Newman-Penrose Weyl scalars in the adapted null tetrad",
        "signmap": "sign of g00 on a (t, x) lattice",
        "nullfield": "slopes dt/dx of the projected null directions",
        "singularities": "Kretschmann / determinant scan for singular loci",
        "slice": "induced metric with some coordinates held fixed (--at)",
        "catalog": "list the built-in solutions",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return p


def _load(args) -> ansatz.Solution:
    if not args.builtin and not args.metric:
        raise InputError("one of --builtin NAME or --metric FILE is required")
    lam = _number(args.lam, "--lambda") if args.lam is not None else None
    m = _number(args.m, "--m") if args.m is not None else None
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", metriclang.SolutionWarning)
            if args.builtin:
                sol = ansatz.builtin(args.builtin, lam, m)
            else:
                sol = ansatz.load_solution(args.metric, lam, m, path=True)
        for w in caught:
            if issubclass(w.category, metriclang.SolutionWarning):
                print(f"warning: {w.message}", file=sys.stderr)
        return sol
    except metriclang.ParseError as err:
        raise InputError(f"{args.metric}: {err}\n  {err.pointer()}") from None
    except (metriclang.SolutionFileError, ansatz.ParameterConstraintError, ValueError) as err:
        raise InputError(str(err)) from None
    except ansatz.CatalogError as err:
        raise InputError(err.args[0]) from None
    except OSError as err:
        raise InputError(f"cannot read {args.metric}: {err.strerror}") from None


def _grid(args) -> analysis.Grid2D:
    try:
        return analysis.Grid2D.parse(args.grid or DEFAULT_GRID)
    except analysis.GridSpecError as err:
        raise InputError(f"--grid: {err}") from None


def _point(args, sol, required: bool) -> dict | None:
    if args.at is None:
        if required:
            raise InputError("--at is required for this command")
        return None
    try:
        pt = analysis.parse_assignment(args.at)
    except analysis.GridSpecError as err:
        raise InputError(f"--at: {err}") from None
    unknown = set(pt) - set(sol.coords)
    if unknown:
        raise InputError(f"--at: unknown coordinate(s) {', '.join(sorted(unknown))}")
    return pt


def _zero_kw(args) -> dict:
    return {"samples": args.samples, "tol": args.tol, "seed": args.seed}


def _zero(e: Expr, args) -> bool | None:
    """prob_zero_test verdict, or None when inconclusive."""
    if isinstance(e, Num):
        return e.value == 0
    try:
        return prob_zero_test(e, **_zero_kw(args))
    except InconclusiveError:
        return None


def _binding(sol, pt: dict) -> dict:
    b = {c: 0.0 for c in sol.coords}
    b.update(pt)
    b.update(sol.params)
    return b


def _value(e: Expr, binding: dict):
    try:
        return evaluate(e, {k: binding[k] for k in e.free_symbols})
    except DomainPointError:
        return float("nan")
    except KeyError as err:
        raise InputError(f"no value for {err}") from None


def _header(args, sol) -> dict:
    params = {}
    for k, v in (("Lambda", sol.lam), ("m", sol.m)):
        params[k] = v.value if isinstance(v, Num) else serialize(v)
    head = {
        "tool": "lambdavac",
        "version": VERSION,
        "command": args.command,
        "input": {"builtin": args.builtin} if args.builtin else {"metric": args.metric},
        "solution": sol.name,
        "coords": list(sol.coords),
        "params": params,
        "conventions": {"curvature": curvature.CONVENTIONS, "newman_penrose": newmanpenrose.CONVENTIONS},
        "zero_test": {"samples": args.samples, "tol": args.tol, "seed": args.seed},
    }
    if isinstance(sol, ansatz.AnsatzSolution):
        head["a"] = serialize(sol.a)
        head["b"] = serialize(sol.b)
    return head


def _numeric_lambda(sol) -> object:
    if not isinstance(sol.lam, Num):
        raise InputError("Lambda must be numeric")
    return sol.lam.value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> tuple:
    sol = _load(args)
    lam = _numeric_lambda(sol)
    bundle = curvature.compute_curvature(sol.metric)
    res = curvature.einstein_residual(sol.metric, Num(lam), bundle)
    rows = []
    passed = 0
    inconclusive = 0
    for i in range(4):
        for j in range(i, 4):
            e = res[i, j]
            verdict = _zero(e, args)
            entry = {"index": [i, j], "residual": serialize(e), "vanishes": verdict}
            if verdict is None:
                inconclusive += 1
                entry["note"] = "inconclusive: too few sample points in the domain"
            elif verdict:
                passed += 1
            else:
                entry["sample"] = _first_sample(e, args)
            rows.append(entry)
    report = _header(args, sol)
    report["components"] = rows
    report["summary"] = f"{passed}/10 components vanish"
    report["status"] = "pass" if passed == 10 else "fail"
    return report, (EXIT_OK if passed == 10 else EXIT_FAIL), None


def _first_sample(e: Expr, args) -> dict:
    from .symcore.zerotest import zero_residuals

    if isinstance(e, Num):
        return {"value": float(e.value)}
    try:
        vals, _ = zero_residuals(e, samples=args.samples, seed=args.seed)
    except InconclusiveError:
        return {}
    return {"value": float(vals[0])}


def cmd_curvature(args) -> tuple:
    sol = _load(args)
    pt = _point(args, sol, required=False)
    bundle = curvature.compute_curvature(sol.metric)
    report = _header(args, sol)
    report["scalar_curvature"] = serialize(bundle.scalar)
    report["kretschmann"] = serialize(bundle.kretschmann)
    comps = [{"index": list(idx), "expr": serialize(e)} for idx, e in bundle.nonzero_riemann()]
    report["riemann_nonzero"] = comps
    report["riemann_nonzero_count"] = len(comps)
    if isinstance(sol.lam, Num):
        report["scalar_curvature_is_4_lambda"] = _zero(simplify(bundle.scalar - 4 * sol.lam), args)
    if pt is not None:
        b = _binding(sol, pt)
        det = _value(sol.metric.determinant, b)
        values = {
            "point": {c: b[c] for c in sol.coords},
            "det_g": det,
            "chart_degenerate": bool(not math.isnan(det) and abs(det) < analysis.DEFAULT_DET_THRESHOLD),
            "scalar_curvature": _value(bundle.scalar, b),
            "kretschmann": _value(bundle.kretschmann, b),
            "riemann": [{"index": list(idx), "value": _value(e, b)} for idx, e in bundle.nonzero_riemann()],
        }
        report["at"] = values
    return report, EXIT_OK, None


def cmd_weyl(args) -> tuple:
    sol = _load(args)
    pt = _point(args, sol, required=False)
    bundle = curvature.compute_curvature(sol.metric)
    try:
        a = sol.a if isinstance(sol, ansatz.AnsatzSolution) else None
        tetrad = newmanpenrose.canonical_tetrad(sol.metric, a=a)
    except (newmanpenrose.UnsupportedStructureError, newmanpenrose.DegenerateTetradError) as err:
        raise InputError(f"weyl: {err}") from None
    psi = newmanpenrose.weyl_scalars(bundle, tetrad)
    report = _header(args, sol)
    report["tetrad_normalization"] = tetrad.check(sol.metric, **_zero_kw(args))
    scalars = {}
    for name, (re, im) in psi.as_dict().items():
        scalars[name] = {"re": serialize(re), "im": serialize(im), "vanishes": bool(_zero(re, args) and _zero(im, args))}
    report["scalars"] = scalars
    report["petrov_hint"] = newmanpenrose.petrov_hint(psi, **_zero_kw(args))
    if isinstance(sol, ansatz.AnsatzSolution):
        report["psi2"] = _psi2_report(sol, psi, args)
    if pt is not None:
        b = _binding(sol, pt)
        report["at"] = {
            "point": {c: b[c] for c in sol.coords},
            "scalars": {n: {"re": _value(re, b), "im": _value(im, b)} for n, (re, im) in psi.as_dict().items()},
        }
    return report, EXIT_OK, None


def _psi2_report(sol, psi, args) -> dict:
    forms = newmanpenrose.psi2_closed_forms(sol.a, sol.lam, sol.m)
    re2 = psi[2][0]
    out = {
        "closed_form_checks": {
            "-m/(2*a^3)": _zero(simplify(re2 - forms["computed"]), args),
            "-Lambda/9 + m/(6*a^3)": _zero(simplify(re2 - forms["lambda_ninth"]), args),
        }
    }
    if isinstance(sol.lam, Num) and isinstance(sol.m, Num):
        lam = float(sol.lam.value)
        fit = newmanpenrose.fit_psi2(re2, sol.a, sol.params, seed=args.seed)
        out["fit"] = {"form": "alpha + beta/a^3", "alpha": fit.alpha, "beta": fit.beta, "max_relative_residual": fit.max_residual, "points": fit.points}
        match = newmanpenrose.classify_constant(fit, lam)
        out["constant_term"] = {
            "candidates": {"-Lambda/9": -lam / 9, "-2*Lambda/9": -2 * lam / 9},
            "matches": match,
            "discrepancy": match not in ("-Lambda/9",),
        }
    return out


def _grid_cmd(args, build) -> tuple:
    sol = _load(args)
    grid = _grid(args)
    try:
        rep = build(sol, grid)
    except (analysis.UnboundParameterError, ValueError) as err:
        raise InputError(str(err)) from None
    if args.format == "csv":
        return None, EXIT_OK, rep.to_csv()
    report = _header(args, sol)
    report["grid"] = rep.summary()
    report["t"] = grid.t
    report["x"] = grid.x
    if rep.kind == "slope":
        report["branches"] = ["dt=0", "dt/dx=-2*g01/g00"]
        report["slope_expr"] = serialize(analysis.null_slope_expr(sol.metric))
    report["values"] = [list(row) for row in rep.column()]
    return report, EXIT_OK, None


def cmd_signmap(args) -> tuple:
    return _grid_cmd(args, analysis.g00_sign_map)


def cmd_nullfield(args) -> tuple:
    return _grid_cmd(args, analysis.null_slope_field)


def cmd_singularities(args) -> tuple:
    sol = _load(args)
    grid = _grid(args)
    bundle = curvature.compute_curvature(sol.metric)
    try:
        loci = analysis.singularity_scan(sol, grid, args.k_threshold, args.det_threshold, bundle=bundle)
    except (analysis.UnboundParameterError, ValueError) as err:
        raise InputError(str(err)) from None
    if args.format == "csv":
        rest = {c: Num(0) for c in sol.coords[2:]}
        from .symcore import substitute_many

        rep = analysis.scalar_field(sol, substitute_many(bundle.kretschmann, rest), grid, "kretschmann")
        return None, EXIT_OK, rep.to_csv()
    report = _header(args, sol)
    report["kretschmann"] = serialize(bundle.kretschmann)
    report["determinant"] = serialize(sol.metric.determinant)
    report["loci"] = loci.as_dict()
    report["counts"] = {"physical": len(loci.physical), "edge": len(loci.edge), "chart": len(loci.chart)}
    return report, EXIT_OK, None


def cmd_slice(args) -> tuple:
    sol = _load(args)
    if args.format == "csv":
        raise InputError("slice reports are JSON only")
    fixed = _point(args, sol, required=True)
    try:
        g = analysis.induced_slice(sol, fixed)
    except ValueError as err:
        raise InputError(str(err)) from None
    report = _header(args, sol)
    report["fixed"] = fixed
    report["slice_coords"] = list(g.coords)
    report["components"] = [
        {"index": [i, j], "expr": serialize(g[i, j])} for i in range(g.dim) for j in range(i, g.dim) if not (isinstance(g[i, j], Num) and g[i, j].value == 0)
    ]
    return report, EXIT_OK, None


def cmd_catalog(args) -> tuple:
    if args.format == "csv":
        lines = ["name,Lambda,m,a"]
        for name, entry in ansatz.CATALOG.items():
            spec = entry.spec()
            lines.append(f"{name},{_fmt_float(float(spec.params['Lambda']))},{_fmt_float(float(spec.params['m']))},\"{serialize(spec.a)}\"")
        return None, EXIT_OK, "\n".join(lines) + "\n"
    entries = []
    for name, entry in ansatz.CATALOG.items():
        spec = entry.spec()
        entries.append(
            {
                "name": name,
                "summary": entry.summary,
                "a": serialize(spec.a),
                "defaults": {"Lambda": spec.params["Lambda"], "m": spec.params["m"]},
            }
        )
    return {"tool": "lambdavac", "version": VERSION, "command": "catalog", "entries": entries}, EXIT_OK, None


COMMANDS = {
    "verify": cmd_verify,
    "curvature": cmd_curvature,
    "weyl": cmd_weyl,
    "signmap": cmd_signmap,
    "nullfield": cmd_nullfield,
    "singularities": cmd_singularities,
    "slice": cmd_slice,
    "catalog": cmd_catalog,
}


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as err:
        raise InputError(f"cannot write {path}: {err.strerror}") from None


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    if args.command != "catalog" and args.format == "csv" and args.command in ("verify", "curvature", "weyl"):
        print(f"error: {args.command} reports are JSON only", file=sys.stderr)
        return EXIT_INPUT
    try:
        report, status, text = COMMANDS[args.command](args)
        _write(text if text is not None else dumps(report), args.out)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
