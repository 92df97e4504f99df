"""Command-line front end.

Subcommands: sieve, wsum, moment, riemann, integrate, verify, asymptotic.
Reports go to stdout as json, csv or aligned text; diagnostics go to stderr
as ``cesaro <module>: <cause>``.

Exit codes: 0 success, 1 verification failed, 2 usage or input error,
3 any other computation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, fields, is_dataclass

from . import arith
from .errors import CesaroError, InvalidArgument
from .expr import evaluate
from .quad import QuadResult, integrate, limit_functional
from .sums import WeightKind, WeightSpec, riemann_sum, weighted_sum
from .verify import (
    AsymptoticReport,
    ConvergenceReport,
    MomentRow,
    asymptotic_check,
    load_catalog,
    moment_ladder_check,
    parse_ladder,
    run_entry,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3
CACHE_ENV = "CESARO_CACHE_DIR"


# --- report emission -------------------------------------------------------


def _tabulate(report):
    """Split a report into (meta, columns, rows); columns is None for records."""
    if isinstance(report, ConvergenceReport):
        meta = {
            "entry_id": report.entry_id,
            "extrapolated_limit": report.extrapolated_limit,
            "target": report.target,
            "tolerance": report.tolerance,
            "verdict": report.verdict,
        }
        return meta, ["n", "value", "abs_error"], [(r.n, r.value, r.abs_error) for r in report.rows]
    if isinstance(report, AsymptoticReport):
        cols = ["n", "lhs", "rhs", "residual"]
        return {"alpha": report.alpha}, cols, [(r.n, r.lhs, r.rhs, r.residual) for r in report.rows]
    if isinstance(report, arith.SieveTable):
        meta = {"func": report.func_id.name.lower(), "n_max": report.n_max}
        rows = [(k, int(v)) for k, v in enumerate(report.values[1:].tolist(), start=1)]
        return meta, ["k", "value"], rows
    if isinstance(report, QuadResult):
        return asdict(report), None, None
    if isinstance(report, dict):
        return dict(report), None, None
    if isinstance(report, (list, tuple)):
        items = list(report)
        if items and all(isinstance(r, MomentRow) for r in items):
            cols = ["p", "value", "target", "abs_error"]
            return {}, cols, [(r.p, r.value, r.target, abs(r.value - r.target)) for r in items]
        if items and all(is_dataclass(r) for r in items):
            cols = [f.name for f in fields(items[0])]
            return {}, cols, [tuple(getattr(r, c) for c in cols) for r in items]
        if items and all(isinstance(r, dict) for r in items):
            cols = list(items[0])
            return {}, cols, [tuple(r[c] for c in cols) for r in items]
        raise InvalidArgument("cannot emit an empty report", module="cli")
    raise TypeError(f"cannot emit {type(report).__name__}")


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _aligned(header, rows):
    cells = [list(map(str, header))] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join(
        "  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() for row in cells
    )


def emit_report(report, fmt="text"):
    """Render a report as ``json``, ``csv`` or aligned ``text``.

    JSON: a record is one flat object; a tabular report is its metadata plus
    ``"rows"``, a list of objects keyed by column name.  CSV: a header row
    then one line per row (metadata is omitted).  Text: ``key: value`` lines
    for metadata, then an aligned table.
    """
    meta, columns, rows = _tabulate(report)
    if fmt == "json":
        doc = dict(meta)
        if columns is not None:
            doc["rows"] = [dict(zip(columns, row)) for row in rows]
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        header, body = (list(meta), [tuple(meta.values())]) if columns is None else (columns, rows)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[_fmt(v) for v in row] for row in body])
        return buf.getvalue()
    if fmt == "text":
        if columns is None:
            return _aligned(list(meta), [tuple(meta.values())]) + "\n"
        lines = [f"{k}: {_fmt(v)}" for k, v in meta.items()]
        lines.append(_aligned(columns, rows))
        return "\n".join(lines) + "\n"
    raise InvalidArgument(f"unknown output format {fmt!r}", module="cli")


# --- argument handling -----------------------------------------------------


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return name.strip(), value.strip()


def _positive_int(text):
    try:
        value = int(evaluate(text)) if "^" in text else int(text)
    except (ValueError, CesaroError):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _common(p):
    p.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p.add_argument(
        "--cache-dir",
        default=os.environ.get(CACHE_ENV),
        help=f"sieve cache directory (default ${CACHE_ENV}; unset means no cache)",
    )


def _weight_args(p):
    p.add_argument("--weight", default="phi", help="phi, sigma, phi_over_k or synthetic")
    p.add_argument("--weight-expr", help="synthetic weight as an expression in k")
    p.add_argument("--alpha", help="exponent of the weight sequence (default per weight)")
    p.add_argument("--L", dest="L", help="mean value of the weights, an expression")


def _f_args(p, required=True):
    p.add_argument("--f", required=required, help="test function of x")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=VALUE")


def build_parser():
    ap = argparse.ArgumentParser(prog="cesaro", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="tabulate phi or sigma")
    p.add_argument("--func", required=True, choices=["phi", "sigma"])
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--values", action="store_true", help="emit every value, not a summary")
    _common(p)

    p = sub.add_parser("wsum", help="weighted sum n^-alpha sum f(k/n) a_k")
    _weight_args(p)
    _f_args(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--tol", type=float, default=1e-12, help="quadrature tolerance for the target")
    _common(p)

    p = sub.add_parser("moment", help="moment sums n^-(alpha+p) sum k^p a_k")
    _weight_args(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", type=int)
    group.add_argument("--p-max", type=int)
    p.add_argument("--n", type=_positive_int, required=True)
    _common(p)

    p = sub.add_parser("riemann", help="right-endpoint Riemann sum on [0, 1]")
    _f_args(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    _common(p)

    p = sub.add_parser("integrate", help="adaptive quadrature, or the limit functional with --alpha")
    _f_args(p)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--alpha", help="weight x^(alpha-1) on [0, 1] (limit functional)")
    p.add_argument("--L", dest="L", default="1")
    _common(p)

    p = sub.add_parser("verify", help="check catalog entries")
    p.add_argument("--entry", action="append", help="entry id (repeatable; default all)")
    p.add_argument("--ladder", help='n ladder, e.g. "2^12..2^20" or "1000,10000"')
    p.add_argument("--tol", type=float, help="override the entry tolerance")
    p.add_argument("--catalog", help="catalog file (default: bundled)")
    _common(p)

    p = sub.add_parser("asymptotic", help="log-weighted totient sum vs its asymptotics")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--ladder", default="10^4..10^6")
    _common(p)
    return ap


def _params(pairs):
    params = {}
    for name, value in pairs:
        params[name] = evaluate(value, None, params)
    return params


def _weight(args, params):
    kind = WeightKind.parse(args.weight)
    alpha = None if args.alpha is None else evaluate(args.alpha, None, params)
    L = None if args.L is None else evaluate(args.L, None, params)
    if kind is WeightKind.SYNTHETIC:
        if args.weight_expr is None or alpha is None or L is None:
            raise InvalidArgument("synthetic weights need --weight-expr, --alpha and --L", module="cli")
        return WeightSpec.synthetic(args.weight_expr, alpha, L, params)
    return WeightSpec.builtin(kind, alpha, L)


def _table(w, n, args):
    if w.table_func is None:
        return None
    return arith.cached_sieve(w.table_func, n, args.cache_dir)


def _cmd_sieve(args):
    table = arith.cached_sieve(args.func, args.n, args.cache_dir)
    if args.values:
        return table, EXIT_OK
    record = {
        "func": table.func_id.name.lower(),
        "n_max": table.n_max,
        "last_value": int(table.values[-1]),
        "summatory": table.summatory(),
        "mean": table.summatory() / float(table.n_max) ** 2,
    }
    return record, EXIT_OK


def _cmd_wsum(args):
    params = _params(args.param)
    w = _weight(args, params)
    value = weighted_sum(args.f, w, _table(w, args.n, args), args.n, params)
    target = limit_functional(args.f, w.alpha, w.L, args.tol, params).value
    return {"n": args.n, "value": value, "target": target, "abs_error": abs(value - target)}, EXIT_OK


def _cmd_moment(args):
    w = _weight(args, {})
    table = _table(w, args.n, args)
    rows = moment_ladder_check(w, args.p_max if args.p is None else args.p, args.n, table)
    if args.p is not None:
        rows = rows[-1:]
    return rows, EXIT_OK


def _cmd_riemann(args):
    params = _params(args.param)
    value = riemann_sum(args.f, args.n, params)
    target = integrate(args.f, 0.0, 1.0, args.tol, params).value
    return {"n": args.n, "value": value, "target": target, "abs_error": abs(value - target)}, EXIT_OK


def _cmd_integrate(args):
    params = _params(args.param)
    if args.alpha is not None:
        alpha = evaluate(args.alpha, None, params)
        L = evaluate(args.L, None, params)
        return limit_functional(args.f, alpha, L, args.tol, params), EXIT_OK
    return integrate(args.f, args.lo, args.hi, args.tol, params), EXIT_OK


def _cmd_verify(args):
    catalog = load_catalog(args.catalog)
    ids = args.entry or list(catalog)
    unknown = [i for i in ids if i not in catalog]
    if unknown:
        raise InvalidArgument(
            f"unknown entry {unknown[0]!r}; known: {', '.join(catalog)}", module="verify"
        )
    ladder = None if args.ladder is None else parse_ladder(args.ladder)
    tables = {}
    reports = [run_entry(catalog[i], ladder, args.tol, tables, args.cache_dir) for i in ids]
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    return reports, code


def _cmd_asymptotic(args):
    ladder = parse_ladder(args.ladder)
    table = arith.cached_sieve(arith.FuncId.PHI, ladder[-1], args.cache_dir)
    return asymptotic_check(args.alpha, ladder, table), EXIT_OK


_COMMANDS = {
    "sieve": _cmd_sieve,
    "wsum": _cmd_wsum,
    "moment": _cmd_moment,
    "riemann": _cmd_riemann,
    "integrate": _cmd_integrate,
    "verify": _cmd_verify,
    "asymptotic": _cmd_asymptotic,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        result, code = _COMMANDS[args.command](args)
        if args.command == "verify":
            text = "".join(emit_report(r, args.format) for r in result)
            if args.format == "json" and len(result) > 1:
                docs = [json.loads(emit_report(r, "json")) for r in result]
                text = json.dumps({"passed": code == EXIT_OK, "reports": docs}, indent=2) + "\n"
        else:
            text = emit_report(result, args.format)
    except InvalidArgument as exc:
        print(f"cesaro {exc.module}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CesaroError as exc:
        print(f"cesaro {exc.module}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
