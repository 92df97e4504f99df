"""Catalog of known limits and the convergence engine that checks them.

A catalog entry fixes a weight sequence, a test function and the closed
form of the limit.  :func:`run_entry` evaluates the weighted sum along a
ladder of ``n``, extrapolates the limit and compares it with the closed
form.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import arith
from .errors import InvalidArgument
from .expr import evaluate, parse, parameters
from .quad import limit_functional
from .sums import WeightKind, WeightSpec, moment_sum, weight_values, weighted_sum
from .summation import compensated_sum


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    weight: WeightSpec
    f_source: str
    limit_source: str
    limit_value: float
    tolerance: float = 2e-3
    params: dict = field(default_factory=dict, hash=False)
    ladder: tuple = ()
    citation: str = ""

    def closed_form(self):
        """Re-evaluate the closed-form limit from its expression."""
        return evaluate(self.limit_source, None, self.params)

    def limit_integral(self, tol=1e-12):
        """The limit as given by quadrature rather than the closed form."""
        w = self.weight
        return limit_functional(self.f_source, w.alpha, w.L, tol, self.params)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    value: float
    abs_error: float


@dataclass(frozen=True)
class ConvergenceReport:
    entry_id: str
    rows: list
    extrapolated_limit: float
    target: float
    tolerance: float
    passed: bool

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class MomentRow:
    p: int
    value: float
    target: float


@dataclass(frozen=True)
class AsymptoticRow:
    n: int
    lhs: float
    rhs: float
    residual: float


@dataclass(frozen=True)
class AsymptoticReport:
    alpha: float
    rows: list


# --- catalog ---------------------------------------------------------------


def _parse_params(text):
    params = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InvalidArgument(f"bad parameter binding {item!r}", module="verify")
        params[name.strip()] = evaluate(value.strip(), None, params)
    return params


def parse_ladder(text):
    """Expand ladder syntax into a strictly increasing list of ints.

    ``"b^i..b^j"`` gives ``b^i, b^(i+1), ..., b^j``; otherwise a comma
    separated list of integers or powers ``b^e``.
    """
    text = str(text).strip()
    m = re.fullmatch(r"(\d+)\^(\d+)\s*\.\.\s*(\d+)\^(\d+)", text)
    if m:
        b1, lo, b2, hi = map(int, m.groups())
        if b1 != b2 or b1 < 2:
            raise InvalidArgument(f"ladder {text!r} needs one common base >= 2", module="verify")
        ladder = [b1**e for e in range(lo, hi + 1)]
    else:
        ladder = []
        for part in filter(None, (p.strip() for p in text.split(","))):
            pm = re.fullmatch(r"(\d+)(?:\^(\d+))?", part)
            if pm is None:
                raise InvalidArgument(f"bad ladder element {part!r}", module="verify")
            base, exp = pm.groups()
            ladder.append(int(base) ** int(exp) if exp else int(base))
    _check_ladder(ladder)
    return ladder


def _check_ladder(ladder):
    if not ladder:
        raise InvalidArgument("empty n ladder", module="verify")
    if ladder[0] < 1 or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise InvalidArgument(f"ladder must be positive and strictly increasing: {ladder}", module="verify")


def _entry_from_section(name, sec):
    params = _parse_params(sec.get("params", ""))
    kind = WeightKind.parse(sec["weight"])
    alpha = evaluate(sec["alpha"], None, params)
    L = evaluate(sec["L"], None, params)
    if kind is WeightKind.SYNTHETIC:
        weight = WeightSpec.synthetic(sec["weight_expr"], alpha, L, params)
    else:
        weight = WeightSpec.builtin(kind, alpha, L)
    f_source = sec["f"]
    missing = parameters(parse(f_source)) - set(params)
    if missing:
        raise InvalidArgument(f"entry {name}: unbound parameter(s) {sorted(missing)}", module="verify")
    limit_source = sec["limit"]
    value = float(sec["value"]) if "value" in sec else evaluate(limit_source, None, params)
    ladder = tuple(parse_ladder(sec["ladder"])) if "ladder" in sec else ()
    return CatalogEntry(
        id=name,
        weight=weight,
        f_source=f_source,
        limit_source=limit_source,
        limit_value=value,
        tolerance=float(sec.get("tolerance", "2e-3")),
        params=params,
        ladder=ladder,
        citation=sec.get("citation", ""),
    )


def load_catalog(path=None):
    """Read the catalog (the bundled one by default) into an ordered dict."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is None:
        parser.read_string(resources.files("cesaro").joinpath("catalog.ini").read_text())
    else:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    return {name: _entry_from_section(name, parser[name]) for name in parser.sections()}


# --- convergence -----------------------------------------------------------


def extrapolate(rows):
    """Fit ``value_n = limit + (c1 + c2 log n) / n`` and return ``limit``.

    ``rows`` are ``(n, value)`` pairs (or objects with ``n`` and ``value``).
    Falls back to the last value if the fit is rank-deficient.
    """
    pairs = [(r.n, r.value) if hasattr(r, "n") else (r[0], r[1]) for r in rows]
    if len(pairs) < 3:
        raise InvalidArgument(f"extrapolation needs at least 3 rows, got {len(pairs)}", module="verify")
    n = np.array([p[0] for p in pairs], dtype=np.float64)
    y = np.array([p[1] for p in pairs], dtype=np.float64)
    if np.any(np.diff(n) <= 0):
        raise InvalidArgument("rows must have strictly increasing n", module="verify")
    last = y[-1]
    design = np.column_stack([np.ones_like(n), 1.0 / n, np.log(n) / n])
    scale = np.linalg.norm(design, axis=0)
    if not np.all(np.isfinite(scale) & (scale > 0)):
        return float(last)
    try:
        coef, _, rank, _ = np.linalg.lstsq(design / scale, y - last, rcond=None)
    except np.linalg.LinAlgError:
        return float(last)
    if rank < 3:
        return float(last)
    return float(last + coef[0] / scale[0])


def _table_for(w, n_max, tables, cache_dir):
    func = w.table_func
    if func is None:
        return None
    table = tables.get(func) if tables is not None else None
    if table is None or table.n_max < n_max:
        table = arith.cached_sieve(func, n_max, cache_dir)
        if tables is not None:
            tables[func] = table
    return table


def run_entry(entry, n_ladder=None, tol=None, tables=None, cache_dir=None):
    """Evaluate ``entry`` along ``n_ladder`` and judge the extrapolated limit.

    ``tables`` is an optional dict of sieve tables shared between runs.  With
    fewer than three rows the last value stands in for the extrapolation.
    """
    ladder = list(entry.ladder if n_ladder is None else n_ladder)
    _check_ladder(ladder)
    tol = entry.tolerance if tol is None else float(tol)
    table = _table_for(entry.weight, ladder[-1], tables, cache_dir)
    target = entry.limit_value
    rows = []
    for n in ladder:
        value = weighted_sum(entry.f_source, entry.weight, table, n, entry.params)
        rows.append(ConvergenceRow(n, value, abs(value - target)))
    limit = extrapolate(rows) if len(rows) >= 3 else rows[-1].value
    passed = abs(limit - target) <= tol
    return ConvergenceReport(entry.id, rows, limit, target, tol, passed)


def moment_ladder_check(w, p_max, n, table=None):
    """Rows ``(p, M_p(n), alpha L / (alpha + p))`` for ``p = 0..p_max``."""
    if isinstance(p_max, bool) or not isinstance(p_max, (int, np.integer)) or p_max < 0:
        raise InvalidArgument(f"p_max must be a nonnegative integer, got {p_max!r}", module="verify")
    if table is None and w.table_func is not None:
        table = arith.sieve(w.table_func, n)
    return [
        MomentRow(p, moment_sum(p, w, table, n), w.alpha * w.L / (w.alpha + p))
        for p in range(int(p_max) + 1)
    ]


def asymptotic_lhs(alpha, n, table):
    """``n**-(alpha+1) * sum(k**(alpha-1) * log(k) * phi(k))``.

    The ``k = 1`` term is exactly zero since ``log 1 = 0``.
    """
    k = np.arange(1, n + 1, dtype=np.float64)
    terms = k ** (alpha - 1.0) * np.log(k) * table.values[1 : n + 1].astype(np.float64)
    return compensated_sum(terms) / float(n) ** (alpha + 1.0)


def asymptotic_rhs(alpha, n):
    return 6.0 * ((1.0 + alpha) * math.log(n) - 1.0) / (math.pi**2 * (1.0 + alpha) ** 2)


def asymptotic_check(alpha, n_ladder, table=None):
    """Compare the log-weighted totient sum with its leading asymptotics."""
    alpha = float(alpha)
    if not alpha >= 0:
        raise InvalidArgument(f"alpha must be nonnegative, got {alpha}", module="verify")
    ladder = list(n_ladder)
    _check_ladder(ladder)
    if table is None or table.n_max < ladder[-1]:
        table = arith.sieve(arith.FuncId.PHI, ladder[-1])
    rows = []
    for n in ladder:
        lhs = asymptotic_lhs(alpha, n, table)
        rhs = asymptotic_rhs(alpha, n)
        rows.append(AsymptoticRow(n, lhs, rhs, lhs - rhs))
    return AsymptoticReport(alpha, rows)


# --- polynomial approximation path ---------------------------------------


@dataclass(frozen=True)
class ApproximationRow:
    n: int
    value_f: float
    value_poly: float
    difference: float
    bound: float


@dataclass(frozen=True)
class ApproximationCheck:
    polynomial: str
    sup_error: float
    weight_mass: float
    rows: list

    @property
    def holds(self):
        return all(r.difference <= r.bound for r in self.rows)


def chebyshev_proxy(f, degree, params=None):
    """Interpolate ``f`` at Chebyshev points of [0, 1], returned as an expression.

    Interpolation nodes are interior, so removable endpoint singularities of
    ``f`` are never touched.
    """
    e = parse(f)
    cheb = np.polynomial.Chebyshev.interpolate(lambda x: evaluate(e, x, params), degree, domain=[0, 1])
    coef = cheb.convert(kind=np.polynomial.Polynomial, domain=[0, 1], window=[0, 1]).coef
    terms = []
    for power, c in enumerate(coef):
        mono = repr(abs(float(c))) + ("" if power == 0 else "*x" if power == 1 else f"*x^{power}")
        terms.append(("-" if c < 0 else "+", mono))
    text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, mono in terms[1:]:
        text += f" {sign} {mono}"
    return parse(text)


def weierstrass_check(entry, degree=6, n_ladder=None, tables=None, grid=1 << 17):
    """Check ``|I_n(f) - I_n(P)| <= sup|f - P| * max_n n**-alpha sum(a_k)``.

    ``P`` is the Chebyshev interpolant of the entry's test function; the sup
    norm is estimated on an interior midpoint grid.
    """
    ladder = list(entry.ladder if n_ladder is None else n_ladder)
    _check_ladder(ladder)
    poly = chebyshev_proxy(entry.f_source, degree, entry.params)
    xs = (np.arange(grid, dtype=np.float64) + 0.5) / grid
    diff = np.abs(
        np.asarray(evaluate(entry.f_source, xs, entry.params)) - np.asarray(evaluate(poly, xs))
    )
    sup_error = float(diff.max())
    w = entry.weight
    table = _table_for(w, ladder[-1], tables, None)
    mass = 0.0
    pairs = []
    for n in ladder:
        a = weight_values(w, n, table)
        mass = max(mass, compensated_sum(a) / float(n) ** w.alpha)
        pairs.append(
            (n, weighted_sum(entry.f_source, w, table, n, entry.params), weighted_sum(poly, w, table, n))
        )
    bound = sup_error * mass
    rows = [ApproximationRow(n, vf, vp, abs(vf - vp), bound) for n, vf, vp in pairs]
    return ApproximationCheck(str(poly), sup_error, mass, rows)
