"""Finite sums: plain Riemann sums, weighted sums and moment sums.

A weighted sum is ``n**-alpha * sum(f(k/n) * a_k for k in 1..n)`` where the
weights ``a_k`` have Cesaro mean ``L = lim n**-alpha * sum(a_k)``.  All
accumulation goes through :func:`cesaro.summation.compensated_sum`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import arith
from .errors import InvalidArgument
from .expr import Expr, evaluate, parse
from .summation import compensated_sum


class WeightKind(enum.Enum):
    PHI = "phi"
    SIGMA = "sigma"
    PHI_OVER_K = "phi_over_k"
    SYNTHETIC = "synthetic"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("-", "_").replace("/", "_over_")
        aliases = {"phioverk": "phi_over_k", "phi_k": "phi_over_k"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidArgument(f"unknown weight kind {name!r}", module="sums") from None


# (alpha, L) of each arithmetic weight family
DEFAULTS = {
    WeightKind.PHI: (2.0, 3 / math.pi**2),
    WeightKind.SIGMA: (2.0, math.pi**2 / 12),
    WeightKind.PHI_OVER_K: (1.0, 6 / math.pi**2),
}

_TABLE_FUNC = {
    WeightKind.PHI: arith.FuncId.PHI,
    WeightKind.SIGMA: arith.FuncId.SIGMA,
    WeightKind.PHI_OVER_K: arith.FuncId.PHI,
}


@dataclass(frozen=True)
class WeightSpec:
    """A weight sequence together with its exponent and mean value.

    ``SYNTHETIC`` weights are given by ``expression``, evaluated with the
    parameter ``k`` bound to the index (plus any other ``params``).
    """

    kind: WeightKind
    alpha: float
    L: float
    expression: Expr | None = None
    params: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise InvalidArgument(f"alpha must be positive, got {self.alpha}", module="sums")
        if self.kind is WeightKind.SYNTHETIC and self.expression is None:
            raise InvalidArgument("synthetic weights need an expression in k", module="sums")

    @classmethod
    def builtin(cls, kind, alpha=None, L=None):
        kind = WeightKind.parse(kind)
        if kind is WeightKind.SYNTHETIC:
            raise InvalidArgument("use WeightSpec.synthetic for synthetic weights", module="sums")
        a0, l0 = DEFAULTS[kind]
        return cls(kind, float(a0 if alpha is None else alpha), float(l0 if L is None else L))

    @classmethod
    def synthetic(cls, expression, alpha, L, params=None):
        return cls(WeightKind.SYNTHETIC, float(alpha), float(L), parse(expression), dict(params or {}))

    @property
    def table_func(self):
        return _TABLE_FUNC.get(self.kind)


@dataclass(frozen=True)
class PartialSumRow:
    n: int
    value: float


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n!r}", module="sums")
    return int(n)


def weight_values(w, n, table=None):
    """Float array ``[a_1, ..., a_n]`` for weight spec ``w``.

    Built-in kinds read ``table`` (sieved on demand when omitted).
    """
    n = _check_n(n)
    k = np.arange(1, n + 1, dtype=np.float64)
    if w.kind is WeightKind.SYNTHETIC:
        return np.array(evaluate(w.expression, None, {**w.params, "k": k}), dtype=np.float64)
    func = w.table_func
    if table is None:
        table = arith.sieve(func, n)
    if table.func_id != func:
        raise InvalidArgument(
            f"{w.kind.value} weights need a {func.name.lower()} table, got {table.func_id.name.lower()}",
            module="sums",
        )
    if table.n_max < n:
        raise InvalidArgument(f"table covers 1..{table.n_max}, need 1..{n}", module="sums")
    a = table.values[1 : n + 1].astype(np.float64)
    if w.kind is WeightKind.PHI_OVER_K:
        a /= k
    return a


def _as_function(f, params):
    if callable(f) and not isinstance(f, (Expr, str)):
        return f
    e = parse(f)
    return lambda x: evaluate(e, x, params)


def _sample(f, n, params):
    x = np.arange(1, n + 1, dtype=np.float64) / n
    fx = _as_function(f, params)(x)
    return np.broadcast_to(np.asarray(fx, dtype=np.float64), x.shape)


def riemann_sum(f, n, params=None):
    """Right-endpoint Riemann sum ``(1/n) * sum(f(k/n))``."""
    n = _check_n(n)
    return compensated_sum(_sample(f, n, params)) / n


def weighted_sum(f, w, table=None, n=None, params=None):
    """``n**-alpha * sum(f(k/n) * a_k)`` for ``k = 1..n``.

    ``n`` defaults to the table length.
    """
    if n is None:
        if table is None:
            raise InvalidArgument("need n or a table", module="sums")
        n = table.n_max
    n = _check_n(n)
    terms = _sample(f, n, params) * weight_values(w, n, table)
    return compensated_sum(terms) / float(n) ** w.alpha


def moment_sum(p, w, table=None, n=None):
    """``n**-(alpha + p) * sum(k**p * a_k)``; tends to ``alpha * L / (alpha + p)``."""
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 0:
        raise InvalidArgument(f"p must be a nonnegative integer, got {p!r}", module="sums")
    if n is None:
        if table is None:
            raise InvalidArgument("need n or a table", module="sums")
        n = table.n_max
    n = _check_n(n)
    k = np.arange(1, n + 1, dtype=np.float64)
    terms = k ** int(p) * weight_values(w, n, table)
    return compensated_sum(terms) / float(n) ** (w.alpha + p)


@dataclass(frozen=True)
class DampingCheck:
    """Damped sums ``n**-(beta+1) * sum(k**beta * lambda_k)`` per ``n``.

    ``vanishing`` is a heuristic reading of the input: it is False when the
    tail of the sequence is not visibly smaller than its head, in which case
    ``note`` says the expected decay to zero is not guaranteed.
    """

    n_values: list
    values: list
    vanishing: bool
    note: str | None = None


def cesaro_damping_check(lam, beta, n_values, params=None):
    """Evaluate damped moment sums of a sequence that should tend to zero.

    ``lam`` is an expression in the parameter ``k`` or a callable taking the
    integer index array.
    """
    if not beta > 0:
        raise InvalidArgument(f"beta must be positive, got {beta}", module="sums")
    n_values = [_check_n(n) for n in n_values]
    if not n_values:
        raise InvalidArgument("n_values is empty", module="sums")
    n_top = max(n_values)
    k = np.arange(1, n_top + 1, dtype=np.float64)
    if callable(lam) and not isinstance(lam, (Expr, str)):
        seq = np.asarray(lam(k), dtype=np.float64)
    else:
        seq = evaluate(parse(lam), None, {**(params or {}), "k": k})
    seq = np.broadcast_to(np.asarray(seq, dtype=np.float64), k.shape)
    terms = k**beta * seq
    values = [compensated_sum(terms[:n]) / float(n) ** (beta + 1) for n in n_values]

    head = float(np.max(np.abs(seq[: max(1, n_top // 100)])))
    tail = float(np.max(np.abs(seq[n_top // 2 :])))
    vanishing = tail == 0.0 or tail < 0.5 * head
    note = None
    if not vanishing:
        note = (
            f"sequence does not appear to tend to 0 (sup over k > {n_top // 2} is {tail:.3g},"
            f" head sup {head:.3g}); decay of the damped sums is not implied"
        )
    return DampingCheck(n_values, values, vanishing, note)
