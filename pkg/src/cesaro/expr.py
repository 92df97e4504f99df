"""Parsing and evaluation of test functions on [0, 1].

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``x`` is the variable, ``pi`` the only named constant, the names in
``FUNCTIONS`` are unary functions and every other identifier is a free
parameter.  ``log`` is the natural logarithm.

Evaluation is vectorised over numpy arrays.  Points where an operation is
undefined raise :class:`EvaluationError` instead of producing NaN; removable
singularities are not patched.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import CesaroError, InvalidArgument

FUNCTIONS = ("arctan", "log", "exp", "sin", "cos", "sqrt", "abs")
VARIABLE = "x"
CONSTANTS = {"pi": math.pi}


class ParseError(InvalidArgument):
    module = "expr"

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class EvaluationError(CesaroError, ArithmeticError):
    module = "expr"

    def __init__(self, message, x=None):
        if x is not None:
            message = f"{message} at x={x!r}"
        super().__init__(message)
        self.x = x


class Expr:
    """Base class of AST nodes; nodes are immutable and hashable."""

    __slots__ = ()

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Number(Expr):
    value: float


@dataclass(frozen=True)
class Variable(Expr):
    name: str = VARIABLE


@dataclass(frozen=True)
class NamedConstant(Expr):
    name: str


@dataclass(frozen=True)
class Parameter(Expr):
    name: str


@dataclass(frozen=True)
class UnaryFn(Expr):
    name: str
    child: Expr


@dataclass(frozen=True)
class BinaryOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Negate(Expr):
    child: Expr


# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source, index):
    return len(source[:index].encode("utf-8"))


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, source):
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, offset = self.peek()
        if value != text or kind != "op":
            found = "end of input" if kind == "end" else repr(value)
            raise ParseError(f"expected {text!r}, found {found}", offset)
        return self.take()

    def parse(self):
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            if value == ")":
                raise ParseError("unbalanced parenthesis", offset)
            raise ParseError(f"unexpected {value!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinaryOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinaryOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Negate(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinaryOp("^", base, self.factor())
        return base

    def atom(self):
        kind, value, offset = self.take()
        if kind == "num":
            return Number(float(value))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function {value!r}", offset)
                self.take()
                arg = self.expr()
                nxt = self.peek()
                if nxt[:2] == ("op", ","):
                    raise ParseError(f"{value} takes exactly one argument", nxt[2])
                if nxt[0] == "end":
                    raise ParseError("unbalanced parenthesis", nxt[2])
                self.expect(")")
                return UnaryFn(value, arg)
            if value in FUNCTIONS:
                raise ParseError(f"{value} takes exactly one argument", offset)
            if value == VARIABLE:
                return Variable()
            if value in CONSTANTS:
                return NamedConstant(value)
            return Parameter(value)
        if (kind, value) == ("op", "("):
            node = self.expr()
            nxt = self.peek()
            if nxt[0] == "end":
                raise ParseError("unbalanced parenthesis", nxt[2])
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", offset)
        if value == ")":
            raise ParseError("unbalanced parenthesis", offset)
        raise ParseError(f"unexpected {value!r}", offset)


def parse(source):
    """Parse ``source`` into an :class:`Expr`; raises :class:`ParseError`."""
    if isinstance(source, Expr):
        return source
    if not isinstance(source, str) or not source.strip():
        raise ParseError("empty expression", 0)
    return _Parser(source).parse()


# --- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node):
    if isinstance(node, BinaryOp):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Negate):
        return _NEG_PREC
    return _ATOM_PREC


def _format_number(value):
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_source(node):
    """Canonical text form; ``parse(to_source(e)) == e`` for any parsed ``e``."""
    if isinstance(node, Number):
        return _format_number(node.value)
    if isinstance(node, (Variable, NamedConstant, Parameter)):
        return node.name
    if isinstance(node, UnaryFn):
        return f"{node.name}({to_source(node.child)})"
    if isinstance(node, Negate):
        inner = to_source(node.child)
        return f"-({inner})" if _prec(node.child) < _NEG_PREC else f"-{inner}"
    if isinstance(node, BinaryOp):
        left, right = to_source(node.left), to_source(node.right)
        if node.op == "^":
            if _prec(node.left) < _ATOM_PREC:
                left = f"({left})"
            if _prec(node.right) < _NEG_PREC:
                right = f"({right})"
            return f"{left}^{right}"
        p = _PREC[node.op]
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def parameters(node):
    """Names of the free parameters in ``node``."""
    if isinstance(node, Parameter):
        return {node.name}
    if isinstance(node, (UnaryFn, Negate)):
        return parameters(node.child)
    if isinstance(node, BinaryOp):
        return parameters(node.left) | parameters(node.right)
    return set()


def uses_variable(node):
    if isinstance(node, Variable):
        return True
    if isinstance(node, (UnaryFn, Negate)):
        return uses_variable(node.child)
    if isinstance(node, BinaryOp):
        return uses_variable(node.left) or uses_variable(node.right)
    return False


# --- evaluation ------------------------------------------------------------


class _Context:
    def __init__(self, x, params):
        self.x = x
        self.params = params
        arrays = [v for v in (x, *params.values()) if isinstance(v, np.ndarray)]
        self.shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()

    def fail(self, message, bad):
        """Raise for the first point flagged in the boolean mask ``bad``."""
        bad = np.broadcast_to(bad, self.shape) if self.shape else bad
        idx = int(np.flatnonzero(bad)[0]) if np.ndim(bad) else 0
        x = self.x
        if isinstance(x, np.ndarray):
            x = float(np.broadcast_to(x, self.shape).flat[idx])
        elif x is not None:
            x = float(x)
        where = [
            f"{name}={float(np.broadcast_to(v, self.shape).flat[idx])!r}"
            for name, v in sorted(self.params.items())
            if isinstance(v, np.ndarray)
        ]
        if where:
            message = f"{message} ({', '.join(where)})"
        raise EvaluationError(message, x)


def _unary(name, v, ctx):
    if name == "log":
        bad = v <= 0
        if np.any(bad):
            ctx.fail("log of non-positive value", bad)
        return np.log(v)
    if name == "sqrt":
        bad = v < 0
        if np.any(bad):
            ctx.fail("sqrt of negative value", bad)
        return np.sqrt(v)
    return _UFUNCS[name](v)


_UFUNCS = {
    "arctan": np.arctan,
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
}


def _binary(op, a, b, ctx):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        bad = b == 0
        if np.any(bad):
            ctx.fail("division by zero", bad)
        return a / b
    bad = (a == 0) & (b < 0)
    if np.any(bad):
        ctx.fail("zero raised to a negative power", bad)
    bad = (a < 0) & (b != np.floor(b))
    if np.any(bad):
        ctx.fail("negative base with non-integer exponent", bad)
    return np.power(a, b)


def _eval(node, ctx):
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Variable):
        if ctx.x is None:
            raise EvaluationError("expression uses x but no x was supplied")
        return ctx.x
    if isinstance(node, NamedConstant):
        return CONSTANTS[node.name]
    if isinstance(node, Parameter):
        try:
            return ctx.params[node.name]
        except KeyError:
            raise EvaluationError(f"unbound parameter {node.name!r}", None) from None
    if isinstance(node, Negate):
        return -_eval(node.child, ctx)
    if isinstance(node, UnaryFn):
        value = _unary(node.name, _eval(node.child, ctx), ctx)
    elif isinstance(node, BinaryOp):
        left = _eval(node.left, ctx)
        right = _eval(node.right, ctx)
        value = _binary(node.op, left, right, ctx)
    else:
        raise TypeError(f"not an expression node: {node!r}")
    finite = np.isfinite(value)
    if not np.all(finite):
        ctx.fail("non-finite result", ~finite)
    return value


def evaluate(e, x=None, params=None):
    """Evaluate ``e`` at ``x`` (a float or an array) with bound ``params``.

    Parameter values may themselves be arrays; everything broadcasts.  A
    scalar input gives a Python float, an array input an ndarray of the
    broadcast shape.
    """
    e = parse(e)
    params = {
        k: (np.asarray(v, dtype=np.float64) if np.ndim(v) else float(v))
        for k, v in (params or {}).items()
    }
    if x is not None:
        x = np.asarray(x, dtype=np.float64) if np.ndim(x) else float(x)
    ctx = _Context(x, params)
    with np.errstate(all="ignore"):
        value = _eval(e, ctx)
    if ctx.shape:
        return np.broadcast_to(np.asarray(value, dtype=np.float64), ctx.shape)
    return float(value)


def compile_function(e, params=None):
    """Bind ``params`` and return a vectorised callable ``f(x)``."""
    e = parse(e)
    bound = dict(params or {})
    missing = parameters(e) - set(bound)
    if missing:
        raise EvaluationError(f"unbound parameter {sorted(missing)[0]!r}")

    def f(x):
        return evaluate(e, x, bound)

    f.expr = e
    f.params = bound
    return f
