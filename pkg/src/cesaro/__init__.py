"""Weighted Riemann sums with arithmetic weights.

``n**-alpha * sum(f(k/n) * a_k)`` tends to ``L * integral_0^1 alpha x**(alpha-1) f(x) dx``
whenever ``n**-alpha * sum(a_k)`` tends to ``L``.  This package sieves the
arithmetic weights, evaluates the sums and the limit integral, and checks a
catalog of closed-form limits.
"""

from .arith import FuncId, SieveTable, brute_force_value, load_table, save_table, sieve
from .errors import CesaroError, InvalidArgument
from .expr import EvaluationError, ParseError, evaluate, parse
from .quad import AccuracyError, QuadResult, integrate, limit_functional, log_moment
from .sums import (
    WeightKind,
    WeightSpec,
    cesaro_damping_check,
    moment_sum,
    riemann_sum,
    weighted_sum,
)
from .verify import (
    asymptotic_check,
    extrapolate,
    load_catalog,
    moment_ladder_check,
    run_entry,
)

__version__ = "0.1.0"
