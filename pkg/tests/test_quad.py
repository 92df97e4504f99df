import math
import random

import mpmath
import numpy as np
import pytest
from scipy import integrate as sp_integrate

from cesaro.errors import InvalidArgument
from cesaro.expr import EvaluationError, evaluate
from cesaro.quad import (
    AccuracyError,
    GAUSS,
    KRONROD,
    NODES,
    QuadResult,
    integrate,
    limit_functional,
    log_moment,
)

HALF_PI_LOG2 = float(mpmath.pi / 8 * mpmath.log(2))


def test_rule_exactness():
    # Kronrod 15 is exact through degree 22, Gauss 7 through degree 13
    for d in range(23):
        exact = (1 - (-1) ** (d + 1)) / (d + 1)
        assert KRONROD @ NODES**d == pytest.approx(exact, abs=1e-14)
        if d <= 13:
            assert GAUSS @ NODES**d == pytest.approx(exact, abs=1e-14)
    assert np.all(np.abs(NODES) < 1)


def test_linear():
    r = integrate("x", 0, 1, 1e-12)
    assert r.value == pytest.approx(0.5, abs=1e-15)
    assert r.error_estimate >= 0 and r.evaluations > 0


def test_arctan_integral():
    r = integrate("arctan(x)/(1+x)", 0, 1, 1e-12)
    assert abs(r.value - HALF_PI_LOG2) < 1e-12
    assert abs(r.value - 0.2721982613) < 1e-10


def test_arctan_integral_after_reflection():
    # x -> (1-x)/(1+x) maps the integral to pi/4 * log 2 minus itself
    reflected = integrate("arctan((1-x)/(1+x))/(1+x)", 0, 1, 1e-13).value
    assert abs(reflected - HALF_PI_LOG2) < 1e-12
    assert abs(integrate("(pi/4 - arctan(x))/(1+x)", 0, 1, 1e-13).value - HALF_PI_LOG2) < 1e-12


@pytest.mark.parametrize("beta", [0.5, 1, 2.5, 7])
def test_power_family(beta):
    r = integrate("x^b", 0, 1, 1e-12, {"b": beta})
    assert abs(r.value - 1 / (beta + 1)) < 1e-11


def test_sqrt_example():
    assert abs(integrate("x^0.5", 0, 1, 1e-10).value - 2 / 3) < 1e-10


def test_endpoint_singularity_never_sampled():
    r = integrate("arctan(x)/(x*(1+x))", 0, 1, 1e-12)
    ref = mpmath.quad(lambda x: mpmath.atan(x) / (x * (1 + x)), [0, 1])
    assert abs(r.value - float(ref)) < 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_against_scipy_on_random_smooth_functions(seed):
    rng = random.Random(seed)
    a, b, c = (rng.uniform(-3, 3) for _ in range(3))
    lo, hi = sorted(rng.uniform(-2, 2) for _ in range(2))
    src = "exp(a*x)*cos(b*x) + c*x^3"
    params = {"a": a, "b": b, "c": c}
    ours = integrate(src, lo, hi, 1e-12, params).value
    ref, _ = sp_integrate.quad(
        lambda x: math.exp(a * x) * math.cos(b * x) + c * x**3, lo, hi, epsabs=1e-13, epsrel=1e-13
    )
    assert ours == pytest.approx(ref, abs=1e-11)


def test_bad_interval_and_tol():
    with pytest.raises(InvalidArgument):
        integrate("x", 1, 0)
    with pytest.raises(InvalidArgument):
        integrate("x", 0, 1, 0)


def test_non_convergence_carries_estimate():
    with pytest.raises(AccuracyError) as info:
        integrate("1/x", 0, 1, 1e-10)
    assert isinstance(info.value.result, QuadResult)
    assert info.value.result.value > 10


def test_interior_evaluation_error_propagates():
    with pytest.raises(EvaluationError):
        integrate("log(x-0.5)", 0, 1)


def test_limit_functional_of_one_is_L():
    rng = random.Random(330)
    for _ in range(20):
        alpha, L = rng.uniform(0.05, 6), rng.uniform(-5, 5)
        assert abs(limit_functional("1", alpha, L).value - L) <= 1e-14


def test_limit_functional_examples():
    L = 3 / math.pi**2
    assert abs(limit_functional("x", 2, L).value - 2 / math.pi**2) < 1e-13
    arctan_limit = float(3 * mpmath.log(2) / (4 * mpmath.pi))
    assert abs(limit_functional("arctan(x)/(x*(1+x))", 2, L).value - arctan_limit) < 1e-12


@pytest.mark.parametrize("alpha", [1, 1.5, 2, 3.7])
@pytest.mark.parametrize("poly", ["1 + 2*x - 3*x^2", "x^5 - x", "0.3*x^3 + 7"])
def test_substitution_consistency(alpha, poly):
    L = 0.8
    direct = integrate(lambda x: L * alpha * x ** (alpha - 1) * evaluate(poly, x), 0, 1, 1e-13).value
    assert abs(limit_functional(poly, alpha, L).value - direct) < 1e-11


def test_small_alpha_weight_singularity_is_removed():
    # alpha < 1: weight blows up at 0 but the substituted integrand is bounded
    r = limit_functional("cos(x)", 0.25, 1.0, 1e-12)
    # termwise: 0.25 * sum (-1)^j / ((2j)! (2j + 0.25))
    ref = math.fsum(0.25 * (-1) ** j / (math.factorial(2 * j) * (2 * j + 0.25)) for j in range(20))
    assert abs(r.value - ref) < 1e-11


@pytest.mark.parametrize("alpha, expected", [(0, -1.0), (1, -0.25), (2, -1 / 9)])
def test_log_moment(alpha, expected):
    assert log_moment(alpha) == expected


def test_log_moment_rejects_negative():
    with pytest.raises(InvalidArgument):
        log_moment(-0.5)


def _aitken(s0, s1, s2):
    d = (s2 - s1) - (s1 - s0)
    return s2 if d == 0 else s2 - (s2 - s1) ** 2 / d


@pytest.mark.parametrize("alpha", [0, 0.5, 1, 2, 3.5])
def test_log_moment_against_quadrature(alpha):
    deltas = [1e-6, 1e-9, 1e-12]
    seq = [integrate("x^a*log(x)", d, 1, 1e-13, {"a": alpha}).value for d in deltas]
    assert abs(_aitken(*seq) - log_moment(alpha)) < 1e-8
