import math
import subprocess
import sys

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from pketwistor import _kernels
from pketwistor.jetcalc import (MAX_DIM, MAX_ORDER, ConfigurationError, Jet, OrderBudgetError,
                                SingularEvaluationError, backend, coordinates, inverse_matrix,
                                jeinsum, matmul, power, seed, space)

from helpers import close, random_jet

seeds = st.integers(0, 2**32 - 1)


def taylor_oracle(expr, syms, point, order):
    """Taylor coefficients d^alpha f / alpha! by sympy differentiation."""
    subs = dict(zip(syms, point))
    out = {}
    for alpha in space(len(syms), order).multi:
        d = expr
        for s, k in zip(syms, alpha):
            if k:
                d = sp.diff(d, s, k)
        out[alpha] = float(d.subs(subs)) / math.prod(math.factorial(k) for k in alpha)
    return out


CASES = [
    ("exp(x*y)/(1 + x**2 + z)", lambda x, y, z: (x * y).exp() / (1 + x * x + z)),
    ("log(2 + y*z) - x**3*sqrt(1 + y**2)", lambda x, y, z: (2 + y * z).log() - x ** 3 * (1 + y * y).real_power(0.5)),
    ("(1 + x - z)**(-2) * exp(-y)", lambda x, y, z: (1 + x - z) ** -2 * (-y).exp()),
    ("x*y*z + y**4 - 3*z", lambda x, y, z: x * y * z + y ** 4 - 3 * z),
]


@pytest.mark.parametrize("text,build", CASES, ids=[c[0] for c in CASES])
@pytest.mark.parametrize("order", [3, 5])
def test_taylor_coefficients_match_sympy(text, build, order):
    x, y, z = sp.symbols("x y z")
    expr = sp.sympify(text)
    point = (0.3, -0.4, 0.2)
    jet = build(*coordinates(point, order))
    ref = taylor_oracle(expr, (x, y, z), point, order)
    for alpha, c in ref.items():
        assert jet.coefficient(alpha) == pytest.approx(c, rel=1e-11, abs=1e-11)


def test_partial_is_factorial_times_coefficient():
    x, y = coordinates((0.5, 0.1), 4)
    f = (x * y).exp()
    xv, yv = 0.5, 0.1
    X, Y = sp.symbols("X Y")
    ref = float(sp.diff(sp.exp(X * Y), X, 2, Y, 1).subs({X: xv, Y: yv}))
    assert f.partial((2, 1)) == pytest.approx(ref, rel=1e-12)


@given(seeds)
def test_ring_axioms(s):
    rng = np.random.default_rng(s)
    a, b, c = (random_jet(rng, dim=3, order=4) for _ in range(3))
    assert close((a * b) * c, a * (b * c), 1e-10)
    assert close(a * (b + c), a * b + a * c, 1e-10)
    assert close(a * b, b * a, 1e-12)


@given(seeds)
def test_reciprocal_log_exp_power(s):
    rng = np.random.default_rng(s)
    a = random_jet(rng, dim=4, order=4, value_offset=3.0, scale=0.5)
    one = Jet.constant(a.space, 1.0)
    assert close(a * a.reciprocal(), one, 1e-10)
    assert close(a.log().exp(), a, 1e-10)
    assert close(a.real_power(0.5) * a.real_power(0.5), a, 1e-10)
    assert close(power(a, 3), a * a * a, 1e-9)
    assert close(power(a, -2) * a * a, one, 1e-10)


@given(seeds, st.integers(0, 2))
def test_leibniz_rule(s, var):
    rng = np.random.default_rng(s)
    a, b = random_jet(rng, order=4), random_jet(rng, order=4)
    lhs = (a * b).deriv(var)
    rhs = a.deriv(var) * b.truncate(3) + a.truncate(3) * b.deriv(var)
    assert close(lhs, rhs, 1e-10)


@given(seeds)
def test_mixed_partials_commute(s):
    rng = np.random.default_rng(s)
    a = random_jet(rng, order=4)
    assert close(a.deriv(0).deriv(2), a.deriv(2).deriv(0), 1e-12)


@given(seeds)
def test_embed_adds_constant_direction(s):
    rng = np.random.default_rng(s)
    a = random_jet(rng, dim=3, order=3)
    big = a.embed(5)
    assert big.space.dim == 5
    assert big.value == pytest.approx(a.value)
    assert np.allclose(big.deriv(4).data, 0.0)
    for alpha in a.space.multi:
        assert big.coefficient(alpha + (0, 0)) == a.coefficient(alpha)


@given(seeds)
def test_jeinsum_agrees_with_componentwise_products(s):
    rng = np.random.default_rng(s)
    A = random_jet(rng, dim=2, order=3, shape=(3, 4))
    B = random_jet(rng, dim=2, order=3, shape=(4, 2))
    C = matmul(A, B)
    for i in range(3):
        for k in range(2):
            ref = sum((A[i, j] * B[j, k] for j in range(4)), Jet.zeros(A.space))
            assert close(C[i, k], ref, 1e-12)
    D = random_jet(rng, dim=2, order=3, shape=(4, 3))
    tr = jeinsum("ij,ji->", A, D)
    ref = sum((A[i, j] * D[j, i] for i in range(3) for j in range(4)), Jet.zeros(A.space))
    assert close(tr, ref, 1e-12)


@given(seeds)
def test_inverse_matrix(s):
    rng = np.random.default_rng(s)
    M = random_jet(rng, dim=3, order=3, shape=(4, 4), scale=0.3)
    M = M + np.eye(4) * 2.0
    I = Jet.constant(M.space, np.eye(4))
    assert close(matmul(M, inverse_matrix(M)), I, 1e-10)
    assert close(matmul(inverse_matrix(M), M), I, 1e-10)


@given(seeds, st.sampled_from([(1, 6), (2, 4), (4, 3), (5, 3), (5, 2)]))
def test_compiled_and_numpy_kernels_agree(s, dims):
    dim, order = dims
    sp_ = space(dim, order)
    rng = np.random.default_rng(s)
    a = rng.standard_normal((7, sp_.size))
    b = rng.standard_normal((7, sp_.size))
    ref = _kernels.mul_flat_numpy(a, b, sp_)
    got = _kernels.mul_flat(a, b, sp_)
    assert np.allclose(got, ref, rtol=1e-14, atol=1e-14)


def test_pure_python_fallback_selected_by_environment():
    code = "from pketwistor.jetcalc import backend; print(backend())"
    env = {"PKETWISTOR_PURE_PYTHON": "1"}
    import os
    out = subprocess.run([sys.executable, "-c", code], env={**os.environ, **env},
                         capture_output=True, text=True, check=True).stdout.strip()
    assert out == "numpy"
    assert backend() in ("compiled", "numpy")


def test_limits_and_errors():
    with pytest.raises(ConfigurationError):
        space(MAX_DIM + 1, 2)
    with pytest.raises(ConfigurationError):
        seed((0.0, 0.0), 0, MAX_ORDER + 1)
    with pytest.raises(OrderBudgetError):
        seed((0.0,), 0, 0).deriv(0)
    x, = coordinates((0.0,), 3)
    with pytest.raises(SingularEvaluationError):
        x.reciprocal()
    with pytest.raises(SingularEvaluationError):
        x.log()
    with pytest.raises(SingularEvaluationError):
        (x - 1.0).real_power(0.5)


def test_mixed_order_arithmetic_truncates():
    x3, = coordinates((0.2,), 3)
    x5, = coordinates((0.2,), 5)
    assert (x3 * x5).order == 3
    assert (x3 + x5).order == 3
