import math

import numpy as np
import pytest

from nn2poly.taylor import (
    MAX_TAYLOR_ORDER,
    derivatives_at_zero,
    get_activation,
    taylor_coeffs,
    taylor_eval,
)


def richardson_derivative(f, k, h=0.4, levels=5):
    """k-th derivative at 0 by central differences, Richardson-extrapolated in h."""

    def central(step):
        return sum(
            (-1) ** i * math.comb(k, i) * f((k / 2 - i) * step) for i in range(k + 1)
        ) / step**k

    table = [[central(h / 2**j)] for j in range(levels)]
    for m in range(1, levels):
        for j in range(m, levels):
            prev, cur = table[j - 1][m - 1], table[j][m - 1]
            table[j].append(cur + (cur - prev) / (4**m - 1))
    return table[-1][-1]


def test_derivative_examples():
    assert derivatives_at_zero("tanh", 3) == [0.0, 1.0, 0.0, -2.0]
    assert derivatives_at_zero("sigmoid", 2) == [0.5, 0.25, 0.0]
    assert taylor_coeffs("tanh", 3).coeffs == pytest.approx((0, 1, 0, -1 / 3), abs=1e-15)
    assert taylor_coeffs("softplus", 1).coeffs == pytest.approx((math.log(2), 0.5), abs=1e-15)


def test_known_series():
    # tanh u = u - u^3/3 + 2u^5/15 - 17u^7/315
    assert taylor_coeffs("tanh", 7).coeffs == pytest.approx((0, 1, 0, -1 / 3, 0, 2 / 15, 0, -17 / 315), abs=1e-15)
    # sigmoid u = 1/2 + u/4 - u^3/48 + u^5/480
    assert taylor_coeffs("sigmoid", 5).coeffs == pytest.approx((0.5, 0.25, 0, -1 / 48, 0, 1 / 480), abs=1e-15)
    # softplus u = ln2 + u/2 + u^2/8 - u^4/192
    assert taylor_coeffs("softplus", 4).coeffs == pytest.approx((math.log(2), 0.5, 1 / 8, 0, -1 / 192), abs=1e-15)


@pytest.mark.parametrize("name", ["tanh", "sigmoid", "softplus"])
def test_against_finite_differences(name):
    act = get_activation(name)
    derivs = derivatives_at_zero(name, 8)
    for k in range(6):
        fd = richardson_derivative(act.fn, k)
        assert abs(derivs[k] - fd) <= 1e-5 * max(1.0, abs(derivs[k]))


def test_tanh_even_orders_vanish_exactly():
    d = derivatives_at_zero("tanh", MAX_TAYLOR_ORDER)
    assert all(d[k] == 0.0 for k in range(0, MAX_TAYLOR_ORDER + 1, 2))
    assert all(d[k] != 0.0 for k in range(1, MAX_TAYLOR_ORDER + 1, 2))


def test_sigmoid_even_orders_above_zero_vanish():
    d = derivatives_at_zero("sigmoid", 10)
    assert all(d[k] == 0.0 for k in range(2, 11, 2))


def test_truncated_series_accuracy():
    assert abs(taylor_eval(taylor_coeffs("tanh", 7), 0.5) - math.tanh(0.5)) < 1e-4
    u = np.linspace(-1, 1, 401)
    for name in ("tanh", "sigmoid", "softplus"):
        err = np.abs(taylor_eval(taylor_coeffs(name, 8), u) - get_activation(name)(u))
        assert err.max() <= 0.05


def test_linear_and_polynomial_activations():
    assert taylor_coeffs("linear", 3).coeffs == (0.0, 1.0, 0.0, 0.0)
    assert get_activation("identity").name == "linear"
    sq = get_activation("poly:0,0,1")
    assert sq.is_polynomial and sq.degree == 2
    assert taylor_coeffs(sq, 4).coeffs == (0.0, 0.0, 1.0, 0.0, 0.0)
    assert derivatives_at_zero("poly:1,2,3", 2) == [1.0, 2.0, 6.0]
    np.testing.assert_allclose(sq.deriv(np.array([0.5, -2.0])), [1.0, -4.0])


@pytest.mark.parametrize("name", ["relu", "softmax", "swish", "poly:a,b"])
def test_unsupported_activations(name):
    with pytest.raises(ValueError):
        get_activation(name)


@pytest.mark.parametrize("q", [-1, MAX_TAYLOR_ORDER + 1])
def test_order_bounds(q):
    with pytest.raises(ValueError):
        taylor_coeffs("tanh", q)


@pytest.mark.parametrize("name", ["tanh", "sigmoid", "softplus"])
def test_derivative_functions_match_numeric(name):
    act = get_activation(name)
    u = np.linspace(-2, 2, 9)
    h = 1e-6
    np.testing.assert_allclose(act.deriv(u), (act.fn(u + h) - act.fn(u - h)) / (2 * h), atol=1e-8)
