"""Activation functions and their Taylor coefficients around zero."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

MAX_TAYLOR_ORDER = 12

SUPPORTED = ("tanh", "sigmoid", "softplus", "linear")


def _sigmoid(u):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    e = np.exp(u[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def _softplus(u):
    return np.logaddexp(0.0, u)


def _identity(u):
    return np.asarray(u, dtype=float) * 1.0


@dataclass(frozen=True)
class Activation:
    """A scalar activation ``g`` with its first derivative.

    ``poly_coeffs`` is set for polynomial activations (``poly:a0,a1,...``),
    whose Taylor series terminates exactly.
    """

    name: str
    fn: Callable = field(repr=False, compare=False)
    deriv: Callable = field(repr=False, compare=False)
    poly_coeffs: tuple[float, ...] | None = None

    def __call__(self, u):
        return self.fn(u)

    @property
    def is_polynomial(self) -> bool:
        return self.poly_coeffs is not None or self.name == "linear"

    @property
    def degree(self) -> int | None:
        if self.name == "linear":
            return 1
        if self.poly_coeffs is None:
            return None
        nz = [i for i, a in enumerate(self.poly_coeffs) if a != 0]
        return max(nz, default=0)


def _tanh_deriv(u):
    y = np.tanh(u)
    return 1.0 - y * y


def _sigmoid_deriv(u):
    s = _sigmoid(u)
    return s * (1.0 - s)


def _poly_activation(spec: str) -> Activation:
    try:
        coeffs = tuple(float(s) for s in spec.split(",") if s.strip())
    except ValueError:
        raise ValueError(f"bad polynomial activation 'poly:{spec}'") from None
    if not coeffs:
        raise ValueError("polynomial activation needs at least one coefficient")
    dcoeffs = tuple(i * a for i, a in enumerate(coeffs))[1:] or (0.0,)

    def fn(u, _c=coeffs[::-1]):
        return np.polyval(_c, np.asarray(u, dtype=float))

    def deriv(u, _c=dcoeffs[::-1]):
        return np.polyval(_c, np.asarray(u, dtype=float))

    name = "poly:" + ",".join(repr(a) for a in coeffs)
    return Activation(name, fn, deriv, coeffs)


_REJECTED = {
    "relu": "ReLU is not differentiable at 0, so it has no Taylor expansion there",
    "softmax": "softmax couples output neurons; only scalar per-neuron activations can be expanded",
}


def get_activation(name: str | Activation) -> Activation:
    """Look up an activation by name.

    Accepts ``tanh``, ``sigmoid``, ``softplus``, ``linear`` and polynomial
    activations written ``poly:a0,a1,...`` (meaning ``a0 + a1*u + ...``).
    """
    if isinstance(name, Activation):
        return name
    key = name.strip().lower()
    if key == "tanh":
        return Activation("tanh", np.tanh, _tanh_deriv)
    if key == "sigmoid":
        return Activation("sigmoid", _sigmoid, _sigmoid_deriv)
    if key == "softplus":
        return Activation("softplus", _softplus, _sigmoid)
    if key in ("linear", "identity"):
        return Activation("linear", _identity, lambda u: np.ones_like(np.asarray(u, dtype=float)))
    if key.startswith("poly:"):
        return _poly_activation(key[5:])
    if key in _REJECTED:
        raise ValueError(f"unsupported activation '{name}': {_REJECTED[key]}")
    raise ValueError(f"unsupported activation '{name}'; expected one of {SUPPORTED} or poly:a0,a1,...")


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_diff(a: list) -> list:
    return [i * a[i] for i in range(1, len(a))] or [Fraction(0)]


def _poly_at(a: list, y: Fraction) -> Fraction:
    acc = Fraction(0)
    for coef in reversed(a):
        acc = acc * y + coef
    return acc


@lru_cache(maxsize=None)
def _logistic_family_derivs(kind: str, q: int) -> tuple[Fraction, ...]:
    # d^k y / du^k as a polynomial in y, using y' = r(y)
    if kind == "tanh":
        r, y0 = [Fraction(1), Fraction(0), Fraction(-1)], Fraction(0)
    else:
        r, y0 = [Fraction(0), Fraction(1), Fraction(-1)], Fraction(1, 2)
    D = [Fraction(0), Fraction(1)]
    out = [_poly_at(D, y0)]
    for _ in range(q):
        D = _poly_mul(_poly_diff(D), r)
        out.append(_poly_at(D, y0))
    return tuple(out)


def _check_order(q: int) -> None:
    if q < 0:
        raise ValueError(f"Taylor order must be >= 0, got {q}")
    if q > MAX_TAYLOR_ORDER:
        raise ValueError(f"Taylor order {q} exceeds the supported maximum {MAX_TAYLOR_ORDER}")


def derivatives_at_zero(activation, q: int) -> list[float]:
    """``[g(0), g'(0), ..., g^(q)(0)]`` computed from exact recurrences."""
    _check_order(q)
    act = get_activation(activation)
    if act.name in ("tanh", "sigmoid"):
        return [float(d) for d in _logistic_family_derivs(act.name, q)]
    if act.name == "softplus":
        return [math.log(2.0)] + [float(d) for d in _logistic_family_derivs("sigmoid", q)[:q]]
    if act.name == "linear":
        return [0.0, 1.0][: q + 1] + [0.0] * max(0, q - 1)
    if act.poly_coeffs is not None:
        a = act.poly_coeffs
        return [math.factorial(n) * a[n] if n < len(a) else 0.0 for n in range(q + 1)]
    raise ValueError(f"unsupported activation '{act.name}'")


@dataclass(frozen=True)
class TaylorCoeffs:
    activation: str
    q: int
    coeffs: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> float:
        return self.coeffs[n]


def taylor_coeffs(activation, q: int) -> TaylorCoeffs:
    """Coefficients ``g^(n)(0) / n!`` for ``n = 0..q``."""
    act = get_activation(activation)
    if act.poly_coeffs is not None:
        _check_order(q)
        a = act.poly_coeffs
        coeffs = tuple(float(a[n]) if n < len(a) else 0.0 for n in range(q + 1))
    else:
        derivs = derivatives_at_zero(act, q)
        coeffs = tuple(d / math.factorial(n) for n, d in enumerate(derivs))
    return TaylorCoeffs(act.name, q, coeffs)


def taylor_eval(coeffs: TaylorCoeffs | Sequence[float], u):
    """Horner evaluation of the truncated series at ``u`` (scalar or array)."""
    c = coeffs.coeffs if isinstance(coeffs, TaylorCoeffs) else tuple(coeffs)
    acc = np.zeros_like(np.asarray(u, dtype=float))
    for cn in reversed(c):
        acc = acc * u + cn
    return acc if np.ndim(acc) else float(acc)
