"""Sparse multivariate polynomials keyed by exponent vectors.

A monomial is identified by its exponent vector ``t = (t_1, ..., t_p)``
where ``t_i`` is the power of variable ``x_i``.  Monomials are ordered
graded-lexicographically: ascending total degree, then ascending
lexicographic order on the exponent tuple.  The position of a monomial in
that order is its index ``k``.
"""

from __future__ import annotations

import json
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

ExponentVector = tuple[int, ...]

_U64_MAX = 2**64 - 1


def _check_pq(p: int, Q: int) -> None:
    if p < 1:
        raise ValueError(f"variable count must be >= 1, got {p}")
    if Q < 0:
        raise ValueError(f"order must be >= 0, got {Q}")


def count_terms(p: int, Q: int) -> int:
    """Number of monomials in ``p`` variables with total degree <= ``Q``.

    Raises ``OverflowError`` if the count does not fit in 64 bits.
    """
    _check_pq(p, Q)
    total = sum(comb(p + T - 1, T) for T in range(Q + 1))
    if total > _U64_MAX:
        raise OverflowError(f"N(p={p}, Q={Q}) exceeds the 64-bit range")
    return total


def _count_degree(p: int, T: int) -> int:
    # monomials in p variables of total degree exactly T
    if p == 0:
        return 1 if T == 0 else 0
    return comb(p + T - 1, T)


def _compositions(total: int, parts: int) -> Iterator[ExponentVector]:
    """Weak compositions of ``total`` into ``parts`` in ascending lex order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def iter_monomials(p: int, Q: int, min_degree: int = 0) -> Iterator[ExponentVector]:
    """Lazily yield exponent vectors of degree ``min_degree..Q`` in graded-lex order."""
    _check_pq(p, Q)
    for T in range(min_degree, Q + 1):
        yield from _compositions(T, p)


def enumerate_monomials(p: int, Q: int) -> list[ExponentVector]:
    """All exponent vectors of length ``p`` and degree <= ``Q`` in graded-lex order."""
    count_terms(p, Q)
    return list(iter_monomials(p, Q))


def monomial_index(t: Sequence[int]) -> int:
    """Graded-lex index ``k`` of the exponent vector ``t``."""
    p = len(t)
    T = sum(t)
    if p < 1 or any(ti < 0 for ti in t):
        raise ValueError(f"invalid exponent vector {tuple(t)}")
    k = count_terms(p, T - 1) if T > 0 else 0
    remaining = T
    for i, ti in enumerate(t[:-1]):
        tail = p - i - 1
        for v in range(ti):
            k += _count_degree(tail, remaining - v)
        remaining -= ti
    return k


def monomial_from_index(k: int, p: int) -> ExponentVector:
    """Inverse of :func:`monomial_index` for ``p`` variables."""
    if k < 0:
        raise ValueError(f"index must be non-negative, got {k}")
    _check_pq(p, 0)
    T = 0
    below = 0
    while below + _count_degree(p, T) <= k:
        below += _count_degree(p, T)
        T += 1
    rank = k - below
    t = []
    remaining = T
    for i in range(p - 1):
        tail = p - i - 1
        v = 0
        while True:
            block = _count_degree(tail, remaining - v)
            if rank < block:
                break
            rank -= block
            v += 1
        t.append(v)
        remaining -= v
    t.append(remaining)
    return tuple(t)


def grlex_key(t: Sequence[int]) -> tuple:
    return (sum(t), tuple(t))


def monomial_to_multiset(t: Sequence[int]) -> tuple[int, ...]:
    """Multiset of 1-based variable labels, label ``i`` repeated ``t_i`` times."""
    out: list[int] = []
    for i, ti in enumerate(t, start=1):
        out.extend([i] * ti)
    return tuple(out)


def multiset_to_monomial(labels: Iterable[int], p: int) -> ExponentVector:
    t = [0] * p
    for label in labels:
        if not 1 <= label <= p:
            raise ValueError(f"label {label} outside 1..{p}")
        t[label - 1] += 1
    return tuple(t)


class Polynomial:
    """Immutable sparse polynomial in ``p`` variables of order at most ``order``.

    ``terms`` maps exponent vectors to float coefficients.  Missing keys are
    zero coefficients; explicit zeros are dropped on construction.
    """

    __slots__ = ("p", "order", "_terms")

    def __init__(self, p: int, order: int, terms: Mapping[Sequence[int], float] | None = None):
        _check_pq(p, order)
        clean: dict[ExponentVector, float] = {}
        for key, value in (terms or {}).items():
            t = tuple(int(v) for v in key)
            if len(t) != p:
                raise ValueError(f"exponent vector {t} has length {len(t)}, expected {p}")
            if any(v < 0 for v in t):
                raise ValueError(f"negative exponent in {t}")
            if sum(t) > order:
                raise ValueError(f"monomial {t} exceeds order {order}")
            value = float(value)
            if value != 0.0:
                clean[t] = value
        self.p = p
        self.order = order
        self._terms = dict(sorted(clean.items(), key=lambda kv: grlex_key(kv[0])))

    @classmethod
    def constant(cls, p: int, value: float, order: int = 0) -> "Polynomial":
        return cls(p, order, {(0,) * p: value})

    @classmethod
    def affine(cls, bias: float, weights: Sequence[float]) -> "Polynomial":
        """``bias + sum_i weights[i] * x_{i+1}`` as an order-1 polynomial."""
        p = len(weights)
        terms = {(0,) * p: bias}
        for i, w in enumerate(weights):
            e = [0] * p
            e[i] = 1
            terms[tuple(e)] = w
        return cls(p, 1, terms)

    @property
    def terms(self) -> dict[ExponentVector, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __contains__(self, t) -> bool:
        return tuple(t) in self._terms

    def coef(self, t: Sequence[int]) -> float:
        return self._terms.get(tuple(t), 0.0)

    @property
    def intercept(self) -> float:
        return self._terms.get((0,) * self.p, 0.0)

    @property
    def degree(self) -> int:
        """Largest total degree actually present (0 for the zero polynomial)."""
        return max((sum(t) for t in self._terms), default=0)

    def truncate(self, order: int) -> "Polynomial":
        return Polynomial(self.p, order, {t: c for t, c in self._terms.items() if sum(t) <= order})

    def evaluate(self, x) -> float | np.ndarray:
        """Evaluate at one point (length ``p``) or at each row of an ``(n, p)`` array."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise ValueError(f"expected input with {self.p} columns, got shape {x.shape}")
        out = np.zeros(X.shape[0])
        if self._terms:
            exps = np.array(list(self._terms.keys()), dtype=float)
            coefs = np.array(list(self._terms.values()))
            # 0**0 == 1 in numpy
            mono = np.prod(X[:, None, :] ** exps[None, :, :], axis=2)
            out = mono @ coefs
        return float(out[0]) if single else out

    __call__ = evaluate

    def allclose(self, other: "Polynomial", atol: float = 0.0) -> bool:
        if self.p != other.p:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coef(k) - other.coef(k)) <= atol for k in keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.p == other.p and self.order == other.order and self._terms == other._terms

    def __hash__(self):
        return hash((self.p, self.order, tuple(self._terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial(p={self.p}, order={self.order}, n_terms={len(self)})"

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "order": self.order,
            "terms": [{"exponents": list(t), "coef": c} for t, c in self._terms.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Polynomial":
        try:
            terms = {tuple(term["exponents"]): term["coef"] for term in data["terms"]}
            return cls(int(data["p"]), int(data["order"]), terms)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial object: {exc}") from exc

    def to_json(self, indent: int | None = None) -> str:
        # json writes floats with repr(), the shortest round-trip form
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return cls.from_dict(json.loads(text))


def linear_combination(weights: Sequence[float], polys: Sequence[Polynomial]) -> Polynomial:
    """``weights[0] + sum_i weights[i] * polys[i-1]``.

    ``weights[0]`` multiplies the constant input 1 (the bias row of a
    weight matrix).
    """
    if not polys:
        raise ValueError("need at least one polynomial")
    if len(weights) != len(polys) + 1:
        raise ValueError(f"expected {len(polys) + 1} weights, got {len(weights)}")
    p, order = polys[0].p, polys[0].order
    for poly in polys[1:]:
        if poly.p != p or poly.order != order:
            raise ValueError(
                f"mismatched polynomials: (p={poly.p}, order={poly.order}) vs (p={p}, order={order})"
            )
    acc: dict[ExponentVector, float] = {(0,) * p: float(weights[0])}
    for w, poly in zip(weights[1:], polys):
        w = float(w)
        if w == 0.0:
            continue
        for t, c in poly.items():
            acc[t] = acc.get(t, 0.0) + w * c
    return Polynomial(p, order, acc)
