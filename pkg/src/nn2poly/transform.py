"""Turn a trained MLP into explicit polynomials, layer by layer.

Each neuron carries an *in* polynomial (its potential) and an *out*
polynomial (the Taylor-expanded activation of the in polynomial), both in
the original input variables.  The out coefficient of a monomial ``t`` is

    sum_n c_n * sum_{partitions V of M(t)} multinomial(n; n - |V|, m_1, ...)
               * beta_0^(n - |V|) * prod_blocks beta_block^m_block

where ``c_n = g^(n)(0)/n!``, ``M(t)`` is the multiset of ``t``, the
``m_i`` are multiplicities of repeated blocks, ``beta_0`` is the in
intercept and every block has degree at most the in polynomial's order.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mlp import MlpModel
from .multiset import CacheMissError, Partition, PartitionCache, get_cache, map_partitions
from .polyalg import ExponentVector, Polynomial, iter_monomials, linear_combination, multiset_to_monomial
from .taylor import TaylorCoeffs, get_activation, taylor_coeffs

log = logging.getLogger(__name__)

_U128_MAX = 2**128 - 1


def multinomial_coefficient(n: int, parts: Sequence[int]) -> int:
    """``n! / prod(parts[i]!)`` as an exact integer."""
    if any(k < 0 for k in parts):
        raise ValueError("parts must be non-negative")
    if sum(parts) != n:
        raise ValueError(f"parts sum to {sum(parts)}, expected {n}")
    result = 1
    running = 0
    for k in parts:
        running += k
        result *= math.comb(running, k)
    if result > _U128_MAX:
        raise OverflowError(f"multinomial({n}; {list(parts)}) exceeds 128 bits")
    return result


def _block_profile(partition: Partition, p: int):
    counts = Counter(partition)
    keys = tuple(multiset_to_monomial(block, p) for block in counts)
    mults = tuple(counts.values())
    return keys, mults


def partition_weight(partition: Partition, in_poly: Polynomial, n: int) -> float:
    """Contribution of one partition to the n-th power of ``in_poly``.

    ``partition`` has ``r <= n`` blocks over 1-based variable labels; the
    remaining ``n - r`` factors are the intercept of ``in_poly``.  A block
    whose monomial is absent from ``in_poly`` makes the weight 0.
    """
    r = len(partition)
    if r > n:
        raise ValueError(f"partition has {r} blocks, more than n={n}")
    keys, mults = _block_profile(partition, in_poly.p)
    prod = 1.0
    for key, m in zip(keys, mults):
        if key not in in_poly:
            return 0.0
        prod *= in_poly.coef(key) ** m
    if n > r:
        prod *= in_poly.intercept ** (n - r)
    return multinomial_coefficient(n, (n - r,) + mults) * prod


@dataclass(frozen=True)
class TransformConfig:
    """Per-layer Taylor orders, global order cap and problem mode.

    ``taylor_orders`` is one int for every layer or a sequence with one
    entry per layer (the output layer's entry is used only for
    classification).  ``q_max=None`` disables the cap.  ``mode`` is
    inferred from the output activation when ``None``.
    """

    taylor_orders: int | Sequence[int] = 8
    q_max: int | None = 3
    mode: str | None = None
    output_activation: str | None = None

    def __post_init__(self):
        orders = [self.taylor_orders] if isinstance(self.taylor_orders, int) else list(self.taylor_orders)
        if not orders or any(int(q) < 1 for q in orders):
            raise ValueError(f"Taylor orders must be >= 1, got {self.taylor_orders}")
        if self.q_max is not None and self.q_max < 1:
            raise ValueError(f"Q_max must be >= 1, got {self.q_max}")
        if self.mode not in (None, "regression", "classification"):
            raise ValueError(f"mode must be 'regression' or 'classification', got {self.mode!r}")

    def orders_for(self, n_layers: int) -> list[int]:
        if isinstance(self.taylor_orders, int):
            return [self.taylor_orders] * n_layers
        orders = [int(q) for q in self.taylor_orders]
        if len(orders) == n_layers - 1:
            orders.append(orders[-1])
        if len(orders) != n_layers:
            raise ValueError(f"got {len(orders)} Taylor orders for a {n_layers}-layer model")
        return orders


def effective_orders(taylor_orders: Sequence[int], q_max: int | None) -> list[int]:
    """``Q*_l = min(prod_{i<=l} q_i, Q_max)`` for each layer."""
    out = []
    prod = 1
    for q in taylor_orders:
        prod *= q
        out.append(prod if q_max is None else min(prod, q_max))
    return out


@dataclass
class LayerPolynomials:
    layer: int
    in_polys: list[Polynomial]
    out_polys: list[Polynomial]


class _Plan:
    """Per-target partition lists for fixed ``(p, q_in, out_order)``.

    For each target monomial keeps the admissible partitions (blocks of
    degree <= ``q_in``) as distinct block monomials plus multiplicities.
    """

    def __init__(self, p: int, q_in: int, out_order: int, cache: PartitionCache):
        if out_order > cache.q_max:
            raise CacheMissError(
                f"output order {out_order} needs a cache built with Q_max >= {out_order}, got {cache.q_max}"
            )
        self.p = p
        self.q_in = q_in
        self.out_order = out_order
        self.targets: list[tuple[ExponentVector, list[tuple[int, tuple, tuple]]]] = []
        for t in iter_monomials(p, out_order, min_degree=1):
            form, canon_parts = cache.canonical_partitions(t)
            admissible = [part for part in canon_parts if all(len(b) <= q_in for b in part)]
            entries = []
            for part in map_partitions(admissible, form.relabeling):
                keys, mults = _block_profile(part, p)
                entries.append((len(part), mults, keys))
            self.targets.append((t, entries))


def apply_activation(
    in_poly: Polynomial,
    coeffs: TaylorCoeffs,
    q_in: int,
    q_out_cap: int | None,
    cache: PartitionCache,
    plan: _Plan | None = None,
) -> Polynomial:
    """Out polynomial ``g(in_poly)`` truncated at ``min(q_in * q, q_out_cap)``."""
    if in_poly.order > q_in:
        raise ValueError(f"in polynomial has order {in_poly.order} > Q_in={q_in}")
    q = coeffs.q
    out_order = q_in * q if q_out_cap is None else min(q_in * q, q_out_cap)
    if plan is None:
        plan = _Plan(in_poly.p, q_in, out_order, cache)
    elif (plan.p, plan.q_in, plan.out_order) != (in_poly.p, q_in, out_order):
        raise ValueError("plan does not match this activation step")
    c = coeffs.coeffs
    beta0 = in_poly.intercept
    terms = {(0,) * in_poly.p: sum(c[n] * beta0**n for n in range(q + 1))}

    factors: dict[tuple, float] = {}

    def factor(r: int, mults: tuple) -> float:
        key = (r, mults)
        if key not in factors:
            factors[key] = sum(
                c[n] * multinomial_coefficient(n, (n - r,) + mults) * beta0 ** (n - r)
                for n in range(r, q + 1)
                if c[n] != 0.0
            )
        return factors[key]

    for t, entries in plan.targets:
        acc = 0.0
        for r, mults, keys in entries:
            if r > q:
                continue
            prod = 1.0
            for key, m in zip(keys, mults):
                b = in_poly.coef(key)
                if b == 0.0:
                    prod = 0.0
                    break
                prod *= b**m
            if prod != 0.0:
                acc += factor(r, mults) * prod
        if acc != 0.0:
            terms[t] = acc
    return Polynomial(in_poly.p, out_order, terms)


def _layer_orders(model: MlpModel, config: TransformConfig) -> list[int]:
    """Taylor order per layer, clipped to the degree of polynomial activations."""
    orders = config.orders_for(model.n_layers)
    out = []
    for q, act_name in zip(orders, model.activations):
        degree = get_activation(act_name).degree
        out.append(max(1, min(q, degree)) if degree is not None else q)
    return out


def resolve_mode(model: MlpModel, config: TransformConfig) -> tuple[str, str]:
    """Return ``(mode, output_activation)`` for the final layer."""
    out_act = model.activations[-1]
    mode = config.mode or ("regression" if out_act == "linear" else "classification")
    if mode == "regression":
        if out_act != "linear":
            raise ValueError(f"regression needs a linear output layer, got '{out_act}'")
        return mode, "linear"
    if config.output_activation is not None:
        return mode, get_activation(config.output_activation).name
    if out_act == "linear":
        log.warning("classification output layer is linear; expanding sigmoid instead")
        return mode, "sigmoid"
    return mode, out_act


def _plan_orders(model: MlpModel, config: TransformConfig):
    """Mode, output activation, per-layer Taylor orders, Q*_l and needed cache order."""
    mode, out_act = resolve_mode(model, config)
    orders = _layer_orders(model, config)
    L = model.n_layers
    if mode == "classification":
        act = get_activation(out_act)
        q_out = config.orders_for(L)[-1]
        orders[-1] = max(1, min(q_out, act.degree)) if act.degree is not None else q_out
    q_star = effective_orders(orders, config.q_max)
    needed = max(q_star[: L - 1] + ([q_star[-1]] if mode == "classification" else []), default=1)
    return mode, out_act, orders, q_star, needed


def required_cache_order(model: MlpModel, config: TransformConfig) -> int:
    return _plan_orders(model, config)[-1]


def nn2poly(
    model: MlpModel,
    config: TransformConfig | None = None,
    cache: PartitionCache | None = None,
    keep_layers: bool = False,
):
    """Polynomial representation of ``model``.

    Returns one :class:`Polynomial` when the output layer has one neuron,
    otherwise a list with one per output neuron.  With ``keep_layers``
    returns ``(result, layers)`` where ``layers`` holds every neuron's in
    and out polynomials.
    """
    config = config or TransformConfig()
    mode, out_act, orders, q_star, needed = _plan_orders(model, config)
    L = model.n_layers
    if cache is None:
        cache = get_cache(model.p, needed)
    elif cache.q_max < needed:
        raise CacheMissError(f"cache built with Q_max={cache.q_max}, transform needs {needed}")

    W1 = model.weights[0]
    in_polys = [Polynomial.affine(W1[0, j], W1[1:, j]) for j in range(W1.shape[1])]
    layers = []
    plans: dict[tuple, _Plan] = {}
    q_in = 1

    def expand(polys, act_name, q, cap, q_in):
        coeffs = taylor_coeffs(act_name, q)
        out_order = min(q_in * q, cap)
        key = (q_in, out_order)
        if key not in plans:
            plans[key] = _Plan(model.p, q_in, out_order, cache)
        return [apply_activation(P, coeffs, q_in, cap, cache, plans[key]) for P in polys]

    for l in range(L - 1):
        out_polys = expand(in_polys, model.activations[l], orders[l], q_star[l], q_in)
        if keep_layers:
            layers.append(LayerPolynomials(l + 1, in_polys, out_polys))
        W = model.weights[l + 1]
        in_polys = [linear_combination(W[:, j], out_polys) for j in range(W.shape[1])]
        q_in = q_star[l]

    if mode == "classification":
        result = expand(in_polys, out_act, orders[-1], q_star[-1], q_in)
    else:
        result = in_polys
    if keep_layers:
        layers.append(LayerPolynomials(L, in_polys, result if mode == "classification" else []))
    result = result[0] if len(result) == 1 else result
    return (result, layers) if keep_layers else result


def predict(polys, X) -> np.ndarray:
    """Evaluate one polynomial or a list of them at each row of ``X``."""
    if isinstance(polys, Polynomial):
        return polys.evaluate(np.atleast_2d(X))
    return np.column_stack([P.evaluate(np.atleast_2d(X)) for P in polys])
