"""Brute-force references for checking the partition enumerator and the transform.

Nothing here shares code paths with :mod:`nn2poly.multiset` or
:mod:`nn2poly.transform`: partitions come from plain recursion and network
polynomials from term-by-term multiplication.
"""

from __future__ import annotations

from .mlp import MlpModel
from .polyalg import Polynomial
from .taylor import get_activation

MAX_ORACLE_SIZE = 8
MAX_ORACLE_TERMS = 200_000


def brute_force_partitions(M) -> set[tuple[tuple[int, ...], ...]]:
    """Every partition of multiset ``M`` as a set of sorted block tuples.

    Elements are placed one at a time into an existing block or a new one;
    duplicates from repeated labels collapse in the set.
    """
    elems = sorted(int(x) for x in M)
    if not elems:
        raise ValueError("cannot partition an empty multiset")
    if len(elems) > MAX_ORACLE_SIZE:
        raise ValueError(f"oracle limited to multisets of size <= {MAX_ORACLE_SIZE}")
    found = set()

    def place(i, blocks):
        if i == len(elems):
            found.add(tuple(sorted(tuple(sorted(b)) for b in blocks)))
            return
        for b in blocks:
            b.append(elems[i])
            place(i + 1, blocks)
            b.pop()
        blocks.append([elems[i]])
        place(i + 1, blocks)
        blocks.pop()

    place(0, [])
    return found


def canonical_partition(partition) -> tuple[tuple[int, ...], ...]:
    """Order-insensitive form of a partition for set comparisons."""
    return tuple(sorted(tuple(sorted(b)) for b in partition))


# --- naive dict polynomials: {exponent tuple: coefficient} ---------------


def _guard(terms: dict) -> dict:
    if len(terms) > MAX_ORACLE_TERMS:
        raise ValueError(f"oracle term count exceeded {MAX_ORACLE_TERMS}")
    return terms


def _add(a: dict, b: dict, scale: float = 1.0) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + scale * v
    return out


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            out[k] = out.get(k, 0.0) + va * vb
    return _guard(out)


def _compose(coeffs, poly: dict, p: int) -> dict:
    # Horner: a_d; then acc = acc * poly + a_i
    zero = (0,) * p
    acc = {zero: float(coeffs[-1])}
    for a in reversed(coeffs[:-1]):
        acc = _mul(acc, poly)
        acc[zero] = acc.get(zero, 0.0) + float(a)
    return acc


def _activation_poly(name: str) -> list[float]:
    act = get_activation(name)
    if act.name == "linear":
        return [0.0, 1.0]
    if act.poly_coeffs is None:
        raise ValueError(f"symbolic oracle needs polynomial activations, got '{act.name}'")
    return list(act.poly_coeffs)


def symbolic_forward(model: MlpModel):
    """Exact polynomial(s) computed by ``model`` when every activation is polynomial.

    Returns a single :class:`Polynomial` for a one-neuron output layer and a
    list otherwise.  No Taylor truncation and no order cap.
    """
    p = model.p
    if p > 3 or model.n_layers > 3 or max(model.sizes[1:-1], default=0) > 3:
        raise ValueError("symbolic oracle limited to p <= 3, depth <= 2 hidden layers, width <= 3")
    zero = (0,) * p
    ys = []
    for i in range(p):
        e = [0] * p
        e[i] = 1
        ys.append({tuple(e): 1.0})
    for W, act_name in zip(model.weights, model.activations):
        coeffs = _activation_poly(act_name)
        new = []
        for j in range(W.shape[1]):
            u = {zero: float(W[0, j])}
            for i, y in enumerate(ys):
                u = _add(u, y, float(W[i + 1, j]))
            new.append(_guard(_compose(coeffs, u, p)))
        ys = new
    polys = []
    for y in ys:
        order = max((sum(k) for k in y), default=0)
        polys.append(Polynomial(p, order, y))
    return polys[0] if len(polys) == 1 else polys
