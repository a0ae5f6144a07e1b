"""Multiset partitions and a cache of them keyed by canonical monomials.

A multiset is written as a sorted tuple of positive integer labels, e.g.
``(1, 1, 2, 3)``.  A partition is a tuple of blocks and every block is a
sorted tuple of labels, e.g. ``((1, 2), (1, 3))``.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .polyalg import ExponentVector

Block = tuple[int, ...]
Partition = tuple[Block, ...]


def _as_multiset(M) -> Counter:
    if isinstance(M, Mapping):
        counts = Counter({int(k): int(v) for k, v in M.items() if int(v) > 0})
        if any(v < 0 for v in M.values()):
            raise ValueError("multiplicities must be non-negative")
    else:
        counts = Counter(int(x) for x in M)
    if any(k < 1 for k in counts):
        raise ValueError("multiset labels must be positive integers")
    return counts


def iter_partitions(M) -> Iterator[Partition]:
    """Yield the partitions of multiset ``M`` in decreasing lexicographic order.

    Knuth's multipartition algorithm (TAOCP 7.2.1.5, Algorithm M).  ``M``
    is an iterable of labels or a ``{label: multiplicity}`` mapping.
    """
    counts = _as_multiset(M)
    if not counts:
        raise ValueError("cannot partition an empty multiset")
    labels = sorted(counts)
    mult = [counts[lab] for lab in labels]
    m = len(mult)
    n = sum(mult)

    size = m * n + 1
    c = [0] * size
    u = [0] * size
    v = [0] * size
    f = [0] * (n + 2)

    # Part 1: initialize
    for j in range(m):
        c[j] = j + 1
        u[j] = v[j] = mult[j]
    f[0] = a = l = 0
    f[1] = b = m

    while True:
        # Part 2: subtract v from u
        while True:
            j, k, x = a, b, 0
            while j < b:
                u[k] = u[j] - v[j]
                if u[k] == 0:
                    x = 1
                    j += 1
                elif x == 0:
                    c[k] = c[j]
                    v[k] = min(v[j], u[k])
                    x = 1 if u[k] < v[j] else 0
                    k += 1
                    j += 1
                else:
                    c[k] = c[j]
                    v[k] = u[k]
                    k += 1
                    j += 1
            # Part 3: push if nonzero
            if k > b:
                a, b = b, k
                l += 1
                f[l + 1] = b
            else:
                break

        # Part 4: visit
        blocks = []
        for level in range(l + 1):
            block: list[int] = []
            for jj in range(f[level], f[level + 1]):
                block.extend([labels[c[jj] - 1]] * v[jj])
            blocks.append(tuple(block))
        yield tuple(blocks)

        # Parts 5 and 6: decrease v, backtracking as needed
        while True:
            j = b - 1
            while v[j] == 0:
                j -= 1
            if j == a and v[j] == 1:
                if l == 0:
                    return
                l -= 1
                b = a
                a = f[l]
                continue
            v[j] -= 1
            for kk in range(j + 1, b):
                v[kk] = u[kk]
            break


def enumerate_partitions(M) -> list[Partition]:
    return list(iter_partitions(M))


def partition_vectors(partition: Partition, labels: Sequence[int]) -> list[tuple[int, ...]]:
    """Column-vector form of a partition: one multiplicity vector per block."""
    index = {lab: i for i, lab in enumerate(labels)}
    out = []
    for block in partition:
        vec = [0] * len(labels)
        for lab in block:
            vec[index[lab]] += 1
        out.append(tuple(vec))
    return out


@dataclass(frozen=True)
class CanonicalForm:
    """Descending positive exponents plus the map back to original variables.

    ``relabeling[j]`` is the original 1-based variable index of canonical
    label ``j``.
    """

    canonical: ExponentVector
    relabeling: dict[int, int]

    @property
    def multiset(self) -> tuple[int, ...]:
        out: list[int] = []
        for j, tj in enumerate(self.canonical, start=1):
            out.extend([j] * tj)
        return tuple(out)


def canonicalize(t: Sequence[int]) -> CanonicalForm:
    """Equivalence-class representative of the monomial ``t``.

    Ties between equal exponents keep ascending original index.
    """
    order = sorted((i for i, ti in enumerate(t) if ti > 0), key=lambda i: (-t[i], i))
    if not order:
        raise ValueError("the intercept (all-zero exponent vector) has no multiset")
    canonical = tuple(int(t[i]) for i in order)
    relabeling = {j: i + 1 for j, i in enumerate(order, start=1)}
    return CanonicalForm(canonical, relabeling)


def map_partitions(partitions: Iterable[Partition], relabeling: Mapping[int, int]) -> list[Partition]:
    out = []
    for part in partitions:
        new_blocks = []
        for block in part:
            try:
                new_blocks.append(tuple(sorted(relabeling[lab] for lab in block)))
            except KeyError as exc:
                raise KeyError(f"label {exc.args[0]} not in relabeling domain") from None
        out.append(tuple(new_blocks))
    return out


def filter_partitions(partitions: Iterable[Partition], n: int, Q: int) -> list[Partition]:
    """Keep partitions with exactly ``n`` blocks, each of size at most ``Q``."""
    return [part for part in partitions if len(part) == n and all(len(b) <= Q for b in part)]


def integer_partitions(T: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of ``T`` as non-increasing tuples."""
    if max_part is None:
        max_part = T
    if T == 0:
        yield ()
        return
    for first in range(min(T, max_part), 0, -1):
        for rest in integer_partitions(T - first, first):
            yield (first,) + rest


class CacheMissError(KeyError):
    pass


class PartitionCache:
    """Partitions of every canonical multiset of size <= ``q_max``.

    Stored partitions use canonical labels ``1..p0``; :meth:`lookup`
    relabels them to the variables of a concrete monomial.
    """

    def __init__(self, q_max: int, table: dict[ExponentVector, list[Partition]]):
        self.q_max = q_max
        self._table = table

    def __len__(self) -> int:
        return len(self._table)

    def __contains__(self, key) -> bool:
        return tuple(key) in self._table

    def keys(self):
        return self._table.keys()

    def __getitem__(self, key) -> list[Partition]:
        try:
            return self._table[tuple(key)]
        except KeyError:
            raise CacheMissError(
                f"no partitions cached for {tuple(key)}; cache was built with Q_max={self.q_max}"
            ) from None

    def canonical_partitions(self, t: Sequence[int]) -> tuple[CanonicalForm, list[Partition]]:
        form = canonicalize(t)
        return form, self[form.canonical]

    def lookup(self, t: Sequence[int]) -> list[Partition]:
        """Partitions of the multiset of ``t`` over its original variable labels."""
        form, parts = self.canonical_partitions(t)
        return map_partitions(parts, form.relabeling)

    @property
    def n_partitions(self) -> int:
        return sum(len(v) for v in self._table.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartitionCache):
            return NotImplemented
        return self.q_max == other.q_max and self._table == other._table

    def to_dict(self) -> dict:
        return {
            ",".join(map(str, key)): [[list(b) for b in part] for part in parts]
            for key, parts in self._table.items()
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: Mapping) -> "PartitionCache":
        table = {}
        for key, parts in data.items():
            k = tuple(int(s) for s in key.split(","))
            table[k] = [tuple(tuple(block) for block in part) for part in parts]
        q_max = max((sum(k) for k in table), default=0)
        return cls(q_max, table)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "PartitionCache":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def build_cache(p: int, q_max: int, max_partitions: int = 5_000_000) -> PartitionCache:
    """Enumerate partitions for every canonical monomial of degree <= ``q_max``.

    The key set depends only on ``q_max``; ``p`` is validated but does not
    restrict it.  Raises ``MemoryError`` when more than ``max_partitions``
    partitions would be stored.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if q_max < 1:
        raise ValueError(f"Q_max must be >= 1, got {q_max}")
    table: dict[ExponentVector, list[Partition]] = {}
    stored = 0
    for T in range(1, q_max + 1):
        for key in integer_partitions(T):
            multiset = {j: tj for j, tj in enumerate(key, start=1)}
            parts = []
            for part in iter_partitions(multiset):
                parts.append(part)
                stored += 1
                if stored > max_partitions:
                    raise MemoryError(
                        f"partition cache for Q_max={q_max} exceeds {max_partitions} partitions"
                    )
            table[key] = parts
    return PartitionCache(q_max, table)


def cache_path(q_max: int, directory: str | os.PathLike | None = None) -> str | None:
    directory = directory or os.environ.get("NN2POLY_CACHE_DIR")
    if not directory:
        return None
    return os.path.join(directory, f"partitions_q{q_max}.json")


def get_cache(p: int, q_max: int, directory: str | os.PathLike | None = None) -> PartitionCache:
    """Build a cache, reusing a persisted one from ``NN2POLY_CACHE_DIR`` if present."""
    path = cache_path(q_max, directory)
    if path and os.path.exists(path):
        return PartitionCache.load(path)
    cache = build_cache(p, q_max)
    if path:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        cache.save(path)
    return cache
