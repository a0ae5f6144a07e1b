import itertools

import pytest

from nn2poly.multiset import (
    CacheMissError,
    PartitionCache,
    build_cache,
    canonicalize,
    enumerate_partitions,
    filter_partitions,
    get_cache,
    integer_partitions,
    map_partitions,
)
from nn2poly.oracle import brute_force_partitions, canonical_partition

# the eleven partitions of {1,1,2,3}, written out by hand
HAND_1123 = {
    ((1, 1, 2, 3),),
    ((1,), (1, 2, 3)),
    ((2,), (1, 1, 3)),
    ((3,), (1, 1, 2)),
    ((1, 1), (2, 3)),
    ((1, 2), (1, 3)),
    ((1,), (1,), (2, 3)),
    ((1,), (2,), (1, 3)),
    ((1,), (3,), (1, 2)),
    ((2,), (3,), (1, 1)),
    ((1,), (1,), (2,), (3,)),
}


def as_set(parts):
    return {canonical_partition(p) for p in parts}


def test_partitions_of_1123_match_listing():
    parts = enumerate_partitions((1, 1, 2, 3))
    assert len(parts) == 11
    assert as_set(parts) == as_set(HAND_1123)


def test_small_partition_counts():
    assert enumerate_partitions([1]) == [((1,),)]
    # integer partitions of 4
    assert len(enumerate_partitions((1, 1, 1, 1))) == 5
    assert len(brute_force_partitions((1, 1, 1, 1))) == 5


def test_partition_of_mapping_input():
    assert as_set(enumerate_partitions({1: 2, 2: 1, 3: 1})) == as_set(HAND_1123)


def test_empty_multiset_rejected():
    with pytest.raises(ValueError):
        enumerate_partitions([])


def _multisets(max_size, max_labels):
    for m in range(1, max_labels + 1):
        for mults in itertools.product(range(1, max_size + 1), repeat=m):
            if sum(mults) <= max_size:
                yield tuple(lab for lab, k in enumerate(mults, start=1) for _ in range(k))


@pytest.mark.parametrize("M", list(_multisets(6, 3)))
def test_matches_bruteforce(M):
    parts = enumerate_partitions(M)
    assert len(parts) == len(set(parts))
    assert as_set(parts) == brute_force_partitions(M)
    for part in parts:
        assert sorted(x for b in part for x in b) == list(M)


@pytest.mark.parametrize("M", [(1, 1, 2, 3), (1, 1, 1, 2, 2), (1, 2, 3, 4), (1, 1, 2, 2, 3, 3)])
def test_emission_order_strictly_decreasing(M):
    # each partition as its list of multiplicity vectors; Algorithm M visits
    # these in strictly decreasing lexicographic order
    labels = sorted(set(M))

    def vec_form(part):
        return [tuple(block.count(lab) for lab in labels) for block in part]

    forms = [vec_form(p) for p in enumerate_partitions(M)]
    for block_vectors in forms:
        assert block_vectors == sorted(block_vectors, reverse=True)
    assert all(a > b for a, b in zip(forms, forms[1:]))


def test_canonicalize_examples():
    form = canonicalize((0, 1, 2, 0, 1))
    assert form.canonical == (2, 1, 1)
    assert form.relabeling == {1: 3, 2: 2, 3: 5}
    assert form.multiset == (1, 1, 2, 3)
    assert canonicalize((3,)).relabeling == {1: 1}
    assert canonicalize((1, 1)) == canonicalize((1, 1))
    assert canonicalize((1, 1)).relabeling == {1: 1, 2: 2}
    with pytest.raises(ValueError):
        canonicalize((0, 0, 0))


@pytest.mark.parametrize("t", [(0, 1, 2, 0, 1), (2, 0, 3), (1, 1, 1), (0, 0, 4), (3, 1, 2, 1)])
def test_relabeling_reproduces_multiset(t):
    form = canonicalize(t)
    original = sorted(form.relabeling[j] for j in form.multiset)
    assert original == [i + 1 for i, ti in enumerate(t) for _ in range(ti)]
    canon_parts = enumerate_partitions(form.multiset)
    direct = enumerate_partitions(original)
    assert len(canon_parts) == len(direct)
    assert as_set(map_partitions(canon_parts, form.relabeling)) == as_set(direct)


def test_map_partitions_examples():
    mapped = map_partitions(enumerate_partitions((1, 1, 2, 3)), {1: 3, 2: 2, 3: 5})
    assert len(mapped) == 11
    assert as_set(mapped) == as_set(enumerate_partitions((2, 3, 3, 5)))
    parts = enumerate_partitions((1, 1, 2))
    assert map_partitions(parts, {1: 1, 2: 2}) == parts
    assert map_partitions([((1, 1),)], {1: 7}) == [((7, 7),)]
    with pytest.raises(KeyError):
        map_partitions([((1, 2),)], {1: 1})


def test_filter_examples():
    parts = enumerate_partitions((1, 1, 2, 3))
    two = filter_partitions(parts, 2, 4)
    assert as_set(two) == as_set(
        {((1,), (1, 2, 3)), ((2,), (1, 1, 3)), ((3,), (1, 1, 2)), ((1, 1), (2, 3)), ((1, 2), (1, 3))}
    )
    assert as_set(filter_partitions(parts, 2, 2)) == as_set({((1, 1), (2, 3)), ((1, 2), (1, 3))})
    assert as_set(filter_partitions(parts, 4, 2)) == {((1,), (1,), (2,), (3,))}


@pytest.mark.parametrize("M", [(1, 1, 2, 3), (1, 1, 1, 2, 2), (1, 2, 3, 4, 5)])
def test_filter_properties(M):
    parts = enumerate_partitions(M)
    for n in range(1, len(M) + 1):
        for Q in range(1, len(M) + 1):
            kept = filter_partitions(parts, n, Q)
            assert set(kept) <= set(parts)
            assert filter_partitions(kept, n, Q) == kept
    recovered = [p for n in range(1, len(M) + 1) for p in filter_partitions(parts, n, len(M))]
    assert sorted(recovered) == sorted(parts)


def test_integer_partitions():
    assert list(integer_partitions(3)) == [(3,), (2, 1), (1, 1, 1)]
    assert [len(list(integer_partitions(n))) for n in range(1, 8)] == [1, 2, 3, 5, 7, 11, 15]


def test_build_cache_keys():
    assert set(build_cache(3, 2).keys()) == {(1,), (2,), (1, 1)}
    assert set(build_cache(3, 3).keys()) == {(1,), (2,), (1, 1), (3,), (2, 1), (1, 1, 1)}
    assert len(build_cache(1, 5)) == 1 + 2 + 3 + 5 + 7


def test_cache_independent_of_p():
    assert build_cache(3, 4) == build_cache(10, 4)


def test_cache_lookup_canonicalizes():
    cache = build_cache(3, 3)
    form, parts = cache.canonical_partitions((0, 2, 1))
    assert form.canonical == (2, 1)
    assert parts is cache[(2, 1)]
    assert as_set(cache.lookup((0, 2, 1))) == as_set(enumerate_partitions((2, 2, 3)))


def test_cache_miss():
    cache = build_cache(3, 2)
    with pytest.raises(CacheMissError):
        cache.lookup((2, 1, 0))


def test_cache_guard_and_args():
    with pytest.raises(MemoryError):
        build_cache(3, 8, max_partitions=100)
    with pytest.raises(ValueError):
        build_cache(0, 2)
    with pytest.raises(ValueError):
        build_cache(2, 0)


def test_cache_json_round_trip(tmp_path):
    cache = build_cache(4, 4)
    path = tmp_path / "cache.json"
    cache.save(path)
    assert PartitionCache.load(path) == cache
    assert cache.to_dict()["2,1"] == [[list(b) for b in part] for part in cache[(2, 1)]]


def test_cache_persistence_via_env(tmp_path, monkeypatch):
    monkeypatch.setenv("NN2POLY_CACHE_DIR", str(tmp_path))
    first = get_cache(3, 3)
    assert (tmp_path / "partitions_q3.json").exists()
    assert get_cache(5, 3) == first
