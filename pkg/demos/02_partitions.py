"""
Partitions of multisets
=======================

A monomial such as x1^2 x2 x3 corresponds to the multiset {1,1,2,3}. Its
coefficient after an activation is built from the ways of splitting that
multiset into blocks.
"""

from nn2poly.multiset import build_cache, canonicalize, enumerate_partitions, filter_partitions, map_partitions

parts = enumerate_partitions((1, 1, 2, 3))
print(len(parts), "partitions")
for part in parts:
    print("  ", part)

# keep only 2-block partitions whose blocks have at most 2 elements
print(filter_partitions(parts, 2, 2))

# x2 x3^2 x5 has the same shape as x1^2 x2 x3 after relabeling, so the
# partitions are computed once for the canonical form and mapped back
form = canonicalize((0, 1, 2, 0, 1))
print(form.canonical, form.relabeling)
print(map_partitions(enumerate_partitions(form.multiset), form.relabeling)[:3])

# the cache holds one entry per canonical form; its size does not depend on p
for p in (3, 10, 20):
    print(p, len(build_cache(p, 4)))
