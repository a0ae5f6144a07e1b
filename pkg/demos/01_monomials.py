"""
Monomials, exponent vectors and sparse polynomials
==================================================

Every polynomial in the package is a sparse map from exponent vectors to
coefficients, kept in graded-lexicographic order.
"""

import numpy as np

from nn2poly.polyalg import (
    Polynomial,
    count_terms,
    enumerate_monomials,
    linear_combination,
    monomial_index,
    monomial_to_multiset,
)

# how many monomials of degree <= Q exist in p variables
for p in (3, 10, 20):
    print(p, [count_terms(p, Q) for Q in (2, 3, 4)])

# ordering: lower degree first, then lexicographic inside each degree
print(enumerate_monomials(2, 2))
print(monomial_index((1, 1)), monomial_to_multiset((2, 1, 0, 1)))

# polynomials evaluate row-wise on (n, p) arrays
P = Polynomial(2, 2, {(0, 0): 0.5, (1, 0): 2.0, (1, 1): -1.0})
X = np.array([[1.0, 2.0], [0.0, 0.0]])
print(P.evaluate(X))

# a neuron's potential is an affine combination of the previous outputs
Q = linear_combination([1.0, 3.0, -1.0], [P, Polynomial(2, 2, {(0, 2): 1.0})])
print(Q.to_json())
