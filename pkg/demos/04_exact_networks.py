"""
Networks with polynomial activations
====================================

When every activation is itself a polynomial the transform involves no
approximation, and a brute-force symbolic expansion gives the same
coefficients.
"""

import numpy as np

from nn2poly.mlp import MlpModel, forward
from nn2poly.oracle import symbolic_forward
from nn2poly.transform import TransformConfig, nn2poly

# y = 1 + 2 (x1 + x2)^2 - (0.5 + x1 - x2)^2
W1 = np.array([[0.0, 0.5], [1.0, 1.0], [1.0, -1.0]])
W2 = np.array([[1.0], [2.0], [-1.0]])
model = MlpModel(2, [W1, W2], ["poly:0,0,1", "linear"])

P = nn2poly(model, TransformConfig(taylor_orders=2, q_max=None))
for t, c in P.items():
    print(t, c)

print("matches symbolic expansion:", P.allclose(symbolic_forward(model), atol=1e-12))
X = np.random.default_rng(0).uniform(-1, 1, size=(5, 2))
print(np.c_[forward(model, X), P.evaluate(X)])
