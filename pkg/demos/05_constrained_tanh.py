"""
A constrained tanh network and its polynomial
=============================================

With every hidden neuron's weights (bias included) scaled to unit l1 norm,
potentials stay inside [-1, 1] for inputs in [-1, 1]^p, where the Taylor
series of tanh is accurate. The polynomial then tracks the network closely
even with the order capped at 3.
"""

import numpy as np

from nn2poly.mlp import forward, potential_diagnostics, random_constrained_init
from nn2poly.transform import TransformConfig, nn2poly

model = random_constrained_init([5, 50, 50, 50, 1], ["tanh"] * 3 + ["linear"], seed=0)
P = nn2poly(model, TransformConfig(taylor_orders=8, q_max=3))
print(len(P), "terms of order <=", P.order)

X = np.random.default_rng(1).uniform(-1, 1, size=(1000, 5))
nn = forward(model, X).ravel()
print("MSE / Var(NN):", np.mean((P.evaluate(X) - nn) ** 2) / np.var(nn))

for layer in potential_diagnostics(model, X)[:-1]:
    print(f"layer {layer.layer}: max|u|={layer.max_abs:.3f}  Taylor max error={layer.taylor_max_err:.1e}")

# the ten largest coefficients
top = sorted(P.items(), key=lambda kv: -abs(kv[1]))[:10]
for t, c in top:
    print(t, f"{c:+.4f}")
