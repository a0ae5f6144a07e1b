"""
Taylor expansions of activation functions
=========================================

Coefficients come from exact rational recurrences rather than numeric
differentiation, so tanh's even coefficients are exactly zero.
"""

import numpy as np

from nn2poly.taylor import get_activation, taylor_coeffs, taylor_eval

for name in ("tanh", "sigmoid", "softplus"):
    print(name, np.round(taylor_coeffs(name, 8).coeffs, 6))

# the truncated series is accurate inside [-1, 1] and degrades outside
u = np.linspace(-3, 3, 13)
tanh = get_activation("tanh")
err = np.abs(taylor_eval(taylor_coeffs(tanh, 8), u) - tanh(u))
for ui, ei in zip(u, err):
    print(f"u={ui:+.1f}  |error|={ei:.2e}")
