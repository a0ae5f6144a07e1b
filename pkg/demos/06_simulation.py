"""
Synthetic-data study
====================

Data come from a random sparse quadratic with noise. A tanh network is
trained under the weight constraint and then compared with its polynomial
on held-out data. The same study runs from the command line with
``nn2poly simulate --layers 1,3 --seed 0,1,2``.
"""

import numpy as np

from nn2poly.simulation import Scenario, run_simulation

for layers in (1, 3):
    rows = run_simulation(Scenario(hidden_layers=layers), range(3))
    poly_nn = np.median([r["mse_poly_vs_nn"] for r in rows])
    nn_y = np.median([r["mse_nn_vs_y"] for r in rows])
    print(f"{layers} hidden layer(s): median MSE(poly, NN)={poly_nn:.2e}  median MSE(NN, Y)={nn_y:.2e}")
