"""Simulation protocol: synthetic polynomial data, train an MLP, compare its polynomial."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .mlp import (
    DEFAULT_COEF_POOL,
    TrainConfig,
    TrainingDivergedError,
    forward,
    generate_polynomial_data,
    glorot_init,
    scale_dataset,
    train,
    train_test_split,
)
from .transform import TransformConfig, nn2poly

log = logging.getLogger(__name__)

SIM_COLUMNS = ("seed", "layers", "width", "activation", "mse_poly_vs_nn", "mse_nn_vs_y")


@dataclass
class Scenario:
    p: int = 5
    order: int = 2
    n_interactions: int = 5
    hidden_layers: int = 1
    width: int = 50
    activation: str = "tanh"
    constrain: bool = True
    n_samples: int = 500
    noise_sd: float = 1.0
    coef_pool: tuple = DEFAULT_COEF_POOL
    train: TrainConfig = field(default_factory=lambda: TrainConfig(epochs=200, batch_size=32, learning_rate=1e-3))
    taylor_order: int = 8
    q_max: int | None = 3

    def __post_init__(self):
        if self.hidden_layers < 1:
            raise ValueError("a scenario needs at least one hidden layer")
        if self.width < 1 or self.p < 1:
            raise ValueError("width and p must be positive")


def run_seed(scenario: Scenario, seed: int) -> dict:
    """One replicate; test-split MSEs in the scaled target units.

    A diverged training run yields NaN metrics instead of raising.
    """
    data, _ = generate_polynomial_data(
        scenario.p,
        scenario.order,
        scenario.n_interactions,
        scenario.coef_pool,
        scenario.n_samples,
        scenario.noise_sd,
        seed,
    )
    scaled = scale_dataset(data)
    train_set, test_set = train_test_split(scaled, 0.75, seed)
    sizes = [scenario.p] + [scenario.width] * scenario.hidden_layers + [1]
    acts = [scenario.activation] * scenario.hidden_layers + ["linear"]
    model = glorot_init(sizes, acts, seed)
    row = {"seed": seed, "layers": scenario.hidden_layers, "width": scenario.width, "activation": scenario.activation}
    cfg = TrainConfig(**{**asdict(scenario.train), "seed": seed})
    try:
        model = train(model, train_set, cfg, constrain=scenario.constrain).model
    except TrainingDivergedError as exc:
        log.warning("seed %d: %s", seed, exc)
        return {**row, "mse_poly_vs_nn": math.nan, "mse_nn_vs_y": math.nan}
    poly = nn2poly(model, TransformConfig(scenario.taylor_order, scenario.q_max))
    nn_pred = forward(model, test_set.inputs).ravel()
    poly_pred = poly.evaluate(test_set.inputs)
    return {
        **row,
        "mse_poly_vs_nn": float(np.mean((poly_pred - nn_pred) ** 2)),
        "mse_nn_vs_y": float(np.mean((nn_pred - test_set.targets) ** 2)),
    }


def run_simulation(scenario: Scenario, seeds) -> list[dict]:
    return [run_seed(scenario, s) for s in seeds]
