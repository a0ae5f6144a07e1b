"""A small numpy MLP: forward pass, weight files, constrained init and training.

Layer ``l`` has a weight matrix of shape ``(h_{l-1} + 1, h_l)`` whose row 0
multiplies the constant bias input 1, so the potential of neuron ``j`` is
``u_j = W[0, j] + sum_i W[i, j] * y_i``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .polyalg import Polynomial, multiset_to_monomial
from .taylor import get_activation, taylor_coeffs, taylor_eval

log = logging.getLogger(__name__)


class ModelFileError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class MlpModel:
    p: int
    weights: list[np.ndarray]
    activations: list[str]

    def __post_init__(self):
        self.weights = [np.array(W, dtype=float, ndmin=2) for W in self.weights]
        self.activations = [get_activation(a).name for a in self.activations]
        if not self.weights:
            raise ValueError("model needs at least one layer")
        if len(self.weights) != len(self.activations):
            raise ValueError("one activation per layer is required")
        fan_in = self.p
        for l, W in enumerate(self.weights, start=1):
            if W.ndim != 2 or W.shape[0] != fan_in + 1:
                raise ValueError(
                    f"layer {l}: weight matrix shape {W.shape}, expected ({fan_in + 1}, h_{l})"
                )
            fan_in = W.shape[1]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def sizes(self) -> list[int]:
        return [self.p] + [W.shape[1] for W in self.weights]

    @property
    def n_outputs(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "MlpModel":
        return MlpModel(self.p, [W.copy() for W in self.weights], list(self.activations))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MlpModel):
            return NotImplemented
        return (
            self.p == other.p
            and self.activations == other.activations
            and len(self.weights) == len(other.weights)
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
        )

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "layers": [
                {"activation": act, "weights": W.tolist()}
                for act, W in zip(self.activations, self.weights)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpModel":
        try:
            layers = data["layers"]
            return cls(
                int(data["p"]),
                [np.array(layer["weights"], dtype=float) for layer in layers],
                [layer["activation"] for layer in layers],
            )
        except (KeyError, TypeError) as exc:
            raise ModelFileError(f"malformed weight file: missing or invalid field {exc}") from exc


def save_model(model: MlpModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh)


def load_model(path) -> MlpModel:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return MlpModel.from_dict(data)
    except ValueError as exc:
        raise ModelFileError(f"{path}: {exc}") from None


def forward(model: MlpModel, x, record_potentials: bool = False):
    """Network output for one input vector or an ``(n, p)`` batch.

    With ``record_potentials`` also returns the list of per-layer
    potential arrays ``u`` (shape ``(n, h_l)``).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    y = np.atleast_2d(x)
    if y.shape[1] != model.p:
        raise ValueError(f"expected {model.p} input columns, got {y.shape[1]}")
    potentials = []
    for W, act in zip(model.weights, model.activations):
        u = W[0] + y @ W[1:]
        potentials.append(u)
        y = get_activation(act)(u)
    out = y[0] if single else y
    if record_potentials:
        return out, [u[0] for u in potentials] if single else potentials
    return out


def l1_project(w) -> np.ndarray:
    """Rescale ``w`` (bias entry included) to unit l1 norm."""
    w = np.asarray(w, dtype=float)
    norm = np.abs(w).sum()
    if norm == 0.0:
        raise ValueError("cannot l1-normalize a zero vector")
    return w / norm


def _project_columns(W: np.ndarray) -> np.ndarray:
    norms = np.abs(W).sum(axis=0)
    if np.any(norms == 0.0):
        raise ValueError("cannot l1-normalize a zero weight vector")
    return W / norms


def random_constrained_init(
    sizes: Sequence[int], activations: Sequence[str], seed: int, constrain: bool = True
) -> MlpModel:
    """Uniform(-1, 1) weights; hidden-layer columns l1-projected when ``constrain``.

    ``sizes`` is ``[p, h_1, ..., h_L]`` and ``activations`` has one entry
    per layer.  The output layer is never constrained.
    """
    if len(sizes) < 2:
        raise ValueError("need at least an input size and an output size")
    if len(activations) != len(sizes) - 1:
        raise ValueError("one activation per layer is required")
    rng = np.random.default_rng(seed)
    weights = []
    for l, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        W = rng.uniform(-1.0, 1.0, size=(fan_in + 1, fan_out))
        if constrain and l < len(sizes) - 2:
            W = _project_columns(W)
        weights.append(W)
    return MlpModel(sizes[0], weights, list(activations))


def glorot_init(sizes: Sequence[int], activations: Sequence[str], seed: int) -> MlpModel:
    rng = np.random.default_rng(seed)
    weights = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-limit, limit, size=(fan_in + 1, fan_out))
        W[0] = 0.0
        weights.append(W)
    return MlpModel(sizes[0], weights, list(activations))


def is_constrained(model: MlpModel, tol: float = 1e-10) -> bool:
    return all(
        np.all(np.abs(np.abs(W).sum(axis=0) - 1.0) <= tol) for W in model.weights[:-1]
    )


@dataclass
class Dataset:
    """Inputs ``(n, p)`` and targets ``(n,)`` plus min/max scaling metadata.

    ``x_min``/``x_max`` (and ``y_min``/``y_max``) are the raw ranges mapped
    onto [-1, 1]; they are ``None`` for unscaled data.
    """

    inputs: np.ndarray
    targets: np.ndarray
    x_min: np.ndarray | None = None
    x_max: np.ndarray | None = None
    y_min: float | None = None
    y_max: float | None = None

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.asarray(self.targets, dtype=float).reshape(-1)
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets have different sample counts")

    @property
    def p(self) -> int:
        return self.inputs.shape[1]

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.inputs[idx], self.targets[idx], self.x_min, self.x_max, self.y_min, self.y_max)


def _to_unit(a, lo, hi):
    span = np.where(hi > lo, hi - lo, 1.0)
    return 2.0 * (a - lo) / span - 1.0


def scale_dataset(data: Dataset, scale_targets: bool = True, ref: Dataset | None = None) -> Dataset:
    """Min-max scale every input column (and optionally the target) to [-1, 1].

    Ranges come from ``ref`` when given (e.g. the full data before a split).
    """
    ref = ref or data
    x_min, x_max = ref.inputs.min(axis=0), ref.inputs.max(axis=0)
    X = _to_unit(data.inputs, x_min, x_max)
    y_min = y_max = None
    y = data.targets
    if scale_targets:
        y_min, y_max = float(ref.targets.min()), float(ref.targets.max())
        y = _to_unit(y, y_min, y_max)
    return Dataset(X, y, x_min, x_max, y_min, y_max)


def train_test_split(data: Dataset, train_fraction: float = 0.75, seed: int = 0):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(data))
    cut = int(round(train_fraction * len(data)))
    return data.subset(perm[:cut]), data.subset(perm[cut:])


def load_csv(path) -> Dataset:
    """Headerless numeric CSV, last column is the target."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric value in {row}") from None
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path}: line {lineno}: expected {len(rows[0])} columns, got {len(row)}")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if len(rows[0]) < 2:
        raise ValueError(f"{path}: need at least one input column and a target column")
    arr = np.array(rows)
    return Dataset(arr[:, :-1], arr[:, -1])


def save_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for x, y in zip(data.inputs, data.targets):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(y))])


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0


@dataclass
class TrainResult:
    model: MlpModel
    losses: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else float("nan")


def _backprop(model: MlpModel, X: np.ndarray, y: np.ndarray):
    ys = [X]
    us = []
    h = X
    acts = [get_activation(a) for a in model.activations]
    for W, act in zip(model.weights, acts):
        u = W[0] + h @ W[1:]
        us.append(u)
        h = act(u)
        ys.append(h)
    pred = h
    diff = pred - y.reshape(pred.shape[0], -1)
    loss = float(np.mean(diff**2))
    delta = 2.0 * diff / diff.size
    grads = [None] * len(model.weights)
    for l in range(len(model.weights) - 1, -1, -1):
        delta = delta * acts[l].deriv(us[l])
        prev = ys[l]
        g = np.empty_like(model.weights[l])
        g[0] = delta.sum(axis=0)
        g[1:] = prev.T @ delta
        grads[l] = g
        if l:
            delta = delta @ model.weights[l][1:].T
    return loss, grads


def train(model: MlpModel, data: Dataset, config: TrainConfig | None = None, constrain: bool = False) -> TrainResult:
    """Mini-batch Adam on the mean squared error.

    With ``constrain`` every hidden neuron's incoming weights (bias
    included) are projected back to unit l1 norm after each step.  Raises
    :class:`TrainingDivergedError` if the loss stops being finite.
    """
    config = config or TrainConfig()
    model = model.copy()
    if constrain:
        for l in range(model.n_layers - 1):
            model.weights[l] = _project_columns(model.weights[l])
    rng = np.random.default_rng(config.seed)
    m = [np.zeros_like(W) for W in model.weights]
    v = [np.zeros_like(W) for W in model.weights]
    step = 0
    n = len(data)
    losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = _backprop(model, data.inputs[idx], data.targets[idx])
            if not math.isfinite(loss):
                raise TrainingDivergedError(f"loss became non-finite at epoch {epoch}")
            epoch_loss += loss * len(idx)
            step += 1
            b1 = 1.0 - config.beta1**step
            b2 = 1.0 - config.beta2**step
            for l, g in enumerate(grads):
                m[l] = config.beta1 * m[l] + (1.0 - config.beta1) * g
                v[l] = config.beta2 * v[l] + (1.0 - config.beta2) * g * g
                model.weights[l] -= config.learning_rate * (m[l] / b1) / (np.sqrt(v[l] / b2) + config.eps)
            if constrain:
                for l in range(model.n_layers - 1):
                    model.weights[l] = _project_columns(model.weights[l])
        losses.append(epoch_loss / n)
        if not all(np.all(np.isfinite(W)) for W in model.weights):
            raise TrainingDivergedError(f"weights became non-finite at epoch {epoch}")
    log.debug("trained %d epochs, final loss %.3g", config.epochs, losses[-1] if losses else float("nan"))
    return TrainResult(model, losses)


DEFAULT_COEF_POOL = (-2.0, 1.0, 2.0, 1.0)


def generate_polynomial_data(
    p: int,
    Q: int = 2,
    n_interactions: int = 4,
    coef_pool: Sequence[float] = DEFAULT_COEF_POOL,
    n_samples: int = 500,
    noise_sd: float = 1.0,
    seed: int = 0,
    low: float = -10.0,
    high: float = 10.0,
):
    """Synthetic regression data from a random sparse polynomial.

    The polynomial has an intercept, every linear term and
    ``n_interactions`` terms drawn at random among those of degree 2..Q.
    Each coefficient is drawn from ``coef_pool``.  Inputs are uniform on
    ``[low, high]^p`` and targets get additive N(0, noise_sd^2) noise.
    Returns ``(Dataset, Polynomial)``.
    """
    rng = np.random.default_rng(seed)
    higher = [
        multiset_to_monomial(combo, p)
        for T in range(2, Q + 1)
        for combo in combinations_with_replacement(range(1, p + 1), T)
    ]
    if n_interactions > len(higher):
        raise ValueError(f"only {len(higher)} terms of degree 2..{Q} exist for p={p}")
    chosen = [higher[i] for i in sorted(rng.choice(len(higher), size=n_interactions, replace=False))]
    keys = [(0,) * p] + [tuple(int(i == j) for i in range(p)) for j in range(p)] + chosen
    pool = np.asarray(coef_pool, dtype=float)
    coefs = pool[rng.integers(0, len(pool), size=len(keys))]
    poly = Polynomial(p, max(Q, 1), dict(zip(keys, coefs)))
    X = rng.uniform(low, high, size=(n_samples, p))
    y = poly.evaluate(X)
    if noise_sd > 0:
        y = y + rng.normal(0.0, noise_sd, size=n_samples)
    return Dataset(X, y), poly


@dataclass
class LayerPotentials:
    layer: int
    activation: str
    mean: float
    sd: float
    frac_above_one: float
    max_abs: float
    hist_counts: np.ndarray
    bin_edges: np.ndarray
    taylor_max_err: float
    taylor_mean_err: float


def potential_diagnostics(
    model: MlpModel, inputs, q: int = 8, bins: int = 60, hist_range: tuple[float, float] = (-3.0, 3.0)
) -> list[LayerPotentials]:
    """Distribution of synaptic potentials per layer and Taylor error over it.

    Histogram values outside ``hist_range`` are clipped into the edge bins
    so the counts sum to ``n_samples * width``.  ``taylor_max_err`` is the
    largest ``|taylor(u) - g(u)|`` over a grid spanning the observed
    potentials; ``taylor_mean_err`` averages it over the observed values.
    """
    X = inputs.inputs if isinstance(inputs, Dataset) else np.atleast_2d(np.asarray(inputs, dtype=float))
    _, potentials = forward(model, X, record_potentials=True)
    stats = []
    edges = np.linspace(hist_range[0], hist_range[1], bins + 1)
    for l, (u, act_name) in enumerate(zip(potentials, model.activations), start=1):
        flat = u.ravel()
        act = get_activation(act_name)
        coeffs = taylor_coeffs(act, q)
        clipped = np.clip(flat, hist_range[0], hist_range[1])
        counts, _ = np.histogram(clipped, bins=edges)
        if flat.size:
            grid = np.linspace(flat.min(), flat.max(), 501)
            max_err = float(np.max(np.abs(taylor_eval(coeffs, grid) - act(grid))))
            mean_err = float(np.mean(np.abs(taylor_eval(coeffs, flat) - act(flat))))
        else:
            max_err = mean_err = 0.0
        stats.append(
            LayerPotentials(
                layer=l,
                activation=act.name,
                mean=float(flat.mean()),
                sd=float(flat.std()),
                frac_above_one=float(np.mean(np.abs(flat) > 1.0)),
                max_abs=float(np.max(np.abs(flat))),
                hist_counts=counts,
                bin_edges=edges,
                taylor_max_err=max_err,
                taylor_mean_err=mean_err,
            )
        )
    return stats
