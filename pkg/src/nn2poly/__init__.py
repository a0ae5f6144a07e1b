"""Explicit polynomial representations of trained feed-forward networks."""

__version__ = "0.1.0"

from .mlp import MlpModel, forward, load_model, random_constrained_init, save_model, train
from .multiset import PartitionCache, build_cache, enumerate_partitions
from .polyalg import Polynomial, count_terms, enumerate_monomials, linear_combination
from .taylor import get_activation, taylor_coeffs
from .transform import TransformConfig, nn2poly, predict

__all__ = [
    "MlpModel",
    "PartitionCache",
    "Polynomial",
    "TransformConfig",
    "build_cache",
    "count_terms",
    "enumerate_monomials",
    "enumerate_partitions",
    "forward",
    "get_activation",
    "linear_combination",
    "load_model",
    "nn2poly",
    "predict",
    "random_constrained_init",
    "save_model",
    "taylor_coeffs",
    "train",
]
