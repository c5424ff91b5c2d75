"""Embedding models"""

from .gradients import GradientBuffer
from .tensor_factorization import (
    ModelParams,
    accumulate_score_gradients,
    accumulate_score_gradients_batch,
    init_params,
    relation_transform,
    relation_transform_vjp,
    score_all_tails,
    score_batch,
    score_triple,
)

__all__ = [
    "GradientBuffer",
    "ModelParams",
    "accumulate_score_gradients",
    "accumulate_score_gradients_batch",
    "init_params",
    "relation_transform",
    "relation_transform_vjp",
    "score_all_tails",
    "score_batch",
    "score_triple",
]
