"""
Regularizer Service
Penalty values and analytic gradients for DURA and the baseline regularizers
"""

import logging
from typing import Tuple

import numpy as np

from ..core.config import RegularizerSpec
from ..core.exceptions import UnsupportedCombinationError
from ..domain import ModelKind, RegularizerKind
from ..models.gradients import GradientBuffer
from ..models.tensor_factorization import (
    HEAD_SIDE,
    TAIL_SIDE,
    ModelParams,
    relation_transform,
    relation_transform_vjp,
)

logger = logging.getLogger(__name__)

def _check_supported(spec: RegularizerSpec, params: ModelParams) -> None:
    # N3 builds on diagonal relations and has no analogue for full relation matrices
    if spec.kind is RegularizerKind.N3 and not params.kind.is_diagonal:
        raise UnsupportedCombinationError("N3 regularizer is not defined for RESCAL")

def _gather(params: ModelParams, heads, relations, tails) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    heads = np.asarray(heads, dtype=np.int64)
    relations = np.asarray(relations, dtype=np.int64)
    tails = np.asarray(tails, dtype=np.int64)
    return (
        heads, relations, tails,
        params.tables[params.head_table][heads],
        params.tables["relation"][relations],
        params.tables[params.tail_table][tails],
    )

def _cubed_modulus(params: ModelParams, x: np.ndarray) -> Tuple[float, np.ndarray]:
    """Sum of |x_d|^3 and its gradient; ComplEx coordinates use the complex modulus"""

    if params.kind is ModelKind.COMPLEX:
        k = x.shape[-1] // 2
        modulus = np.sqrt(x[..., :k] ** 2 + x[..., k:] ** 2)
        value = float(np.sum(modulus ** 3))
        return value, 3.0 * np.concatenate([modulus, modulus], axis=-1) * x
    return float(np.sum(np.abs(x) ** 3)), 3.0 * x * np.abs(x)

def penalty_batch(spec: RegularizerSpec, params: ModelParams, heads, relations, tails) -> float:
    """Summed per-triple penalty over a batch of triples"""

    if spec.kind is RegularizerKind.NONE:
        return 0.0
    _check_supported(spec, params)
    heads, relations, tails, H, R, T = _gather(params, heads, relations, tails)
    lam = spec.lambda_

    if spec.kind is RegularizerKind.FRO:
        return lam * float(np.sum(H ** 2) + np.sum(T ** 2) + np.sum(R ** 2))
    if spec.kind is RegularizerKind.N3:
        return lam * (_cubed_modulus(params, H)[0] + _cubed_modulus(params, R)[0]
                      + _cubed_modulus(params, T)[0])

    h_rel = relation_transform(params, H, relations, HEAD_SIDE)
    if spec.kind is RegularizerKind.BASIC_DURA:
        return lam * float(np.sum(h_rel ** 2) + np.sum(T ** 2))

    t_rel = relation_transform(params, T, relations, TAIL_SIDE)
    if spec.kind is RegularizerKind.DURA:
        return lam * float(
            spec.lambda1 * (np.sum(H ** 2) + np.sum(T ** 2))
            + spec.lambda2 * (np.sum(h_rel ** 2) + np.sum(t_rel ** 2))
        )
    # RegP1: L1 over the real coordinates of both dual residuals
    return lam * float(np.sum(np.abs(h_rel - T)) + np.sum(np.abs(t_rel - H)))

def penalty_gradients_batch(
    spec: RegularizerSpec,
    params: ModelParams,
    heads,
    relations,
    tails,
    grads: GradientBuffer,
    scale: float = 1.0,
) -> None:
    """Accumulate scale * d(penalty_batch)/d(parameters) into grads"""

    if spec.kind is RegularizerKind.NONE:
        return
    _check_supported(spec, params)
    heads, relations, tails, H, R, T = _gather(params, heads, relations, tails)
    c = scale * spec.lambda_

    if spec.kind is RegularizerKind.FRO:
        dH, dR, dT = 2 * c * H, 2 * c * R, 2 * c * T
    elif spec.kind is RegularizerKind.N3:
        dH, dR, dT = (c * _cubed_modulus(params, x)[1] for x in (H, R, T))
    else:
        h_rel = relation_transform(params, H, relations, HEAD_SIDE)
        t_rel = relation_transform(params, T, relations, TAIL_SIDE)
        if spec.kind is RegularizerKind.BASIC_DURA:
            dH, dR = relation_transform_vjp(params, H, relations, HEAD_SIDE, 2 * c * h_rel)
            dT = 2 * c * T
        elif spec.kind is RegularizerKind.DURA:
            dH_rel, dR_head = relation_transform_vjp(params, H, relations, HEAD_SIDE, 2 * c * spec.lambda2 * h_rel)
            dT_rel, dR_tail = relation_transform_vjp(params, T, relations, TAIL_SIDE, 2 * c * spec.lambda2 * t_rel)
            dH = 2 * c * spec.lambda1 * H + dH_rel
            dT = 2 * c * spec.lambda1 * T + dT_rel
            dR = dR_head + dR_tail
        else:
            # np.sign(0) == 0: subgradient 0 at the kink
            s_head = c * np.sign(h_rel - T)
            s_tail = c * np.sign(t_rel - H)
            dH_rel, dR_head = relation_transform_vjp(params, H, relations, HEAD_SIDE, s_head)
            dT_rel, dR_tail = relation_transform_vjp(params, T, relations, TAIL_SIDE, s_tail)
            dH = dH_rel - s_tail
            dT = dT_rel - s_head
            dR = dR_head + dR_tail

    grads.add_rows(params.head_table, heads, dH)
    grads.add_rows(params.tail_table, tails, dT)
    grads.add_rows("relation", relations, dR)

def penalty(spec: RegularizerSpec, params: ModelParams, h: int, r: int, t: int) -> float:
    return penalty_batch(spec, params, [h], [r], [t])

def penalty_gradients(spec: RegularizerSpec, params: ModelParams, h: int, r: int, t: int, grads: GradientBuffer) -> None:
    penalty_gradients_batch(spec, params, [h], [r], [t], grads)

def _coordinate_power(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Column sums of |x_d|^2 (complex modulus for ComplEx)"""
    if params.kind is ModelKind.COMPLEX:
        k = x.shape[-1] // 2
        return np.sum(x[:, :k] ** 2 + x[:, k:] ** 2, axis=0)
    return np.sum(x ** 2, axis=0)

def unweighted_dura(params: ModelParams) -> float:
    """
    |E| * sum_j (||H R_j-bar||_F^2 + ||T||_F^2 + ||T R_j^T||_F^2 + ||H||_F^2) over every relation,
    i.e. the four DURA terms summed over all (head, relation, tail) combinations.
    """

    H = params.tables[params.head_table]
    T = params.tables[params.tail_table]
    R = params.tables["relation"]
    n_relations = params.n_relations

    entity_terms = n_relations * (np.sum(H ** 2) + np.sum(T ** 2))
    if params.kind is ModelKind.RESCAL:
        relation_terms = sum(
            np.sum((H @ R[j]) ** 2) + np.sum((T @ R[j].T) ** 2) for j in range(n_relations)
        )
    else:
        relation_power = _coordinate_power(params, R)
        relation_terms = (
            _coordinate_power(params, H) @ relation_power
            + _coordinate_power(params, T) @ relation_power
        )
    return float(params.n_entities * (relation_terms + entity_terms))
