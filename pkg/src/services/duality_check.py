"""
Duality Check Service
Balance conditions of the DURA / nuclear 2-norm identity for CP factors, and the rebalancing construction

For diagonal relations, with h_d, r_d, t_d the d-th columns of H, R and T and |R| relations:
    sum_j (||H R_j||^2 + ||T||^2 + ||T R_j||^2 + ||H||^2) >= 4 sqrt(|R|) sum_d ||h_d|| ||r_d|| ||t_d||
with equality iff ||h_d|| ||r_d|| = sqrt(|R|) ||t_d|| and ||t_d|| ||r_d|| = sqrt(|R|) ||h_d|| for every d.
Each half, sum_j (||H R_j||^2 + ||T||^2) and sum_j (||T R_j||^2 + ||H||^2), is at least
2 sqrt(|R|) sum_d ||h_d|| ||r_d|| ||t_d||, tight exactly when its own condition holds.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from rich.table import Table

from ..core.exceptions import UnsupportedCombinationError
from ..domain import ModelKind
from ..models.tensor_factorization import ModelParams

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class BalanceReport:
    head_norms: np.ndarray
    relation_norms: np.ndarray
    tail_norms: np.ndarray
    condition1_residuals: np.ndarray
    condition2_residuals: np.ndarray
    head_half_value: float
    tail_half_value: float
    half_bound_value: float
    dura_value: float
    bound_value: float

    def max_residual(self) -> float:
        residuals = np.concatenate([self.condition1_residuals, self.condition2_residuals])
        return float(residuals.max()) if residuals.size else 0.0

    def summary(self) -> dict:
        return {
            "dura_value": self.dura_value,
            "bound_value": self.bound_value,
            "head_half_value": self.head_half_value,
            "tail_half_value": self.tail_half_value,
            "half_bound_value": self.half_bound_value,
            "max_condition1_residual": float(np.max(self.condition1_residuals, initial=0.0)),
            "max_condition2_residual": float(np.max(self.condition2_residuals, initial=0.0)),
        }

    def as_record(self) -> dict:
        """Summary plus the per-dimension (h_d, r_d, t_d) norms and both residual vectors"""
        return {
            **self.summary(),
            "column_norms": np.stack(
                [self.head_norms, self.relation_norms, self.tail_norms], axis=1
            ).tolist(),
            "condition1_residuals": self.condition1_residuals.tolist(),
            "condition2_residuals": self.condition2_residuals.tolist(),
        }

def _factors(params: ModelParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if params.kind is not ModelKind.CP:
        raise UnsupportedCombinationError(
            f"the balance check covers real diagonal relations (CP), not {params.kind.value}"
        )
    return params.tables["entity_head"], params.tables["relation"], params.tables["entity_tail"]

def balance_report(H: np.ndarray, Rmat: np.ndarray, T: np.ndarray) -> BalanceReport:
    H, Rmat, T = (np.asarray(x, dtype=np.float64) for x in (H, Rmat, T))
    if Rmat.ndim != 2:
        raise UnsupportedCombinationError("relations must be diagonal: one D-vector per relation")
    n_relations = Rmat.shape[0]
    root = np.sqrt(n_relations)
    h, r, t = (np.linalg.norm(x, axis=0) for x in (H, Rmat, T))

    # Column-wise forms of sum_j (||H R_j||^2 + ||T||^2) and sum_j (||T R_j||^2 + ||H||^2)
    head_half = float(np.sum((h * r) ** 2 + n_relations * t ** 2))
    tail_half = float(np.sum((t * r) ** 2 + n_relations * h ** 2))
    half_bound = float(2.0 * root * np.sum(h * r * t))
    return BalanceReport(
        head_norms=h,
        relation_norms=r,
        tail_norms=t,
        condition1_residuals=np.abs(h * r - root * t),
        condition2_residuals=np.abs(t * r - root * h),
        head_half_value=head_half,
        tail_half_value=tail_half,
        half_bound_value=half_bound,
        dura_value=head_half + tail_half,
        bound_value=2.0 * half_bound,
    )

def rebalance(H: np.ndarray, Rmat: np.ndarray, T: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Rescale column d of H, R, T by positive alpha_d, beta_d, gamma_d with alpha*beta*gamma = 1 so that
    ||r_d|| = sqrt(|R|) and ||h_d|| = ||t_d||. Every score h_i R_j t_k^T is unchanged.
    Columns where any factor is zero pass through.
    """

    H, Rmat, T = (np.asarray(x, dtype=np.float64) for x in (H, Rmat, T))
    root = np.sqrt(Rmat.shape[0])
    h, r, t = (np.linalg.norm(x, axis=0) for x in (H, Rmat, T))

    live = (h > 0) & (r > 0) & (t > 0)
    beta = np.ones_like(r)
    alpha = np.ones_like(h)
    beta[live] = root / r[live]
    alpha[live] = np.sqrt(t[live] / (h[live] * beta[live]))
    gamma = 1.0 / (alpha * beta)
    return H * alpha, Rmat * beta, T * gamma

def check_params(params: ModelParams) -> Tuple[BalanceReport, BalanceReport]:
    """Reports before and after rebalancing a CP model"""

    H, Rmat, T = _factors(params)
    before = balance_report(H, Rmat, T)
    after = balance_report(*rebalance(H, Rmat, T))
    logger.info(
        f"⚖️ Four-term sum {before.dura_value:.6g} -> {after.dura_value:.6g}, "
        f"bound {after.bound_value:.6g}, max residual {after.max_residual():.3g}"
    )
    return before, after

def balance_table(before: BalanceReport, after: BalanceReport) -> Table:
    table = Table(title="Duality balance check")
    table.add_column("Quantity")
    table.add_column("Before", justify="right")
    table.add_column("After rebalance", justify="right")
    after_summary = after.summary()
    for key, value in before.summary().items():
        table.add_row(key, f"{value:.6g}", f"{after_summary[key]:.6g}")
    return table
