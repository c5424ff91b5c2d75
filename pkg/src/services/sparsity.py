"""
Sparsity Analysis Service
Lambda-sparsity of entity embeddings, thresholding, CSR storage accounting and the sparsity/MRR sweep
"""

import logging
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix

from ..models.tensor_factorization import ModelParams
from .evaluation import evaluate
from .kg_data import FilterIndex, TripleStore

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class SweepPoint:
    target: float
    threshold: float
    achieved: float
    mrr: float
    storage_numbers: int

@dataclass(frozen=True)
class SparsitySweep:
    points: List[SweepPoint]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(p) for p in self.points],
                            columns=["target", "threshold", "achieved", "mrr", "storage_numbers"])

    def to_csv(self, path_or_buffer: Union[Path, object]) -> None:
        self.to_frame().to_csv(path_or_buffer, index=False, float_format="%.10g")

def lambda_sparsity(E: np.ndarray, threshold: float) -> float:
    """Fraction of entries with |x| < threshold (strict)"""
    E = np.asarray(E)
    if E.size == 0:
        return 0.0
    return float(np.mean(np.abs(E) < threshold))

def threshold_for_sparsity(E: np.ndarray, target: float) -> Tuple[float, float]:
    """
    Smallest threshold on the grid of absolute values whose lambda-sparsity reaches target.
    Returns (threshold, achieved sparsity).
    """

    if not 0.0 <= target <= 1.0:
        raise ValueError(f"target sparsity must lie in [0, 1], got {target}")
    magnitudes = np.sort(np.abs(np.asarray(E, dtype=np.float64)).ravel())
    n = magnitudes.size
    # Rounding guards against 0.6 * 5 == 3.0000000000000004
    needed = math.ceil(round(target * n, 9))
    if needed == 0 or n == 0:
        return 0.0, lambda_sparsity(E, 0.0)

    largest_excluded = magnitudes[needed - 1]
    above = magnitudes[magnitudes > largest_excluded]
    threshold = float(above[0]) if above.size else float(np.nextafter(largest_excluded, np.inf))
    return threshold, lambda_sparsity(E, threshold)

def sparsify(E: np.ndarray, threshold: float) -> np.ndarray:
    E = np.asarray(E)
    return np.where(np.abs(E) < threshold, 0.0, E)

def csr_storage_numbers(E: np.ndarray) -> int:
    """Numbers needed to hold E in CSR form: 2 * nonzeros + rows + 1"""
    matrix = csr_matrix(np.asarray(E))
    matrix.eliminate_zeros()
    return 2 * int(matrix.nnz) + matrix.shape[0] + 1

def _entity_entries(params: ModelParams) -> np.ndarray:
    return np.concatenate([params.tables[name].ravel() for name in params.entity_tables])

def sparsity_mrr_sweep(
    params: ModelParams,
    test: TripleStore,
    filter: FilterIndex,
    targets: Sequence[float],
    workers: int = 1,
) -> SparsitySweep:
    """
    For each target, zero the small entries of the entity table(s) with one shared threshold,
    evaluate, and record. Relation parameters and the passed params are left untouched.
    """

    entries = _entity_entries(params)
    points = []
    for target in targets:
        threshold, achieved = threshold_for_sparsity(entries, target)
        sparse_tables = {name: sparsify(params.tables[name], threshold) for name in params.entity_tables}
        report = evaluate(params.replace_tables(**sparse_tables), test, filter, workers)
        storage = sum(csr_storage_numbers(table) for table in sparse_tables.values())
        points.append(SweepPoint(float(target), threshold, achieved, report.mrr, storage))
        logger.info(
            f"Sparsity target {target:.2f}: threshold {threshold:.3g}, achieved {achieved:.4f}, "
            f"MRR {report.mrr:.4f}, CSR numbers {storage}"
        )
    return SparsitySweep(points)
