"""Sparse gradient accumulation for embedding tables"""

from typing import Dict

import numpy as np

class GradientBuffer:
    """
    Dense per-table accumulators plus a mask of the rows that were written.
    One buffer belongs to one worker; buffers are combined with merge().
    """

    def __init__(self, params):
        self.grads: Dict[str, np.ndarray] = {
            name: np.zeros_like(table) for name, table in params.tables.items()
        }
        self.touched: Dict[str, np.ndarray] = {
            name: np.zeros(table.shape[0], dtype=bool) for name, table in params.tables.items()
        }

    def add_rows(self, name: str, rows: np.ndarray, values: np.ndarray) -> None:
        """Scatter-add values into rows; repeated rows accumulate"""
        rows = np.asarray(rows, dtype=np.int64)
        np.add.at(self.grads[name], rows, values)
        self.touched[name][rows] = True

    def add_dense(self, name: str, values: np.ndarray) -> None:
        self.grads[name] += values
        self.touched[name][:] = True

    def touched_rows(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.touched[name])

    def merge(self, other: "GradientBuffer") -> None:
        for name, grad in other.grads.items():
            rows = other.touched_rows(name)
            self.grads[name][rows] += grad[rows]
            self.touched[name][rows] = True

    def clear(self) -> None:
        """Zero the written rows so the buffer can be reused"""
        for name, grad in self.grads.items():
            grad[self.touched_rows(name)] = 0.0
            self.touched[name][:] = False

    def is_zero(self) -> bool:
        return not any(np.any(grad) for grad in self.grads.values())

    def __getitem__(self, name: str) -> np.ndarray:
        return self.grads[name]
