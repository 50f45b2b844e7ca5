"""External partition-agreement indices."""
from __future__ import annotations

import numpy as np

from .errors import SizeMismatch


def _labels(p) -> np.ndarray:
    return np.asarray(getattr(p, "assign", p)).ravel()


def _pair_counts(p1, p2):
    a, b = _labels(p1), _labels(p2)
    if a.size != b.size:
        raise SizeMismatch(f"partitions cover {a.size} and {b.size} nodes")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max(initial=-1) + 1, ib.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)

    def comb2(x):
        x = np.asarray(x, dtype=float)
        return float((x * (x - 1) / 2).sum())

    n = a.size
    return comb2(table), comb2(table.sum(axis=1)), comb2(table.sum(axis=0)), n * (n - 1) / 2


def rand_index(p1, p2) -> float:
    """Fraction of node pairs on which both partitions agree."""
    both, rows, cols, pairs = _pair_counts(p1, p2)
    if pairs == 0:
        return 1.0
    return (pairs + 2 * both - rows - cols) / pairs


def ari(p1, p2) -> float:
    """Adjusted Rand index (Hubert and Arabie)."""
    both, rows, cols, pairs = _pair_counts(p1, p2)
    if pairs == 0:
        return 1.0
    expected = rows * cols / pairs
    best = 0.5 * (rows + cols)
    if best == expected:
        # both partitions trivial in the same way
        return 1.0
    return (both - expected) / (best - expected)
