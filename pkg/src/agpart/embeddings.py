"""Row feature maps of distance matrices and their Euclidean distance matrices."""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, ShapeMismatch


def phi_structural(ds) -> np.ndarray:
    """Node ``i`` is mapped to row ``i`` of the structural distance matrix."""
    return np.array(ds, dtype=float, copy=True)


def phi_alpha(ds, da, alpha: float) -> np.ndarray:
    ds = np.asarray(ds, dtype=float)
    da = np.asarray(da, dtype=float)
    if ds.shape != da.shape:
        raise ShapeMismatch(f"shapes differ: {ds.shape} vs {da.shape}")
    return alpha * ds + (1.0 - alpha) * da


def euclidean_pairwise(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DimensionMismatch("points must form a 2-D array of equal-length vectors")
    if pts.shape[0] < 2:
        raise ValueError("need at least two points")
    sq = np.einsum("ij,ij->i", pts, pts)
    d2 = sq[:, None] + sq[None, :] - 2.0 * pts @ pts.T
    d = np.sqrt(np.maximum(d2, 0.0))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def embedded_distances(d) -> np.ndarray:
    """``D^(1)``: Euclidean distances between the rows of ``d``."""
    return euclidean_pairwise(phi_structural(d))
