"""Dense distance-matrix algebra.

A distance matrix is a plain square ``ndarray``: symmetric, zero diagonal,
nonnegative and finite.  Functions here never modify their inputs.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateMatrix, ShapeMismatch

SYM_TOL = 1e-9


def check_distance_matrix(d, name: str = "distance matrix", metric: bool = True) -> np.ndarray:
    """Return ``d`` as a float array after validating its invariants."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError(f"{name} has non-finite entries")
    if metric:
        scale = max(1.0, float(np.abs(d).max(initial=0.0)))
        if np.abs(d - d.T).max(initial=0.0) > SYM_TOL * scale:
            raise ValueError(f"{name} is not symmetric")
        if np.any(np.diag(d) != 0):
            raise ValueError(f"{name} has a nonzero diagonal")
        if np.any(d < 0):
            raise ValueError(f"{name} has negative entries")
    return d


def _off_diagonal(d: np.ndarray) -> np.ndarray:
    return d[~np.eye(d.shape[0], dtype=bool)]


def normalize_max(d) -> np.ndarray:
    """Divide by the largest entry so that the maximum becomes 1."""
    d = np.asarray(d, dtype=float)
    m = d.max(initial=0.0)
    if m <= 0:
        raise DegenerateMatrix("cannot max-normalise an all-zero matrix")
    return d / m


def minmax_normalize(d) -> np.ndarray:
    """Affinely map off-diagonal entries onto [0, 1]; the diagonal stays 0."""
    d = np.asarray(d, dtype=float)
    off = _off_diagonal(d)
    if off.size == 0 or off.max() == off.min():
        raise DegenerateMatrix("min-max normalisation needs two distinct off-diagonal values")
    lo, hi = off.min(), off.max()
    out = (d - lo) / (hi - lo)
    np.fill_diagonal(out, 0.0)
    return out


def combine_alpha(ds, da, alpha: float) -> np.ndarray:
    """``alpha * ds + (1 - alpha) * da``."""
    ds = np.asarray(ds, dtype=float)
    da = np.asarray(da, dtype=float)
    if ds.shape != da.shape:
        raise ShapeMismatch(f"shapes differ: {ds.shape} vs {da.shape}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 1.0:
        return ds.copy()
    if alpha == 0.0:
        return da.copy()
    return alpha * ds + (1.0 - alpha) * da


def sqrt_transform(d) -> np.ndarray:
    """Elementwise square root.  The result need not be a metric."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("sqrt_transform needs nonnegative entries")
    return np.sqrt(d)


def satisfies_triangle(d, tol: float = 1e-9) -> bool:
    """Exhaustive check of ``d[i, j] <= d[i, m] + d[m, j]``."""
    d = np.asarray(d, dtype=float)
    via = d[:, :, None] + d[None, :, :]  # via[i, m, j] = d[i,m] + d[m,j]
    return bool(np.all(d <= via.min(axis=1) + tol))
