"""Target structures for transport-based partitioning."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import BadDelta, DegenerateMatrix, DisconnectedTarget, ShapeMismatch

KINDS = ("mean", "max", "coarsened")


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """``kind`` is ``"mean"`` / ``"max"`` (equidistant) or ``"coarsened"``.

    Equidistant targets take their spacing from the source matrix at build
    time; coarsened targets need the block matrix ``p``.
    """

    kind: str
    k: int
    p: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.kind == "coarsened":
            if self.p is None:
                raise ValueError("a coarsened target needs a block matrix")
            p = np.asarray(self.p, dtype=float)
            if p.shape != (self.k, self.k) or np.any(p < 0) or not np.allclose(p, p.T):
                raise ValueError("block matrix must be k x k, symmetric and nonnegative")
            object.__setattr__(self, "p", p)

    def build(self, source) -> np.ndarray:
        if self.kind == "coarsened":
            return coarsened_target(self.p)
        return equidistant_target(self.k, delta_from(source, self.kind))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "k": self.k}
        if self.p is not None:
            out["p"] = self.p.tolist()
        return out


def equidistant_target(k: int, delta: float = 1.0) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not delta > 0:
        raise BadDelta(f"delta must be positive, got {delta}")
    return delta * (np.ones((k, k)) - np.eye(k))


def delta_from(d, mode: str) -> float:
    """Mean of the off-diagonal entries, or the global maximum."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if n < 2:
        raise DegenerateMatrix("need at least two nodes")
    if mode == "mean":
        val = (d.sum() - np.trace(d)) / (n * (n - 1))
    elif mode == "max":
        val = d.max()
    else:
        raise ValueError(f"unknown delta mode {mode!r}")
    if not val > 0:
        raise DegenerateMatrix("source matrix has no positive distances")
    return float(val)


def coarsened_target(p) -> np.ndarray:
    """Shortest paths on the block graph with edge lengths ``1 / p_rs``.

    Diagonal entries of ``p`` (self-loops) play no role.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ShapeMismatch("block matrix must be square")
    lengths = np.zeros_like(p)
    mask = p > 0
    np.fill_diagonal(mask, False)
    lengths[mask] = 1.0 / p[mask]
    d = shortest_path(lengths, method="D", directed=False)
    if not np.all(np.isfinite(d)):
        raise DisconnectedTarget("block graph is not connected")
    np.fill_diagonal(d, 0.0)
    return d
