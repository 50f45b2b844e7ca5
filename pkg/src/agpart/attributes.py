"""Node attributes (curves, histograms) and the distances between them.

Curves are compared with dynamic time warping, histograms on a shared grid
with the closed-form 1-D Wasserstein-1 distance.  Sets of attributes (a road
carrying one record per direction) are compared with an averaged Hausdorff
distance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numba
import numpy as np

from .errors import BundleMismatch, EmptyCurve, EmptySet, GridMismatch
from .matrices import minmax_normalize

HIST_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Curve:
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size < 2:
            raise EmptyCurve("a curve needs at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("curve samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True, eq=False)
class Histogram:
    masses: np.ndarray
    bin_width: float = 1.0

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float).ravel()
        if m.size == 0 or np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("histogram masses must be finite and nonnegative")
        if abs(m.sum() - 1.0) > HIST_SUM_TOL:
            raise ValueError(f"histogram masses sum to {m.sum()!r}, expected 1")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "bin_width", float(self.bin_width))


@dataclass(frozen=True)
class AttributeBundle:
    """Attributes carried by one node: sets of curves and of histograms."""

    curves: tuple = field(default_factory=tuple)
    histograms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "histograms", tuple(self.histograms))

    def is_empty(self) -> bool:
        return not self.curves and not self.histograms


# --------------------------------------------------------------------------
# dynamic time warping

@numba.njit(cache=True)
def _dtw_kernel(x, y, squared):
    n, m = x.size, y.size
    prev = np.empty(m)
    cur = np.empty(m)
    for s in range(n):
        for t in range(m):
            c = x[s] - y[t]
            c = c * c if squared else abs(c)
            if s == 0 and t == 0:
                best = 0.0
            elif s == 0:
                best = cur[t - 1]
            elif t == 0:
                best = prev[t]
            else:
                best = min(prev[t], prev[t - 1], cur[t - 1])
            cur[t] = c + best
        prev, cur = cur, prev
    return prev[m - 1]


@numba.njit(cache=True)
def _dtw_pairwise_kernel(X, squared):
    n = X.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v = _dtw_kernel(X[i], X[j], squared)
            out[i, j] = v
            out[j, i] = v
    return out


def _as_samples(f) -> np.ndarray:
    if isinstance(f, Curve):
        return f.samples
    s = np.asarray(f, dtype=float).ravel()
    if s.size == 0:
        raise EmptyCurve("empty curve")
    return s


def dtw(f, g, cost: str = "abs") -> float:
    """Dynamic time warping cost between two sampled curves.

    Full alignment (both endpoints matched), no window.  ``cost`` selects the
    pointwise cost: ``"abs"`` for ``|f_s - g_t|`` or ``"squared"``.
    """
    x, y = _as_samples(f), _as_samples(g)
    return float(_dtw_kernel(x, y, _squared_flag(cost)))


def _squared_flag(cost: str) -> bool:
    if cost not in ("abs", "squared"):
        raise ValueError(f"unknown DTW cost {cost!r}")
    return cost == "squared"


def dtw_matrix(curves: Sequence, cost: str = "abs") -> np.ndarray:
    """Pairwise DTW matrix for a list of curves."""
    arrays = [_as_samples(c) for c in curves]
    squared = _squared_flag(cost)
    if len({a.size for a in arrays}) == 1:
        return _dtw_pairwise_kernel(np.vstack(arrays), squared)
    n = len(arrays)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = _dtw_kernel(arrays[i], arrays[j], squared)
    return out


# --------------------------------------------------------------------------
# Wasserstein-1 on a shared histogram grid

def wasserstein1_hist(h1: Histogram, h2: Histogram) -> float:
    if h1.masses.size != h2.masses.size or not np.isclose(h1.bin_width, h2.bin_width, rtol=0, atol=1e-12):
        raise GridMismatch("histograms must share bin count and bin width")
    diff = np.cumsum(h1.masses) - np.cumsum(h2.masses)
    return float(h1.bin_width * np.abs(diff).sum())


def w1_matrix(hists: Sequence[Histogram]) -> np.ndarray:
    widths = {h.bin_width for h in hists}
    sizes = {h.masses.size for h in hists}
    if len(sizes) != 1 or max(widths) - min(widths) > 1e-12:
        raise GridMismatch("histograms must share bin count and bin width")
    cdf = np.cumsum(np.vstack([h.masses for h in hists]), axis=1)
    out = np.zeros((len(hists), len(hists)))
    for i in range(len(hists)):
        out[i] = np.abs(cdf - cdf[i]).sum(axis=1)
    out = hists[0].bin_width * 0.5 * (out + out.T)
    np.fill_diagonal(out, 0.0)
    return out


# --------------------------------------------------------------------------
# set distance and combinations

def hausdorff_avg(A: Sequence, B: Sequence, d: Callable) -> float:
    """Averaged Hausdorff distance ``(max_a d(a,B) + max_b d(b,A)) / 2``."""
    if len(A) == 0 or len(B) == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    cross = np.array([[d(a, b) for b in B] for a in A], dtype=float)
    return 0.5 * (cross.min(axis=1).max() + cross.min(axis=0).max())


class ComponentRange(NamedTuple):
    """Off-diagonal (min, max) of one attribute component over a data set."""

    lo: float = 0.0
    hi: float = 1.0

    def scale(self, value: float) -> float:
        if self.hi == self.lo:
            return 0.0 if self.hi == 0 else value / self.hi
        return (value - self.lo) / (self.hi - self.lo)


def attribute_distance(a: AttributeBundle, b: AttributeBundle, beta: float,
                       dtw_range: ComponentRange = ComponentRange(),
                       w1_range: ComponentRange = ComponentRange(),
                       cost: str = "abs") -> float:
    """``beta * dtw~ + (1 - beta) * W1~`` for two single-curve, single-histogram bundles.

    The ranges carry the matrix-level min/max used for normalisation; the
    defaults leave the raw distances untouched.
    """
    for x in (a, b):
        if len(x.curves) != 1 or len(x.histograms) != 1:
            raise BundleMismatch("expected exactly one curve and one histogram per bundle")
    _check_beta(beta)
    dc = dtw_range.scale(dtw(a.curves[0], b.curves[0], cost))
    dh = w1_range.scale(wasserstein1_hist(a.histograms[0], b.histograms[0]))
    return beta * dc + (1.0 - beta) * dh


def _check_beta(beta):
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")


def _component_matrix(sets: list, pairwise: Callable, base: Callable) -> np.ndarray:
    if all(len(s) == 1 for s in sets):
        return pairwise([s[0] for s in sets])
    n = len(sets)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = hausdorff_avg(sets[i], sets[j], base)
    return out


def _normalize_component(d: np.ndarray) -> np.ndarray:
    off = d[~np.eye(len(d), dtype=bool)]
    if off.max() == off.min():
        # constant component: nothing to rescale affinely
        return d / off.max() if off.max() > 0 else np.zeros_like(d)
    return minmax_normalize(d)


def attribute_distance_matrix(bundles: Sequence[AttributeBundle], beta: float = 0.5,
                              cost: str = "abs", normalize: bool = True) -> np.ndarray:
    """Pairwise attribute distances ``beta * DTW~ + (1 - beta) * W1~``.

    Each component matrix is min-max normalised over its off-diagonal entries
    before the combination.  Bundles holding several curves or histograms are
    compared with :func:`hausdorff_avg`.  If only one component is present in
    the data it receives the full weight.
    """
    if len(bundles) < 2:
        raise ValueError("need at least two bundles")
    _check_beta(beta)
    has_c = [bool(b.curves) for b in bundles]
    has_h = [bool(b.histograms) for b in bundles]
    if len(set(has_c)) > 1 or len(set(has_h)) > 1:
        raise BundleMismatch("all bundles must carry the same attribute kinds")
    parts = []
    if has_c[0]:
        dc = _component_matrix([b.curves for b in bundles],
                               lambda cs: dtw_matrix(cs, cost), lambda x, y: dtw(x, y, cost))
        parts.append((beta, dc))
    if has_h[0]:
        dh = _component_matrix([b.histograms for b in bundles], w1_matrix, wasserstein1_hist)
        parts.append((1.0 - beta, dh))
    if not parts:
        raise BundleMismatch("bundles carry no attributes")
    if normalize:
        parts = [(w, _normalize_component(d)) for w, d in parts]
    if len(parts) == 1:
        return parts[0][1]
    return parts[0][0] * parts[0][1] + parts[1][0] * parts[1][1]
