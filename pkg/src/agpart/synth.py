"""Synthetic benchmark: stochastic block models with curve and histogram attributes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .attributes import AttributeBundle, Curve, Histogram
from .errors import BadLevel, DisconnectedSample
from .graph import AttributedGraph
from .kmeans import Partition

SHAPES = ("full", "sparse", "chain", "donut", "star")

# level -> (spline noise amplitude, Dirichlet concentration)
_LEVELS = {1: (0.05, 1000.0), 2: (0.15, 200.0), 3: (0.20, 80.0), 4: (0.35, 15.0), 5: (2.00, 2.0)}

N_KNOTS = 23
DEGREE = 3
N_SAMPLES = 96
SUPPORT_SIZE = 20


@dataclass(frozen=True)
class PerturbationLevel:
    level: int
    epsilon: float
    c: float


def perturbation_level(level: int) -> PerturbationLevel:
    if level not in _LEVELS:
        raise BadLevel(f"perturbation level must be 1..5, got {level!r}")
    eps, c = _LEVELS[level]
    return PerturbationLevel(level, eps, c)


@dataclass(frozen=True)
class BlockModelConfig:
    k: int = 5
    sizes: tuple = field(default=None)
    shape: str = "full"
    b: float = 1.0
    t: float = 1.0
    rng_seed: int = 0
    sparsity: float = 0.5

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        sizes = self.sizes if self.sizes is not None else equal_sizes(40 * self.k, self.k)
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) != self.k or min(sizes) < 1:
            raise ValueError("sizes must list k positive group sizes")
        if not self.b > 0 or self.t < 0:
            raise ValueError("need b > 0 and t >= 0")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n_nodes(self) -> int:
        return sum(self.sizes)


def equal_sizes(n: int, k: int) -> tuple:
    base, extra = divmod(n, k)
    return tuple(base + (1 if j < extra else 0) for j in range(k))


def _connected(mask: np.ndarray) -> bool:
    n, _ = connected_components(csr_matrix(mask), directed=False)
    return n == 1


def shape_mask(shape: str, k: int, rng=None, sparsity: float = 0.5) -> np.ndarray:
    """0/1 pattern of allowed block pairs (diagonal always allowed)."""
    eye = np.eye(k, dtype=bool)
    if shape == "full":
        return np.ones((k, k), dtype=bool)
    if shape == "chain" or shape == "donut":
        r = np.arange(k)
        mask = np.abs(r[:, None] - r[None, :]) <= 1
        if shape == "donut" and k > 2:
            mask[0, k - 1] = mask[k - 1, 0] = True
        return mask
    if shape == "star":
        mask = eye.copy()
        mask[0, :] = mask[:, 0] = True
        return mask
    if shape == "sparse":
        rng = np.random.default_rng() if rng is None else rng
        iu = np.triu_indices(k, 1)
        for _ in range(1000):
            keep = rng.random(iu[0].size) >= sparsity
            mask = eye.copy()
            mask[iu[0][keep], iu[1][keep]] = True
            mask |= mask.T
            if _connected(mask):
                return mask
        raise RuntimeError("could not draw a connected sparse block pattern")
    raise ValueError(f"unknown shape {shape!r}")


def block_matrix(cfg: BlockModelConfig, rng=None) -> np.ndarray:
    """Connection probabilities between groups.

    ``A ~ U(0, b)`` masked by the shape, ``P = A + t I``, symmetrised and
    column-normalised.  Column normalisation breaks symmetry, so the result
    is averaged with its transpose once more before clipping to [0, 1].
    """
    rng = np.random.default_rng(cfg.rng_seed) if rng is None else rng
    k = cfg.k
    a = rng.uniform(0.0, cfg.b, size=(k, k))
    a = a * shape_mask(cfg.shape, k, rng, cfg.sparsity)
    p = a + cfg.t * np.eye(k)
    p = 0.5 * (p + p.T)
    p = p / p.sum(axis=0, keepdims=True)
    p = 0.5 * (p + p.T)
    return np.clip(p, 0.0, 1.0)


def sample_sbm(p, sizes, rng=None, max_retries: int = 100, connected: bool = True):
    """Draw an SBM graph with unit edge lengths and uniform measure.

    Graphs that come out disconnected are redrawn up to ``max_retries`` times
    (geodesic distances need connectivity); ``connected=False`` accepts the
    first draw.
    Returns ``(graph, ground_truth_partition)``.
    """
    p = np.asarray(p, dtype=float)
    rng = np.random.default_rng() if rng is None else rng
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = labels.size
    probs = p[labels[:, None], labels[None, :]]
    iu = np.triu_indices(n, 1)
    for _ in range(max_retries):
        hit = rng.random(iu[0].size) < probs[iu]
        rows, cols = iu[0][hit], iu[1][hit]
        adj = csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        if not connected or connected_components(adj, directed=False)[0] == 1:
            edges = tuple((int(i), int(j), 1.0) for i, j in zip(rows, cols))
            return AttributedGraph(n, edges), Partition(labels, len(sizes))
    raise DisconnectedSample(f"no connected sample after {max_retries} draws")


# --------------------------------------------------------------------------
# attributes

def spline_knots(n_knots: int = N_KNOTS, degree: int = DEGREE) -> np.ndarray:
    """Clamped knot vector on [0, 1] with ``n_knots`` distinct knots."""
    inner = np.linspace(0.0, 1.0, n_knots)
    return np.concatenate([np.zeros(degree), inner, np.ones(degree)])


def spline_basis(x, n_knots: int = N_KNOTS, degree: int = DEGREE) -> np.ndarray:
    """B-spline design matrix with ``n_knots + degree - 2`` columns.

    The clamped basis has one more function; the first one is dropped, as in
    the usual regression-spline basis without intercept.
    """
    x = np.asarray(x, dtype=float)
    full = BSpline.design_matrix(x, spline_knots(n_knots, degree), degree).toarray()
    return full[:, 1:]


def gen_splines(k, counts, epsilon, rng=None, n_samples: int = N_SAMPLES,
                n_knots: int = N_KNOTS, degree: int = DEGREE):
    """Noisy spline curves, one per node, grouped by ``counts``.

    Each group draws base coefficients from ``U(0, 1)``; every node adds
    ``U(-epsilon, epsilon)`` noise.  Returns ``(curves, coefficients)`` with
    ``curves`` of shape ``(sum(counts), n_samples)``.
    """
    rng = np.random.default_rng() if rng is None else rng
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    n_coef = n_knots + degree - 2
    base = rng.uniform(0.0, 1.0, size=(k, n_coef))
    coefs = []
    for j, n_j in enumerate(counts):
        noise = rng.uniform(-epsilon, epsilon, size=(n_j, n_coef))
        coefs.append(base[j] + noise)
    coefs = np.vstack(coefs)
    x = np.linspace(0.0, 1.0, n_samples)
    curves = coefs @ spline_basis(x, n_knots, degree).T
    return curves, coefs


def gen_histograms(k, counts, c, support_size: int = SUPPORT_SIZE, rng=None):
    """Dirichlet histograms: group bases ``Dir(U(0,1)^S)``, node draws ``Dir(c * base)``.

    Returns ``(histograms, bases)`` as arrays of shape ``(N, S)`` and ``(k, S)``.
    """
    rng = np.random.default_rng() if rng is None else rng
    if not c > 0 or support_size < 2:
        raise ValueError("need c > 0 and support_size >= 2")
    bases = np.vstack([rng.dirichlet(rng.uniform(0.0, 1.0, size=support_size)) for _ in range(k)])
    bases = np.maximum(bases, np.finfo(float).tiny)
    bases /= bases.sum(axis=1, keepdims=True)
    return sample_histograms(bases, counts, c, rng), bases


def sample_histograms(bases, counts, c, rng=None) -> np.ndarray:
    """Draw ``counts[j]`` histograms from ``Dir(c * bases[j])`` for every group ``j``.

    Each coordinate has mean ``p_i`` and variance ``p_i (1 - p_i) / (c + 1)``.
    """
    rng = np.random.default_rng() if rng is None else rng
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    if not c > 0:
        raise ValueError("need c > 0")
    rows = [rng.dirichlet(c * bases[j], size=n_j) for j, n_j in enumerate(counts)]
    hists = np.vstack(rows)
    hists /= hists.sum(axis=1, keepdims=True)
    return hists


def attribute_bundles(curves, hists, bin_width: float = 1.0) -> list[AttributeBundle]:
    return [AttributeBundle((Curve(c),), (Histogram(h, bin_width),)) for c, h in zip(curves, hists)]


def with_attributes(g: AttributedGraph, bundles) -> AttributedGraph:
    return AttributedGraph(g.n_nodes, g.edges, g.mu, bundles)


def gaussian_noise(d, sigma: float, rng=None) -> np.ndarray:
    """Add symmetric ``N(0, sigma)`` noise off the diagonal, clipped at 0."""
    rng = np.random.default_rng() if rng is None else rng
    d = np.asarray(d, dtype=float)
    z = np.triu(rng.normal(0.0, sigma, size=d.shape), 1)
    out = np.clip(d + z + z.T, 0.0, None)
    np.fill_diagonal(out, 0.0)
    return out


def uniform_noise_matrix(n: int, rng=None) -> np.ndarray:
    """Symmetric ``U(0, 1)`` matrix with zero diagonal: structure without information."""
    rng = np.random.default_rng() if rng is None else rng
    z = np.triu(rng.uniform(0.0, 1.0, size=(n, n)), 1)
    return z + z.T


@dataclass
class Benchmark:
    graph: AttributedGraph
    truth: Partition
    block: np.ndarray
    config: BlockModelConfig
    level: PerturbationLevel | None = None


def make_benchmark(cfg: BlockModelConfig, level: int | None = None, rng=None,
                   n_samples: int = N_SAMPLES, support_size: int = SUPPORT_SIZE) -> Benchmark:
    """Block matrix, SBM sample and (if ``level`` is given) node attributes."""
    rng = np.random.default_rng(cfg.rng_seed) if rng is None else rng
    p = block_matrix(cfg, rng)
    g, truth = sample_sbm(p, cfg.sizes, rng)
    lvl = None
    if level is not None:
        lvl = perturbation_level(level)
        curves, _ = gen_splines(cfg.k, cfg.sizes, lvl.epsilon, rng, n_samples)
        hists, _ = gen_histograms(cfg.k, cfg.sizes, lvl.c, support_size, rng)
        g = with_attributes(g, attribute_bundles(curves, hists))
    return Benchmark(g, truth, p, cfg, lvl)
