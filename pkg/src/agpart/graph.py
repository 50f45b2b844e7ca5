"""Attributed graphs, geodesic distances and the dual (line-graph) transform."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .attributes import AttributeBundle
from .errors import DisconnectedGraph, EmptyGraph
from .matrices import (check_distance_matrix, combine_alpha, minmax_normalize,  # noqa: F401
                       normalize_max, satisfies_triangle, sqrt_transform)

MU_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Weighted undirected graph with a node measure and optional attributes.

    Nodes are ``0 .. n_nodes - 1``.  ``edges`` holds ``(i, j, length)``
    triples with ``i != j`` and ``length > 0``.
    """

    n_nodes: int
    edges: tuple
    mu: np.ndarray = None
    attributes: tuple | None = None

    def __post_init__(self):
        n = int(self.n_nodes)
        if n < 1:
            raise EmptyGraph("a graph needs at least one node")
        edges = []
        for e in self.edges:
            i, j, length = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) references an unknown node")
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (length > 0 and np.isfinite(length)):
                raise ValueError(f"edge ({i}, {j}) has non-positive length {length}")
            edges.append((i, j, length))
        if self.mu is None:
            mu = np.full(n, 1.0 / n)
        else:
            mu = np.asarray(self.mu, dtype=float).ravel()
            if mu.size != n or np.any(mu < 0) or abs(mu.sum() - 1.0) > MU_TOL:
                raise ValueError("mu must be a probability vector over the nodes")
        mu.setflags(write=False)
        attrs = self.attributes
        if attrs is not None:
            attrs = tuple(attrs)
            if len(attrs) != n:
                raise ValueError("one attribute bundle per node is required")
            if not all(isinstance(a, AttributeBundle) for a in attrs):
                raise TypeError("attributes must be AttributeBundle instances")
        object.__setattr__(self, "n_nodes", n)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "attributes", attrs)

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    @property
    def is_attributed(self) -> bool:
        return self.attributes is not None and all(not a.is_empty() for a in self.attributes)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=int)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def length_matrix(self) -> csr_matrix:
        """Sparse symmetric matrix of edge lengths; parallel edges keep the shortest."""
        best = {}
        for i, j, length in self.edges:
            key = (min(i, j), max(i, j))
            if key not in best or length < best[key]:
                best[key] = length
        if not best:
            return csr_matrix((self.n_nodes, self.n_nodes))
        (rows, cols), vals = zip(*best.keys()), list(best.values())
        r = np.concatenate([rows, cols])
        c = np.concatenate([cols, rows])
        return csr_matrix((np.concatenate([vals, vals]), (r, c)),
                          shape=(self.n_nodes, self.n_nodes))


def geodesic_distances(g: AttributedGraph) -> np.ndarray:
    """All-pairs weighted shortest-path lengths (Dijkstra from every source)."""
    d = shortest_path(g.length_matrix(), method="D", directed=False)
    if not np.all(np.isfinite(d)):
        raise DisconnectedGraph("graph is not connected")
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def structural_distances(g: AttributedGraph) -> np.ndarray:
    """Geodesic distances divided by their maximum."""
    return normalize_max(geodesic_distances(g))


def dual_graph(primal: AttributedGraph, mu=None) -> AttributedGraph:
    """Line graph of ``primal``.

    Each primal edge becomes a node; two of them are joined when the primal
    edges share an endpoint, with length equal to the mean of the two primal
    lengths.  Parallel dual edges keep the smaller length.  Attributes are
    not carried over since they live on primal edges in the road setting.
    """
    if not primal.edges:
        raise EmptyGraph("dual of a graph without edges")
    incident: dict[int, list[int]] = {}
    for idx, (i, j, _) in enumerate(primal.edges):
        incident.setdefault(i, []).append(idx)
        incident.setdefault(j, []).append(idx)
    best: dict[tuple[int, int], float] = {}
    for segs in incident.values():
        for a, b in combinations(segs, 2):
            key = (min(a, b), max(a, b))
            length = 0.5 * (primal.edges[a][2] + primal.edges[b][2])
            if key not in best or length < best[key]:
                best[key] = length
    edges = tuple((a, b, w) for (a, b), w in sorted(best.items()))
    return AttributedGraph(len(primal.edges), edges, mu)
