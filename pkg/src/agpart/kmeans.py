"""Fréchet k-means on a finite metric space given by a distance matrix.

Centers are medoids: a cluster's center is the node minimising the
``mu``-weighted sum of squared distances to the cluster.  All ties resolve
to the smallest index so that runs are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import embedded_distances
from .errors import InvalidCenters, KTooLarge, ShapeMismatch

SEEDING_MODES = ("random", "pp-v", "pp-d", "pp-d1")


@dataclass(frozen=True, eq=False)
class Partition:
    """Hard assignment of nodes to cluster ids ``0 .. k-1`` (clusters may be empty)."""

    assign: np.ndarray
    k: int

    def __post_init__(self):
        a = np.asarray(self.assign, dtype=int).ravel()
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise ValueError("cluster ids must lie in 0..k-1")
        a.setflags(write=False)
        object.__setattr__(self, "assign", a)

    def __len__(self):
        return self.assign.size

    @property
    def n_nonempty(self) -> int:
        return int(np.unique(self.assign).size)

    def clusters(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assign == j) for j in range(self.k)]


@dataclass(frozen=True)
class Seeding:
    """Initial center selection.

    ``random`` draws ``k`` distinct nodes.  The k-means++ variants differ by
    the metric they sample in: ``pp-v`` uses the given matrix ``D`` itself,
    ``pp-d`` the Euclidean distances between rows of ``D`` and ``pp-d1`` the
    same construction applied once more (rows of ``D^(1)``).
    """

    mode: str = "pp-d"
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in SEEDING_MODES:
            raise ValueError(f"unknown seeding mode {self.mode!r}")


def seeding_metric(d, mode: str) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if mode in ("random", "pp-v"):
        return d
    if mode == "pp-d":
        return embedded_distances(d)
    if mode == "pp-d1":
        return embedded_distances(embedded_distances(d))
    raise ValueError(f"unknown seeding mode {mode!r}")


def _plusplus(s: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    n = s.shape[0]
    centers = [int(rng.integers(n))]
    closest = s[centers[0]] ** 2
    for _ in range(1, k):
        w = closest.copy()
        w[centers] = 0.0
        total = w.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=w / total))
        else:
            # every remaining node coincides with a center
            rest = np.setdiff1d(np.arange(n), centers)
            nxt = int(rng.choice(rest))
        centers.append(nxt)
        closest = np.minimum(closest, s[nxt] ** 2)
    return centers


def kmeanspp_seed(d, k: int, seeding: Seeding = Seeding(), rng=None) -> list[int]:
    """Select ``k`` distinct initial centers.

    ``rng`` overrides ``seeding.rng_seed`` when given.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of nodes {n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seeding.rng_seed) if rng is None else rng
    if seeding.mode == "random":
        return [int(x) for x in rng.choice(n, size=k, replace=False)]
    return _plusplus(seeding_metric(d, seeding.mode), k, rng)


def nearest_center(d, centers) -> np.ndarray:
    """Index (into ``centers``) of the closest center for every node."""
    return np.argmin(np.asarray(d)[:, list(centers)], axis=1)


def seed_assignment(d, k: int, seeding: Seeding = Seeding(), rng=None):
    """Centers from :func:`kmeanspp_seed` and the hard assignment they induce.

    Nodes are attached to their nearest center in the metric the seeding
    sampled from.
    """
    centers = kmeanspp_seed(d, k, seeding, rng)
    assign = nearest_center(seeding_metric(d, seeding.mode), centers)
    return centers, Partition(assign, k)


def medoid(d, mu, members, candidates=None) -> int:
    """Argmin over ``candidates`` of ``sum_{v in members} d(v, x)^2 mu(v)``."""
    d = np.asarray(d)
    cand = members if candidates is None else candidates
    cost = (d[np.ix_(members, cand)] ** 2 * np.asarray(mu)[members, None]).sum(axis=0)
    return int(cand[int(np.argmin(cost))])


def frechet_objective(d, mu, partition: Partition, centers) -> float:
    d = np.asarray(d, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if d.shape[0] != len(partition) or mu.size != len(partition) or len(centers) != partition.k:
        raise ShapeMismatch("distance matrix, measure, partition and centers disagree")
    c = np.asarray(centers)[partition.assign]
    return float((d[np.arange(d.shape[0]), c] ** 2 * mu).sum())


@dataclass
class LloydResult:
    partition: Partition
    centers: list
    objective: list = field(default_factory=list)
    history: list = field(default_factory=list)
    iterations: int = 0


def lloyd_frechet(d, mu, k: int, init_centers, max_iter: int = 100,
                  scope: str = "cluster") -> LloydResult:
    """Lloyd iterations with medoid updates.

    ``scope="cluster"`` searches each medoid among the cluster's members;
    ``scope="all"`` searches the whole node set (the Fréchet mean over V).
    An empty cluster keeps its previous center.  ``objective`` records the
    Fréchet functional of the centers at the start of every iteration plus
    the final value; ``history`` the assignment made at each iteration.
    """
    d = np.asarray(d, dtype=float)
    mu = np.asarray(mu, dtype=float)
    n = d.shape[0]
    centers = [int(c) for c in init_centers]
    if len(centers) != k or len(set(centers)) != k or not all(0 <= c < n for c in centers):
        raise InvalidCenters("need k distinct valid node ids as initial centers")
    if scope not in ("cluster", "all"):
        raise ValueError(f"unknown medoid scope {scope!r}")
    everyone = np.arange(n)
    result = LloydResult(Partition(np.zeros(n, int), k), centers)
    for it in range(max_iter):
        assign = nearest_center(d, centers)
        part = Partition(assign, k)
        result.history.append(part)
        result.objective.append(frechet_objective(d, mu, part, centers))
        new = list(centers)
        for j, members in enumerate(part.clusters()):
            if members.size:
                new[j] = medoid(d, mu, members, None if scope == "cluster" else everyone)
        result.iterations = it + 1
        result.partition = part
        if new == centers:
            break
        centers = new
    else:
        # max_iter reached: make the returned partition consistent with the centers
        part = Partition(nearest_center(d, centers), k)
        result.partition = part
        result.objective.append(frechet_objective(d, mu, part, centers))
    result.centers = centers
    return result
