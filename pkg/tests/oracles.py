"""Independent reference computations and instance generators shared by the tests."""
import itertools
from math import comb

import numpy as np
from scipy.optimize import linprog

from agpart.embeddings import euclidean_pairwise
from agpart.matrices import normalize_max


def naive_gw(r1, r2, t, q=2):
    """Quadruple loop over (i, j, l, m)."""
    n, k = t.shape
    total = 0.0
    for i in range(n):
        for j in range(n):
            for l in range(k):
                for m in range(k):
                    total += abs(r1[i, j] - r2[l, m]) ** q * t[i, l] * t[j, m]
    return total


def naive_fgw(r1, r2, m_cost, t, alpha, q=2):
    """Fused loss written as one quadruple sum (attribute term inside)."""
    n, k = t.shape
    total = 0.0
    for i in range(n):
        for j in range(n):
            for l in range(k):
                for m in range(k):
                    total += ((1 - alpha) * m_cost[i, l] ** q
                              + alpha * abs(r1[i, j] - r2[l, m]) ** q) * t[i, l] * t[j, m]
    return total


def random_metric(n, rng, dim=3):
    return normalize_max(euclidean_pairwise(rng.random((n, dim))))


def random_plan(n, k, rng, mu=None):
    mu = np.full(n, 1.0 / n) if mu is None else mu
    return rng.dirichlet(np.ones(k), size=n) * mu[:, None]


def hard_plans(n, k, mu):
    for labels in itertools.product(range(k), repeat=n):
        t = np.zeros((n, k))
        t[np.arange(n), labels] = mu
        yield labels, t


def monotone_alignments(n, m):
    """Every warping path from (0, 0) to (n-1, m-1) with unit steps."""
    def extend(path):
        i, j = path[-1]
        if (i, j) == (n - 1, m - 1):
            yield path
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            if i + di < n and j + dj < m:
                yield from extend(path + [(i + di, j + dj)])
    yield from extend([(0, 0)])


def dtw_bruteforce(x, y):
    return min(sum(abs(x[i] - y[j]) for i, j in p) for p in monotone_alignments(len(x), len(y)))


def w1_lp(p, q, width):
    """Transport LP on the bin grid with ground cost |s - t| * width."""
    s = len(p)
    cost = np.abs(np.subtract.outer(np.arange(s), np.arange(s))) * width
    a_eq = np.zeros((2 * s, s * s))
    for i in range(s):
        a_eq[i, i * s:(i + 1) * s] = 1
        a_eq[s + i, i::s] = 1
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=np.concatenate([p, q]), bounds=(0, None),
                  method="highs")
    return res.fun


def pair_agreement(a, b):
    """Rand index by explicit pair enumeration."""
    pairs = list(itertools.combinations(range(len(a)), 2))
    agree = sum((a[i] == a[j]) == (b[i] == b[j]) for i, j in pairs)
    return agree / len(pairs)


def ari_formula(a, b):
    """Hubert-Arabie ARI from a contingency table built with plain loops."""
    la, lb = sorted(set(a)), sorted(set(b))
    table = [[sum(1 for x, y in zip(a, b) if x == u and y == v) for v in lb] for u in la]
    n = len(a)
    index = sum(comb(c, 2) for row in table for c in row)
    rows = sum(comb(sum(r), 2) for r in table)
    cols = sum(comb(sum(c), 2) for c in zip(*table))
    expected = rows * cols / comb(n, 2)
    top = (rows + cols) / 2
    if top == expected:
        # both partitions trivial in the same way
        return 1.0
    return (index - expected) / (top - expected)
