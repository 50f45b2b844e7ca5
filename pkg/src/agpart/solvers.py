"""Semi-relaxed (fused) Gromov-Wasserstein losses and solvers.

Plans ``T`` are ``N x k`` nonnegative matrices whose rows sum to the source
measure ``mu``; the column marginal is free.  The structural loss is

    GW(T) = sum_{i,j,l,m} |R1[i,j] - R2[l,m]|^q T[i,l] T[j,m]

and the fused loss adds the linear attribute term
``(1 - alpha) * sum_{i,l} M[i,l]^q T[i,l]`` to ``alpha * GW(T)``.

For ``q = 2`` and symmetric matrices the contraction is factorised and costs
``O(N^2 k + N k^2)``; otherwise the full ``N x N x k x k`` tensor is formed,
which is only meant for small problems.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleInit, MissingTrace, ShapeMismatch
from .kmeans import Partition

FEAS_TOL = 1e-9
FIXPOINT_TOL = 1e-12


@dataclass(frozen=True)
class LossParams:
    q: float = 2.0
    alpha: float = 0.5

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


@dataclass
class SolverReport:
    plan: np.ndarray
    loss_trace: list
    iterations: int
    nonempty_k: int
    barycenter_ids: list | None = None
    partition: Partition | None = None
    hard_plan: np.ndarray | None = None
    # one (L(T^n,B^n), L(T^n+1,B^n), L(T^n+1,B^n+1)) triple per outer iteration
    outer: list = field(default_factory=list)
    cg_traces: list = field(default_factory=list)
    assignments: list = field(default_factory=list)
    converged: bool = False

    def to_dict(self) -> dict:
        out = {
            "loss_trace": [float(x) for x in self.loss_trace],
            "iterations": self.iterations,
            "nonempty_k": self.nonempty_k,
            "converged": self.converged,
            "plan": self.plan.tolist(),
        }
        if self.barycenter_ids is not None:
            out["barycenter_ids"] = [int(b) for b in self.barycenter_ids]
        if self.partition is not None:
            out["partition"] = self.partition.assign.tolist()
        if self.outer:
            out["outer"] = [[float(x) for x in row] for row in self.outer]
        return out


# --------------------------------------------------------------------------
# loss kernels

class _Structure:
    """Precomputed pieces of the quadratic form ``sum c_ijlm A_il B_jm``."""

    def __init__(self, r1, r2, q):
        self.r1 = np.asarray(r1, dtype=float)
        self.r2 = np.asarray(r2, dtype=float)
        if self.r1.ndim != 2 or self.r1.shape[0] != self.r1.shape[1] or \
                self.r2.ndim != 2 or self.r2.shape[0] != self.r2.shape[1]:
            raise ShapeMismatch("structure matrices must be square")
        self.q = q
        self.factorized = q == 2 and np.array_equal(self.r1, self.r1.T) and \
            np.array_equal(self.r2, self.r2.T)
        if self.factorized:
            self.r1sq = self.r1 ** 2
            self.r2sq = self.r2 ** 2
        else:
            diff = self.r1[:, :, None, None] - self.r2[None, None, :, :]
            self.tensor = np.abs(diff) ** q  # indexed [i, j, l, m]

    def check(self, t):
        if t.shape != (self.r1.shape[0], self.r2.shape[0]):
            raise ShapeMismatch(f"plan shape {t.shape} does not match "
                                f"{self.r1.shape[0]} x {self.r2.shape[0]}")

    def form(self, a, b) -> float:
        if self.factorized:
            ra, rb = a.sum(axis=1), b.sum(axis=1)
            ca, cb = a.sum(axis=0), b.sum(axis=0)
            cross = np.sum(a * (self.r1 @ b @ self.r2))
            return float(ra @ self.r1sq @ rb + ca @ self.r2sq @ cb - 2.0 * cross)
        return float(np.einsum("ijlm,il,jm->", self.tensor, a, b))

    def grad(self, t) -> np.ndarray:
        if self.factorized:
            rows, cols = t.sum(axis=1), t.sum(axis=0)
            g = (self.r1sq @ rows)[:, None] + (self.r2sq @ cols)[None, :] \
                - 2.0 * (self.r1 @ t @ self.r2)
            return 2.0 * g
        return np.einsum("ijlm,jm->il", self.tensor, t) + np.einsum("jiml,jm->il", self.tensor, t)


def gw_loss(r1, r2, t, q: float = 2) -> float:
    t = np.asarray(t, dtype=float)
    s = _Structure(r1, r2, q)
    s.check(t)
    return s.form(t, t)


def fgw_loss(r1, r2, m, t, params: LossParams = LossParams()) -> float:
    """Fused loss ``(1-alpha) <M^q, T> + alpha GW(T)``.

    The attribute part is linear because a feasible plan has total mass one.
    """
    t = np.asarray(t, dtype=float)
    m = np.asarray(m, dtype=float)
    if m.shape != t.shape:
        raise ShapeMismatch("attribute cost and plan shapes differ")
    a = params.alpha
    out = 0.0
    if a < 1.0:
        out += (1.0 - a) * float(np.sum(m ** params.q * t))
    if a > 0.0:
        out += a * gw_loss(r1, r2, t, params.q)
    return out


# --------------------------------------------------------------------------
# conditional gradient

def _check_plan(t0, mu, shape):
    t0 = np.array(t0, dtype=float)
    if t0.shape != shape:
        raise InfeasibleInit(f"initial plan has shape {t0.shape}, expected {shape}")
    if np.any(t0 < 0):
        raise InfeasibleInit("initial plan has negative entries")
    if np.abs(t0.sum(axis=1) - mu).max() > FEAS_TOL:
        raise InfeasibleInit("initial plan rows do not sum to mu")
    return t0


def _lmo(grad, mu):
    """Row-wise linear minimisation: each row's mass on its smallest-gradient column."""
    x = np.zeros_like(grad)
    x[np.arange(grad.shape[0]), np.argmin(grad, axis=1)] = mu
    return x


def _conditional_gradient(struct: _Structure, mu, lin, t0, alpha, max_iter, tol):
    mu = np.asarray(mu, dtype=float)
    t = _check_plan(t0, mu, (struct.r1.shape[0], struct.r2.shape[0]))

    def loss(p):
        val = alpha * struct.form(p, p) if alpha > 0 else 0.0
        if lin is not None:
            val += float(np.sum(lin * p))
        return val

    current = loss(t)
    trace = [current]
    it = 0
    while it < max_iter and current != 0.0:
        g = alpha * struct.grad(t) if alpha > 0 else np.zeros_like(t)
        if lin is not None:
            g = g + lin
        e = _lmo(g, mu) - t
        slope = float(np.sum(g * e))
        curv = alpha * struct.form(e, e) if alpha > 0 else 0.0
        if curv > 0:
            gamma = min(1.0, max(0.0, -slope / (2.0 * curv)))
        else:
            gamma = 1.0 if curv + slope < 0 else 0.0
        if gamma == 0.0:
            break
        candidate = t + gamma * e
        new = loss(candidate)
        if new > current:
            # rounding noise on a flat segment; keep the previous iterate
            break
        it += 1
        t = candidate
        trace.append(new)
        decrease = current - new
        current = new
        if abs(decrease) <= tol * abs(trace[-2]):
            break
    return t, trace, it


def _nonempty(t) -> int:
    return int(np.count_nonzero(t.sum(axis=0) > 0))


def srgw_solve(r1, mu, r2, t0, params: LossParams = LossParams(), max_cg_iter: int = 1000,
               tol: float = 1e-9) -> SolverReport:
    """Semi-relaxed GW by conditional gradient with exact line search."""
    struct = _Structure(r1, r2, params.q)
    t, trace, it = _conditional_gradient(struct, mu, None, t0, 1.0, max_cg_iter, tol)
    return SolverReport(t, trace, it, _nonempty(t), converged=it < max_cg_iter)


def srfgw_solve(ds_source, mu, ds_target, m, t0, params: LossParams = LossParams(),
                max_cg_iter: int = 1000, tol: float = 1e-9, _struct=None) -> SolverReport:
    """Semi-relaxed fused GW for a fixed attribute cost matrix ``m`` (N x k)."""
    struct = _Structure(ds_source, ds_target, params.q) if _struct is None else _struct
    m = np.asarray(m, dtype=float)
    if m.shape != (struct.r1.shape[0], struct.r2.shape[0]):
        raise ShapeMismatch("attribute cost matrix must be N x k")
    lin = (1.0 - params.alpha) * m ** params.q
    t, trace, it = _conditional_gradient(struct, mu, lin, t0, params.alpha, max_cg_iter, tol)
    return SolverReport(t, trace, it, _nonempty(t), converged=it < max_cg_iter)


# --------------------------------------------------------------------------
# projections and partitioning

def hard_project(t, mu):
    """Send each row's mass to its first maximal column."""
    t = np.asarray(t, dtype=float)
    mu = np.asarray(mu, dtype=float)
    idx = np.argmax(t, axis=1)
    hard = np.zeros_like(t)
    hard[np.arange(t.shape[0]), idx] = mu
    return hard, Partition(idx, t.shape[1])


def hard_plan(partition: Partition, mu) -> np.ndarray:
    """Plan putting ``mu[i]`` on the cluster of node ``i``."""
    t = np.zeros((len(partition), partition.k))
    t[np.arange(len(partition)), partition.assign] = mu
    return t


def medoid_barycenters(da, t, q: float = 2.0) -> list[int]:
    """For each column ``l``, the node ``b`` minimising ``sum_i da[i, b]^q T[i, l]``."""
    cost = (np.asarray(da, dtype=float) ** q).T @ t
    return [int(b) for b in np.argmin(cost, axis=0)]


def partition_loss(struct: _Structure, da, t, bary, params: LossParams) -> float:
    m = np.asarray(da)[:, bary]
    val = 0.0
    if params.alpha < 1.0:
        val += (1.0 - params.alpha) * float(np.sum(m ** params.q * t))
    if params.alpha > 0.0:
        val += params.alpha * struct.form(t, t)
    return val


def srfgw_partition(g, ds, target, params: LossParams = LossParams(), t0=None,
                    max_outer: int = 50, da=None, beta: float = 0.5, max_cg_iter: int = 1000,
                    tol: float = 1e-9, final_hard: bool = True) -> SolverReport:
    """Alternate srFGW transport solves with medoid barycenter updates.

    ``target`` is a :class:`~agpart.targets.TargetSpec` or a prebuilt
    ``k x k`` matrix.  ``da`` is the node-to-node attribute distance matrix;
    when omitted it is computed from ``g.attributes``.  Columns that lose all
    their mass are dropped (surviving clusters keep their relative order).
    With ``final_hard`` the last plan is hard-projected and the barycenters
    are recomputed on the hard clusters.
    """
    from .attributes import attribute_distance_matrix
    from .errors import AttributesRequired

    ds = np.asarray(ds, dtype=float)
    if da is None:
        if g is None or not g.is_attributed:
            raise AttributesRequired("srFGW needs node attributes")
        da = attribute_distance_matrix(g.attributes, beta)
    da = np.asarray(da, dtype=float)
    mu = np.asarray(g.mu if g is not None else np.full(ds.shape[0], 1.0 / ds.shape[0]))
    r2 = target if isinstance(target, np.ndarray) else target.build(ds)
    r2 = np.asarray(r2, dtype=float)
    if t0 is None:
        raise InfeasibleInit("an initial plan is required")
    t = _check_plan(t0, mu, (ds.shape[0], r2.shape[0]))

    report = SolverReport(t, [], 0, r2.shape[0])
    struct = _Structure(ds, r2, params.q)
    bary = medoid_barycenters(da, t, params.q)
    current = partition_loss(struct, da, t, bary, params)
    report.loss_trace.append(current)
    for n in range(max_outer):
        m = da[:, bary]
        sol = srfgw_solve(ds, mu, r2, m, t, params, max_cg_iter, tol, _struct=struct)
        t_new = sol.plan
        report.cg_traces.append(sol.loss_trace)
        after_plan = sol.loss_trace[-1]
        keep = t_new.sum(axis=0) > 0
        if not keep.all():
            t_new = t_new[:, keep]
            r2 = r2[np.ix_(keep, keep)]
            struct = _Structure(ds, r2, params.q)
            bary = [b for b, kept in zip(bary, keep) if kept]
        bary_new = medoid_barycenters(da, t_new, params.q)
        after_bary = partition_loss(struct, da, t_new, bary_new, params)
        report.outer.append((current, after_plan, after_bary))
        report.assignments.append(Partition(np.argmax(t_new, axis=1), t_new.shape[1]))
        report.loss_trace.append(after_bary)
        report.iterations = n + 1
        same = t_new.shape == t.shape and np.abs(t_new - t).max() <= FIXPOINT_TOL
        t, bary, current = t_new, bary_new, after_bary
        if same:
            report.converged = True
            break

    report.plan = t
    report.nonempty_k = _nonempty(t)
    hard, part = hard_project(t, mu)
    report.hard_plan = hard
    report.partition = part
    if final_hard:
        bary = medoid_barycenters(da, hard, params.q)
    report.barycenter_ids = bary
    return report


# --------------------------------------------------------------------------
# guarantees

def prop1_certificate(report: SolverReport, tol: float = 1e-9) -> bool:
    """Check ``L(T+,B+) <= L(T+,B) <= L(T,B)`` at every outer iteration."""
    if not report.outer:
        raise MissingTrace("report carries no outer-iteration losses")
    for before, after_plan, after_bary in report.outer:
        if after_plan > before + tol or after_bary > after_plan + tol:
            return False
    return True


def structure_gap(r1, r2, q: float = 1.0) -> float:
    """``max |R1[i,j] - R2[l,m]|`` raised to ``q``."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    return float(max(r1.max() - r2.min(), r2.max() - r1.min())) ** q


def prop2_bound(t, t_tilde, d_a_max: float, d_s_max: float,
                params: LossParams = LossParams()) -> float:
    """Upper bound on the loss increase when replacing ``t`` by ``t_tilde``."""
    t = np.asarray(t, dtype=float)
    t_tilde = np.asarray(t_tilde, dtype=float)
    if t.shape != t_tilde.shape:
        raise ShapeMismatch("plans must share a shape")
    a, q = params.alpha, params.q
    const = (1.0 - a) * d_a_max ** q + 2.0 * a * d_s_max ** q
    return const * float(np.abs(t - t_tilde).sum())
