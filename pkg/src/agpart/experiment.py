"""Clustering pipelines and the Monte-Carlo benchmark harness."""
from __future__ import annotations

import itertools
import json
import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .attributes import attribute_distance_matrix
from .embeddings import embedded_distances
from .errors import AttributesRequired, ConfigError
from .graph import structural_distances
from .kmeans import Partition, Seeding, kmeanspp_seed, lloyd_frechet, nearest_center, seeding_metric
from .matrices import combine_alpha
from .metrics import ari
from .solvers import LossParams, hard_plan, hard_project, srfgw_partition, srgw_solve
from .synth import BlockModelConfig, gaussian_noise, make_benchmark, uniform_noise_matrix
from .targets import TargetSpec

log = logging.getLogger(__name__)

FAMILIES = ("kmeans", "srgw", "srfgw")
TARGET_KINDS = ("mean", "max", "coarsened")


@dataclass(frozen=True)
class MethodSpec:
    """A clustering method, written ``family[-target][+emb][@seeding]``.

    Examples: ``kmeans``, ``kmeans+emb``, ``srgw-mean``, ``srgw-max+emb``,
    ``srfgw-mean@pp-v``.  Plain methods default to ``pp-d`` seeding,
    embedded ones to ``pp-d1``.
    """

    family: str
    target: str | None = None
    embedded: bool = False
    seeding: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown method family {self.family!r}")
        if self.family == "kmeans" and self.target is not None:
            raise ConfigError("k-means takes no target")
        if self.family != "kmeans" and self.target not in TARGET_KINDS:
            raise ConfigError(f"{self.family} needs a target among {TARGET_KINDS}")
        if self.seeding is None:
            object.__setattr__(self, "seeding", "pp-d1" if self.embedded else "pp-d")

    @classmethod
    def parse(cls, text: str) -> "MethodSpec":
        s = text.strip()
        seeding = None
        if "@" in s:
            s, seeding = s.split("@", 1)
        embedded = s.endswith("+emb")
        if embedded:
            s = s[: -len("+emb")]
        if s.startswith("frechet-kmeans"):
            s = s[len("frechet-"):]
        family, _, target = s.partition("-")
        try:
            return cls(family, target or None, embedded, seeding)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def name(self) -> str:
        out = self.family + (f"-{self.target}" if self.target else "") + ("+emb" if self.embedded else "")
        default = "pp-d1" if self.embedded else "pp-d"
        return out + (f"@{self.seeding}" if self.seeding != default else "")


@dataclass
class Instance:
    """Everything a method needs: structural distances, optional attribute distances."""

    ds: np.ndarray
    da: np.ndarray | None = None
    mu: np.ndarray | None = None
    block: np.ndarray | None = None

    def __post_init__(self):
        n = self.ds.shape[0]
        if self.mu is None:
            self.mu = np.full(n, 1.0 / n)


@dataclass
class MethodResult:
    partition: Partition
    seconds: float
    report: object = None
    centers: list = field(default_factory=list)


def _combined(inst: Instance, alpha: float) -> np.ndarray:
    if inst.da is None:
        return inst.ds
    return combine_alpha(inst.ds, inst.da, alpha)


def _target(spec: MethodSpec, k: int, inst: Instance, source: np.ndarray) -> np.ndarray:
    if spec.target == "coarsened":
        if inst.block is None:
            raise ConfigError("coarsened target needs the block matrix")
        return TargetSpec("coarsened", k, inst.block).build(source)
    return TargetSpec(spec.target, k).build(source)


def run_method(spec: MethodSpec, inst: Instance, k: int, alpha: float = 0.5, seed=0,
               max_iter: int = 100, max_cg_iter: int = 1000, max_outer: int = 50,
               tol: float = 1e-9) -> MethodResult:
    """Seed, run and hard-assign one method on one instance."""
    start = time.perf_counter()
    d_alpha = _combined(inst, alpha)
    rng = np.random.default_rng(seed)
    centers = kmeanspp_seed(d_alpha, k, Seeding(spec.seeding), rng)
    init = Partition(nearest_center(seeding_metric(d_alpha, spec.seeding), centers), k)
    report = None
    if spec.family == "kmeans":
        x = embedded_distances(d_alpha) if spec.embedded else d_alpha
        res = lloyd_frechet(x, inst.mu, k, centers, max_iter)
        part, report = res.partition, res
    elif spec.family == "srgw":
        x = embedded_distances(d_alpha) if spec.embedded else d_alpha
        r2 = _target(spec, k, inst, x)
        report = srgw_solve(x, inst.mu, r2, hard_plan(init, inst.mu), max_cg_iter=max_cg_iter, tol=tol)
        _, part = hard_project(report.plan, inst.mu)
    else:
        if inst.da is None:
            raise AttributesRequired("srFGW needs attribute distances")
        s = embedded_distances(inst.ds) if spec.embedded else inst.ds
        r2 = _target(spec, k, inst, s)
        report = srfgw_partition(None, s, r2, LossParams(2.0, alpha), hard_plan(init, inst.mu),
                                 max_outer=max_outer, da=inst.da, max_cg_iter=max_cg_iter, tol=tol)
        part = report.partition
    return MethodResult(part, time.perf_counter() - start, report, centers)


# --------------------------------------------------------------------------
# Monte-Carlo harness

@dataclass
class ExperimentConfig:
    methods: list
    shapes: list = field(default_factory=lambda: ["full"])
    ts: list = field(default_factory=lambda: [1.0])
    levels: list = field(default_factory=lambda: [None])
    alphas: list = field(default_factory=lambda: [0.5])
    n_nodes: int = 200
    k: int = 5
    b: float = 1.0
    beta: float = 0.5
    reps: int = 100
    seed: int = 0
    structure: str = "geodesic"
    noise_sigma: float = 0.1
    n_samples: int = 96
    support_size: int = 20
    max_cg_iter: int = 1000
    max_outer: int = 50

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("no methods given")
        self.methods = [m if isinstance(m, MethodSpec) else MethodSpec.parse(m) for m in self.methods]
        if self.structure not in ("geodesic", "uniform-noise", "gaussian-noise"):
            raise ConfigError(f"unknown structure {self.structure!r}")
        for s in self.shapes:
            if s not in ("full", "sparse", "chain", "donut", "star"):
                raise ConfigError(f"unknown shape {s!r}")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def settings(self):
        for shape, t, level, alpha in itertools.product(self.shapes, self.ts, self.levels, self.alphas):
            yield {"shape": shape, "t": float(t), "level": level, "alpha": float(alpha)}


def _setting_key(setting: dict) -> str:
    return json.dumps(setting, sort_keys=True)


def rep_seed(master: int, setting: dict, rep: int) -> np.random.SeedSequence:
    """Seed stream of one replication, stable under changes of the grid."""
    tag = zlib.crc32(_setting_key(setting).encode())
    return np.random.SeedSequence([int(master), tag, int(rep)])


def build_instance(cfg: ExperimentConfig, setting: dict, rng) -> tuple[Instance, Partition]:
    bm_cfg = BlockModelConfig(k=cfg.k, sizes=_sizes(cfg.n_nodes, cfg.k), shape=setting["shape"],
                              b=cfg.b, t=setting["t"])
    bench = make_benchmark(bm_cfg, setting["level"], rng, cfg.n_samples, cfg.support_size)
    if cfg.structure == "geodesic":
        ds = structural_distances(bench.graph)
    elif cfg.structure == "uniform-noise":
        ds = uniform_noise_matrix(cfg.n_nodes, rng)
    else:
        ds = gaussian_noise(structural_distances(bench.graph), cfg.noise_sigma, rng)
    da = None
    if setting["level"] is not None:
        da = attribute_distance_matrix(bench.graph.attributes, cfg.beta)
    return Instance(ds, da, bench.graph.mu, bench.block), bench.truth


def _sizes(n, k):
    from .synth import equal_sizes
    return equal_sizes(n, k)


def run_rep(cfg: ExperimentConfig, setting: dict, rep: int) -> list[dict]:
    """One replication of one setting: every method on the same instance."""
    ss = rep_seed(cfg.seed, setting, rep)
    gen_seq, method_seq = ss.spawn(2)
    inst, truth = build_instance(cfg, setting, np.random.default_rng(gen_seq))
    rows = []
    for spec in cfg.methods:
        res = run_method(spec, inst, cfg.k, setting["alpha"], method_seq,
                         max_cg_iter=cfg.max_cg_iter, max_outer=cfg.max_outer)
        rows.append({"setting": _setting_key(setting), "rep": rep, "method": spec.name,
                     "ari": ari(truth, res.partition), "seconds": res.seconds})
    return rows


def _run_rep_args(args):
    return run_rep(*args)


def monte_carlo(cfg: ExperimentConfig, jobs: int = 1, cache: str | Path | None = None) -> list[dict]:
    """Run every (setting, rep) and aggregate per (setting, method).

    With ``cache`` (a JSON-lines file) finished replications are stored and
    skipped on the next call, so an interrupted sweep can be resumed.
    """
    done: dict[tuple, list] = {}
    if cache is not None and Path(cache).exists():
        for line in Path(cache).read_text().splitlines():
            if line.strip():
                row = json.loads(line)
                done.setdefault((row["setting"], row["rep"]), []).append(row)
    wanted = {m.name for m in cfg.methods}
    tasks = []
    for setting in cfg.settings():
        for rep in range(cfg.reps):
            have = {r["method"] for r in done.get((_setting_key(setting), rep), [])}
            if not wanted <= have:
                tasks.append((cfg, setting, rep))
    if tasks:
        log.info("running %d replications (%d cached)", len(tasks), len(done))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_rep_args, tasks))
    else:
        results = [run_rep(*t) for t in tasks]
    for (_, setting, rep), rows in zip(tasks, results):
        done[(_setting_key(setting), rep)] = rows
    if cache is not None and results:
        with open(cache, "a") as fh:
            for rows in results:
                for row in rows:
                    fh.write(json.dumps(row) + "\n")
    return aggregate(cfg, done)


def aggregate(cfg: ExperimentConfig, done: dict) -> list[dict]:
    table = []
    for setting in cfg.settings():
        key = _setting_key(setting)
        for spec in cfg.methods:
            rows = [r for rep in range(cfg.reps) for r in done.get((key, rep), [])
                    if r["method"] == spec.name]
            aris = np.array([r["ari"] for r in rows])
            secs = np.array([r["seconds"] for r in rows])
            table.append({
                "shape": setting["shape"], "t": setting["t"],
                "level": "" if setting["level"] is None else setting["level"],
                "alpha": setting["alpha"], "method": spec.name, "reps": len(rows),
                "mean_ari": float(aris.mean()), "std_ari": float(aris.std()),
                "mean_seconds": float(secs.mean()),
            })
    return table


def config_dict(cfg: ExperimentConfig) -> dict:
    out = asdict(cfg)
    out["methods"] = [m.name for m in cfg.methods]
    return out
