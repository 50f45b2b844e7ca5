"""Command-line front end: ``generate``, ``cluster``, ``sweep`` and ``report``.

Every subcommand reads an optional YAML config (``--config``); explicit flags
override the values found there.  Failures exit with status 1 and print one
JSON line ``{"error": <type>, "message": <text>}`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from .attributes import attribute_distance_matrix
from .errors import AgpartError, ConfigError
from .experiment import ExperimentConfig, Instance, MethodSpec, config_dict, monte_carlo, run_method
from .graph import structural_distances
from .io import load_graph, save_graph, write_labels
from .synth import BlockModelConfig, equal_sizes, make_benchmark

log = logging.getLogger("agpart")

RESULT_COLUMNS = ["shape", "t", "level", "alpha", "method", "reps", "mean_ari", "std_ari"]


def _load_config(path, section: str) -> dict:
    if path is None:
        return {}
    try:
        doc = yaml.safe_load(Path(path).read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    # a file may hold several sections or just the one we need
    return dict(doc.get(section, doc))


def _merge(cfg: dict, args, keys) -> dict:
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


# --------------------------------------------------------------------------
# generate

GENERATE_KEYS = ("k", "n_nodes", "shape", "b", "t", "level", "sparsity", "seed")


def cmd_generate(args) -> None:
    cfg = _merge(_load_config(args.config, "generate"), args, GENERATE_KEYS)
    unknown = set(cfg) - set(GENERATE_KEYS) - {"sizes"}
    if unknown:
        raise ConfigError(f"unknown generate keys: {sorted(unknown)}")
    k = int(cfg.get("k", 5))
    sizes = cfg.get("sizes") or equal_sizes(int(cfg.get("n_nodes", 40 * k)), k)
    try:
        bm = BlockModelConfig(k=k, sizes=tuple(sizes), shape=cfg.get("shape", "full"),
                              b=float(cfg.get("b", 1.0)), t=float(cfg.get("t", 1.0)),
                              sparsity=float(cfg.get("sparsity", 0.5)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    bench = make_benchmark(bm, cfg.get("level"), rng)
    save_graph(bench.graph, args.out)
    write_labels(args.labels, bench.truth.assign)
    if args.block:
        Path(args.block).write_text(json.dumps(bench.block.tolist()) + "\n")
    log.info("wrote %s (%d nodes) and %s", args.out, bench.graph.n_nodes, args.labels)


# --------------------------------------------------------------------------
# cluster

def cmd_cluster(args) -> None:
    cfg = _merge(_load_config(args.config, "cluster"), args,
                 ("method", "target", "k", "alpha", "beta", "seeding", "seed"))
    family = cfg.get("method", "srgw")
    if family == "frechet-kmeans":
        family = "kmeans"
    target = None if family == "kmeans" else cfg.get("target", "mean")
    try:
        spec = MethodSpec(family, target, bool(args.embedded or cfg.get("embedded", False)),
                          cfg.get("seeding"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    g = load_graph(args.graph)
    ds = structural_distances(g)
    da = attribute_distance_matrix(g.attributes, float(cfg.get("beta", 0.5))) if g.is_attributed else None
    block = np.array(json.loads(Path(args.block).read_text())) if args.block else None
    inst = Instance(ds, da, np.asarray(g.mu), block)
    alpha = float(cfg.get("alpha", 0.5 if da is not None else 1.0))
    seed = int(cfg.get("seed", 0))
    res = run_method(spec, inst, int(cfg.get("k", 5)), alpha, seed)
    write_labels(args.out, res.partition.assign, header=("node_id", "cluster"))
    record = {
        "graph": str(args.graph), "method": spec.name, "k": res.partition.k, "alpha": alpha,
        "seed": seed, "seconds": res.seconds, "initial_centers": [int(c) for c in res.centers],
        "n_nonempty": res.partition.n_nonempty,
    }
    rep = res.report
    if hasattr(rep, "to_dict"):
        record["solver"] = rep.to_dict()
    elif rep is not None:
        record["objective"] = [float(x) for x in rep.objective]
        record["iterations"] = rep.iterations
    if args.record:
        Path(args.record).write_text(json.dumps(record, indent=2) + "\n")


# --------------------------------------------------------------------------
# sweep / report

def write_results(path, table, with_timings: bool = False) -> None:
    cols = RESULT_COLUMNS + (["mean_seconds"] if with_timings else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in table:
            w.writerow([_fmt(row[c]) for c in cols])


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "mean_ari" not in rows[0]:
        raise ConfigError(f"{path} is not a results table")
    return rows


def cmd_sweep(args) -> None:
    cfg = _load_config(args.config, "sweep")
    cfg["seed"] = args.seed
    if args.reps is not None:
        cfg["reps"] = args.reps
    if args.methods:
        cfg["methods"] = args.methods.split(",")
    exp = ExperimentConfig.from_dict(cfg)
    jobs = args.jobs or os.cpu_count() or 1
    table = monte_carlo(exp, jobs=jobs, cache=args.cache)
    write_results(args.out, table, args.timings)
    Path(str(args.out) + ".config.json").write_text(json.dumps(config_dict(exp), indent=2) + "\n")
    if args.plot:
        plot_results(table, args.plot)


def summary_rows(rows: list[dict]) -> list[list[str]]:
    """Pivot a results table: one line per setting, one column per method."""
    methods = list(dict.fromkeys(r["method"] for r in rows))
    settings = list(dict.fromkeys((r["shape"], r["t"], r["level"], r["alpha"]) for r in rows))
    cell = {((r["shape"], r["t"], r["level"], r["alpha"]), r["method"]): r["mean_ari"] for r in rows}
    out = [["shape", "t", "level", "alpha"] + methods]
    for s in settings:
        out.append(list(s) + [f"{float(cell[(s, m)]):.3f}" if (s, m) in cell else "" for m in methods])
    return out


def cmd_report(args) -> None:
    rows = read_results(args.results)
    table = summary_rows(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(table)
    else:
        widths = [max(len(str(r[i])) for r in table) for i in range(len(table[0]))]
        for r in table:
            print("  ".join(str(v).ljust(w) for v, w in zip(r, widths)))
    if args.plot:
        plot_results(rows, args.plot)


def plot_results(rows, path) -> None:
    """Mean ARI against t, one line per (method, level); written as SVG."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ConfigError("plotting needs matplotlib") from exc
    matplotlib.rcParams["svg.hashsalt"] = "agpart"
    fig, ax = plt.subplots(figsize=(6, 4))
    groups: dict = {}
    for r in rows:
        key = (r["method"], r["shape"], str(r["level"]))
        groups.setdefault(key, []).append((float(r["t"]), float(r["mean_ari"])))
    for (method, shape, level), pts in groups.items():
        pts.sort()
        label = f"{method} {shape}" + (f" L{level}" if level else "")
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("mean ARI")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agpart", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample an attributed SBM benchmark")
    g.add_argument("--config")
    g.add_argument("--seed", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--n-nodes", dest="n_nodes", type=int)
    g.add_argument("--shape")
    g.add_argument("--b", type=float)
    g.add_argument("--t", type=float)
    g.add_argument("--level", type=int)
    g.add_argument("--sparsity", type=float)
    g.add_argument("--out", required=True, help="graph JSON")
    g.add_argument("--labels", required=True, help="ground-truth labels CSV")
    g.add_argument("--block", help="also write the block matrix as JSON")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cluster", help="partition a graph file")
    c.add_argument("--config")
    c.add_argument("--graph", required=True)
    c.add_argument("--method", choices=["kmeans", "frechet-kmeans", "srgw", "srfgw"])
    c.add_argument("--target", choices=["mean", "max", "coarsened"])
    c.add_argument("--embedded", action="store_true")
    c.add_argument("--seeding", choices=["random", "pp-v", "pp-d", "pp-d1"])
    c.add_argument("--k", type=int)
    c.add_argument("--alpha", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--seed", type=int)
    c.add_argument("--block", help="block matrix JSON, needed by the coarsened target")
    c.add_argument("--out", required=True, help="partition CSV")
    c.add_argument("--record", help="run-record JSON")
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("sweep", help="Monte-Carlo experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--reps", type=int)
    s.add_argument("--methods", help="comma-separated list, overrides the config")
    s.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    s.add_argument("--cache", help="JSON-lines file of finished replications, for resuming")
    s.add_argument("--timings", action="store_true", help="add a mean_seconds column")
    s.add_argument("--out", required=True, help="results CSV")
    s.add_argument("--plot", help="SVG line plot")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="summarise a results CSV")
    r.add_argument("--results", required=True)
    r.add_argument("--out", help="pivot table CSV (default: print)")
    r.add_argument("--plot", help="SVG line plot")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (AgpartError, ValueError, OSError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
