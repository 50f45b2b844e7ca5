import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agpart.errors import AttributesRequired, ConfigError, SizeMismatch
from agpart.experiment import (ExperimentConfig, Instance, MethodSpec, build_instance, monte_carlo,
                               rep_seed, run_method, run_rep)
from agpart.kmeans import Partition
from agpart.metrics import ari, rand_index
from oracles import ari_formula, pair_agreement


# -- metrics --------------------------------------------------------------------------------

def test_rand_examples():
    a = [0, 0, 1, 1]
    assert rand_index(a, a) == 1.0
    # pairs: (01) agree, (23) split in b -> disagree, cross pairs: (02) (03) agree, (12) (13): b joins 1,2 -> disagree on (12)
    b = [0, 0, 1, 2]
    assert rand_index(a, b) == pytest.approx(pair_agreement(a, b)) == pytest.approx(5 / 6)
    assert rand_index(a, [5, 5, 3, 3]) == 1.0


def test_ari_examples():
    a = [0, 0, 1, 1, 2, 2]
    assert ari(a, a) == 1.0
    assert ari(a, [0] * 6) == 0.0
    b = [1, 0, 1, 2, 2, 0]
    assert ari(a, b) == pytest.approx(ari_formula(a, b), abs=1e-12)
    with pytest.raises(SizeMismatch):
        ari(a, [0, 1])
    assert ari(Partition(np.array(a), 3), np.array(a)) == 1.0


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=8), st.integers(0, 10_000))
def test_ari_against_contingency_formula(a, seed):
    b = list(np.random.default_rng(seed).integers(0, 3, len(a)))
    assert ari(a, b) == pytest.approx(ari_formula(a, b), abs=1e-9)
    assert rand_index(a, b) == pytest.approx(pair_agreement(a, b), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_relabel_invariance(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.integers(0, 4, 30), rng.integers(0, 4, 30)
    perm = rng.permutation(4)
    assert ari(a, b) == pytest.approx(ari(perm[a], b), abs=1e-12)
    assert ari(a, b) == pytest.approx(ari(a, perm[b]), abs=1e-12)
    assert rand_index(a, b) == pytest.approx(rand_index(perm[a], b))


def test_random_partitions_average_zero():
    rng = np.random.default_rng(0)
    vals = [ari(rng.integers(0, 5, 200), rng.integers(0, 5, 200)) for _ in range(1000)]
    assert abs(np.mean(vals)) < 0.02


# -- method specs ---------------------------------------------------------------------------------

def test_method_parse():
    m = MethodSpec.parse("srgw-mean+emb")
    assert (m.family, m.target, m.embedded, m.seeding) == ("srgw", "mean", True, "pp-d1")
    assert MethodSpec.parse("kmeans").seeding == "pp-d"
    assert MethodSpec.parse("frechet-kmeans").family == "kmeans"
    assert MethodSpec.parse("srfgw-max@random").name == "srfgw-max@random"
    for bad in ("srgw", "kmeans-mean", "louvain", "srgw-median"):
        with pytest.raises(ConfigError):
            MethodSpec.parse(bad)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(methods=[])
    with pytest.raises(ConfigError):
        ExperimentConfig(methods=["kmeans"], shapes=["ring"])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"methods": ["kmeans"], "colour": 1})


def small_config(**kw):
    base = dict(methods=["kmeans", "srgw-mean"], n_nodes=30, k=3, reps=2, seed=1, b=0.15)
    base.update(kw)
    return ExperimentConfig(**base)


# -- pipelines -------------------------------------------------------------------------------------

def test_srfgw_needs_attributes():
    cfg = small_config()
    inst, _ = build_instance(cfg, next(cfg.settings()), np.random.default_rng(0))
    with pytest.raises(AttributesRequired):
        run_method(MethodSpec.parse("srfgw-mean"), inst, 3)


def test_srfgw_alpha1_matches_srgw_partition():
    cfg = small_config(levels=[2])
    setting = {"shape": "full", "t": 1.0, "level": 2, "alpha": 1.0}
    for seed in range(5):
        inst, _ = build_instance(cfg, setting, np.random.default_rng(seed))
        a = run_method(MethodSpec.parse("srgw-mean"), inst, 3, 1.0, seed)
        b = run_method(MethodSpec.parse("srfgw-mean"), inst, 3, 1.0, seed)
        assert np.array_equal(a.partition.assign, b.partition.assign)
        assert b.report.cg_traces[0] == a.report.loss_trace


def test_embedded_pipeline_is_composition():
    from agpart.embeddings import embedded_distances
    from agpart.kmeans import Seeding, kmeanspp_seed, nearest_center, seeding_metric
    from agpart.solvers import hard_plan, hard_project, srgw_solve
    from agpart.targets import TargetSpec
    cfg = small_config()
    inst, _ = build_instance(cfg, next(cfg.settings()), np.random.default_rng(3))
    fused = run_method(MethodSpec.parse("srgw-mean+emb"), inst, 3, seed=11)
    rng = np.random.default_rng(11)
    centers = kmeanspp_seed(inst.ds, 3, Seeding("pp-d1"), rng)
    init = Partition(nearest_center(seeding_metric(inst.ds, "pp-d1"), centers), 3)
    d1 = embedded_distances(inst.ds)
    rep = srgw_solve(d1, inst.mu, TargetSpec("mean", 3).build(d1), hard_plan(init, inst.mu))
    assert np.array_equal(hard_project(rep.plan, inst.mu)[1].assign, fused.partition.assign)


def test_coarsened_target_pipeline():
    cfg = small_config(methods=["srgw-coarsened"], shapes=["chain"])
    rows = monte_carlo(cfg)
    assert rows[0]["method"] == "srgw-coarsened" and rows[0]["reps"] == 2
    with pytest.raises(ConfigError):
        run_method(MethodSpec.parse("srgw-coarsened"), Instance(np.ones((3, 3)) - np.eye(3)), 2)


# -- harness ----------------------------------------------------------------------------------------

def test_separable_setting_is_solved():
    cfg = ExperimentConfig(methods=["kmeans", "srgw-mean", "srgw-max", "srfgw-mean", "srfgw-max"],
                           n_nodes=50, k=5, ts=[6.0], levels=[1], reps=3, seed=0)
    for row in monte_carlo(cfg):
        assert row["mean_ari"] >= 0.99, row


def test_one_rep_equals_direct_call():
    cfg = small_config(reps=1)
    setting = next(cfg.settings())
    table = monte_carlo(cfg)
    gen_seq, method_seq = rep_seed(cfg.seed, setting, 0).spawn(2)
    inst, truth = build_instance(cfg, setting, np.random.default_rng(gen_seq))
    for row, spec in zip(table, cfg.methods):
        res = run_method(spec, inst, cfg.k, setting["alpha"], method_seq)
        assert row["mean_ari"] == ari(truth, res.partition)
        assert row["std_ari"] == 0.0


def test_determinism_and_resume(tmp_path):
    cfg = small_config(ts=[0.5, 1.0], reps=3)
    first = monte_carlo(cfg)
    cache = tmp_path / "cache.jsonl"
    partial = monte_carlo(small_config(ts=[0.5], reps=3), cache=cache)
    resumed = monte_carlo(cfg, cache=cache)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "mean_seconds"} for r in rows]
    assert strip(resumed) == strip(first)
    assert strip(partial) == strip(first[:2])
    # the cached replications were not recomputed
    assert len(cache.read_text().splitlines()) == 2 * 3 * 2


def test_seed_streams_stable_under_grid_changes():
    cfg_a = small_config(ts=[1.0])
    cfg_b = small_config(ts=[0.5, 1.0])
    setting = {"shape": "full", "t": 1.0, "level": None, "alpha": 0.5}
    assert run_rep(cfg_a, setting, 1)[0]["ari"] == run_rep(cfg_b, setting, 1)[0]["ari"]
