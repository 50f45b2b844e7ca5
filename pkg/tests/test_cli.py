import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from agpart.cli import main, read_results

ROOT = Path(__file__).resolve().parents[1]
SMOKE = ROOT / "configs" / "smoke.yaml"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def graph(tmp_path):
    out, labels = tmp_path / "g.json", tmp_path / "labels.csv"
    assert main(["generate", "--config", str(SMOKE), "--seed", "3", "--out", str(out),
                 "--labels", str(labels), "--block", str(tmp_path / "block.json")]) == 0
    return out, labels


def test_generate_outputs(graph, tmp_path):
    out, labels = graph
    rows = read_csv(labels)
    ids = [int(r[1]) for r in rows[1:]]
    assert np.bincount(ids).tolist() == [10, 10, 10]
    doc = json.loads(out.read_text())
    assert doc["nodes"] == list(range(30))
    block = np.array(json.loads((tmp_path / "block.json").read_text()))
    assert block.shape == (3, 3) and block[0, 2] == 0  # chain shape


def test_generate_is_byte_identical(graph, tmp_path):
    out, labels = graph
    again = tmp_path / "g2.json"
    main(["generate", "--config", str(SMOKE), "--seed", "3", "--out", str(again),
          "--labels", str(tmp_path / "l2.csv")])
    assert again.read_bytes() == out.read_bytes()
    assert (tmp_path / "l2.csv").read_bytes() == labels.read_bytes()


def test_generate_bad_shape(tmp_path, capsys):
    code = main(["generate", "--shape", "ring", "--out", str(tmp_path / "g.json"),
                 "--labels", str(tmp_path / "l.csv")])
    assert code == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "ConfigError" and "ring" in err["message"]


def cluster(graph_path, out, *extra):
    return main(["cluster", "--graph", str(graph_path), "--k", "3", "--seed", "5",
                 "--out", str(out), *extra])


def test_cluster_fused_alpha1_equals_structural(graph, tmp_path):
    g, _ = graph
    assert cluster(g, tmp_path / "a.csv", "--method", "srgw", "--alpha", "1") == 0
    assert cluster(g, tmp_path / "b.csv", "--method", "srfgw", "--alpha", "1",
                   "--record", str(tmp_path / "rec.json")) == 0
    assert read_csv(tmp_path / "a.csv") == read_csv(tmp_path / "b.csv")
    rec = json.loads((tmp_path / "rec.json").read_text())
    assert rec["method"] == "srfgw-mean" and rec["alpha"] == 1.0


def test_cluster_regression_pin(graph, tmp_path):
    g, labels = graph
    assert cluster(g, tmp_path / "p.csv", "--method", "srgw", "--target", "max", "--embedded") == 0
    rows = read_csv(tmp_path / "p.csv")
    assert rows[0] == ["node_id", "cluster"]
    assigned = [int(r[1]) for r in rows[1:]]
    # exact recovery of the three groups, labels in seeding order
    assert assigned == [2] * 10 + [1] * 10 + [0] * 10


def test_cluster_coarsened_needs_block(graph, tmp_path, capsys):
    g, _ = graph
    assert cluster(g, tmp_path / "c.csv", "--method", "srgw", "--target", "coarsened") == 1
    assert cluster(g, tmp_path / "c.csv", "--method", "srgw", "--target", "coarsened",
                   "--block", str(tmp_path / "block.json")) == 0


def test_cluster_fused_needs_attributes(tmp_path, capsys):
    g = tmp_path / "plain.json"
    main(["generate", "--k", "2", "--n-nodes", "12", "--t", "3", "--seed", "1",
          "--out", str(g), "--labels", str(tmp_path / "l.csv")])
    assert cluster(g, tmp_path / "x.csv", "--method", "srfgw") == 1
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "AttributesRequired"
    assert cluster(g, tmp_path / "x.csv", "--method", "kmeans") == 0


def test_sweep_and_report(tmp_path, capsys):
    out = tmp_path / "res.csv"
    assert main(["sweep", "--config", str(SMOKE), "--seed", "7", "--jobs", "1", "--out", str(out)]) == 0
    rows = read_results(out)
    assert [r["method"] for r in rows] == ["kmeans", "srgw-mean", "srfgw-mean"]
    assert "mean_seconds" not in rows[0]
    assert json.loads((tmp_path / "res.csv.config.json").read_text())["seed"] == 7
    assert main(["report", "--results", str(out)]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed[0].split() == ["shape", "t", "level", "alpha", "kmeans", "srgw-mean", "srfgw-mean"]
    assert main(["report", "--results", str(out), "--out", str(tmp_path / "pivot.csv")]) == 0
    assert len(read_csv(tmp_path / "pivot.csv")) == 2


def test_sweep_cache_resume(tmp_path):
    cache = tmp_path / "cache.jsonl"
    base = ["sweep", "--config", str(SMOKE), "--seed", "7", "--jobs", "1", "--reps", "2"]
    main(base + ["--out", str(tmp_path / "plain.csv")])
    main(base[:-2] + ["--reps", "1", "--cache", str(cache), "--out", str(tmp_path / "part.csv")])
    main(base + ["--cache", str(cache), "--out", str(tmp_path / "full.csv")])
    assert (tmp_path / "full.csv").read_bytes() == (tmp_path / "plain.csv").read_bytes()
    assert len(cache.read_text().splitlines()) == 2 * 3


def test_sweep_timings_and_unknown_key(tmp_path, capsys):
    out = tmp_path / "t.csv"
    main(["sweep", "--config", str(SMOKE), "--seed", "1", "--jobs", "1", "--timings",
          "--methods", "kmeans", "--out", str(out)])
    assert "mean_seconds" in read_results(out)[0]
    bad = tmp_path / "bad.yaml"
    bad.write_text("sweep:\n  methods: [kmeans]\n  colour: red\n")
    assert main(["sweep", "--config", str(bad), "--seed", "1", "--out", str(out)]) == 1


def test_shipped_configs_parse():
    import yaml
    from agpart.experiment import ExperimentConfig
    for name in ("table1", "table3", "attributed_grid", "no_structure", "smoke"):
        doc = yaml.safe_load((ROOT / "configs" / f"{name}.yaml").read_text())
        ExperimentConfig.from_dict(doc["sweep"])


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "agpart", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sweep" in res.stdout
