import json

import numpy as np
import pytest

from glt.cli import main
from glt.data import read_dataset


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tiny"
    rc = main(["synth", "--style", "citation", "--nodes", "220",
               "--out", str(path), "--seed", "3"])
    assert rc == 0
    return path


def read_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# glt results v1"
    header = lines[1].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[2:]]


def strip_wall(rows):
    return [{k: v for k, v in r.items() if k != "wall_seconds"} for r in rows]


def test_dense_single_row_and_determinism(tiny_dataset, tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        rc = main(["train", "--dataset", str(tiny_dataset), "--task", "node",
                   "--out", str(out), "--seeds", "0", "--iterations", "30"])
        assert rc == 0
    rows = read_rows(out1 / "results.csv")
    assert len(rows) == 1
    assert rows[0]["method"] == "dense"
    assert float(rows[0]["graph_sparsity"]) == 0.0
    assert float(rows[0]["weight_sparsity"]) == 0.0
    assert strip_wall(read_rows(out1 / "results.csv")) == \
        strip_wall(read_rows(out2 / "results.csv"))


def test_glt_row_accounting_and_schedule(tiny_dataset, tmp_path):
    out = tmp_path / "glt"
    rc = main(["glt", "--dataset", str(tiny_dataset), "--task", "node",
               "--out", str(out), "--seeds", "0,1", "--rounds", "2",
               "--iterations", "12"])
    assert rc == 0
    rows = read_rows(out / "results.csv")
    assert len(rows) == 6  # (dense + 2 tickets) x 2 seeds
    for seed in ("0", "1"):
        mine = [r for r in rows if r["seed"] == seed]
        assert [int(r["round"]) for r in mine] == [0, 1, 2]
        gs = [float(r["graph_sparsity"]) for r in mine]
        assert gs[0] == 0.0 and gs == sorted(gs)
    assert (out / "ticket_seed0.ckpt").exists()
    assert (out / "report_seed0.txt").exists()
    assert (out / "train_seed0.jsonl").exists()
    log = [json.loads(l) for l in
           (out / "train_seed0.jsonl").read_text().splitlines()]
    assert {"iteration", "loss", "val_metric", "test_metric"} <= set(log[0])


def test_invalid_dataset_path_names_it(tmp_path, capsys):
    rc = main(["train", "--dataset", str(tmp_path / "nope"), "--task", "node",
               "--out", str(tmp_path / "o")])
    assert rc != 0
    assert "nope" in capsys.readouterr().err


def test_sweep_grid_matches_between_methods(tiny_dataset, tmp_path):
    out = tmp_path / "sweep"
    rc = main(["sweep", "--dataset", str(tiny_dataset), "--task", "node",
               "--out", str(out), "--seeds", "0", "--rounds", "2",
               "--iterations", "10"])
    assert rc == 0
    rows = read_rows(out / "results.csv")
    glt = {r["round"]: r for r in rows if r["method"] == "glt"
           and r["round"] != "0"}
    rnd = {r["round"]: r for r in rows if r["method"] == "random-prune"}
    assert set(glt) == set(rnd) == {"1", "2"}
    for k in glt:
        assert glt[k]["graph_sparsity"] == rnd[k]["graph_sparsity"]
        assert glt[k]["weight_sparsity"] == rnd[k]["weight_sparsity"]


def test_make_splits_link_then_link_training(tiny_dataset, tmp_path):
    rc = main(["make-splits", str(tiny_dataset), "--task", "link",
               "--seed", "1"])
    assert rc == 0
    ds = read_dataset(tiny_dataset)
    assert ds.splits.task == "link"
    out = tmp_path / "link"
    rc = main(["train", "--dataset", str(tiny_dataset), "--task", "link",
               "--out", str(out), "--seeds", "0", "--iterations", "15"])
    assert rc == 0
    rows = read_rows(out / "results.csv")
    assert len(rows) == 1
    assert 0.0 <= float(rows[0]["val_metric"]) <= 1.0
    # restore node splits for other tests
    assert main(["make-splits", str(tiny_dataset), "--task", "node",
                 "--seed", "0"]) == 0


def test_task_mismatch_is_reported(tiny_dataset, tmp_path, capsys):
    rc = main(["train", "--dataset", str(tiny_dataset), "--task", "link",
               "--out", str(tmp_path / "x")])
    assert rc != 0
    assert "make-splits" in capsys.readouterr().err


def test_random_baseline_modes(tiny_dataset, tmp_path):
    for mode in ("random-prune", "random-glt"):
        out = tmp_path / mode
        rc = main(["glt", "--dataset", str(tiny_dataset), "--task", "node",
                   "--out", str(out), "--seeds", "0", "--mode", mode,
                   "--iterations", "10",
                   "--target-graph-sparsity", "0.2",
                   "--target-weight-sparsity", "0.5"])
        assert rc == 0
        rows = read_rows(out / "results.csv")
        assert len(rows) == 1
        assert rows[0]["method"] == mode
        assert float(rows[0]["graph_sparsity"]) == pytest.approx(0.2, abs=0.01)


def test_analyze_outputs_records(tiny_dataset, tmp_path, capsys):
    rc = main(["analyze", str(tiny_dataset)])
    assert rc == 0
    rec = json.loads(capsys.readouterr().out.splitlines()[0])
    for key in ("graph", "num_nodes", "num_edges", "graph_sparsity",
                "weight_sparsity", "macs", "avg_clustering",
                "avg_node_betweenness", "avg_edge_betweenness"):
        assert key in rec
    out = tmp_path / "g"
    assert main(["glt", "--dataset", str(tiny_dataset), "--task", "node",
                 "--out", str(out), "--seeds", "0", "--rounds", "1",
                 "--iterations", "8"]) == 0
    rc = main(["analyze", str(tiny_dataset), "--checkpoint",
               str(out / "ticket_seed0.ckpt")])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    pruned = json.loads(lines[1])
    assert pruned["graph"] == "pruned"
    assert pruned["graph_sparsity"] > 0


def test_config_file_with_flag_override(tiny_dataset, tmp_path):
    cfg = {"iterations": 9, "lr": 0.005}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "cfgout"
    rc = main(["train", "--dataset", str(tiny_dataset), "--task", "node",
               "--out", str(out), "--seeds", "0", "--config", str(cfg_path),
               "--iterations", "11"])
    assert rc == 0
    # flag wins over config file: 11 iterations of history in the summary run
    rows = read_rows(out / "results.csv")
    assert len(rows) == 1


def test_unknown_config_key_rejected(tiny_dataset, tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"learning_rate": 0.1}))
    rc = main(["train", "--dataset", str(tiny_dataset), "--task", "node",
               "--out", str(tmp_path / "o"), "--config", str(cfg_path)])
    assert rc != 0
    assert "learning_rate" in capsys.readouterr().err
