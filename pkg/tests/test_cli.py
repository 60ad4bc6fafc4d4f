import csv
import json

import pytest

from partgcn import save_dataset
from partgcn.cli import main


@pytest.fixture(scope="module")
def sbm_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("sbm")
    assert main(["gen-sbm", "--blocks", "2", "--size", "60", "--pin", "0.1", "--pout", "0.01",
                 "--dim", "6", "--seed", "1", "--out", str(d)]) == 0
    return d


def test_gen_sbm_files(sbm_dir):
    names = sorted(p.name for p in sbm_dir.iterdir())
    assert names == ["edges.tsv", "features.csv", "labels.txt", "split.txt"]
    assert len((sbm_dir / "labels.txt").read_text().split()) == 120


@pytest.mark.parametrize("method", ["random", "greedy"])
def test_partition(sbm_dir, tmp_path, method):
    out = tmp_path / "a.txt"
    assert main(["partition", str(sbm_dir), "--method", method, "--parts", "3", "--seed", "2",
                 "--out", str(out)]) == 0
    ids = [int(x) for x in out.read_text().split()]
    assert len(ids) == 120 and set(ids) == {0, 1, 2}
    copy = tmp_path / "b.txt"
    assert main(["partition", str(sbm_dir), "--method", "file", "--file", str(out),
                 "--out", str(copy)]) == 0
    assert copy.read_text() == out.read_text()


def test_analyze_p4(p4, tmp_path, capsys):
    save_dataset(p4, tmp_path / "p4")
    (tmp_path / "a.txt").write_text("0\n0\n1\n1\n")
    code = main(["analyze", str(tmp_path / "p4"), "--assignment", str(tmp_path / "a.txt"),
                 "--dims", "4", "--p", "1.0,0.5"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["vol_total"] == report["vol_edgewise"] == 2
    assert report["boundary"] == [1, 1]
    assert report["ratios"] == [0.5, 0.5]
    assert report["memory_scalars"]["1.0"]["per_partition"] == [28, 28]
    assert report["memory_scalars"]["0.5"]["per_partition"] == [26.0, 26.0]


def _train(sbm_dir, tmp_path, *extra, name="m.jsonl"):
    out = tmp_path / name
    code = main(["train", str(sbm_dir), "--epochs", "3", "--hidden", "8", "--metrics", str(out),
                 *extra])
    return code, out


def test_train_single_partition(sbm_dir, tmp_path):
    code, out = _train(sbm_dir, tmp_path, "--parts", "1", "--p", "0.5")
    assert code == 0
    recs = [json.loads(x) for x in out.read_text().splitlines()]
    assert len(recs) == 3 and all(r["floats_sent"] == 0 for r in recs)
    assert set(recs[0]) == {"epoch", "loss", "val_acc", "test_acc", "floats_sent", "bytes_sent",
                            "mem_est_scalars_max", "mem_est_scalars_min"}


def test_train_oracle(sbm_dir, tmp_path, capsys):
    code, _ = _train(sbm_dir, tmp_path, "--parts", "3", "--p", "1.0", "--oracle")
    assert code == 0
    dev = json.loads(capsys.readouterr().out)["oracle_max_rel_deviation"]
    assert dev < 1e-9


def test_train_oracle_needs_full_rate(sbm_dir, tmp_path):
    code, _ = _train(sbm_dir, tmp_path, "--parts", "2", "--p", "0.5", "--oracle")
    assert code == 1


def test_train_timings_sidecar(sbm_dir, tmp_path):
    side = tmp_path / "t.jsonl"
    code, _ = _train(sbm_dir, tmp_path, "--parts", "2", "--timings", str(side))
    assert code == 0
    rec = json.loads(side.read_text().splitlines()[0])
    assert {"t_comp_ms", "t_comm_ms", "t_reduce_ms", "t_sample_ms"} <= set(rec)


def test_train_p0_warns(sbm_dir, tmp_path, capsys):
    code, _ = _train(sbm_dir, tmp_path, "--parts", "2", "--p", "0")
    assert code == 0
    assert "not recommended" in capsys.readouterr().err


def test_train_deterministic(sbm_dir, tmp_path):
    _, a = _train(sbm_dir, tmp_path, "--parts", "3", "--p", "0.3", "--dropout", "0.5", name="a")
    _, b = _train(sbm_dir, tmp_path, "--parts", "3", "--p", "0.3", "--dropout", "0.5", name="b")
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["train"],
    ["train", "DIR", "--metrics", "x", "--bogus"],
    ["train", "DIR", "--metrics", "x"],  # neither --assignment nor --parts
    ["train", "DIR", "--metrics", "x", "--assignment", "/nonexistent/a.txt"],
    ["frobnicate"],
])
def test_usage_errors(sbm_dir, argv):
    argv = [str(sbm_dir) if a == "DIR" else a for a in argv]
    assert main(argv) == 1


def test_missing_dataset():
    assert main(["analyze", "/nonexistent/dir", "--parts", "2"]) == 1


def test_variance_csv(sbm_dir, tmp_path):
    out = tmp_path / "v.csv"
    assert main(["variance", str(sbm_dir), "--parts", "2", "--p-list", "0.2,1.0", "--trials", "50",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [float(r["p"]) for r in rows] == [0.2, 1.0]
    assert float(rows[1]["empirical"]) == 0.0
    assert float(rows[0]["bound"]) >= float(rows[0]["empirical"])
    assert main(["variance", str(sbm_dir), "--parts", "2", "--p-list", "0.0",
                 "--out", str(out)]) == 1


def test_bench_csv(sbm_dir, tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", str(sbm_dir), "--parts", "2", "--p-list", "1.0,0.1", "--epochs", "3",
                 "--hidden", "8", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2
    assert float(rows[0]["floats_per_epoch"]) >= float(rows[1]["floats_per_epoch"])
    assert 0.0 <= float(rows[0]["sample_pct"]) <= 100.0
