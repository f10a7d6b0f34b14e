import csv

import pytest

from conftest import two_blobs
from svcgrid.data import save_matrix
from svcgrid.cli import main, read_config
from svcgrid.pipeline import SvcResult


@pytest.fixture(scope="module")
def fitted(tmp_path_factory):
    out = tmp_path_factory.mktemp("fit")
    assert main(["fit", "--preset", "iris-fig2", "--out", str(out), "--name", "iris"]) == 0
    return out


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_fit_outputs(fitted):
    names = sorted(p.name for p in fitted.iterdir())
    assert names == ["iris.json", "iris.model", "iris_assignment.csv", "iris_summary.txt"]
    assert SvcResult.load(fitted / "iris.json").n_clusters == 3
    rows = list(csv.reader((fitted / "iris_assignment.csv").open()))
    assert rows[0] == ["name", "cluster"] and len(rows) == 151


def test_fit_flags_override_preset_and_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# iris with a coarser grid\npreset = iris-fig2\ng = 9\nk = 2\n")
    code, out, _ = run(capsys, "fit", "--config", str(cfg), "--k", "3", "--out", str(tmp_path), "--name", "x")
    assert code == 0
    p = SvcResult.load(tmp_path / "x.json").params
    assert (p.g, p.k, p.nu, p.q) == (9, 3, 0.7, 1200.0)
    assert "g 9" in out


def test_fit_csv_file(tmp_path, capsys):
    data = tmp_path / "blobs.csv"
    save_matrix(two_blobs(0)[0], data)
    code, out, _ = run(capsys, "fit", "--data", str(data), "--cx", "1", "--cy", "2", "--nu", "0.0125", "--q", "0.5",
                       "--g", "13", "--out", str(tmp_path))
    assert code == 0
    assert SvcResult.load(tmp_path / "blobs.json").n_clusters == 2


def test_label_eval_export_query_plot(fitted, tmp_path, capsys):
    res = str(fitted / "iris.json")
    relabeled = tmp_path / "knn.json"
    code, out, _ = run(capsys, "label", "--result", res, "--labeler", "knn_adj", "--k", "3",
                       "--output", str(relabeled))
    assert code == 0 and (tmp_path / "knn_assignment.csv").exists()
    assert SvcResult.load(relabeled).assignment.method == "knn_adj"

    code, out, _ = run(capsys, "eval", "--result", res)
    assert code == 0 and "precision 0.9333" in out and "unclassified 4" in out
    code, out, _ = run(capsys, "eval", "--result", res, "--format", "csv", "--output", str(tmp_path / "e.csv"))
    assert out.startswith("cluster,C1,C2,C3,#") and (tmp_path / "e.csv").read_text() == out
    code, out2, _ = run(capsys, "eval", "--assignment", str(fitted / "iris_assignment.csv"), "--data", "iris",
                        "--format", "csv")
    assert code == 0 and out2 == out

    code, out, _ = run(capsys, "export", "--result", res, "--name", "iris", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "iris_clusters.txt").read_text().startswith("# cluster 0 unclustered")

    code, out, _ = run(capsys, "query", "--result", res, "--id", "2")
    assert code == 0 and out.startswith("cluster 2: ")
    code, out, _ = run(capsys, "query", "--result", res, "--id", "42")
    assert code == 0 and "no cluster" in out
    code, out, _ = run(capsys, "query", "--result", res, "--all")
    assert out.rstrip().splitlines()[-5].startswith("cluster 0 (unclustered): 4")
    code, out, _ = run(capsys, "query", "--result", res, "--substring", "zzz")
    assert code == 0 and "no cluster" in out

    code, out, _ = run(capsys, "plot", "--result", res, "--output", str(tmp_path / "p.svg"), "--no-grid")
    assert code == 0 and (tmp_path / "p.svg").read_text().startswith("<svg")


def test_bench(tmp_path, capsys):
    code, out, _ = run(capsys, "bench", "--n-ladder", "30,60", "--g-ladder", "5", "--repeats", "3",
                       "--no-timings", "--output", str(tmp_path / "b.csv"))
    assert code == 0
    assert out.splitlines()[0] == "method,n,g,repeat,op_count,n_clusters,seed"
    assert (tmp_path / "b.csv").read_text() == out
    code, out, _ = run(capsys, "bench", "--n-ladder", "30", "--methods", "grid", "--repeats", "3")
    assert code == 0 and "median_ms" in out


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["fit"],
    ["fit", "--data", "iris", "--nu", "0"],
    ["fit", "--data", "iris", "--k", "9"],
    ["fit", "--data", "/nonexistent/file.csv"],
    ["eval", "--result", "/nonexistent.json"],
    ["eval"],
    ["bench", "--repeats", "2"],
    ["bench", "--methods", "grid,dbscan"],
    ["bench", "--n-ladder", "a,b"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("svcgrid: error: ") and err.count("\n") == 1


def test_runtime_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,1,2\nb,1\n")
    code, _, err = run(capsys, "fit", "--data", str(bad))
    assert code == 1 and err.startswith("svcgrid: error: ")
    corrupt = tmp_path / "r.json"
    corrupt.write_text("{")
    code, _, err = run(capsys, "query", "--result", str(corrupt), "--all")
    assert code == 1 and "corrupt" in err
    neg = tmp_path / "neg.csv"
    neg.write_text("n,x,y\na,-1,2\nb,3,4\n")
    code, _, err = run(capsys, "fit", "--data", str(neg))
    assert code == 1 and "nonnegative" in err


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("bogus = 3\n")
    code, _, err = run(capsys, "fit", "--config", str(cfg))
    assert code == 2 and "unknown key" in err
    cfg.write_text("q = wide\n")
    code, _, err = run(capsys, "fit", "--data", "iris", "--config", str(cfg))
    assert code == 2 and "invalid value" in err
    cfg.write_text("nu=0.3\n\n# c\nfield-q = 2\n")
    assert read_config(cfg) == {"nu": "0.3", "field_q": "2"}
