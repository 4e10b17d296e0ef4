"""End-to-end checks of every subcommand: payload, exit code and determinism."""
import csv
import json
import math
import subprocess
import sys

import pytest

from allset import serialize as ser
from allset.cli import main, run
from allset.core_metric import DistanceMatrix
from allset.tree import Edge, FiniteTree, Vertex

SQRT2 = math.sqrt(2)


@pytest.fixture
def files(tmp_path):
    def put(name, m):
        path = tmp_path / name
        path.write_text(ser.dumps(ser.matrix_to_json(m)))
        return str(path)

    tripod = FiniteTree(
        (Vertex(0, None), Vertex(1, "p"), Vertex(2, "q"), Vertex(3, "r")),
        (Edge(0, 1, 1.0), Edge(0, 2, 1.0), Edge(0, 3, 1.0)),
        3,
    )
    (tmp_path / "tripod.json").write_text(ser.dumps(ser.tree_to_json(tripod)))
    (tmp_path / "map.json").write_text(ser.dumps({"domain": [{"vertex": 1}, {"vertex": 2}], "images": [{"vertex": 2}, {"vertex": 1}]}))
    (tmp_path / "path.csv").write_text("1\n2,1\n")
    (tmp_path / "broken.json").write_text("{not json")
    return {
        "square": put("square.json", DistanceMatrix.from_pairs([1, SQRT2, 1, 1, SQRT2, 1])),
        "eq4": put("eq4.json", DistanceMatrix.from_pairs([1] * 6)),
        "bad": put("bad.json", DistanceMatrix.from_pairs([1, 3, 1])),
        "path": str(tmp_path / "path.csv"),
        "tripod": str(tmp_path / "tripod.json"),
        "map": str(tmp_path / "map.json"),
        "broken": str(tmp_path / "broken.json"),
        "dir": tmp_path,
    }


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_validate(files, capsys):
    code, doc, _ = cli(capsys, "validate", files["square"])
    assert code == 0 and doc["ok"] is True and doc["n"] == 4
    code, doc, _ = cli(capsys, "validate", files["bad"])
    assert code == 1 and doc["axiom"] == "triangle" and doc["witness"] == [0, 1, 2]
    code, doc, _ = cli(capsys, "validate", files["path"])
    assert code == 0


def test_embed(files, capsys):
    code, doc, _ = cli(capsys, "embed", "--space", "tree", "--valence", "3", files["eq4"])
    assert code == 1 and doc["certificate"] == "degree 4 branch point required"
    code, doc, _ = cli(capsys, "embed", "--space", "tree", "--valence", "4", files["eq4"])
    assert code == 0 and doc["witness"]["valence_budget"] == 4
    code, doc, _ = cli(capsys, "embed", "--space", "euclidean", "--dim", "2", files["square"])
    assert code == 0 and doc["space"] == {"space": "euclidean", "dim": 2}
    code, doc, _ = cli(capsys, "embed", "--space", "circle", "--length", "3", files["eq4"])
    assert code == 1
    code, doc, _ = cli(capsys, "embed", "--space", "sphere", "--dim", "2", "--radius", "1", files["path"])
    assert code == 0


def test_embed_input_errors(files, capsys):
    code, doc, err = cli(capsys, "embed", "--space", "euclidean", files["square"])
    assert code == 2 and doc is None and "requires --dim" in err
    code, _, err = cli(capsys, "embed", "--space", "euclidean", "--dim", "2", files["bad"])
    assert code == 2 and err.startswith("error:")
    code, _, err = cli(capsys, "embed", "--space", "euclidean", "--dim", "0", files["square"])
    assert code == 2


def test_tree_build(files, capsys):
    code, doc, _ = cli(capsys, "tree", "build", files["eq4"])
    assert code == 0 and doc["max_degree"] == 4
    code, doc, _ = cli(capsys, "tree", "build", "--valence", "3", files["eq4"])
    assert code == 1 and doc["certificate"] == "degree 4 branch point required"
    code, doc, _ = cli(capsys, "tree", "build", files["square"])
    assert code == 1 and doc["tree"] is None and "four-point" in doc["certificate"]


def test_homog(files, capsys):
    code, doc, _ = cli(capsys, "homog", files["eq4"])
    assert code == 0 and doc["verdict"] is True and doc["isometry_group_size"] == 24
    code, doc, _ = cli(capsys, "homog", "--k", "1", files["path"])
    assert code == 1 and doc["witness"] == {"domain": [0], "image": [1]}
    code, _, _ = cli(capsys, "homog", "--k", "9", files["path"])
    assert code == 2


def test_fingerprint(files, capsys):
    code, doc, _ = cli(capsys, "fingerprint", "--n", "2", "--mode", "injective", files["path"])
    assert code == 0 and doc == {"n": 2, "vectors": [[1.0], [2.0]]}
    code, _, _ = cli(capsys, "fingerprint", "--n", "5", "--mode", "injective", files["path"])
    assert code == 2


def test_member(capsys):
    code, doc, _ = cli(capsys, "member", "--space", "tree", "--valence", "3", "--vector", "1,1,1,1,1,1")
    assert code == 1 and doc["member"] is False
    code, doc, _ = cli(capsys, "member", "--space", "euclidean", "--dim", "2", "--vector", "1,1,1")
    assert code == 0 and doc["member"] is True
    code, doc, _ = cli(capsys, "member", "--space", "euclidean", "--dim", "2", "--vector", "1,3,1")
    assert code == 1 and doc["certificate"] == "not a pseudometric"
    code, _, _ = cli(capsys, "member", "--space", "euclidean", "--dim", "2", "--vector", "1,1")
    assert code == 2
    code, _, _ = cli(capsys, "member", "--space", "euclidean", "--dim", "2", "--vector", "1,x")
    assert code == 2


def test_extend(files, capsys):
    code, doc, _ = cli(capsys, "extend", "--source", files["tripod"], "--map", files["map"], "--points", "0,3")
    assert code == 0 and doc["extended"] is True and doc["verify"]["ok"] is True
    assert [s["kind"] for s in doc["trace"]] == ["hull", "sprout"]
    assert len(doc["map"]["domain"]) == 4
    code, _, err = cli(capsys, "extend", "--source", files["tripod"], "--map", files["map"], "--points", "9")
    assert code == 2 and "not a vertex" in err
    code, _, _ = cli(capsys, "extend", "--source", files["broken"], "--map", files["map"], "--points", "3")
    assert code == 2


def test_extend_budget_below_source_degree(files, capsys):
    code, doc, err = cli(capsys, "extend", "--source", files["tripod"], "--map", files["map"], "--points", "3", "--valence", "2")
    assert code == 2 and doc is None
    assert "source has a vertex of degree 3 > valence 2" in err


def test_ramsey(files, capsys):
    code, doc, _ = cli(capsys, "ramsey", "near", "--delta", "0.25", files["square"])
    assert code == 0 and doc["clique"] == {"color": 0, "subset": [0, 1]}
    assert [b["lo"] for b in doc["coloring"]["bins"]] == [1.0, 1.25]
    code, doc, _ = cli(capsys, "ramsey", "equi", "--r", "1", files["path"])
    assert code == 0 and doc["maximum"] == [0, 1] and doc["maximal_greedy"] == [0, 1]
    code, _, _ = cli(capsys, "ramsey", "near", files["path"])
    assert code == 2
    code, _, _ = cli(capsys, "ramsey", "equi", files["path"])
    assert code == 2


def test_demo_nonclosed_with_csv(files, capsys):
    out = files["dir"] / "comb.csv"
    code, doc, _ = cli(capsys, "demo", "nonclosed", "--valence", "3", "--k", "4", "--eps", "0.1,0.01,0.001", "--csv", str(out))
    assert code == 0 and doc["gap_exhibited"] is True
    assert doc["gaps"] == pytest.approx([0.6, 0.06, 0.006], abs=1e-12)
    rows = list(csv.reader(out.open()))
    assert rows[0][:3] == ["eps", "member", "gap"] and len(rows) == 5
    code, doc, _ = cli(capsys, "demo", "nonclosed", "--valence", "4")
    assert code == 1 and doc["message"] == "no gap exhibited"
    code, _, _ = cli(capsys, "demo", "nonclosed", "--eps", "0.01,0.1")
    assert code == 2


def test_demo_rpn_triples(capsys):
    code, doc, _ = cli(capsys, "demo", "rpn-triples")
    assert code == 0
    assert doc["triple_map_extends"] is False
    assert doc["homogeneity"]["verdict"] is False
    assert doc["matrix"]["n"] == 6


def test_usage_errors(files, capsys):
    for argv in ([], ["bogus"], ["validate"], ["validate", "--nope", files["square"]], ["validate", files["broken"]], ["validate", "/no/such/file.json"]):
        code, doc, err = cli(capsys, *argv)
        assert code == 2 and doc is None and err.startswith("error:")


def test_run_returns_structured_result(files):
    r = run(["validate", files["square"]])
    assert r.status == "ok" and r.payload["ok"] is True
    r = run(["validate", files["bad"]])
    assert r.status == "property-false"
    r = run(["bogus"])
    assert r.status == "input-error" and r.payload is None and r.message


def test_output_is_byte_identical(files):
    cmd = [sys.executable, "-m", "allset", "embed", "--space", "hyperbolic", "--dim", "3", files["eq4"]]
    first = subprocess.run(cmd, capture_output=True, check=False)
    second = subprocess.run(cmd, capture_output=True, check=False)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout and first.stdout.endswith(b"\n")
    for argv in (["demo", "rpn-triples"], ["homog", files["path"]]):
        a = subprocess.run([sys.executable, "-m", "allset", *argv], capture_output=True)
        b = subprocess.run([sys.executable, "-m", "allset", *argv], capture_output=True)
        assert a.stdout == b.stdout


def test_help_exits_cleanly(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "extend" in capsys.readouterr().out
