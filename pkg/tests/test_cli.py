import json
import shutil
import subprocess
import sys

import pytest

from kimura.chow_model import projective_model, serialize_model
from kimura.cli import format_table, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_lemma_gl_passes_and_writes_reports(tmp_path, capsys):
    js, cs = tmp_path / "r.json", tmp_path / "r.csv"
    code, out, _ = run(["lemma-gl", "--l0", "1", "--l1", "1", "--r-max", "3",
                        "--json", str(js), "--csv", str(cs)], capsys)
    assert code == 0 and "lemma-gl: PASS" in out
    report = json.loads(js.read_text())
    assert report["ok"] and [c["image_dim"] for c in report["cases"]] == [2, 6, 20]
    assert all(v["ok"] for v in report["hom_vanishing"])
    assert cs.read_text().splitlines()[0].startswith("l0,l1,r,group")


def test_lemma_gl_refuses_large_dimension(capsys):
    code, _, err = run(["lemma-gl", "--l0", "2", "--l1", "2", "--r-max", "6", "--max-dim", "1024"], capsys)
    assert code == 2 and "r=6" in err


def test_max_dim_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("KIMURA_MAX_DIM", "8")
    code, _, err = run(["lemma-gl", "--l0", "1", "--l1", "1", "--r-max", "4"], capsys)
    assert code == 2 and "r=4" in err


def test_duality_json_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["duality", "--trials", "4", "--seed", "3", "--json", str(a)], capsys)[0] == 0
    assert run(["duality", "--trials", "4", "--seed", "3", "--threads", "2", "--json", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_duality_empty_dims(tmp_path, capsys):
    code, out, _ = run(["duality", "--dims", "", "--trials", "3"], capsys)
    assert code == 0


def test_closure_with_filtration(tmp_path, capsys):
    js = tmp_path / "c.json"
    code, out, _ = run(["closure", "--model", "abelian:1+dual:1", "--max-arity", "2",
                        "--generators", "basis:1", "--filtration", "--json", str(js)], capsys)
    assert code == 0
    rep = json.loads(js.read_text())
    assert rep["dimensions"] == [2, 4, 10] and rep["nilpotence_index"] == [2, 2, 2]
    assert "model-level" in rep["banner"]


def test_closure_warns_without_radical(capsys):
    code, out, _ = run(["closure", "--model", "projective:1", "--max-arity", "2", "--filtration"], capsys)
    assert code == 0 and "warning: the pairing radical is zero" in out


def test_closure_generator_file(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("cycle 1 0 1\n")
    assert run(["closure", "--model", "projective:1", "--max-arity", "2", "--generators", str(g)], capsys)[0] == 0
    g.write_text("cycle 1 0 1 5\n")
    code, _, err = run(["closure", "--model", "projective:1", "--generators", str(g)], capsys)
    assert code == 2 and "line 1" in err
    g.write_text("cycle 3 " + " ".join(["0"] * 8) + "\n")
    code, _, err = run(["closure", "--model", "projective:1", "--max-arity", "2", "--generators", str(g)], capsys)
    assert code == 2


def test_model_file_and_malformed_model(tmp_path, capsys):
    good = tmp_path / "p2.model"
    good.write_text(serialize_model(projective_model(2)))
    code, out, _ = run(["generation", "--model", str(good), "--max-arity", "2", "--search-cap", "2"], capsys)
    assert code == 0 and "generation rank: 1" in out
    bad = tmp_path / "bad.model"
    bad.write_text("basis 1 0 0\nbasis x 1 2\n")
    code, _, err = run(["closure", "--model", str(bad)], capsys)
    assert code == 2 and "line 2" in err
    code, _, err = run(["closure", "--model", str(tmp_path / "missing.model")], capsys)
    assert code == 2


def test_generation_refuses_on_radical(capsys):
    code, _, err = run(["generation", "--model", "dual:1", "--max-arity", "1"], capsys)
    assert code == 2 and "radical" in err


def test_generation_not_found_exits_one(capsys):
    code, out, _ = run(["generation", "--model", "abelian:1", "--max-arity", "2", "--search-cap", "1"], capsys)
    assert code == 1 and "not found <= 1" in out


def test_transport_and_corruption(tmp_path, capsys):
    code, out, _ = run(["transport", "--model", "projective:1", "--r-max", "2"], capsys)
    assert code == 0
    js = tmp_path / "t.json"
    code, _, _ = run(["transport", "--model", "projective:1", "--r-max", "2", "--corrupt-b", "--json", str(js)], capsys)
    assert code == 1
    bad = {c["name"]: c for c in json.loads(js.read_text())["checks"] if not c["ok"]}
    # flipping b on an even vector changes its trace and breaks kernel containment at once
    assert "trace of b^1" in bad
    assert bad["kernel containment r=1"]["witness"]["block"]


def test_transport_refuses_oversized(capsys):
    code, _, err = run(["transport", "--model", "abelian:2", "--r-max", "4"], capsys)
    assert code == 2 and "exceeds" in err


def test_format_table_alignment():
    text = format_table(["name", "n"], [["a", 1], ["bbb", 10]])
    lines = text.splitlines()
    assert lines[1] == "----  --"
    assert lines[2] == "a      1"
    assert lines[3] == "bbb   10"


@pytest.mark.skipif(shutil.which("kimura") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["kimura", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "lemma-gl" in res.stdout


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kimura.cli", "duality", "--trials", "1", "--dims", "1,0"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "PASS" in res.stdout
