from __future__ import annotations

import json

import numpy as np
import pytest

from maslovgerbe import bundles, cli
from maslovgerbe.bundles import build_cp1_cover
from maslovgerbe.cech import nerve_to_json, transition_to_json
from maslovgerbe.symplectic import frame_to_json, line_frame, loop_to_json, rotation_line_loop


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out.strip(), out.err


@pytest.fixture
def loop_file(tmp_path):
    def make(loop):
        p = tmp_path / "loop.json"
        p.write_text(json.dumps(loop_to_json(loop)))
        return str(p)

    return make


def test_loop_then_index(capsys, tmp_path):
    code, out, _ = run(capsys, "loop", "rotation", "--k", "-3")
    assert code == 0
    p = tmp_path / "l.json"
    p.write_text(out)
    assert run(capsys, "index", str(p)) == (0, "-3", "")
    code, out, _ = run(capsys, "index", str(p), "--json")
    assert json.loads(out)["index"] == -3


def test_sp_graph_index(capsys, tmp_path):
    code, out, _ = run(capsys, "loop", "sp-graph")
    p = tmp_path / "sp.json"
    p.write_text(out)
    assert run(capsys, "index", str(p))[1] == "2"
    assert run(capsys, "holonomy", str(p))[1] == "-1"


def test_holonomy_branches(capsys, loop_file):
    path = loop_file(rotation_line_loop(1, 720))
    assert run(capsys, "holonomy", path)[1] == "i"
    assert run(capsys, "holonomy", path, "--branch=-i")[1] == "-i"
    assert run(capsys, "holonomy", path, "--branch", "-i")[1] == "-i"
    assert run(capsys, "holonomy", path, "--branch", "+i")[1] == "i"
    assert run(capsys, "holonomy", path, "--branch", "x")[0] == 2


def test_malformed_input_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(capsys, "index", str(p))[0] == 2
    p.write_text(json.dumps({"field": "real", "samples": [[[1.0, 0.0]]]}))
    assert run(capsys, "index", str(p))[0] == 2
    assert run(capsys, "index", str(tmp_path / "missing.json"))[0] == 2


def test_complex_loop_exit_3(capsys, loop_file):
    path = loop_file(rotation_line_loop(1, 64, "complex"))
    code, _, err = run(capsys, "index", path)
    assert code == 3 and "complex" in err


def test_section(capsys, tmp_path):
    f, b = tmp_path / "f.json", tmp_path / "b.json"
    f.write_text(json.dumps(frame_to_json(line_frame(0.3))))
    b.write_text(json.dumps(frame_to_json(line_frame(0.3))))
    code, out, _ = run(capsys, "section", str(f), str(b), "--json")
    doc = json.loads(out)
    assert code == 0 and doc["vanishes"] and doc["defect"] == 1
    b.write_text(json.dumps(frame_to_json(line_frame(1.2))))
    doc = json.loads(run(capsys, "section", str(f), str(b), "--json")[1])
    assert not doc["vanishes"] and doc["defect"] == 0
    assert abs(doc["value"][0]) == pytest.approx(abs(np.sin(0.9)))


def test_chern_and_giraud(capsys):
    assert run(capsys, "chern")[1] == "1"
    assert run(capsys, "chern", "--degree", "-2")[1] == "-2"
    assert run(capsys, "giraud")[1] == "-1"
    assert run(capsys, "giraud", "--degree", "2")[1] == "1"


def test_chern_from_file(capsys, tmp_path):
    t = build_cp1_cover(3).transition
    p = tmp_path / "cover.json"
    p.write_text(json.dumps({"nerve": nerve_to_json(t.nerve), "transition": transition_to_json(t)}))
    assert run(capsys, "chern", "--input", str(p))[1] == "3"
    p.write_text(json.dumps({"nerve": {"sets": []}}))
    assert run(capsys, "chern", "--input", str(p))[0] == 2


def test_gerbe_report(capsys):
    code, out, _ = run(capsys, "gerbe", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["value"] == [-1.0, 0.0] and doc["chern_evaluation"] == 1 and doc["equal"]
    assert run(capsys, "gerbe", "--degree", "2")[0] == 0


def test_gerbe_route_mismatch_exit_4(capsys, monkeypatch):
    real = bundles.maslov_gerbe_class

    def broken(degree, samples):
        rep = real(degree, samples)
        rep.equator_holonomy = -rep.equator_holonomy
        return rep

    monkeypatch.setattr(bundles, "maslov_gerbe_class", broken)
    assert run(capsys, "gerbe")[0] == 4


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "C2", "C4", "--json")
    doc = json.loads(out)
    assert code == 0
    ran = {d["check"]: d["status"] for d in doc if d["status"] != "skipped"}
    assert ran == {"C2-sp-embedding": "pass", "C4-rotation-holonomy": "pass"}


def test_verify_default_run_passes(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "3")
    assert code == 0
    assert "FAIL" not in out and out.count("PASS") == 16
