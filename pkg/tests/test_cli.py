import json

import pytest

from bellcorr.cli import main
from bellcorr.io import read_facets, read_vertices, write_matrix
from bellcorr.presets import F41


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_vertices(tmp_path, capsys):
    code, out = run(capsys, "vertices", "--m", 2, "--n", 3, "--out", tmp_path)
    assert code == 0 and out.out.strip() == "16"
    assert len(read_vertices(tmp_path / "vertices_2x3.json")) == 16
    man = json.loads((tmp_path / "manifest_vertices.json").read_text())
    assert man["command"] == "vertices" and man["parameters"] == {"m": 2, "n": 3}


def test_facets_and_classify(tmp_path, capsys):
    code, out = run(capsys, "facets", "--m", 3, "--n", 3, "--method", "orbit", "--out", tmp_path, "--expect", 90)
    assert code == 0
    path = tmp_path / "facets_3x3_orbit.jsonl"
    assert len(read_facets(path)) == 90
    code, out = run(capsys, "classify", path, "--starts", 8, "--out", tmp_path)
    assert code == 0
    assert "| E | 18 | 16 |" in out.out and "| CHSH | 72 | 16 |" in out.out
    report = json.loads((tmp_path / "classes_3x3.json").read_text())
    assert report["total"] == 90


def test_facets_expect_mismatch(tmp_path, capsys):
    code, _ = run(capsys, "facets", "--m", 2, "--n", 2, "--out", tmp_path, "--expect", 15)
    assert code == 2


def test_classify_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json}\n")
    code, _ = run(capsys, "classify", bad, "--out", tmp_path)
    assert code == 2
    code, _ = run(capsys, "classify", tmp_path / "missing.jsonl", "--out", tmp_path)
    assert code == 2


def test_violation_preset_and_file(tmp_path, capsys):
    code, out = run(capsys, "violation", "--preset", "chsh", "--certify", "--starts", 8, "--out", tmp_path)
    assert code == 0 and out.out.startswith("value    1.41421356237")
    mfile = tmp_path / "f41.json"
    write_matrix(mfile, F41)
    code, out = run(capsys, "violation", mfile, "--starts", 8, "--out", tmp_path)
    assert code == 0 and "1.36082763" in out.out
    code, _ = run(capsys, "violation", "--out", tmp_path)
    assert code == 2


def test_violation_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        run(capsys, "violation", "--preset", "42", "--starts", 8, "--seed", 5, "--out", d)
        outs.append((d / "violation.json").read_text())
    assert outs[0] == outs[1]


def test_kg_uses_cache(tmp_path, capsys):
    code, out = run(capsys, "kg", "--m", 2, "--n", 2, "--starts", 8, "--out", tmp_path)
    assert code == 0 and "K_G(2,2) = 1.414213562" in out.out
    cached = list((tmp_path / "cache").glob("facets_2x2_orbit_*.jsonl"))
    assert len(cached) == 1
    code, out = run(capsys, "kg", "--m", 2, "--n", 2, "--starts", 8, "--out", tmp_path)
    assert code == 0
    report = json.loads((tmp_path / "kg_2x2.json").read_text())
    assert abs(float(report["kg_lower"]) - 2 ** 0.5) < 1e-8


def test_realize(tmp_path, capsys):
    code, out = run(capsys, "realize", "--preset", "42", "--starts", 4, "--out", tmp_path)
    assert code == 0 and "local dimension 4" in out.out  # see-saw runs at d = 4
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"X": [[1, 0, 0, 0], [0, 1, 0, 0], [1 / 3, -2 / 3, 2 / 3, 0], [0, 0, 0, 1]]}))
    code, out = run(capsys, "realize", "--config", cfg, "--preset", "41", "--out", tmp_path)
    assert code == 0 and "local dimension 4" in out.out
    cfg.write_text(json.dumps({"X": [[2, 0]], "Y": [[1, 0]]}))
    code, _ = run(capsys, "realize", "--config", cfg, "--out", tmp_path)
    assert code == 2


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2
