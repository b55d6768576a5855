from __future__ import annotations

import json

from polargrass.cli import run


def test_check_distance_sp42(capsys):
    assert run(["graph", "check-distance", "--geometry", "sp:4:2", "--k", "1"]) == 0
    assert "105/105 pairs match" in capsys.readouterr().out


def test_missing_map_is_usage_error(tmp_path, capsys):
    assert run(["embed", "verify", "--map", str(tmp_path / "missing.json")]) == 2
    assert "not found" in capsys.readouterr().err


def test_bad_usage():
    assert run([]) == 2
    assert run(["graph", "frobnicate"]) == 2
    assert run(["graph", "build", "--geometry", "sp:4:2"]) == 2
    assert run(["graph", "build", "--geometry", "nonsense:1", "--k", "0"]) == 2


def test_geometry_build_and_verify(capsys):
    assert run(["geometry", "build", "--geometry", "sp:6:2"]) == 0
    out = capsys.readouterr().out
    assert "63 points" in out and "[63, 315, 135]" in out
    assert run(["geometry", "verify", "--geometry", "thin:3"]) == 0


def test_diameter_and_cliques(capsys):
    assert run(["graph", "diameter", "--geometry", "sp:6:2", "--k", "1"]) == 0
    assert "diameter 3" in capsys.readouterr().out
    assert run(["cliques", "enumerate", "--geometry", "thin:3", "--k", "1"]) == 0


def test_apartment_make_then_detect(tmp_path, capsys):
    out = tmp_path / "a.json"
    assert run(["apartment", "make", "--geometry", "sp:6:2", "--k", "1", "--seed", "4", "--out", str(out)]) == 0
    members = json.loads(out.read_text())["members"]
    inp = tmp_path / "m.json"
    inp.write_text(json.dumps({"members": members}))
    assert run(["apartment", "detect", "--geometry", "sp:6:2", "--k", "1", "--input", str(inp)]) == 0
    assert run(["apartment", "detect", "--geometry", "sp:6:2", "--k", "1", "--members", "0,1,2"]) == 1


def test_embed_search_verify_decompose(tmp_path, capsys):
    m = tmp_path / "map.json"
    args = ["embed", "search", "--geometry", "sp:6:2", "--k", "1", "--seed", "2", "--limit", "1"]
    assert run(args + ["--save-first", str(m)]) == 0
    assert run(["embed", "verify", "--map", str(m)]) == 0
    assert "isometric: pass" in capsys.readouterr().out
    rep = tmp_path / "dec.json"
    assert run(["embed", "decompose", "--map", str(m), "--out", str(rep)]) == 0
    assert json.loads(rep.read_text())["S_dim"] == -1
    # break the map and verify again
    obj = json.loads(m.read_text())
    a = obj["assignment"]
    a[0][1], a[1][1] = a[1][1], a[0][1]
    m.write_text(json.dumps(obj))
    assert run(["embed", "verify", "--map", str(m)]) == 1


def test_corollary1_sp62_exhaustive(capsys):
    code = run(["check", "corollary1", "--geometry", "sp:6:2", "--k", "1", "--exhaustive", "--workers", "1"])
    assert code == 0
    assert "all images are apartments" in capsys.readouterr().out


def test_identical_runs_identical_reports(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["check", "theorem", "--source", "thin:4", "--geometry", "thin:4", "--k", "1", "--k2", "1", "--seed", "5"]
    assert run(base + ["--out", str(a)]) == 0
    assert run(base + ["--out", str(b), "--workers", "1"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_prop0_rank_three_is_usage_error():
    assert run(["check", "prop0", "--source", "thin:3", "--geometry", "thin:3", "--m", "0"]) == 2


def test_theorem_size_skip(capsys):
    assert run(["check", "theorem", "--source", "thin:5", "--geometry", "sp:10:2", "--k", "1", "--k2", "1"]) == 0
    assert "skipped: size" in capsys.readouterr().out


def test_export_dot_and_cache(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("POLARGRASS_CACHE", str(tmp_path / "c"))
    assert run(["export", "--geometry", "thin:3", "--k", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count(" -- ") == 24
    assert list((tmp_path / "c").rglob("*.bin"))
    assert run(["export", "--geometry", "thin:3", "--k", "1"]) == 0
    assert capsys.readouterr().out == out


def test_export_report(tmp_path, capsys):
    rep = tmp_path / "r.json"
    rep.write_text('{"verdict": "pass", "schema": "polargrass.report/1"}')
    assert run(["export", "--format", "json", "--report", str(rep)]) == 0
    assert capsys.readouterr().out == '{"schema":"polargrass.report/1","verdict":"pass"}\n'
