from __future__ import annotations

import json

import numpy as np
import pytest

from polargrass.artifactio import (
    ArtifactError,
    Cache,
    HashMismatch,
    SchemaError,
    VersionMismatch,
    content_key,
    export_graph,
    export_report,
    load_distances,
    load_geometry,
    load_graph,
    load_map,
    load_report,
    save_distances,
    save_geometry,
    save_graph,
    save_map,
    save_report,
)
from polargrass.embeddings import VertexMap
from polargrass.grassmann import build_graph
from polargrass.polar import build_polar_space

from conftest import graph


def test_graph_round_trip():
    g = graph("sp:4:2", 1)
    h = load_graph(save_graph(g))
    assert h.vertices == g.vertices and h.edges() == g.edges() and h.k == 1
    assert save_graph(h) == save_graph(g)


def test_geometry_round_trip():
    ps = build_polar_space("o+:6:2")
    qs = load_geometry(save_geometry(ps))
    assert qs.perp == ps.perp and qs.name() == ps.name()


def test_distances_round_trip():
    D = graph("thin:3", 1).distances()
    data = save_distances(D)
    assert len(data) == 144
    assert np.array_equal(load_distances(data, 12), D)
    with pytest.raises(SchemaError):
        load_distances(data[:-1], 12)


def test_map_round_trip():
    g = graph("thin:3", 1)
    f = VertexMap(g, g, tuple(reversed(range(12))))
    h = load_map(save_map(f), g, g)
    assert h.assignment == f.assignment
    assert load_map(save_map(f)).assignment == f.assignment


def test_report_round_trip_and_schema():
    rep = {"check": "x", "verdict": "pass", "counts": [3, 1]}
    back = load_report(save_report(rep))
    assert back["verdict"] == "pass" and back["schema"] == "polargrass.report/1"
    with pytest.raises(SchemaError):
        load_report(b'{"schema": "other/1"}')
    with pytest.raises(SchemaError):
        load_graph(b"not json")


def test_identical_builds_identical_keys_and_payloads():
    a, b = build_polar_space("sp:4:2"), build_polar_space("sp:4:2")
    assert save_geometry(a) == save_geometry(b)
    long_form = {"kind": "classical", "field": 2, "form": {"type": "alternating", "dim": 4}}
    assert content_key("sp:4:2", entity="graph", k=1) == content_key(long_form, entity="graph", k=1)
    assert content_key("sp:4:2", k=1) != content_key("sp:4:2", k=0)
    assert len(content_key("sp:4:2")) == 64


def test_cache_put_get_and_tamper(tmp_path):
    c = Cache(tmp_path)
    key = content_key("thin:3", entity="graph", k=1)
    payload = save_graph(graph("thin:3", 1))
    binp = c.put(key, "graph", payload)
    assert binp == tmp_path / key[:2] / f"{key}.bin"
    data, meta = c.get(key, "graph")
    assert data == payload
    assert c.get("0" * 64, "graph") is None
    with pytest.raises(SchemaError):
        c.get(key, "distances")
    binp.write_bytes(payload.replace(b'"k":1', b'"k":2'))
    with pytest.raises(HashMismatch):
        c.get(key, "graph")


def test_cache_version_mismatch_rebuilds(tmp_path):
    c = Cache(tmp_path)
    g = c.graph("thin:3", 1, with_distances=True)
    key = content_key("thin:3", entity="graph", k=1)
    _, side = c.paths(key)
    meta = json.loads(side.read_text())
    meta["version"] = 0
    side.write_text(json.dumps(meta))
    with pytest.raises(VersionMismatch):
        c.get(key, "graph")
    h = c.graph("thin:3", 1, with_distances=True)
    assert h.vertices == g.vertices and np.array_equal(h.distances(), g.distances())
    assert json.loads(side.read_text())["version"] == 1
    assert not list(tmp_path.rglob("*.tmp"))


def test_cache_env(tmp_path, monkeypatch):
    monkeypatch.setenv("POLARGRASS_CACHE", str(tmp_path))
    assert Cache().root == tmp_path


def test_dot_export_counts():
    g = build_graph(build_polar_space("thin:3"), 1)
    dot = export_graph(g, "dot")
    nodes = [ln for ln in dot.splitlines() if "[label=" in ln]
    edges = [ln for ln in dot.splitlines() if " -- " in ln]
    assert len(nodes) == 12
    assert len(edges) == sum(a.bit_count() for a in g.adj) // 2 == 24
    assert export_graph(g, "dot") == dot


def test_json_export():
    g = graph("thin:3", 1)
    obj = json.loads(export_graph(g, "json"))
    assert len(obj["vertices"]) == 12 and len(obj["edges"]) == 24
    assert obj["edges"] == sorted(obj["edges"])
    with pytest.raises(ArtifactError):
        export_graph(g, "graphml")


def test_empty_report_export():
    text = export_report({})
    assert json.loads(text) == {"schema": "polargrass.report/1"}
    assert export_report({}) == text
