"""Canonical serialization, a content-addressed cache and DOT/JSON export.

Cache layout::

    <root>/<first two hex digits of key>/<key>.bin   payload bytes
    <root>/<first two hex digits of key>/<key>.json  sidecar: schema, version, kind, sha256

Keys are sha256 digests of canonical JSON (sorted keys, no whitespace) of the
descriptor plus build parameters, so the same geometry always lands in the
same place.  Writes go to a temporary file that is renamed into place.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .grassmann import GrassmannGraph
from .polar import PolarSpace, build_polar_space, canonical_json, normalize_descriptor

FORMAT_VERSION = 1
SCHEMAS = {
    "geometry": "polargrass.geometry/1",
    "graph": "polargrass.graph/1",
    "distances": "polargrass.distances/1",
    "map": "polargrass.map/1",
    "report": "polargrass.report/1",
    "cliques": "polargrass.cliques/1",
    "sidecar": "polargrass.cache-entry/1",
}
CACHE_ENV = "POLARGRASS_CACHE"


class ArtifactError(ValueError):
    pass


class VersionMismatch(ArtifactError):
    pass


class SchemaError(ArtifactError):
    pass


class HashMismatch(ArtifactError):
    pass


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def dumps(obj) -> bytes:
    return canonical_json(obj).encode()


def content_key(descriptor, **params) -> str:
    payload = {"descriptor": normalize_descriptor(descriptor), "params": params, "version": FORMAT_VERSION}
    return sha256_hex(dumps(payload))


def _descriptor_of(ps: PolarSpace) -> dict:
    d = getattr(ps, "descriptor", None)
    if not d:
        raise ArtifactError("only geometries built from a descriptor can be serialized")
    return normalize_descriptor(d)


def _expect_schema(obj, kind: str):
    if not isinstance(obj, dict) or obj.get("schema") != SCHEMAS[kind]:
        got = obj.get("schema") if isinstance(obj, dict) else type(obj).__name__
        raise SchemaError(f"expected schema {SCHEMAS[kind]!r}, got {got!r}")


def _loads(data: bytes):
    try:
        return json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"payload is not JSON: {e}") from None


# ---------------------------------------------------------------------------
# entities


def save_geometry(ps: PolarSpace) -> bytes:
    return dumps(
        {
            "schema": SCHEMAS["geometry"],
            "descriptor": _descriptor_of(ps),
            "npoints": ps.npoints,
            "perp": [format(m, "x") for m in ps.perp],
        }
    )


def load_geometry(data: bytes) -> PolarSpace:
    obj = _loads(data)
    _expect_schema(obj, "geometry")
    try:
        ps = build_polar_space(obj["descriptor"])
        perp = [int(h, 16) for h in obj["perp"]]
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed geometry payload: {e}") from None
    if ps.npoints != obj["npoints"] or ps.perp != perp:
        raise SchemaError("stored collinearity differs from the rebuilt geometry")
    return ps


def save_graph(g: GrassmannGraph) -> bytes:
    return dumps(
        {
            "schema": SCHEMAS["graph"],
            "descriptor": _descriptor_of(g.space),
            "k": g.k,
            "vertices": [format(X, "x") for X in g.vertices],
            "edges": [list(e) for e in g.edges()],
        }
    )


def load_graph(data: bytes, space: PolarSpace | None = None) -> GrassmannGraph:
    obj = _loads(data)
    _expect_schema(obj, "graph")
    try:
        desc = normalize_descriptor(obj["descriptor"])
        k = int(obj["k"])
        verts = [int(h, 16) for h in obj["vertices"]]
        edges = [(int(u), int(v)) for u, v in obj["edges"]]
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed graph payload: {e}") from None
    if space is None:
        space = build_polar_space(desc)
    elif _descriptor_of(space) != desc:
        raise SchemaError("graph payload belongs to a different geometry")
    V = len(verts)
    adj = [0] * V
    for u, v in edges:
        if not (0 <= u < V and 0 <= v < V) or u == v:
            raise SchemaError(f"edge ({u}, {v}) out of range")
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    index = {X: i for i, X in enumerate(verts)}
    if len(index) != V:
        raise SchemaError("duplicate vertices")
    return GrassmannGraph(space, k, verts, index, adj)


def save_distances(D: np.ndarray) -> bytes:
    """Flat row-major uint8 table."""
    return np.ascontiguousarray(D, dtype=np.uint8).tobytes()


def load_distances(data: bytes, nvertices: int) -> np.ndarray:
    if len(data) != nvertices * nvertices:
        raise SchemaError(f"distance table has {len(data)} bytes, expected {nvertices}^2")
    return np.frombuffer(data, dtype=np.uint8).reshape(nvertices, nvertices).copy()


def save_map(f) -> bytes:
    return dumps(
        {
            "schema": SCHEMAS["map"],
            "source": {"descriptor": _descriptor_of(f.source.space), "k": f.source.k},
            "target": {"descriptor": _descriptor_of(f.target.space), "k": f.target.k},
            "assignment": [[i, int(v)] for i, v in enumerate(f.assignment)],
        }
    )


def parse_map(data: bytes) -> dict:
    """Schema-check a map payload; returns descriptors, k's and the assignment
    as a list indexed by source id (graphs are built by the caller)."""
    obj = _loads(data)
    _expect_schema(obj, "map")
    try:
        pairs = sorted((int(s), int(t)) for s, t in obj["assignment"])
        out = {
            "source": normalize_descriptor(obj["source"]["descriptor"]),
            "k": int(obj["source"]["k"]),
            "target": normalize_descriptor(obj["target"]["descriptor"]),
            "k2": int(obj["target"]["k"]),
        }
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed map payload: {e}") from None
    if [s for s, _ in pairs] != list(range(len(pairs))):
        raise SchemaError("assignment must list every source id exactly once")
    out["assignment"] = [t for _, t in pairs]
    return out


def load_map(data: bytes, source: GrassmannGraph | None = None, target: GrassmannGraph | None = None):
    from .embeddings import VertexMap
    from .grassmann import build_graph

    m = parse_map(data)
    if source is None:
        source = build_graph(build_polar_space(m["source"]), m["k"])
    if target is None:
        target = build_graph(build_polar_space(m["target"]), m["k2"])
    return VertexMap(source, target, tuple(m["assignment"]))


def save_report(rep: dict) -> bytes:
    if "schema" not in rep:
        rep = {"schema": SCHEMAS["report"], **rep}
    return dumps(rep)


def load_report(data: bytes) -> dict:
    obj = _loads(data)
    _expect_schema(obj, "report")
    return obj


# ---------------------------------------------------------------------------
# cache


class Cache:
    def __init__(self, root: str | os.PathLike | None = None):
        if root is None:
            root = os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "polargrass"
        self.root = Path(root)

    def paths(self, key: str) -> tuple[Path, Path]:
        d = self.root / key[:2]
        return d / f"{key}.bin", d / f"{key}.json"

    def put(self, key: str, kind: str, payload: bytes, meta: dict | None = None) -> Path:
        binp, jsonp = self.paths(key)
        binp.parent.mkdir(parents=True, exist_ok=True)
        side = {
            "schema": SCHEMAS["sidecar"],
            "version": FORMAT_VERSION,
            "kind": kind,
            "key": key,
            "sha256": sha256_hex(payload),
            "meta": meta or {},
        }
        _atomic_write(binp, payload)
        _atomic_write(jsonp, dumps(side))
        return binp

    def get(self, key: str, kind: str) -> tuple[bytes, dict] | None:
        """Payload and sidecar metadata, None when absent.  Raises on version
        mismatch, malformed sidecars and hash mismatch."""
        binp, jsonp = self.paths(key)
        if not binp.exists() or not jsonp.exists():
            return None
        side = _loads(jsonp.read_bytes())
        if not isinstance(side, dict) or side.get("schema") != SCHEMAS["sidecar"]:
            raise SchemaError(f"bad cache sidecar {jsonp}")
        if side.get("version") != FORMAT_VERSION:
            raise VersionMismatch(f"cache entry version {side.get('version')} != {FORMAT_VERSION}")
        if side.get("kind") != kind:
            raise SchemaError(f"cache entry holds {side.get('kind')!r}, not {kind!r}")
        data = binp.read_bytes()
        if sha256_hex(data) != side.get("sha256"):
            raise HashMismatch(f"payload hash mismatch for {binp}")
        return data, side.get("meta", {})

    def graph(self, descriptor, k: int, with_distances: bool = False, space: PolarSpace | None = None):
        """Load Γ_k from the cache or build and store it.  A stale entry (old
        version) is rebuilt; a corrupted one raises."""
        from .grassmann import build_graph

        desc = normalize_descriptor(descriptor)
        gkey = content_key(desc, entity="graph", k=k)
        hit = _get_or_none(self, gkey, "graph")
        if hit is not None:
            g = load_graph(hit[0], space)
        else:
            g = build_graph(space if space is not None else build_polar_space(desc), k)
            self.put(gkey, "graph", save_graph(g), {"descriptor": desc, "k": k})
        if with_distances:
            dkey = content_key(desc, entity="distances", k=k)
            hit = _get_or_none(self, dkey, "distances")
            if hit is not None:
                g.set_distances(load_distances(hit[0], len(g)))
            else:
                self.put(dkey, "distances", save_distances(g.distances()), {"nvertices": len(g)})
        return g


def _get_or_none(cache: Cache, key: str, kind: str):
    try:
        return cache.get(key, kind)
    except VersionMismatch:
        return None


def _atomic_write(path: Path, data: bytes):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# export


def export_graph(g: GrassmannGraph, fmt: str = "dot") -> str:
    edges = g.edges()
    if fmt == "dot":
        name = g.space.name().replace('"', "")
        lines = [f'graph "Gamma_{g.k}({name})" {{']
        for v in range(len(g)):
            lines.append(f'  {v} [label="{g.label(v)}"];')
        for u, v in edges:
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return canonical_json(
            {
                "schema": SCHEMAS["graph"],
                "geometry": g.space.name(),
                "k": g.k,
                "vertices": [{"id": v, "subspace": g.label(v)} for v in range(len(g))],
                "edges": [list(e) for e in edges],
            }
        ) + "\n"
    raise ArtifactError(f"unsupported export format {fmt!r}")


def export_report(rep: dict, fmt: str = "json") -> str:
    if fmt != "json":
        raise ArtifactError(f"reports export only as json, not {fmt!r}")
    if "schema" not in rep:
        rep = {"schema": SCHEMAS["report"], **rep}
    return canonical_json(rep) + "\n"


def export_cliques(g: GrassmannGraph, labeled) -> str:
    """``labeled`` is a list of (members, CliqueLabel)."""
    items = []
    for members, lab in labeled:
        d = lab.to_dict(g.space)
        items.append({"kind": d["kind"], "params": d["params"], "members": sorted(members)})
    items.sort(key=lambda x: x["members"])
    return canonical_json(
        {"schema": SCHEMAS["cliques"], "geometry": g.space.name(), "k": g.k, "cliques": items}
    ) + "\n"
