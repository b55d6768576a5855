"""Command line entry point.

Exit codes: 0 success, 1 a verification found a failure, 2 usage or input
error.  Summaries go to stdout, progress to stderr, JSON reports to --out.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import __version__
from .apartments import apartment_of, is_apartment, random_frame
from .artifactio import (
    CACHE_ENV,
    ArtifactError,
    Cache,
    export_cliques,
    export_graph,
    export_report,
    load_map,
    load_report,
    save_geometry,
    save_map,
    content_key,
)
from .checks import RegimeError, check_corollary1, check_proposition0, check_theorem
from .cliques import classify_clique, enumerate_maximal_cliques
from .embeddings import MapError, derive_decomposition, verify_map
from .grassmann import StructuralError, build_graph, diameter, expected_diameter, verify_distance_lemma
from .polar import (
    GeometryError,
    build_polar_space,
    count_singular_formula,
    normalize_descriptor,
    rank_and_type,
    verify_axioms,
)
from .search import SearchStats, iter_assignments

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _progress(msg: str):
    print(msg, file=sys.stderr, flush=True)


def load_descriptor(text: str) -> dict:
    p = Path(text)
    if text.endswith(".json") or p.is_file():
        try:
            return normalize_descriptor(json.loads(p.read_text()))
        except FileNotFoundError:
            raise UsageError(f"descriptor file {text} not found") from None
        except json.JSONDecodeError as e:
            raise UsageError(f"descriptor file {text} is not JSON: {e}") from None
    return normalize_descriptor(text)


def _cache(args) -> Cache | None:
    root = args.cache_dir or os.environ.get(CACHE_ENV)
    return Cache(root) if root else None


def _graph(args, desc, k, distances=False):
    cache = _cache(args)
    if cache is None:
        g = build_graph(build_polar_space(desc), k)
        if distances:
            g.distances()
        return g
    return cache.graph(desc, k, with_distances=distances)


def _mode(args) -> tuple[str | None, int, int | None]:
    if args.exhaustive:
        return "exhaustive", args.seed, None
    if args.seed is not None or args.budget is not None:
        return "seeded", args.seed or 0, args.budget
    return None, 0, None


def _write_report(args, rep: dict):
    if args.out:
        Path(args.out).write_text(export_report(rep))


def _members(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"cannot parse vertex ids {text!r}") from None


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


# ---------------------------------------------------------------------------
# commands


def cmd_geometry(args) -> int:
    _need(args, "geometry")
    desc = load_descriptor(args.geometry)
    if args.action == "verify":
        ps = build_polar_space(desc, validate=False)
        ax = verify_axioms(ps)
        rep = {"check": "axioms", "geometry": ps.name(), **ax.to_dict()}
        _write_report(args, rep)
        print(f"{ps.name()}: P1 {ax.p1}; P2 {ax.p2}; P3 {ax.p3}")
        return EXIT_OK if ax.ok else EXIT_FAIL
    ps = build_polar_space(desc)
    n, t, c = rank_and_type(ps)
    counts = [len(ps.singular(k)) for k in range(n)]
    rep = {
        "check": "geometry",
        "geometry": ps.name(),
        "descriptor": desc,
        "points": ps.npoints,
        "rank": n,
        "type": t,
        "maximal_per_next_to_maximal": c,
        "singular_counts": counts,
    }
    if desc["kind"] == "classical" and "gram" not in desc["form"]:
        rep["formula_counts"] = [count_singular_formula(desc["form"]["type"], desc["field"], n, k) for k in range(n)]
    cache = _cache(args)
    if cache is not None:
        cache.put(content_key(desc, entity="geometry"), "geometry", save_geometry(ps), {"descriptor": desc})
    _write_report(args, rep)
    print(f"{ps.name()}: {ps.npoints} points, rank {n}, type {t} ({c}), singular counts {counts}")
    return EXIT_OK


def cmd_graph(args) -> int:
    _need(args, "geometry", "k")
    desc = load_descriptor(args.geometry)
    g = _graph(args, desc, args.k, distances=args.action != "build")
    name = g.space.name()
    if args.action == "build":
        rep = {"check": "graph", "geometry": name, "k": g.k, "vertices": len(g), "edges": len(g.edges())}
        _write_report(args, rep)
        print(f"Γ_{g.k}({name}): {len(g)} vertices, {rep['edges']} edges")
        return EXIT_OK
    if args.action == "diameter":
        exp = expected_diameter(g.n, g.k)
        try:
            d = diameter(g)
            ok = True
        except StructuralError:
            d, ok = int(g.distances().max()), False
        rep = {"check": "diameter", "geometry": name, "k": g.k, "diameter": d, "expected": exp, "ok": ok}
        _write_report(args, rep)
        print(f"Γ_{g.k}({name}): diameter {d} (expected {exp})")
        return EXIT_OK if ok else EXIT_FAIL
    lr = verify_distance_lemma(g)
    rep = {"check": "distance", "geometry": name, **lr.to_dict()}
    _write_report(args, rep)
    print(f"Γ_{g.k}({name}): {lr.formula_matches}/{lr.pairs} pairs match")
    return EXIT_OK if lr.ok else EXIT_FAIL


def cmd_cliques(args) -> int:
    _need(args, "geometry", "k")
    g = _graph(args, load_descriptor(args.geometry), args.k)
    if args.action == "classify":
        _need(args, "members")
        lab = classify_clique(g, _members(args.members))
        rep = {"check": "clique", "geometry": g.space.name(), "k": g.k, **lab.to_dict(g.space)}
        _write_report(args, rep)
        print(f"{lab.kind} {json.dumps(rep['params'], ensure_ascii=False, sort_keys=True)}")
        return EXIT_OK if lab.kind != "Unclassified" else EXIT_FAIL
    cl = enumerate_maximal_cliques(g)
    labeled = [(c, classify_clique(g, c)) for c in cl]
    tally: dict[str, int] = {}
    for _, lab in labeled:
        tally[lab.kind] = tally.get(lab.kind, 0) + 1
    if args.out:
        Path(args.out).write_text(export_cliques(g, labeled))
    print(f"Γ_{g.k}({g.space.name()}): {len(cl)} maximal cliques " + ", ".join(f"{k} {v}" for k, v in sorted(tally.items())))
    return EXIT_FAIL if "Unclassified" in tally else EXIT_OK


def cmd_apartment(args) -> int:
    _need(args, "geometry", "k")
    g = _graph(args, load_descriptor(args.geometry), args.k)
    ps = g.space
    if args.action == "make":
        F = random_frame(ps, random.Random(args.seed or 0))
        A = apartment_of(ps, F, g.k, g)
        rep = {"check": "apartment", "geometry": ps.name(), **A.to_dict()}
        _write_report(args, rep)
        print(f"apartment of {len(A.members)} vertices from frame {list(F.points)}")
        return EXIT_OK
    if args.members is None and args.input is None:
        raise UsageError("apartment detect needs --members or --input")
    if args.input:
        try:
            obj = json.loads(Path(args.input).read_text())
        except FileNotFoundError:
            raise UsageError(f"{args.input} not found") from None
        ids = obj["members"] if isinstance(obj, dict) else obj
    else:
        ids = _members(args.members)
    if any(not 0 <= i < len(g) for i in ids):
        raise UsageError("vertex id out of range")
    r = is_apartment(ps, g.k, [g.vertices[i] for i in ids])
    if r:
        rep = {"check": "apartment-detect", "apartment": True, "frame": r.to_dict()}
        print(f"apartment; frame points {list(r.points)}")
    else:
        rep = {"check": "apartment-detect", "apartment": False, "reason": r.reason, "detail": r.detail}
        print(f"not an apartment: {r.reason}")
    _write_report(args, rep)
    return EXIT_OK if r else EXIT_FAIL


def _read_map(args):
    _need(args, "map")
    try:
        data = Path(args.map).read_bytes()
    except FileNotFoundError:
        raise UsageError(f"map file {args.map} not found") from None
    return load_map(data)


def cmd_embed(args) -> int:
    if args.action == "verify":
        f = _read_map(args)
        v = verify_map(f, args.level)
        _write_report(args, {"check": "map", **v.to_dict()})
        print(f"{args.level}: {'pass' if v else 'fail'}" + (f" ({v.reason}, witness {v.witness})" if not v else ""))
        return EXIT_OK if v else EXIT_FAIL
    if args.action == "decompose":
        f = _read_map(args)
        v = verify_map(f, "isometric")
        if not v:
            print(f"map is not isometric: {v.reason}")
            return EXIT_FAIL
        d = derive_decomposition(f)
        if d:
            rep = {"check": "decomposition", "ok": True, **d.to_dict(f.target.space)}
            print(f"decomposed: base of dimension {d.base_dim}, point map verified")
        else:
            rep = {"check": "decomposition", "ok": False, **d.to_dict()}
            print(f"rejected at {d.stage}: {d.reason}")
        _write_report(args, rep)
        return EXIT_OK if d else EXIT_FAIL
    _need(args, "geometry", "k")
    host_desc = load_descriptor(args.geometry)
    k2 = args.k2 if args.k2 is not None else args.k
    if args.source:
        src_desc = load_descriptor(args.source)
    else:
        h = build_polar_space(host_desc)
        src_desc = {"kind": "thin", "rank": h.rank}
    pattern = _graph(args, src_desc, args.k, distances=args.level == "isometric")
    host = _graph(args, host_desc, k2, distances=args.level == "isometric")
    mode, seed, budget = _mode(args)
    st = SearchStats()
    maps = []
    for a in iter_assignments(pattern, host, args.level, mode, seed, budget, stats=st):
        if len(maps) < args.max_maps:
            maps.append(list(a))
        if args.limit and st.found >= args.limit:
            st.complete = False
            break
    rep = {
        "check": "search",
        "source": pattern.space.name(),
        "target": host.space.name(),
        "k": args.k,
        "k2": k2,
        "level": args.level,
        **st.to_dict(),
        "maps": maps,
    }
    _write_report(args, rep)
    if args.save_first and maps:
        from .embeddings import VertexMap

        Path(args.save_first).write_bytes(save_map(VertexMap(pattern, host, tuple(maps[0]))))
    tail = "" if st.complete else " (search incomplete)"
    print(f"{st.found} embeddings found{tail}")
    return EXIT_OK


def cmd_check(args) -> int:
    mode, seed, budget = _mode(args)
    common = dict(mode=mode, seed=seed, budget=budget, workers=args.workers, timing=args.timing, progress=_progress)
    if args.action == "corollary1":
        _need(args, "geometry", "k")
        rep = check_corollary1(load_descriptor(args.geometry), args.k, **common)
        msg = "all images are apartments" if rep["all_images_apartments"] else "some image is not an apartment"
        print(f"{rep['embeddings']} embeddings, {rep['distinct_images']} images: {msg}; verdict {rep['verdict']}")
    elif args.action == "theorem":
        _need(args, "source", "geometry", "k", "k2")
        rep = check_theorem(load_descriptor(args.source), load_descriptor(args.geometry), args.k, args.k2, limit=args.limit, **common)
        if rep["verdict"] == "skipped: size":
            print("skipped: size")
            _write_report(args, rep)
            return EXIT_OK
        print(
            f"regime {rep['regime']}: {rep['embeddings']} embeddings, {rep['decomposed']} decomposed, "
            f"{rep['rejected']} rejected; verdict {rep['verdict']}"
        )
    else:
        _need(args, "source", "geometry", "m")
        rep = check_proposition0(load_descriptor(args.source), load_descriptor(args.geometry), args.m, limit=args.limit, **common)
        print(f"{rep['embeddings']} embeddings, {rep['verified']} verified; verdict {rep['verdict']}")
    _write_report(args, rep)
    return EXIT_FAIL if rep["verdict"] == "fail" else EXIT_OK


def cmd_export(args) -> int:
    if args.report:
        try:
            rep = load_report(Path(args.report).read_bytes())
        except FileNotFoundError:
            raise UsageError(f"report {args.report} not found") from None
        text = export_report(rep, args.format)
    else:
        _need(args, "geometry", "k")
        text = export_graph(_graph(args, load_descriptor(args.geometry), args.k), args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polargrass", description="Polar Grassmann graphs and their embeddings.")
    p.add_argument("--version", action="version", version=__version__)
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--geometry", help="shorthand (sp:6:2, o+:6:2, o-:6:2, h:4:4, thin:4) or descriptor file")
    shared.add_argument("--k", type=int)
    shared.add_argument("--cache-dir", help=f"cache directory (default: ${CACHE_ENV}, else no cache)")
    shared.add_argument("--out", help="write the JSON report (or export) here")
    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--exhaustive", action="store_true")
    search.add_argument("--seed", type=int)
    search.add_argument("--budget", type=int, help="node budget for seeded search")
    search.add_argument("--limit", type=int, help="stop after this many embeddings")
    search.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    search.add_argument("--timing", action="store_true", help="include wall time in reports")

    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("geometry", parents=[shared])
    g.add_argument("action", choices=["build", "verify"])
    g.set_defaults(func=cmd_geometry)

    g = sub.add_parser("graph", parents=[shared])
    g.add_argument("action", choices=["build", "check-distance", "diameter"])
    g.set_defaults(func=cmd_graph)

    g = sub.add_parser("cliques", parents=[shared])
    g.add_argument("action", choices=["enumerate", "classify"])
    g.add_argument("--members", help="vertex ids, comma separated")
    g.set_defaults(func=cmd_cliques)

    g = sub.add_parser("apartment", parents=[shared])
    g.add_argument("action", choices=["make", "detect"])
    g.add_argument("--seed", type=int)
    g.add_argument("--members", help="vertex ids, comma separated")
    g.add_argument("--input", help="JSON file with a members list")
    g.set_defaults(func=cmd_apartment)

    g = sub.add_parser("embed", parents=[shared, search])
    g.add_argument("action", choices=["search", "verify", "decompose"])
    g.add_argument("--source", help="pattern geometry (default: thin space of the host rank)")
    g.add_argument("--k2", type=int, help="host k (default: --k)")
    g.add_argument("--level", choices=["embedding", "isometric"], default="isometric")
    g.add_argument("--map", help="map JSON file")
    g.add_argument("--max-maps", type=int, default=10, help="maps listed in the search report")
    g.add_argument("--save-first", help="write the first map found as map JSON")
    g.set_defaults(func=cmd_embed)

    g = sub.add_parser("check", parents=[shared, search])
    g.add_argument("action", choices=["corollary1", "theorem", "prop0"])
    g.add_argument("--source", help="source geometry for theorem / prop0")
    g.add_argument("--k2", type=int)
    g.add_argument("--m", type=int)
    g.set_defaults(func=cmd_check)

    g = sub.add_parser("export", parents=[shared])
    g.add_argument("--format", choices=["dot", "json"], default="dot")
    g.add_argument("--report", help="re-export a JSON report canonically")
    g.set_defaults(func=cmd_export)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, GeometryError, ArtifactError, MapError, RegimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StructuralError as e:
        print(f"structural error: {e}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
