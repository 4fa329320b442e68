"""Batch front end: scenario runner, identity suites, and exporters.

Scenarios are plain JSON; every run emits a JSON report, OBJ meshes,
and a CSV area trace with deterministic formatting, so two runs of the
same scenario differ only in timestamp fields.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .linking import BoundarySystem, Loop, linking_number
from .spanning import (FaceComplex, GridDomain, PreconditionError,
                       certify_spanning, trim_near_system)

EXIT_OK = 0
EXIT_CERT = 2
EXIT_SCHEMA = 3

TIMESTAMP_KEYS = ("wallclock_s", "started_at")


class SchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# deterministic serialization


def _round9(x):
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float("%.9g" % x)
    if isinstance(x, (np.floating,)):
        return _round9(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _round9(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round9(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_round9(v) for v in x.tolist()]
    return x


def dump_json(obj, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(_round9(obj), fh, sort_keys=True, indent=1)
        fh.write("\n")


def fmt9(x: float) -> str:
    return "%.9g" % float(x)


# ---------------------------------------------------------------------------
# geometry serialization


def complex_mesh(X: FaceComplex) -> Tuple[List[tuple], List[tuple]]:
    """Deduplicated sorted vertices and quads of a face complex."""
    verts: Dict[tuple, int] = {}
    quads = []
    for f in X.sorted_faces():
        corners = [tuple(fmt9(c) for c in p) for p in X.domain.face_corners(f)]
        idx = []
        for p in corners:
            if p not in verts:
                verts[p] = 0
            idx.append(p)
        quads.append(tuple(idx))
    keys = sorted(verts)
    lut = {p: i for i, p in enumerate(keys)}
    return [tuple(float(c) for c in p) for p in keys], \
           [tuple(lut[p] for p in q) for q in quads]


def write_obj_complex(X: FaceComplex, path: str) -> None:
    verts, quads = complex_mesh(X)
    with open(path, "w") as fh:
        fh.write("# face complex, %d faces\n" % len(quads))
        for v in verts:
            fh.write("v %s %s %s\n" % tuple(fmt9(c) for c in v))
        for q in quads:
            fh.write("f %d %d %d %d\n" % tuple(i + 1 for i in q))


def write_obj_loops(M: BoundarySystem, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("# boundary system, %d loops\n" % len(M.components))
        base = 1
        for li, comp in enumerate(M.components):
            fh.write("o loop_%d\n" % li)
            pts = [tuple(float(c) for c in p) for p in comp.points]
            for p in pts:
                fh.write("v %s %s %s\n" % tuple(fmt9(c) for c in p))
            cyc = list(range(base, base + len(pts))) + [base]
            fh.write("l %s\n" % " ".join(str(i) for i in cyc))
            base += len(pts)


def read_obj(path: str):
    verts, faces, lines = [], [], []
    with open(path) as fh:
        for ln in fh:
            parts = ln.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append(tuple(float(x) for x in parts[1:4]))
            elif parts[0] == "f":
                faces.append(tuple(int(p.split("/")[0]) - 1 for p in parts[1:]))
            elif parts[0] == "l":
                lines.append(tuple(int(p) - 1 for p in parts[1:]))
    return verts, faces, lines


def export_file(src: str, fmt: str, out: str) -> None:
    verts, faces, lines = read_obj(src)
    order = sorted(range(len(verts)), key=lambda i: verts[i])
    lut = {old: new for new, old in enumerate(order)}
    verts_s = [verts[i] for i in order]
    faces_s = sorted(tuple(lut[i] for i in f) for f in faces)
    lines_s = sorted(tuple(lut[i] for i in l) for l in lines)
    with open(out, "w") as fh:
        if fmt == "obj":
            for v in verts_s:
                fh.write("v %s %s %s\n" % tuple(fmt9(c) for c in v))
            for f in faces_s:
                fh.write("f %s\n" % " ".join(str(i + 1) for i in f))
            for l in lines_s:
                fh.write("l %s\n" % " ".join(str(i + 1) for i in l))
        elif fmt == "off":
            fh.write("OFF\n%d %d 0\n" % (len(verts_s), len(faces_s)))
            for v in verts_s:
                fh.write("%s %s %s\n" % tuple(fmt9(c) for c in v))
            for f in faces_s:
                fh.write("%d %s\n" % (len(f), " ".join(str(i) for i in f)))
        elif fmt == "csv":
            fh.write("x,y,z\n")
            for v in verts_s:
                fh.write("%s,%s,%s\n" % tuple(fmt9(c) for c in v))
        elif fmt == "txt":
            fh.write("vertices %d faces %d lines %d\n"
                     % (len(verts_s), len(faces_s), len(lines_s)))
            for v in verts_s:
                fh.write("v %s %s %s\n" % tuple(fmt9(c) for c in v))
            for f in faces_s:
                fh.write("f %s\n" % " ".join(str(i) for i in f))
            for l in lines_s:
                fh.write("l %s\n" % " ".join(str(i) for i in l))
        else:
            raise SchemaError("unknown format %r" % (fmt,))


# ---------------------------------------------------------------------------
# scenario schema


def build_boundary(spec: dict) -> BoundarySystem:
    from . import fixtures as fx
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SchemaError("boundary spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "circle":
        return BoundarySystem([fx.circle_loop(
            spec.get("center", (0, 0, 0)), spec.get("radius", 1.0),
            spec.get("normal_axis", 2), spec.get("segments", 64))])
    if kind == "circles":
        loops = [fx.circle_loop(it.get("center", (0, 0, 0)),
                                it.get("radius", 1.0),
                                it.get("normal_axis", 2),
                                it.get("segments", 64),
                                it.get("phase", 0.0))
                 for it in spec["items"]]
        return BoundarySystem(loops)
    if kind == "coaxial":
        return fx.coaxial_circles(spec["separation"], spec.get("radius", 1.0),
                                  spec.get("segments", 64))
    if kind == "three_circles":
        return fx.three_circles(spec["s12"], spec["s23"],
                                spec.get("radius", 1.0),
                                spec.get("segments", 64))
    if kind == "moebius":
        return fx.moebius_boundary(spec.get("radius", 1.0),
                                   spec.get("width", 0.35),
                                   spec.get("segments", 128))
    if kind == "polygons":
        return BoundarySystem([Loop([tuple(p) for p in pts])
                               for pts in spec["loops"]])
    raise SchemaError("unknown boundary kind %r" % (kind,))


def build_grid(spec: dict) -> GridDomain:
    try:
        return GridDomain(tuple(spec["lo"]), tuple(spec["hi"]), float(spec["h"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("bad grid spec: %s" % exc)


KNOWN_OPS = ("flat_disk", "tentacled_disk", "cone_baseline", "mincut",
             "moebius_surface", "raster_triangles", "prune", "certify",
             "local_search", "haircut", "hull_clamp", "linking_table",
             "sampled_check", "diagnostics")


class Runner:
    def __init__(self, scenario: dict, outdir: str):
        self.sc = scenario
        self.outdir = outdir
        self.M = build_boundary(scenario["boundary"])
        self.grid = build_grid(scenario["grid"]) if "grid" in scenario else None
        self.seed = scenario.get("seed")
        self.ell = int(scenario.get("ell", 1))
        self.current: Optional[FaceComplex] = None
        self.states = []
        self.stages = []
        self.failed = False

    def _need_grid(self) -> GridDomain:
        if self.grid is None:
            raise SchemaError("stage requires a grid")
        return self.grid

    def _record(self, op: str, info: dict, mesh: bool) -> None:
        i = len(self.stages)
        entry = {"stage": i, "op": op}
        entry.update(info)
        if mesh and self.current is not None:
            name = "stage_%02d_%s.obj" % (i, op)
            write_obj_complex(self.current, os.path.join(self.outdir, name))
            entry["mesh"] = name
            entry["area"] = self.current.area()
        self.stages.append(entry)

    def run_stage(self, stage: dict) -> None:
        from . import fixtures as fx
        if "op" not in stage or stage["op"] not in KNOWN_OPS:
            raise SchemaError("unknown pipeline op %r" % (stage.get("op"),))
        op = stage["op"]
        d = None
        if op == "flat_disk":
            d = self._need_grid()
            self.current = fx.flat_disk(d, self.M, stage.get("center", (0, 0, 0)),
                                        stage["radius"],
                                        stage.get("normal_axis", 2))
            self._record(op, {}, mesh=True)
        elif op == "tentacled_disk":
            d = self._need_grid()
            self.current = fx.tentacled_disk(d, self.M,
                                             stage.get("center", (0, 0, 0)),
                                             stage["radius"], stage["mass"])
            self._record(op, {}, mesh=True)
        elif op == "cone_baseline":
            from .minimizer import cone_baseline
            d = self._need_grid()
            X, verdict, c0 = cone_baseline(self.M, stage["apex"], d, ell=self.ell)
            self.current = X
            self._record(op, {"c0": c0, "verdict": verdict.status}, mesh=True)
        elif op == "mincut":
            from .minimizer import _mincut_mod2
            d = self._need_grid()
            X, verdict = _mincut_mod2(self.M, d)
            self.current = X
            self._record(op, {"verdict": verdict.status}, mesh=True)
        elif op == "moebius_surface":
            d = self._need_grid()
            tris = fx.moebius_band(stage.get("radius", 1.0),
                                   stage.get("width", 0.35))
            self.current = fx.raster_candidate(d, tris, self.M)
            self._record(op, {}, mesh=True)
        elif op == "raster_triangles":
            d = self._need_grid()
            tris = [tuple(tuple(p) for p in t) for t in stage["triangles"]]
            self.current = fx.raster_candidate(d, tris, self.M)
            self._record(op, {}, mesh=True)
        elif op == "prune":
            from .minimizer import prune_redundant
            self.current = prune_redundant(self._current(), self.M)
            self._record(op, {}, mesh=True)
        elif op == "certify":
            expect = stage.get("expect", "Spans")
            ell = int(stage.get("ell", self.ell))
            verdict = certify_spanning(self._current(), self.M, ell=ell)
            info = {"verdict": verdict.status, "expect": expect, "ell": ell}
            if verdict.certificate is not None:
                info["linking_vectors"] = verdict.certificate.get("linking_vectors")
            if verdict.status != expect:
                self.failed = True
                info["failed"] = True
            self._record(op, info, mesh=False)
        elif op == "local_search":
            from .minimizer import local_search
            if self.seed is None:
                raise SchemaError("local_search requires a scenario seed")
            st = local_search(self.M, self._current(),
                              moves=tuple(stage.get("moves", ("face_delete",))),
                              budget=int(stage.get("budget", 50)),
                              seed=int(self.seed), ell=self.ell)
            self.current = st.complex
            self.states.append(st)
            self._record(op, {"accepted": len(st.moves),
                              "rejected": st.rejected,
                              "moves": st.moves}, mesh=True)
        elif op == "haircut":
            from .constructions import haircut
            Y, recs = haircut(self._current(), self.M, int(stage["j0"]),
                              int(stage["j1"]),
                              mass_frac=float(stage.get("mass_frac", 0.3)))
            self.current = Y
            self._record(op, {"records": [r.to_dict() for r in recs]}, mesh=True)
        elif op == "hull_clamp":
            from .constructions import hull_clamp
            Y, rec = hull_clamp(self._current(), self.M)
            self.current = Y
            self._record(op, {"record": rec.to_dict()}, mesh=True)
        elif op == "linking_table":
            comps = self.M.components
            table = []
            for i in range(len(comps)):
                for j in range(i + 1, len(comps)):
                    table.append({"i": i, "j": j,
                                  "lk": linking_number(comps[i], comps[j])})
            self._record(op, {"table": table}, mesh=False)
        elif op == "sampled_check":
            from .spanning import sampled_spanning
            if self.seed is None:
                raise SchemaError("sampled_check requires a scenario seed")
            res = sampled_spanning(self._current(), self.M,
                                   k=int(stage.get("k", 100)),
                                   seed=int(self.seed))
            self._record(op, {"status": res.status, "tried": res.tried},
                         mesh=False)
        elif op == "diagnostics":
            from .minimizer import sequence_diagnostics, SearchState
            if not self.states:
                v = certify_spanning(self._current(), self.M, ell=self.ell)
                self.states = [SearchState(self.current, v, self.current.area())]
            d = self._need_grid()
            diag = sequence_diagnostics(self.states, self.M, (d.lo, d.hi),
                                        seed=int(self.seed or 0))
            self._record(op, {"beta": diag["beta"],
                              "warnings": diag["warnings"],
                              "lsc_violations": diag["lsc"]["violations"],
                              "areas": diag["areas"]}, mesh=False)

    def _current(self) -> FaceComplex:
        if self.current is None:
            raise SchemaError("stage needs a current complex; add a builder op")
        return self.current

    def run(self) -> dict:
        t0 = time.time()
        write_obj_loops(self.M, os.path.join(self.outdir, "boundary.obj"))
        for stage in self.sc["pipeline"]:
            self.run_stage(stage)
        with open(os.path.join(self.outdir, "trace.csv"), "w") as fh:
            fh.write("stage,op,area\n")
            for e in self.stages:
                fh.write("%d,%s,%s\n" % (e["stage"], e["op"],
                                         fmt9(e["area"]) if "area" in e else ""))
        report = {
            "scenario": self.sc,
            "version": __version__,
            "stages": self.stages,
            "certification_failed": self.failed,
            "wallclock_s": time.time() - t0,
        }
        dump_json(report, os.path.join(self.outdir, "report.json"))
        return report


def validate_scenario(sc) -> dict:
    if not isinstance(sc, dict):
        raise SchemaError("scenario must be a JSON object")
    for key in ("name", "boundary", "pipeline"):
        if key not in sc:
            raise SchemaError("scenario missing %r" % (key,))
    if not isinstance(sc["pipeline"], list):
        raise SchemaError("pipeline must be a list")
    allowed = {"name", "boundary", "grid", "pipeline", "seed", "ell", "out",
               "kn"}
    extra = set(sc) - allowed
    if extra:
        raise SchemaError("unknown scenario keys: %s" % sorted(extra))
    return sc


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    try:
        with open(args.scenario) as fh:
            sc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": {"code": "schema", "message": str(exc)}}))
        return EXIT_SCHEMA
    try:
        sc = validate_scenario(sc)
        if args.grid is not None:
            g = sc.setdefault("grid", {})
            g["h"] = args.grid
        if args.seed is not None:
            sc["seed"] = args.seed
        if args.ell is not None:
            sc["ell"] = args.ell
        if args.kn is not None:
            sc["kn"] = args.kn
        outdir = args.out or sc.get("out") or (sc["name"] + "_out")
        os.makedirs(outdir, exist_ok=True)
        runner = Runner(sc, outdir)
        report = runner.run()
    except SchemaError as exc:
        print(json.dumps({"error": {"code": "schema", "message": str(exc)}}))
        return EXIT_SCHEMA
    except (PreconditionError, RuntimeError, ValueError) as exc:
        print(json.dumps({"error": {"code": "certification",
                                    "message": str(exc)}}))
        return EXIT_CERT
    print(json.dumps({"report": os.path.join(outdir, "report.json"),
                      "stages": len(report["stages"]),
                      "failed": report["certification_failed"]}))
    return EXIT_CERT if report["certification_failed"] else EXIT_OK


def cmd_identities(args) -> int:
    from .identities import run_suite
    try:
        rows = run_suite(args.suite, seed=args.seed, trials=args.trials)
    except ValueError as exc:
        print(json.dumps({"error": {"code": "schema", "message": str(exc)}}))
        return EXIT_SCHEMA
    bad = 0
    for r in rows:
        status = "pass" if r["failures"] == 0 else "FAIL"
        extra = (" max_rel_err=%.3g" % r["max_rel_err"]
                 if "max_rel_err" in r else "")
        print("%-36s %4d trials %3d failures %s%s"
              % (r["name"], r["trials"], r["failures"], status, extra))
        bad += r["failures"]
    return EXIT_OK if bad == 0 else 1


def cmd_export(args) -> int:
    out = args.out or (os.path.splitext(args.source)[0] + "." + args.format)
    try:
        export_file(args.source, args.format, out)
    except SchemaError as exc:
        print(json.dumps({"error": {"code": "schema", "message": str(exc)}}))
        return EXIT_SCHEMA
    except OSError as exc:
        print(json.dumps({"error": {"code": "io", "message": str(exc)}}))
        return EXIT_SCHEMA
    print(out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="plateau")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="execute a JSON scenario")
    p_run.add_argument("scenario")
    p_run.add_argument("--grid", type=float, default=None,
                       help="override grid spacing h")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--kn", type=float, default=None,
                       help="override the K_n normalization constant")
    p_run.add_argument("--ell", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_id = sub.add_parser("identities", help="run operator identity suites")
    p_id.add_argument("--suite", default="all")
    p_id.add_argument("--seed", type=int, default=0)
    p_id.add_argument("--trials", type=int, default=125)
    p_id.set_defaults(func=cmd_identities)

    p_ex = sub.add_parser("export", help="convert an OBJ artifact")
    p_ex.add_argument("source")
    p_ex.add_argument("--format", required=True,
                      choices=("obj", "off", "csv", "txt"))
    p_ex.add_argument("--out", default=None)
    p_ex.set_defaults(func=cmd_export)

    args = ap.parse_args(argv)
    threads = os.environ.get("PLATEAU_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
