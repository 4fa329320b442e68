"""End-to-end acceptance checks, one summary line per area.

Each test prints a single [acceptance ...] PASS/FAIL line with the
measured quantities, then asserts.
"""
import math
import time

import numpy as np
import pytest

from plateau import chains as ch
from plateau.constructions import cone_area_bounds, cone_set
from plateau.fixtures import (circle_loop, classify_three_circle,
                              coaxial_circles, fig_three_candidates,
                              flat_disk, moebius_band, moebius_boundary,
                              raster_candidate, tentacled_disk, three_circles)
from plateau.identities import run_suite
from plateau.linking import (BoundarySystem, Loop, classify_link,
                             gauss_linking, linking_number, meridian_links,
                             stacked_kernel_trivial)
from plateau.measure import (clipped_ball_area, lsc_check, slice,
                             spherical_upper)
from plateau.minimizer import (_mincut_mod2, best_spanning_area,
                               cone_baseline, local_search, lower_bound_a0,
                               prune_redundant)
from plateau.norms import b1_flat_exact, inequality_suite
from plateau.spanning import (FaceComplex, GridDomain, boundary_incidence,
                              certify_spanning, deform, face_components,
                              loop_hits_complex)
from test_linking import hopf_pair, rotated, torus_link_pair
from test_norms import two_point_chain


def report(name, ok, detail):
    print("\n[acceptance %s] %s %s" % (name, "PASS" if ok else "FAIL", detail))


def split_pair():
    return circle_loop((0, 0, 0), 1.0), circle_loop((4, 0, 0), 1.0)


def test_operator_identity_suite():
    t0 = time.time()
    rows = run_suite("all", seed=1, trials=125)
    dt = time.time() - t0
    chains = sum(r["trials"] for r in rows)
    fails = sum(r["failures"] for r in rows)
    ok = chains >= 500 and fails == 0 and dt < 30.0
    report("identity-suite", ok,
           "chains=%d failures=%d runtime=%.1fs" % (chains, fails, dt))
    assert ok


def test_norm_inequality_suite():
    rows = inequality_suite(seed=0, count=200)
    by_name = {}
    for r in rows:
        by_name.setdefault(r["name"], []).append(r)
    bad = [r for r in rows if not r["ok"]]
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 4))
        p = rng.uniform(-2, 2, size=n)
        q = rng.uniform(-2, 2, size=n)
        if np.linalg.norm(p - q) < 1e-6:
            continue
        got = b1_flat_exact(two_point_chain(p, q)).value
        want = min(float(np.linalg.norm(p - q)), 2.0)
        worst = max(worst, abs(got - want))
    ok = not bad and len(by_name) == 5 and worst <= 1e-9
    report("norm-inequalities", ok,
           "families=%d violations=%d flat_norm_err=%.2e"
           % (len(by_name), len(bad), worst))
    assert ok


def test_linking_exactness():
    hopf = hopf_pair()
    torus = torus_link_pair(wind=2)
    split = split_pair()
    lk_h = linking_number(*hopf)
    lk_t = linking_number(*torus)
    lk_s = linking_number(*split)
    exact_ok = abs(lk_h) == 1 and abs(lk_t) == 2 and lk_s == 0
    gauss_err = max(abs(gauss_linking(a, b) - linking_number(a, b))
                    for a, b in (hopf, torus, split))
    rng = np.random.default_rng(12)
    stable = True
    for _ in range(20):
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        for (a, b), want in ((hopf, lk_h), (torus, lk_t), (split, lk_s)):
            stable &= linking_number(rotated(a, Q), rotated(b, Q)) == want
    ok = exact_ok and gauss_err <= 1e-4 and stable
    report("linking-exactness", ok,
           "hopf=%d torus=%d split=%d gauss_err=%.2e dir_independent=%s"
           % (lk_h, lk_t, lk_s, gauss_err, stable))
    assert ok


def test_spanning_certifier():
    h = 1.0 / 8
    dom32 = GridDomain((-2, -2, -2), (2, 2, 2), h)
    assert dom32.shape == (32, 32, 32)
    times = []
    cone_ok = True
    for M in (BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)]),
              coaxial_circles(1.0, 1.0, segments=96),
              three_circles(0.5, 0.5, 1.0, segments=96)):
        t0 = time.time()
        _, verdict, _ = cone_baseline(M, (0.0, 0.0, 0.125), dom32)
        times.append(time.time() - t0)
        cone_ok &= verdict.spans

    M1 = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), h)
    X = flat_disk(dom, M1, (0, 0, 0), 1.0)
    hole = [f for f in X.sorted_faces()
            if np.linalg.norm(np.asarray(dom.face_center(f))[:2]) < 0.3]
    t0 = time.time()
    v = certify_spanning(X.difference(hole), M1)
    times.append(time.time() - t0)
    witness_ok = (v.status == "NotSpanning" and v.witness is not None
                  and loop_hits_complex(v.witness, X.difference(hole)) is None
                  and classify_link(v.witness, M1).simple_link
                  and v.reverify())

    Mm = moebius_boundary()
    band = raster_candidate(dom, moebius_band(), Mm)
    t0 = time.time()
    v1 = certify_spanning(band, Mm, ell=1)
    v2 = certify_spanning(band, Mm, ell=2)
    times.append(time.time() - t0)
    moebius_ok = v1.spans and v2.status == "NotSpanning"

    M3 = three_circles(0.5, 0.5, 1.0, segments=96)
    rows = []
    for i in range(3):
        loop = meridian_links(M3, i, 0.2, 1, seed=i)[0]
        rows.append(classify_link(loop, M3).vector)
    kernel_ok = stacked_kernel_trivial(rows)

    tmax = max(times)
    ok = cone_ok and witness_ok and moebius_ok and kernel_ok and tmax < 120.0
    report("spanning-certifier", ok,
           "cones=%s witness=%s moebius=%s kernel_trivial=%s max_cert_time=%.1fs"
           % (cone_ok, witness_ok, moebius_ok, kernel_ok, tmax))
    assert ok


def test_deformation_invariance():
    h = 1.0 / 8
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), h)
    X = flat_disk(dom, M, (0, 0, 0), 1.0)
    rng = np.random.default_rng(7)
    violations = 0
    for t in range(100):
        kind = ("radial_sphere", "cube_squash", "collapse_free_face")[t % 3]
        if kind == "radial_sphere":
            ang = rng.uniform(0, 2 * math.pi)
            rad = rng.uniform(0, 0.3)
            cz = 0.25 * (1 if rng.random() < 0.5 else -1)
            phi = {"kind": kind,
                   "center": (rad * math.cos(ang), rad * math.sin(ang), cz),
                   "radius": float(rng.uniform(0.3, 0.36))}
        elif kind == "cube_squash":
            # keep the cube clear of the certifier tube around M
            lo = h * rng.integers(-3, 0, size=2)
            phi = {"kind": kind,
                   "cube_lo": (float(lo[0]), float(lo[1]), -0.25),
                   "size": 0.5}
        else:
            # keep the collapse ball away from the ragged trim rim
            ang = rng.uniform(0, 2 * math.pi)
            rad = rng.uniform(0, 0.2)
            phi = {"kind": kind,
                   "center": (rad * math.cos(ang), rad * math.sin(ang), 0.0),
                   "radius": float(rng.uniform(0.2, 0.3))}
        Y = deform(X, phi, M)
        if not certify_spanning(Y, M).spans:
            violations += 1
    ok = violations == 0
    report("deformation-invariance", ok,
           "trials=100 violations=%d" % violations)
    assert ok


def _planar_patch(dom, axis, level, center, radius):
    faces = []
    for f in dom.all_faces():
        if f[0] != axis:
            continue
        c = np.asarray(dom.face_center(f))
        if abs(c[axis] - level) > dom.h / 4:
            continue
        if np.linalg.norm(np.delete(c, axis) - np.asarray(center)) <= radius:
            faces.append(f)
    return FaceComplex(dom, faces)


def test_measure_suite():
    h = 1.0 / 32
    dom = GridDomain((-1.0, -1.0, -0.5), (1.0, 1.0, 0.5), h)
    rng = np.random.default_rng(3)
    patches = [_planar_patch(dom, 2, 0.0, (0, 0), 0.9),
               _planar_patch(dom, 0, 0.0, (0, 0), 0.45),
               _planar_patch(dom, 1, h * 4, (0, 0), 0.45)]
    slice_bad = 0
    for t in range(50):
        X = patches[t % 3]
        r = float(rng.uniform(0.2, 0.4))
        p = np.zeros(3)
        ax = X.sorted_faces()[0][0]
        p[(ax + 1) % 3] = rng.uniform(-0.1, 0.1)
        prof = slice(X, tuple(p), r, K=48)
        pts = []
        for f in X.sorted_faces():
            c = np.asarray(dom.face_center(f))
            if np.linalg.norm(c - p) < r + h:
                for du in (-0.25, 0.25):
                    for dv in (-0.25, 0.25):
                        q = c.copy()
                        o1, o2 = [a for a in range(3) if a != f[0]]
                        q[o1] += du * h
                        q[o2] += dv * h
                        pts.append(q)
        S2 = spherical_upper(np.asarray(pts), 2, delta=r) if pts else 0.0
        if prof.F[-1] > 1.02 * S2 + 1e-12:
            slice_bad += 1

    dens_worst = 0.0
    big = patches[0]
    for r in (8 * h, 10 * h, 16 * h):
        q = clipped_ball_area(big, (0.0, 0.0, 0.0), r) / (math.pi * r * r)
        dens_worst = max(dens_worst, abs(q - 1.0))

    cone_gap = 0.0
    cones_ok = True
    for segs in (12, 24, 48):
        loop = circle_loop((0, 0, 0), 0.8, segments=segs)
        cone = cone_set(loop, (0.1, 0.0, 0.5))
        out = cone_area_bounds(cone, r=1.2)
        cone_gap = max(cone_gap, out["tight_identity_gap"])
        cones_ok &= out["hausdorff_ok"] and out["spherical_ok"]

    ok = slice_bad == 0 and dens_worst <= 0.03 and cone_gap <= 1e-12 and cones_ok
    report("measure-suite", ok,
           "slice_violations=%d/50 density_err=%.3f cone_gap=%.2e bounds_ok=%s"
           % (slice_bad, dens_worst, cone_gap, cones_ok))
    assert ok


def _connected_through_boundary(X, M):
    comps = face_components(X)
    incs = [boundary_incidence(c, M) for c in comps]
    parent = list(range(len(comps)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    by_circle = {}
    for ci, inc in enumerate(incs):
        for circle in inc:
            by_circle.setdefault(circle, []).append(ci)
    for members in by_circle.values():
        for m in members[1:]:
            parent[find(m)] = find(members[0])
    clusters = {}
    for ci, inc in enumerate(incs):
        if inc:
            clusters.setdefault(find(ci), set()).update(inc)
    return any(s >= {0, 1} for s in clusters.values())


def test_minimizer_brackets_sweep_and_topology():
    t_start = time.time()
    h = 1.0 / 8
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), h)
    X0 = prune_redundant(flat_disk(dom, M, (0, 0, 0), 1.0), M)
    baseline, bverdict, c0 = cone_baseline(M, (0.0, 0.0, 0.125), dom)
    final = local_search(M, X0, moves=("face_delete",), budget=50, seed=0)
    a0 = lower_bound_a0(M, 0, 0.2)
    bracket_ok = (bverdict.spans and a0 <= final.complex.area()
                  and final.complex.area() <= baseline.area() + 1e-9
                  and baseline.area() <= c0 + 1e-9)
    deletions = len(final.moves)

    # hull of a single circle is the closed unit disk in its plane
    hull_excess = 0.0
    d = final.complex.domain
    for f in final.complex.sorted_faces():
        for v in d.face_corners(f):
            rad = math.hypot(v[0], v[1])
            hull_excess = max(hull_excess,
                              math.hypot(max(0.0, rad - 1.0), v[2]))
    hull_ok = hull_excess <= math.sqrt(3.0) * h + 1e-9

    hs = 1.0 / 24
    area_gaps = {}
    topo = {}
    for sep in (0.3, 0.5, 0.8, 1.2, 2.0):
        Ms = coaxial_circles(sep, 1.0, segments=96)
        zext = math.ceil((sep / 2 + 0.5) / hs) * hs
        doms = GridDomain((-1.5, -1.5, -zext), (1.5, 1.5, zext), hs)
        Xc, verdict = _mincut_mod2(Ms, doms)
        assert verdict.spans
        best, kind = best_spanning_area(1.0, sep)
        area_gaps[sep] = abs(Xc.area() - best) / best
        topo[sep] = _connected_through_boundary(Xc, Ms)
    sweep_ok = all(g <= 0.10 for g in area_gaps.values())
    switch_ok = topo[0.3] and not topo[2.0]
    runtime = time.time() - t_start

    ok = (bracket_ok and deletions == 0 and hull_ok and sweep_ok
          and switch_ok and runtime < 1200.0)
    report("minimizer", ok,
           "bracket=%s deletions=%d hull_excess=%.3f "
           "gaps={%s} switch=%s runtime=%.0fs"
           % (bracket_ok, deletions, hull_excess,
              ", ".join("%.2g: %.1f%%" % (s, 100 * g)
                        for s, g in sorted(area_gaps.items())),
              switch_ok, runtime))
    assert ok


def test_three_circle_trichotomy():
    h = 1.0 / 12
    results = {}
    for (s12, s23), expect in (((0.4, 0.4), "tube_all"),
                               ((0.4, 1.1), "tube_top_disk_bottom"),
                               ((1.1, 0.4), "tube_bottom_disk_top")):
        M = three_circles(s12, s23, 1.0)
        zlo = math.floor((-s23 - 0.5) / h) * h
        zhi = math.ceil((s12 + 0.5) / h) * h
        dom = GridDomain((-1.5, -1.5, zlo), (1.5, 1.5, zhi), h)
        pool = fig_three_candidates(dom, M, s12, s23, 1.0)
        winner = min(pool, key=lambda k: pool[k].area())
        results[(s12, s23)] = (classify_three_circle(pool[winner], M), expect)
    ok = all(got == want for got, want in results.values())
    report("three-circle-trichotomy", ok,
           " ".join("%s:%s" % (k, v[0]) for k, v in sorted(results.items())))
    assert ok


def _sample_points(X):
    d = X.domain
    pts = []
    for f in X.sorted_faces():
        pts.append(d.face_center(f))
        pts.extend(d.face_corners(f))
    return np.asarray(pts)


def _hausdorff(A, B):
    from scipy.spatial import cKDTree
    ta, tb = cKDTree(A), cKDTree(B)
    return max(tb.query(A)[0].max(), ta.query(B)[0].max())


def test_haircut_tentacle_removal():
    from plateau.constructions import haircut
    h = 1.0 / 8
    eps = 0.5
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 2.25), h)
    X = tentacled_disk(dom, M, (0, 0, 0), 1.0, tentacle_mass=eps)
    clean = flat_disk(dom, M, (0, 0, 0), 1.0)
    Y, recs = haircut(X, M, 2, 3, mass_frac=0.5)
    spans = certify_spanning(Y, M).spans
    drop = X.area() - Y.area()
    hd = _hausdorff(_sample_points(Y), _sample_points(clean))
    W = ((-0.5, -0.5, -0.25), (0.5, 0.5, 0.25))
    rep = lsc_check([X, Y], Y, [W])
    ok = (spans and drop >= 0.8 * eps and hd <= 2 * h + 1e-9
          and rep["violations"] == [])
    report("haircut", ok,
           "spans=%s drop=%.3f (need %.3f) hausdorff=%.3f (cap %.3f) "
           "lsc_violations=%d"
           % (spans, drop, 0.8 * eps, hd, 2 * h, len(rep["violations"])))
    assert ok
