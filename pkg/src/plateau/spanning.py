"""Cubical surface candidates and exact spanning certification.

A FaceComplex is a set of closed axis-aligned grid 2-faces.  The
certifier decides whether every simple link of the boundary system M
(kept a tube radius away from M) must intersect X.  It walks the
complement through cube centers: the dual graph has one node per grid
cube clear of the M-tube and one edge per shared non-X face.  Every
cycle of that graph is a loop in the open complement of X; the lattice
of their linking vectors (computed by an exact-in-class Gauss cochain
and rounded to integers) decides spanning: NotSpanning iff the lattice
contains some +-ell*e_i.  Witness loops are realized from fundamental
cycles and re-validated with the exact crossing-count linking numbers
and exact segment-square disjointness tests.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .linking import (BoundarySystem, Loop, classify_link, linking_cochain,
                      _seg2d_intersect)

FaceId = Tuple[int, int, int, int]  # (axis, plane, j, k) with (j,k) the cross cells


class GridDomain:
    """Axis box subdivided into cubes of side h."""

    def __init__(self, lo: Sequence[float], hi: Sequence[float], h: float):
        self.lo = tuple(float(x) for x in lo)
        self.hi = tuple(float(x) for x in hi)
        self.h = float(h)
        self.shape = tuple(int(round((b - a) / h)) for a, b in zip(self.lo, self.hi))
        for a, b, m in zip(self.lo, self.hi, self.shape):
            if abs((b - a) - m * h) > 1e-9 * max(1.0, abs(b - a)):
                raise ValueError("box side not an integer multiple of h")
        if any(m < 1 for m in self.shape):
            raise ValueError("degenerate domain")

    def __eq__(self, other):
        return (isinstance(other, GridDomain) and self.lo == other.lo
                and self.hi == other.hi and self.h == other.h)

    def __hash__(self):
        return hash((self.lo, self.hi, self.h))

    # -- faces --

    def face_valid(self, f: FaceId) -> bool:
        a, i, j, k = f
        o1, o2 = _others(a)
        return (0 <= a < 3 and 0 <= i <= self.shape[a]
                and 0 <= j < self.shape[o1] and 0 <= k < self.shape[o2])

    def face_center(self, f: FaceId) -> Tuple[float, float, float]:
        a, i, j, k = f
        o1, o2 = _others(a)
        c = [0.0, 0.0, 0.0]
        c[a] = self.lo[a] + i * self.h
        c[o1] = self.lo[o1] + (j + 0.5) * self.h
        c[o2] = self.lo[o2] + (k + 0.5) * self.h
        return tuple(c)

    def face_corners(self, f: FaceId):
        a, i, j, k = f
        o1, o2 = _others(a)
        out = []
        for dj in (0, 1):
            for dk in (0, 1):
                c = [0.0, 0.0, 0.0]
                c[a] = self.lo[a] + i * self.h
                c[o1] = self.lo[o1] + (j + dj) * self.h
                c[o2] = self.lo[o2] + (k + dk) * self.h
                out.append(tuple(c))
        return [out[0], out[1], out[3], out[2]]

    def all_faces(self):
        for a in range(3):
            o1, o2 = _others(a)
            for i in range(self.shape[a] + 1):
                for j in range(self.shape[o1]):
                    for k in range(self.shape[o2]):
                        yield (a, i, j, k)

    def cube_center(self, c) -> Tuple[float, float, float]:
        return tuple(self.lo[a] + (c[a] + 0.5) * self.h for a in range(3))

    def cube_index(self, c) -> int:
        nx, ny, nz = self.shape
        return (c[0] * ny + c[1]) * nz + c[2]

    def contains_point(self, p, margin: float = 0.0) -> bool:
        return all(a + margin <= x <= b - margin for x, a, b in zip(p, self.lo, self.hi))


def _others(a: int):
    return ((1, 2), (0, 2), (0, 1))[a]


class FaceComplex:
    """Set of closed grid 2-faces; area is exactly |faces| * h^2."""

    def __init__(self, domain: GridDomain, faces):
        self.domain = domain
        fs = frozenset(tuple(f) for f in faces)
        for f in fs:
            if not domain.face_valid(f):
                raise ValueError("face %r outside domain" % (f,))
        self.faces = fs

    @property
    def h(self) -> float:
        return self.domain.h

    def area(self) -> float:
        return len(self.faces) * self.h * self.h

    def face_centers(self) -> np.ndarray:
        if not self.faces:
            return np.zeros((0, 3))
        return np.array([self.domain.face_center(f) for f in sorted(self.faces)])

    def union(self, other: "FaceComplex") -> "FaceComplex":
        assert self.domain == other.domain
        return FaceComplex(self.domain, self.faces | other.faces)

    def difference(self, faces) -> "FaceComplex":
        return FaceComplex(self.domain, self.faces - set(tuple(f) for f in faces))

    def __len__(self):
        return len(self.faces)

    def __eq__(self, other):
        return isinstance(other, FaceComplex) and self.domain == other.domain and self.faces == other.faces

    def sorted_faces(self) -> List[FaceId]:
        return sorted(self.faces)

    def bounding_box(self):
        if not self.faces:
            return None
        cs = self.face_centers()
        return cs.min(axis=0), cs.max(axis=0)


# ---------------------------------------------------------------------------
# geometric helpers


def point_segment_distances(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Min distance from each point to the union of segments."""
    if len(points) == 0:
        return np.zeros(0)
    best = np.full(len(points), np.inf)
    for a, b in zip(seg_a, seg_b):
        d = b - a
        L2 = float(d @ d)
        if L2 == 0.0:
            t = np.zeros(len(points))
        else:
            t = np.clip(((points - a) @ d) / L2, 0.0, 1.0)
        proj = a + t[:, None] * d
        best = np.minimum(best, np.linalg.norm(points - proj, axis=1))
    return best


def system_segments(M: BoundarySystem):
    sa, sb = [], []
    for comp in M.components:
        pts = np.array(comp.points)
        sa.append(pts)
        sb.append(np.roll(pts, -1, axis=0))
    return np.vstack(sa), np.vstack(sb)


def min_distance_to_system(points: np.ndarray, M: BoundarySystem) -> np.ndarray:
    sa, sb = system_segments(M)
    return point_segment_distances(points, sa, sb)


def face_sample_points(domain: GridDomain, f: FaceId) -> List[Tuple[float, float, float]]:
    return domain.face_corners(f) + [domain.face_center(f)]


def _fr(p):
    return tuple(Fraction(x) for x in p)


def segment_face_intersect(a, b, domain: GridDomain, f: FaceId) -> bool:
    """Exact test: does closed segment [a,b] meet the closed face?"""
    ax, i, j, k = f
    o1, o2 = _others(ax)
    plane = Fraction(domain.lo[ax]) + i * Fraction(domain.h)
    lo1 = Fraction(domain.lo[o1]) + j * Fraction(domain.h)
    hi1 = lo1 + Fraction(domain.h)
    lo2 = Fraction(domain.lo[o2]) + k * Fraction(domain.h)
    hi2 = lo2 + Fraction(domain.h)
    A, B = _fr(a), _fr(b)
    da, db = A[ax] - plane, B[ax] - plane
    if (da > 0 and db > 0) or (da < 0 and db < 0):
        return False
    if da == 0 and db == 0:
        # in-plane: 2D segment vs closed square
        p1 = (A[o1], A[o2])
        p2 = (B[o1], B[o2])
        if (lo1 <= p1[0] <= hi1 and lo2 <= p1[1] <= hi2) or (lo1 <= p2[0] <= hi1 and lo2 <= p2[1] <= hi2):
            return True
        corners = [(lo1, lo2), (hi1, lo2), (hi1, hi2), (lo1, hi2)]
        for t in range(4):
            if _seg2d_intersect(p1, p2, corners[t], corners[(t + 1) % 4]):
                return True
        return False
    t = da / (da - db)
    x1 = A[o1] + t * (B[o1] - A[o1])
    x2 = A[o2] + t * (B[o2] - A[o2])
    return lo1 <= x1 <= hi1 and lo2 <= x2 <= hi2


def loop_hits_complex(loop: Loop, X: FaceComplex) -> Optional[FaceId]:
    """First face met by the loop, or None (exact tests with float
    bounding-box prefilter)."""
    if not X.faces:
        return None
    d = X.domain
    h = d.h
    faces = X.sorted_faces()
    centers = np.array([d.face_center(f) for f in faces])
    for a, b in loop.segments():
        pa, pb = np.array(a), np.array(b)
        lo = np.minimum(pa, pb) - h
        hi = np.maximum(pa, pb) + h
        near = np.all((centers >= lo) & (centers <= hi), axis=1)
        for idx in np.nonzero(near)[0]:
            if segment_face_intersect(a, b, d, faces[idx]):
                return faces[idx]
    return None


def point_triangle_distances(points: np.ndarray, tri) -> np.ndarray:
    """Distance from each point to one triangle (closest-point form)."""
    a, b, c = (np.asarray(v, dtype=float) for v in tri)
    ab, ac = b - a, c - a
    ap = points - a
    d1 = ap @ ab
    d2 = ap @ ac
    bp = points - b
    d3 = bp @ ab
    d4 = bp @ ac
    cp = points - c
    d5 = cp @ ab
    d6 = cp @ ac
    closest = np.empty_like(points)
    done = np.zeros(len(points), dtype=bool)

    def put(mask, val):
        m = mask & ~done
        closest[m] = val[m] if val.ndim == 2 else val
        done[m] = True

    put((d1 <= 0) & (d2 <= 0), np.broadcast_to(a, points.shape).copy())
    put((d3 >= 0) & (d4 <= d3), np.broadcast_to(b, points.shape).copy())
    put((d6 >= 0) & (d5 <= d6), np.broadcast_to(c, points.shape).copy())
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
    put((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + np.clip(v_ab, 0, 1)[:, None] * ab)
    vb = d5 * d2 - d1 * d6
    with np.errstate(divide="ignore", invalid="ignore"):
        w_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
    put((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + np.clip(w_ac, 0, 1)[:, None] * ac)
    va = d3 * d6 - d5 * d4
    den = (d4 - d3) + (d5 - d6)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bc = np.where(den != 0, (d4 - d3) / den, 0.0)
    put((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + np.clip(w_bc, 0, 1)[:, None] * (c - b))
    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(denom != 0, vb / denom, 0.0)
        w = np.where(denom != 0, vc / denom, 0.0)
    put(~done, a + v[:, None] * ab + w[:, None] * ac)
    return np.linalg.norm(points - closest, axis=1)


def min_distance_to_triangles(points: np.ndarray, triangles, cutoff: Optional[float] = None) -> np.ndarray:
    """Min distance per point; with a cutoff, values above it are only
    guaranteed to exceed it (bounding-box prefilter)."""
    best = np.full(len(points), np.inf)
    for tri in triangles:
        t = np.asarray(tri, dtype=float)
        if cutoff is not None:
            lo = t.min(axis=0) - cutoff
            hi = t.max(axis=0) + cutoff
            near = np.all((points >= lo) & (points <= hi), axis=1)
            idx = np.nonzero(near)[0]
            if len(idx) == 0:
                continue
            best[idx] = np.minimum(best[idx], point_triangle_distances(points[idx], t))
        else:
            best = np.minimum(best, point_triangle_distances(points, t))
    return best


def rasterize_triangles(domain: GridDomain, triangles, tol: Optional[float] = None) -> FaceComplex:
    """Grid faces whose centers lie within tol (default h/2) of the
    triangle set."""
    if tol is None:
        tol = domain.h / 2.0
    faces = list(domain.all_faces())
    centers = np.array([domain.face_center(f) for f in faces])
    d = min_distance_to_triangles(centers, triangles, cutoff=tol)
    return FaceComplex(domain, [f for f, di in zip(faces, d) if di <= tol])


def trim_near_system(X: FaceComplex, M: BoundarySystem, margin: Optional[float] = None) -> FaceComplex:
    """Drop faces whose sampled distance to M is below margin (default
    2h, the certifier precondition)."""
    if margin is None:
        margin = 2.0 * X.h
    keep = []
    for f in X.sorted_faces():
        samp = np.array(face_sample_points(X.domain, f))
        if float(np.min(min_distance_to_system(samp, M))) >= margin:
            keep.append(f)
    return FaceComplex(X.domain, keep)


# ---------------------------------------------------------------------------
# integer lattice utilities


def hnf_rows(mat: List[List[int]]):
    """Row-style Hermite normal form; returns (H, U) with U @ mat = H,
    U unimodular, H in row echelon with positive pivots."""
    m = [list(map(int, row)) for row in mat]
    r = len(m)
    c = len(m[0]) if r else 0
    U = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    row = 0
    for col in range(c):
        piv = None
        for i in range(row, r):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        U[row], U[piv] = U[piv], U[row]
        while True:
            nz = [i for i in range(row + 1, r) if m[i][col] != 0]
            if not nz:
                break
            for i in nz:
                q = m[i][col] // m[row][col]
                m[i] = [a - q * b for a, b in zip(m[i], m[row])]
                U[i] = [a - q * b for a, b in zip(U[i], U[row])]
                if m[i][col] != 0 and abs(m[i][col]) < abs(m[row][col]):
                    m[row], m[i] = m[i], m[row]
                    U[row], U[i] = U[i], U[row]
        if m[row][col] < 0:
            m[row] = [-a for a in m[row]]
            U[row] = [-a for a in U[row]]
        row += 1
        if row == r:
            break
    return m, U


def lattice_solve(gens: List[List[int]], target: List[int]) -> Optional[List[int]]:
    """Integer x with x @ gens = target, or None."""
    if not gens:
        return [0] * 0 if all(t == 0 for t in target) else None
    H, U = hnf_rows(gens)
    c = len(target)
    t = list(map(int, target))
    x = [0] * len(gens)
    hrow = 0
    for col in range(c):
        pivot_rows = [i for i in range(len(H)) if any(H[i]) and next(j for j in range(c) if H[i][j] != 0) == col]
        if not pivot_rows:
            if t[col] != 0:
                return None
            continue
        i = pivot_rows[0]
        if t[col] % H[i][col] != 0:
            return None
        q = t[col] // H[i][col]
        t = [a - q * b for a, b in zip(t, H[i])]
        x[i] = q
    if any(t):
        return None
    coeffs = [sum(x[i] * U[i][j] for i in range(len(gens))) for j in range(len(gens))]
    return coeffs


def in_lattice(gens: List[List[int]], target: List[int]) -> bool:
    return lattice_solve(gens, target) is not None


# ---------------------------------------------------------------------------
# dual complement graph


class DualGraph:
    """Cube-adjacency graph of the complement of X clear of the M-tube."""

    def __init__(self, domain, allowed, edges_u, edges_v, edge_face):
        self.domain = domain
        self.allowed = allowed          # bool per cube flat index
        self.edges_u = edges_u          # int arrays, canonical direction u -> v
        self.edges_v = edges_v
        self.edge_face = edge_face      # FaceId per edge
        self.ncubes = len(allowed)

    def cube_centers(self, idxs: np.ndarray) -> np.ndarray:
        nx, ny, nz = self.domain.shape
        i = idxs // (ny * nz)
        j = (idxs // nz) % ny
        k = idxs % nz
        h = self.domain.h
        lo = np.array(self.domain.lo)
        return lo + (np.stack([i, j, k], axis=-1) + 0.5) * h


def build_dual_graph(X: FaceComplex, M: Optional[BoundarySystem], rho: Optional[float]) -> DualGraph:
    d = X.domain
    nx, ny, nz = d.shape
    h = d.h
    ncubes = nx * ny * nz
    allowed = np.ones(ncubes, dtype=bool)
    if M is not None and rho is not None:
        idxs = np.arange(ncubes)
        nxg, nyg, nzg = d.shape
        ii = idxs // (nyg * nzg)
        jj = (idxs // nzg) % nyg
        kk = idxs % nzg
        centers = np.array(d.lo) + (np.stack([ii, jj, kk], axis=-1) + 0.5) * h
        dist = min_distance_to_system(centers, M)
        # a closed cube meets the tube iff its min distance to M <= rho;
        # conservative via the center: exclude when possibly meeting
        allowed = dist > (rho + math.sqrt(3.0) / 2.0 * h)
    xf = X.faces
    eu, ev, ef = [], [], []
    for a in range(3):
        o1, o2 = _others(a)
        for i in range(1, d.shape[a]):
            for j in range(d.shape[o1]):
                for k in range(d.shape[o2]):
                    f = (a, i, j, k)
                    if f in xf:
                        continue
                    ca = [0, 0, 0]
                    ca[a] = i - 1
                    ca[o1] = j
                    ca[o2] = k
                    cb = list(ca)
                    cb[a] = i
                    ua = d.cube_index(ca)
                    va = d.cube_index(cb)
                    if allowed[ua] and allowed[va]:
                        eu.append(ua)
                        ev.append(va)
                        ef.append(f)
    return DualGraph(d, allowed, np.array(eu, dtype=np.int64), np.array(ev, dtype=np.int64), ef)


def _spanning_forest(g: DualGraph):
    """BFS forest: returns (component id per cube, parent edge per cube
    signed, order of visit, tree mask per edge)."""
    ncubes = g.ncubes
    adj: List[List[Tuple[int, int, int]]] = [[] for _ in range(ncubes)]
    for e, (u, v) in enumerate(zip(g.edges_u, g.edges_v)):
        adj[u].append((v, e, +1))
        adj[v].append((u, e, -1))
    comp = np.full(ncubes, -1, dtype=np.int64)
    parent_edge = np.full(ncubes, -1, dtype=np.int64)
    parent_sign = np.zeros(ncubes, dtype=np.int8)
    parent_node = np.full(ncubes, -1, dtype=np.int64)
    order = []
    tree = np.zeros(len(g.edges_u), dtype=bool)
    cid = 0
    from collections import deque

    for start in range(ncubes):
        if comp[start] >= 0 or not g.allowed[start]:
            continue
        if not adj[start] and True:
            comp[start] = cid
            cid += 1
            continue
        comp[start] = cid
        dq = deque([start])
        while dq:
            u = dq.popleft()
            order.append(u)
            for (v, e, s) in adj[u]:
                if comp[v] < 0:
                    comp[v] = cid
                    parent_edge[v] = e
                    parent_sign[v] = s
                    parent_node[v] = u
                    tree[e] = True
                    dq.append(v)
        cid += 1
    return comp, parent_edge, parent_sign, parent_node, order, tree


# ---------------------------------------------------------------------------
# verdicts


class SpanningVerdict:
    def __init__(self, status: str, witness: Optional[Loop] = None, certificate: Optional[dict] = None,
                 message: str = ""):
        self.status = status
        self.witness = witness
        self.certificate = certificate or {}
        self.message = message

    @property
    def spans(self) -> bool:
        return self.status == "Spans"

    def __repr__(self):
        return "SpanningVerdict(%s%s)" % (self.status, ", " + self.message if self.message else "")

    def reverify(self) -> bool:
        """Re-run the lattice test from the stored certificate."""
        cert = self.certificate
        gens = cert.get("linking_vectors", [])
        ell = cert.get("ell", 1)
        c = cert.get("components", 0)
        hit = None
        for i in range(c):
            for s in (1, -1):
                t = [0] * c
                t[i] = s * ell
                if in_lattice(gens, t):
                    hit = (i, s)
                    break
            if hit:
                break
        return (hit is None) == (self.status == "Spans")


class PreconditionError(ValueError):
    pass


def default_tube_radius(h: float) -> float:
    return 2.5 * h


def certify_spanning(X: FaceComplex, M: BoundarySystem, ell: int = 1,
                     rho: Optional[float] = None,
                     require_single_loop: bool = False) -> SpanningVerdict:
    """Exact spanning certificate at resolution h.

    NotSpanning iff the integer lattice spanned by complement-cycle
    linking vectors contains some +-ell*e_i (Hermite-normal-form test);
    in that case a witness loop is realized and re-validated exactly.
    """
    d = X.domain
    h = d.h
    if rho is None:
        rho = default_tube_radius(h)
    _check_preconditions(X, M)
    g = build_dual_graph(X, M, rho)
    comp, parent_edge, parent_sign, parent_node, order, tree = _spanning_forest(g)
    ne = len(g.edges_u)
    c = len(M.components)
    if ne == 0:
        return SpanningVerdict("Spans", certificate={"linking_vectors": [], "components": c, "ell": ell,
                                                     "hnf": [], "generators": []},
                               message="complement graph has no edges")

    # Gauss cochain per component on every dual edge (canonical direction)
    ua = g.cube_centers(g.edges_u)
    vb = g.cube_centers(g.edges_v)
    gvals = np.zeros((ne, c))
    for ci, comp_loop in enumerate(M.components):
        gvals[:, ci] = linking_cochain(ua, vb, np.array(comp_loop.points))

    # potentials along the BFS forest
    phi = np.zeros((g.ncubes, c))
    for u in order:
        e = parent_edge[u]
        if e >= 0:
            phi[u] = phi[parent_node[u]] + parent_sign[u] * gvals[e]

    nontree = np.nonzero(~tree)[0]
    raw = gvals[nontree] + phi[g.edges_u[nontree]] - phi[g.edges_v[nontree]]
    vec = raw / (4.0 * math.pi)
    ivec = np.rint(vec).astype(np.int64)
    err = np.max(np.abs(vec - ivec)) if len(vec) else 0.0
    if err > 0.1:
        raise RuntimeError("linking cochain failed to round to integers (max err %.3g)" % err)

    # collect distinct nonzero vectors with a representative cycle each
    kept: List[Tuple[int, Tuple[int, ...]]] = []
    seen = {}
    nz = np.nonzero(np.any(ivec != 0, axis=1))[0]
    for row in nz:
        key = tuple(int(x) for x in ivec[row])
        if key not in seen:
            seen[key] = int(nontree[row])
            kept.append((int(nontree[row]), key))
    gens = [list(k) for _, k in kept]
    Hmat, _ = hnf_rows(gens) if gens else ([], [])
    certificate = {
        "linking_vectors": gens,
        "generators": [_cycle_vertices(g, parent_node, parent_edge, e) for e, _ in kept],
        "hnf": Hmat,
        "components": c,
        "ell": int(ell),
        "rho": float(rho),
        "n_complement_edges": int(ne),
        "n_fundamental_cycles": int(len(nontree)),
    }

    target = None
    for i in range(c):
        for s in (1, -1):
            t = [0] * c
            t[i] = s * ell
            if in_lattice(gens, t):
                target = t
                break
        if target:
            break
    if target is None:
        return SpanningVerdict("Spans", certificate=certificate)

    # witness realization
    loop, msg = _realize_witness(g, M, X, comp, parent_node, parent_edge, kept, target, ell)
    if loop is None:
        status = "NotSpanning"
        if require_single_loop:
            status = "Spans"
            msg = "lattice hit but single-loop realization unavailable: " + msg
        return SpanningVerdict(status, certificate=certificate,
                               message="class witness, unrealized single loop: " + msg)
    return SpanningVerdict("NotSpanning", witness=loop, certificate=certificate)


def _check_preconditions(X: FaceComplex, M: BoundarySystem):
    d = X.domain
    h = d.h
    pts = np.array(M.all_points())
    for p in pts:
        if not d.contains_point(p, margin=2.0 * h):
            raise PreconditionError("boundary curve within 2h of the domain frontier")
    if X.faces:
        samples = []
        for f in X.sorted_faces():
            samples.extend(face_sample_points(d, f))
        dmin = float(np.min(min_distance_to_system(np.array(samples), M)))
        if dmin < 2.0 * h - 1e-12:
            raise PreconditionError("tube unresolved: X within 2h of M (sampled distance %.4g)" % dmin)


def _cycle_vertices(g: DualGraph, parent_node, parent_edge, e: int) -> List[int]:
    """Vertex walk of the fundamental cycle of nontree edge e (closed,
    first vertex not repeated)."""
    u = int(g.edges_u[e])
    v = int(g.edges_v[e])
    up, vp = [u], [v]
    seen = {u: 0}
    x = u
    while parent_node[x] >= 0:
        x = int(parent_node[x])
        seen[x] = len(up)
        up.append(x)
    x = v
    while x not in seen:
        x = int(parent_node[x])
        vp.append(x)
    meet = x
    # edge u -> v first, then tree path v -> meet -> u, matching the
    # orientation of the cochain cycle sum
    if meet == u:
        walk = [u] + vp[:-1]
    else:
        walk = [u] + vp + list(reversed(up[1: seen[meet]]))
    return walk


def _walk_to_loop(g: DualGraph, walk: List[int]) -> Optional[Loop]:
    pts = [tuple(map(float, g.cube_centers(np.array([w]))[0])) for w in walk]
    # drop collinear interior vertices
    out = []
    m = len(pts)
    for i in range(m):
        a, b, cpt = pts[i - 1], pts[i], pts[(i + 1) % m]
        ab = np.array(b) - np.array(a)
        bc = np.array(cpt) - np.array(b)
        if np.linalg.norm(np.cross(ab, bc)) > 1e-12:
            out.append(b)
    if len(out) < 3:
        return None
    try:
        return Loop(out)
    except ValueError:
        return None


def _realize_witness(g, M, X, comp, parent_node, parent_edge, kept, target, ell):
    # prefer a single fundamental cycle matching the target
    for e, vec in kept:
        if list(vec) == target or [-x for x in vec] == target:
            walk = _cycle_vertices(g, parent_node, parent_edge, e)
            loop = _walk_to_loop(g, walk)
            if loop is None:
                continue
            ok, msg = _validate_witness(loop, M, X, target if list(vec) == target else [-x for x in target], ell)
            if ok:
                return loop, ""
    # try integer combinations within a single complement component
    comps_of = {}
    for e, vec in kept:
        cidx = comp[g.edges_u[e]]
        comps_of.setdefault(cidx, []).append((e, vec))
    for cidx, items in comps_of.items():
        gens = [list(v) for _, v in items]
        sol = lattice_solve(gens, target)
        if sol is None:
            continue
        walk = _combine_cycles(g, parent_node, parent_edge, items, sol)
        if walk is None:
            continue
        loop = _walk_to_loop(g, walk)
        if loop is None:
            continue
        ok, msg = _validate_witness(loop, M, X, target, ell, allow_nonsimple=True)
        if ok:
            return loop, ""
    return None, "no single-loop realization found in one complement component"


def _combine_cycles(g, parent_node, parent_edge, items, sol):
    """Concatenate weighted fundamental cycles into one closed walk by
    routing through the (shared) tree; returns a vertex walk."""
    walks = []
    for (e, _), a in zip(items, sol):
        if a == 0:
            continue
        w = _cycle_vertices(g, parent_node, parent_edge, e)
        if a < 0:
            w = list(reversed(w))
        for _ in range(abs(a)):
            walks.append(w)
    if not walks:
        return None
    base = walks[0]
    for w in walks[1:]:
        # route through the tree between the two start vertices; the
        # out-and-back bridge contributes zero to every linking number
        p1 = _root_path(parent_node, base[0])
        p2 = _root_path(parent_node, w[0])
        while len(p1) > 1 and len(p2) > 1 and p1[-2] == p2[-2]:
            p1.pop()
            p2.pop()
        bridge = p1 + list(reversed(p2[:-1]))
        back = list(reversed(bridge))
        base = base + [base[0]] + bridge[1:] + w[1:] + [w[0]] + back[1:-1]
    return base


def _root_path(parent_node, u):
    out = [int(u)]
    while parent_node[out[-1]] >= 0:
        out.append(int(parent_node[out[-1]]))
    return out


def _validate_witness(loop: Loop, M: BoundarySystem, X: FaceComplex, target, ell, allow_nonsimple=False):
    try:
        loop.check_simple()
    except ValueError as exc:
        if not allow_nonsimple:
            return False, "witness loop not simple: %s" % exc
        return False, "combined walk not simple: %s" % exc
    if loop_hits_complex(loop, X) is not None:
        return False, "witness touches X"
    try:
        cls = classify_link(loop, M)
    except ValueError as exc:
        return False, "witness touches M: %s" % exc
    if cls.vector != [int(t) for t in target]:
        return False, "witness linking vector %r != target %r" % (cls.vector, target)
    if ell == 1 and not cls.simple_link:
        return False, "witness not a simple link"
    return True, ""


# ---------------------------------------------------------------------------
# sampled falsification


class SampledResult:
    def __init__(self, status: str, witness: Optional[Loop], tried: int):
        self.status = status
        self.witness = witness
        self.tried = tried

    def __repr__(self):
        return "SampledResult(%s, tried=%d)" % (self.status, self.tried)


def sampled_spanning(X, M: BoundarySystem, k: int = 100, seed: int = 0,
                     rho: Optional[float] = None) -> SampledResult:
    """Probabilistic falsifier: meridians plus random verified simple
    links, tested against X; never claims Spans.

    Candidate loops keep the same clearance from M that the exact
    certifier enforces on complement cubes, so the two notions agree.
    """
    rng = np.random.default_rng(seed)
    tried = 0
    h = X.h if isinstance(X, FaceComplex) else 0.0
    if rho is None:
        rho = default_tube_radius(h) if h else 0.0
    clearance = rho + math.sqrt(3.0) / 2.0 * h
    for t in range(k):
        ci = int(rng.integers(0, len(M.components)))
        compo = M.components[ci]
        segs = list(compo.segments())
        a, b = segs[int(rng.integers(0, len(segs)))]
        s = rng.uniform(0.2, 0.8)
        p = (1 - s) * np.array(a) + s * np.array(b)
        tang = np.array(b) - np.array(a)
        tang /= np.linalg.norm(tang)
        ref = np.array([0.0, 0.0, 1.0]) if abs(tang[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        u = np.cross(tang, ref)
        u /= np.linalg.norm(u)
        v = np.cross(tang, u)
        rlo = max(clearance / math.cos(math.pi / 16) * 1.05, 2.0 * h, 0.05)
        radius = rng.uniform(rlo, 1.6 * rlo)
        ang = rng.uniform(0, 2 * math.pi)
        pts = [p + radius * (math.cos(ang + 2 * math.pi * q / 16) * u + math.sin(ang + 2 * math.pi * q / 16) * v)
               for q in range(16)]
        try:
            loop = Loop(pts)
            cls = classify_link(loop, M)
        except ValueError:
            continue
        if not cls.simple_link:
            continue
        if clearance > 0.0:
            mids = np.array([(np.array(a) + np.array(b)) / 2 for a, b in loop.segments()]
                            + [np.array(q) for q in loop.points])
            if float(np.min(min_distance_to_system(mids, M))) <= clearance:
                continue
        tried += 1
        if isinstance(X, FaceComplex):
            if len(X.faces) == 0 or loop_hits_complex(loop, X) is None:
                return SampledResult("NotSpanning", loop, tried)
        else:
            if not _loop_hits_trimesh(loop, X):
                return SampledResult("NotSpanning", loop, tried)
    return SampledResult("NoWitnessFound", None, tried)


class TriMesh:
    """Triangle soup candidate (falsification only)."""

    def __init__(self, triangles):
        self.triangles = [tuple(tuple(float(x) for x in v) for v in t) for t in triangles]


def _loop_hits_trimesh(loop: Loop, mesh: TriMesh) -> bool:
    for a, b in loop.segments():
        for tri in mesh.triangles:
            if _segment_triangle_intersect(a, b, tri):
                return True
    return False


def _segment_triangle_intersect(a, b, tri) -> bool:
    A, B = _fr(a), _fr(b)
    P0, P1, P2 = _fr(tri[0]), _fr(tri[1]), _fr(tri[2])

    def sub(x, y):
        return tuple(p - q for p, q in zip(x, y))

    def cross(x, y):
        return (x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0])

    def dot(x, y):
        return sum(p * q for p, q in zip(x, y))

    n = cross(sub(P1, P0), sub(P2, P0))
    da = dot(n, sub(A, P0))
    db = dot(n, sub(B, P0))
    if (da > 0 and db > 0) or (da < 0 and db < 0):
        return False
    if da == db:
        return False  # in-plane contact ignored for the falsifier
    t = da / (da - db)
    p = tuple(x + t * (y - x) for x, y in zip(A, B))
    # barycentric sign tests
    for (u, v) in ((P0, P1), (P1, P2), (P2, P0)):
        if dot(n, cross(sub(v, u), sub(p, u))) < 0:
            return False
    return True


# ---------------------------------------------------------------------------
# deformations and core


def deform(X: FaceComplex, phi: dict, M: Optional[BoundarySystem] = None) -> FaceComplex:
    """Apply a catalog deformation; the modified region must miss M."""
    from . import constructions as cons

    kind = phi.get("kind", "identity")
    if M is not None and kind != "identity":
        region = phi.get("center")
        radius = phi.get("radius", 0.0)
        if region is not None:
            dmin = float(np.min(min_distance_to_system(np.array([region]), M)))
            if dmin <= radius:
                raise PreconditionError("deformation region touches M")
    if kind == "identity":
        return X
    if kind == "radial_sphere":
        return cons.radial_sphere_projection(X, phi["center"], phi["radius"])[0]
    if kind == "cube_squash":
        return cons.grid_squash(X, phi["cube_lo"], phi.get("size", X.h))[0]
    if kind == "collapse_free_face":
        return cons.collapse_free_faces(X, phi.get("center"), phi.get("radius"))
    if kind == "hull_clamp":
        return cons.hull_clamp(X, phi["M"])[0]
    raise ValueError("unknown deformation kind %r" % kind)


def _face_edges(d: GridDomain, f: FaceId):
    cs = d.face_corners(f)
    # face_corners already yields the quad cycle 00 -> 01 -> 11 -> 10
    for t in range(4):
        a, b = cs[t], cs[(t + 1) % 4]
        yield (a, b) if a <= b else (b, a)


def face_components(X: FaceComplex) -> List[FaceComplex]:
    """Connected components of X under shared-edge adjacency."""
    d = X.domain
    by_edge: Dict[tuple, List[FaceId]] = {}
    for f in X.faces:
        for e in _face_edges(d, f):
            by_edge.setdefault(e, []).append(f)
    seen = set()
    comps = []
    from collections import deque
    for f0 in X.sorted_faces():
        if f0 in seen:
            continue
        comp = []
        dq = deque([f0])
        seen.add(f0)
        while dq:
            f = dq.popleft()
            comp.append(f)
            for e in _face_edges(d, f):
                for g in by_edge[e]:
                    if g not in seen:
                        seen.add(g)
                        dq.append(g)
        comps.append(FaceComplex(d, comp))
    return comps


def boundary_incidence(X: FaceComplex, M: BoundarySystem,
                       reach: Optional[float] = None) -> frozenset:
    """Indices of the components of M that X approaches within the
    certifier's tube reach (default rho + sqrt(3)/2 h + h)."""
    h = X.domain.h
    if reach is None:
        reach = default_tube_radius(h) + math.sqrt(3.0) / 2.0 * h + h
    pts = X.face_centers()
    out = set()
    for i, comp in enumerate(M.components):
        sub = BoundarySystem([comp])
        if len(pts) and float(np.min(min_distance_to_system(pts, sub))) <= reach:
            out.add(i)
    return frozenset(out)


class WeightedComplex:
    """Mixed-dimension complex: faces with weights plus lower cells."""

    def __init__(self, domain: GridDomain, face_weights: Dict[FaceId, float],
                 edges=(), vertices=()):
        self.domain = domain
        self.face_weights = dict(face_weights)
        self.edges = list(edges)
        self.vertices = list(vertices)


def core(X) -> FaceComplex:
    """Drop cells of dimension < 2 and zero-weight faces."""
    if isinstance(X, FaceComplex):
        return X
    if isinstance(X, WeightedComplex):
        return FaceComplex(X.domain, [f for f, w in X.face_weights.items() if w > 0.0])
    raise TypeError("core expects FaceComplex or WeightedComplex")
