"""Area descent over face complexes with a spanning certificate at every step.

The search never trades the topological guarantee for area: a move is
accepted only when it strictly lowers mass and the certifier still
reports Spans.  Exact minimal cuts over the mod-2 class are available
through a two-sheet covering-graph max flow.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .linking import BoundarySystem, Loop
from .measure import ALPHA, lsc_check, reifenberg_regular_check
from .spanning import (DualGraph, FaceComplex, FaceId, GridDomain,
                       PreconditionError, SpanningVerdict, build_dual_graph,
                       certify_spanning, default_tube_radius,
                       min_distance_to_system, system_segments,
                       trim_near_system)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PLATEAU_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# brackets


def diameter(points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=float)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return float(np.linalg.norm(hi - lo))


def boundary_length(M: BoundarySystem) -> float:
    sa, sb = system_segments(M)
    return float(np.linalg.norm(sb - sa, axis=1).sum())


def cone_baseline(M: BoundarySystem, q, domain: GridDomain,
                  ell: int = 1) -> Tuple[FaceComplex, SpanningVerdict, float]:
    """Rasterized cone over every component from apex q, with the
    certified verdict and the coarse bound diam(U) * total length."""
    from .constructions import cone_set

    q = tuple(float(v) for v in q)
    tris = []
    for comp in M.components:
        cone = cone_set(comp, q)
        tris.extend(cone.triangles)
    X = trim_near_system(rasterize(domain, tris), M)
    verdict = certify_spanning(X, M, ell=ell)
    if not verdict.spans:
        raise RuntimeError("cone baseline failed certification")
    c0 = diameter(np.array([domain.lo, domain.hi], dtype=float)) * boundary_length(M)
    return X, verdict, c0


def rasterize(domain: GridDomain, triangles) -> FaceComplex:
    from .spanning import rasterize_triangles
    return rasterize_triangles(domain, triangles)


def polygonal_max_curvature(M: BoundarySystem) -> float:
    """Largest turning angle per unit of adjacent half-length over all
    vertices of the system."""
    kmax = 0.0
    for comp in M.components:
        pts = [np.asarray(p, dtype=float) for p in comp.points]
        n = len(pts)
        for i in range(n):
            e0 = pts[i] - pts[i - 1]
            e1 = pts[(i + 1) % n] - pts[i]
            l0, l1 = np.linalg.norm(e0), np.linalg.norm(e1)
            c = float(np.dot(e0, e1) / (l0 * l1))
            theta = math.acos(max(-1.0, min(1.0, c)))
            kmax = max(kmax, theta / (0.5 * (l0 + l1)))
    return kmax


def lower_bound_a0(M: BoundarySystem, i: int, eps: float) -> float:
    """Guaranteed area floor alpha_2 eps^2 / C for any spanning set,
    from a meridian disk of radius eps around component i."""
    comps = M.components
    if not 0 <= i < len(comps):
        raise ValueError("component index out of range")
    kmax = polygonal_max_curvature(M)
    if kmax > 0 and eps >= 1.0 / kmax:
        raise ValueError("eps exceeds the curvature scale of the component")
    pts_i = np.array(comps[i].points, dtype=float)
    for j, other in enumerate(comps):
        if j == i:
            continue
        d = min(float(np.linalg.norm(a - np.asarray(b, dtype=float)))
                for a in pts_i for b in other.points)
        if eps >= d / 2.0:
            raise ValueError("eps exceeds half the separation between components")
    C = (1.0 + eps * kmax) ** 2
    return ALPHA[2] * eps * eps / C


def prune_redundant(X: FaceComplex, M: BoundarySystem,
                    rho: Optional[float] = None) -> FaceComplex:
    """Drop faces that no admissible complement path can cross: both
    neighbouring cubes sit inside the excluded tube or off the grid.
    Removing them cannot change any certificate."""
    d = X.domain
    if rho is None:
        rho = default_tube_radius(d.h)
    G = build_dual_graph(FaceComplex(d, []), M, rho)
    keep = []
    for f in X.faces:
        open_edge = False
        cubes = _face_cubes(d, f)
        if len(cubes) == 2:
            u, v = (d.cube_index(c) for c in cubes)
            open_edge = bool(G.allowed[u] and G.allowed[v])
        if open_edge:
            keep.append(f)
    return FaceComplex(d, keep)


# ---------------------------------------------------------------------------
# local search


@dataclass
class SearchState:
    """One point of the descent: a certified complex plus the move log
    that produced it."""
    complex: FaceComplex
    verdict: SpanningVerdict
    area: float
    moves: List[dict] = field(default_factory=list)
    rejected: int = 0

    def log(self) -> List[dict]:
        return list(self.moves)


MoveGen = Callable[[FaceComplex, BoundarySystem, np.random.Generator],
                   List[Tuple[str, FaceComplex]]]


def _moves_face_delete(X: FaceComplex, M: BoundarySystem,
                       rng: np.random.Generator) -> List[Tuple[str, FaceComplex]]:
    out = []
    for f in X.sorted_faces():
        out.append(("face_delete:%d,%d,%d,%d" % f, X.difference([f])))
    return out


def _moves_cube_collapse(X: FaceComplex, M: BoundarySystem,
                         rng: np.random.Generator) -> List[Tuple[str, FaceComplex]]:
    """Remove all faces of a grid cube that carries 4 or more of them;
    the cheap way out of thin pockets."""
    d = X.domain
    from collections import Counter
    count: Dict[Tuple[int, int, int], List[FaceId]] = {}
    for f in X.faces:
        a, i, j, k = f
        for cube in _face_cubes(d, f):
            count.setdefault(cube, []).append(f)
    out = []
    for cube in sorted(count):
        fs = count[cube]
        if len(fs) >= 4:
            out.append(("cube_collapse:%d,%d,%d" % cube, X.difference(fs)))
    return out


def _face_cubes(d: GridDomain, f: FaceId):
    a, i, j, k = f
    idx = [0, 0, 0]
    o1, o2 = [ax for ax in range(3) if ax != a]
    idx[o1], idx[o2] = j, k
    cubes = []
    for ci in (i - 1, i):
        if 0 <= ci < d.shape[a]:
            cc = [0, 0, 0]
            cc[a] = ci
            cc[o1], cc[o2] = j, k
            cubes.append(tuple(cc))
    return cubes


def _moves_haircut(X: FaceComplex, M: BoundarySystem,
                   rng: np.random.Generator) -> List[Tuple[str, FaceComplex]]:
    from .constructions import haircut
    out = []
    for j0 in (1, 2):
        try:
            Y, _ = haircut(X, M, j0, j0 + 2, certify_stages=False)
        except (ValueError, PreconditionError, RuntimeError):
            continue
        out.append(("haircut:%d,%d" % (j0, j0 + 2), Y))
    return out


def _moves_hull_clamp(X: FaceComplex, M: BoundarySystem,
                      rng: np.random.Generator) -> List[Tuple[str, FaceComplex]]:
    from .constructions import hull_clamp
    try:
        Y, _ = hull_clamp(X, M, certify=False)
    except (ValueError, RuntimeError):
        return []
    return [("hull_clamp:", Y)]


def _moves_grid_squash(X: FaceComplex, M: BoundarySystem,
                       rng: np.random.Generator) -> List[Tuple[str, FaceComplex]]:
    from .constructions import grid_squash
    d = X.domain
    cubes = sorted({c for f in X.faces for c in _face_cubes(d, f)})
    if len(cubes) > 40:
        sel = rng.choice(len(cubes), size=40, replace=False)
        cubes = [cubes[i] for i in sorted(sel)]
    out = []
    for c in cubes:
        lo = tuple(d.lo[i] + c[i] * d.h for i in range(3))
        try:
            Y, _ = grid_squash(X, lo, size=1, M=M)
        except (ValueError, RuntimeError):
            continue
        out.append(("grid_squash:%d,%d,%d" % c, Y))
    return out


def _moves_cut_and_cone(X: FaceComplex, M: BoundarySystem,
                        rng: np.random.Generator) -> List[Tuple[str, FaceComplex]]:
    from .constructions import cut_and_cone
    d = X.domain
    centers = X.face_centers()
    if len(centers) == 0:
        return []
    out = []
    picks = rng.choice(len(centers), size=min(4, len(centers)), replace=False)
    r = 4 * d.h
    for pi in sorted(picks):
        p = tuple(centers[pi])
        try:
            Y, _ = cut_and_cone(X, p, r, p, M=M)
        except (ValueError, RuntimeError, PreconditionError):
            continue
        out.append(("cut_and_cone:%d" % pi, Y))
    return out


MOVE_CATALOG: Dict[str, MoveGen] = {
    "face_delete": _moves_face_delete,
    "cube_collapse": _moves_cube_collapse,
    "cut_and_cone": _moves_cut_and_cone,
    "grid_squash": _moves_grid_squash,
    "haircut": _moves_haircut,
    "hull_clamp": _moves_hull_clamp,
}


def local_search(M: BoundarySystem, init: FaceComplex,
                 moves: Sequence[str] = ("face_delete",),
                 budget: int = 200, seed: int = 0, ell: int = 1,
                 rho: Optional[float] = None) -> SearchState:
    """Strict descent.  Each round enumerates the catalog moves, sorts
    candidates by (area, move id), and accepts the first strictly
    smaller candidate that still certifies.  Ties never pass, so the
    result is a local minimum of mass within the move set."""
    for m in moves:
        if m not in MOVE_CATALOG:
            raise ValueError("unknown move kind: %r" % (m,))
    verdict = certify_spanning(init, M, ell=ell, rho=rho)
    if not verdict.spans:
        raise ValueError("initial complex does not span")
    state = SearchState(init, verdict, init.area())
    rng = np.random.default_rng(seed)
    accepted = 0
    while accepted < budget:
        cands: List[Tuple[float, str, FaceComplex]] = []
        for m in moves:
            for mid, Y in MOVE_CATALOG[m](state.complex, M, rng):
                a = Y.area()
                if a < state.area - 1e-12:
                    cands.append((a, mid, Y))
        cands.sort(key=lambda t: (t[0], t[1]))
        chosen = None
        for a, mid, Y in cands:
            try:
                v = certify_spanning(Y, M, ell=ell, rho=rho)
            except PreconditionError:
                state.rejected += 1
                continue
            if v.spans:
                chosen = (a, mid, Y, v)
                break
            state.rejected += 1
        if chosen is None:
            break
        a, mid, Y, v = chosen
        state.moves.append({"move": mid, "area_before": state.area,
                            "area_after": a})
        state.complex, state.verdict, state.area = Y, v, a
        accepted += 1
    return state


def replay_search(M: BoundarySystem, init: FaceComplex, log: Sequence[dict],
                  ell: int = 1, rho: Optional[float] = None) -> SearchState:
    """Re-apply a recorded move log and re-certify every step."""
    verdict = certify_spanning(init, M, ell=ell, rho=rho)
    state = SearchState(init, verdict, init.area(), [])
    rng = np.random.default_rng(0)
    for entry in log:
        mid = entry["move"]
        kind = mid.split(":", 1)[0]
        found = None
        for cid, Y in MOVE_CATALOG[kind](state.complex, M, rng):
            if cid == mid:
                found = Y
                break
        if found is None:
            raise RuntimeError("move %r not reproducible" % (mid,))
        v = certify_spanning(found, M, ell=ell, rho=rho)
        if not v.spans:
            raise RuntimeError("replayed move %r lost the certificate" % (mid,))
        state.moves.append(dict(entry))
        state.complex, state.verdict, state.area = found, v, found.area()
    return state


# ---------------------------------------------------------------------------
# exact minimal mod-2 cuts


def _edge_parity(G: DualGraph, M: BoundarySystem) -> np.ndarray:
    """Total mod-2 linking weight per dual edge, in the tree gauge:
    tree edges weigh 0, each non-tree edge carries the exact integer
    linking vector of its fundamental cycle.  This assignment differs
    from the geometric sheet-crossing indicator by a vertex relabeling
    only, so it defines the same family of mod-2 cuts."""
    from .linking import linking_cochain
    from .spanning import _spanning_forest

    comp, parent_edge, parent_sign, parent_node, order, tree = _spanning_forest(G)
    ne = len(G.edges_u)
    c = len(M.components)
    ua = G.cube_centers(G.edges_u)
    vb = G.cube_centers(G.edges_v)
    gvals = np.zeros((ne, c))
    for ci, comp_loop in enumerate(M.components):
        gvals[:, ci] = linking_cochain(ua, vb, np.array(comp_loop.points))
    phi = np.zeros((G.ncubes, c))
    for u in order:
        e = parent_edge[u]
        if e >= 0:
            phi[u] = phi[parent_node[u]] + parent_sign[u] * gvals[e]
    nontree = np.nonzero(~tree)[0]
    raw = gvals[nontree] + phi[G.edges_u[nontree]] - phi[G.edges_v[nontree]]
    vec = raw / (4.0 * math.pi)
    ivec = np.rint(vec).astype(np.int64)
    err = np.max(np.abs(vec - ivec)) if len(vec) else 0.0
    if err > 0.1:
        raise RuntimeError("linking cochain failed to round to integers "
                           "(max err %.3g)" % err)
    parity = np.zeros(ne, dtype=np.int64)
    parity[nontree] = np.abs(ivec).sum(axis=1) & 1
    return parity


def mincut_exact(M: BoundarySystem, domain: GridDomain,
                 rho: Optional[float] = None) -> Tuple[FaceComplex, SpanningVerdict]:
    """Minimum-area grid surface whose faces meet every loop of odd
    total mod-2 linking with M.  Exact over that class by max flow on a
    two-sheet cover of the dual graph; the result is re-certified.

    The public entry point accepts one boundary component only."""
    if len(M.components) != 1:
        raise ValueError("mincut_exact handles a single component; "
                         "multi-component systems are out of its scope")
    return _mincut_mod2(M, domain, rho)


def _mincut_mod2(M: BoundarySystem, domain: GridDomain,
                 rho: Optional[float] = None) -> Tuple[FaceComplex, SpanningVerdict]:
    from .constructions import _hull_halfspaces

    d = domain
    if rho is None:
        rho = default_tube_radius(d.h)
    empty = FaceComplex(d, [])
    G = build_dual_graph(empty, M, rho)
    parity = _edge_parity(G, M)

    # outer region: cubes beyond the hull of M, contracted per sheet
    A, b = _hull_halfspaces(np.array(M.all_points(), dtype=float))
    margin = 2.0 * d.h
    all_centers = G.cube_centers(np.arange(G.ncubes))
    viol = np.any(all_centers @ A.T - b[None, :] > margin, axis=1)
    viol &= G.allowed
    if not viol.any():
        raise RuntimeError("domain leaves no room outside the hull of M")

    # re-gauge so the outer region carries no parity: loops that stay
    # outside the hull of M link nothing, so parity restricted to the
    # outer subgraph is exact and a vertex labelling sigma absorbs it
    sigma = np.zeros(G.ncubes, dtype=np.int64)
    outer_adj: Dict[int, List[Tuple[int, int]]] = {}
    for eidx in range(len(G.edges_u)):
        u, v = int(G.edges_u[eidx]), int(G.edges_v[eidx])
        if viol[u] and viol[v]:
            outer_adj.setdefault(u, []).append((v, eidx))
            outer_adj.setdefault(v, []).append((u, eidx))
    from collections import deque
    seen_out = np.zeros(G.ncubes, dtype=bool)
    outer_nodes = np.nonzero(viol)[0]
    if len(outer_nodes):
        root = int(outer_nodes[0])
        seen_out[root] = True
        dq = deque([root])
        while dq:
            u = dq.popleft()
            for v, eidx in outer_adj.get(u, ()):
                if not seen_out[v]:
                    seen_out[v] = True
                    sigma[v] = sigma[u] ^ int(parity[eidx])
                    dq.append(v)
        if not seen_out[outer_nodes].all():
            raise RuntimeError("outer region of the domain is disconnected")
    parity = parity ^ sigma[G.edges_u] ^ sigma[G.edges_v]
    for eidx in range(len(G.edges_u)):
        u, v = int(G.edges_u[eidx]), int(G.edges_v[eidx])
        if viol[u] and viol[v] and parity[eidx]:
            raise RuntimeError("odd loop outside the hull of M; "
                               "parity gauge is inconsistent")

    # node layout: inner cube u -> (2*slot, 2*slot+1); outer supernode last pair
    inner_mask = G.allowed & ~viol
    slot = -np.ones(G.ncubes, dtype=np.int64)
    inner = np.nonzero(inner_mask)[0]
    slot[inner] = np.arange(len(inner))
    n_inner = len(inner)
    OUT0, OUT1 = 2 * n_inner, 2 * n_inner + 1
    n_nodes = 2 * n_inner + 2

    def node(u, s):
        if viol[u]:
            return OUT0 if s == 0 else OUT1
        return 2 * slot[u] + s

    rows, cols = [], []
    for eidx in range(len(G.edges_u)):
        u, v = int(G.edges_u[eidx]), int(G.edges_v[eidx])
        p = int(parity[eidx])
        for s in (0, 1):
            a_, b_ = node(u, s), node(v, s ^ p)
            if a_ == b_:
                continue
            rows += [a_, b_]
            cols += [b_, a_]
    data = np.ones(len(rows), dtype=np.int32)
    graph = csr_matrix((data, (rows, cols)), shape=(n_nodes, n_nodes))
    graph.sum_duplicates()
    res = maximum_flow(graph, OUT0, OUT1)
    flow_value = int(res.flow_value)

    residual = graph - res.flow
    from scipy.sparse.csgraph import breadth_first_order
    residual.data = (residual.data > 0).astype(np.int32)
    residual.eliminate_zeros()

    def _reach(mat, start):
        order = breadth_first_order(mat, start, directed=True,
                                    return_predecessors=False)
        out = np.zeros(n_nodes, dtype=bool)
        out[order] = True
        return out

    src = _reach(residual, OUT0)
    snk = _reach(residual.T, OUT1)

    # any vertex labelling that is constant on the contracted outer
    # region yields a valid cut: the faces where the labels disagree
    # with the edge parity.  Every odd loop sees an odd number of such
    # disagreements regardless of the labelling.  Reachability on each
    # sheet gives four natural labelings; by the cover symmetry the
    # smallest of them meets the flow lower bound ceil(flow/2), which
    # certifies minimality over the whole mod-2 class.
    nodes0 = np.array([node(u, 0) for u in range(G.ncubes)])
    nodes1 = np.array([node(u, 1) for u in range(G.ncubes)])
    labelings = [src[nodes0], src[nodes1], ~snk[nodes0], ~snk[nodes1]]
    eu, ev = G.edges_u, G.edges_v
    best = None
    for y in labelings:
        mask = (y[eu].astype(np.int64) ^ y[ev].astype(np.int64) ^ parity) == 1
        if best is None or int(mask.sum()) < int(best.sum()):
            best = mask
    if 2 * int(best.sum()) != flow_value:
        raise RuntimeError("cut extraction not tight: %d faces vs flow %d"
                           % (int(best.sum()), flow_value))
    cut_faces = [G.edge_face[i] for i in np.nonzero(best)[0]]
    X = FaceComplex(d, cut_faces)
    verdict = certify_spanning(X, M, ell=1, rho=rho)
    if not verdict.spans:
        raise RuntimeError("minimal cut failed certification")
    return X, verdict


# ---------------------------------------------------------------------------
# analytic references for coaxial circles


def catenoid_waist(radius: float, separation: float) -> Optional[float]:
    """Larger root a of radius = a cosh(sep / 2a), None past the
    existence threshold."""
    def g(a):
        x = separation / (2 * a)
        if x > 500.0:
            return float("inf")
        return a * math.cosh(x) - radius
    # g(radius) = radius(cosh(s/2R) - 1) > 0; find interior minimum
    aa = np.linspace(separation / 900.0, radius, 4000)
    vals = np.array([g(a) for a in aa])
    i = int(np.argmin(vals))
    if vals[i] > 0:
        return None
    return float(brentq(g, aa[i], radius))


def catenoid_area(radius: float, separation: float) -> Optional[float]:
    a = catenoid_waist(radius, separation)
    if a is None:
        return None
    s = separation
    return math.pi * a * s + math.pi * a * a * math.sinh(s / a)


def best_spanning_area(radius: float, separation: float) -> Tuple[float, str]:
    """Smallest of the catenoid and the two flat disks, with its name."""
    disks = 2.0 * math.pi * radius * radius
    cat = catenoid_area(radius, separation)
    if cat is not None and cat < disks:
        return cat, "catenoid"
    return disks, "two_disks"


# ---------------------------------------------------------------------------
# sequence diagnostics


def sequence_diagnostics(states: Sequence[SearchState], M: BoundarySystem,
                         U, a: float = 0.05, seed: int = 0,
                         beta_tol: float = 0.25) -> dict:
    """Regularity summary along a descent: lower density estimate beta,
    small-ball regularity table, and window lower-semicontinuity."""
    seq = [s.complex for s in states]
    reif = reifenberg_regular_check(seq, a, M=M, U=U, seed=seed)
    ratios = [row["ratio"] for row in reif["rows"] if row.get("ratio") is not None]
    beta = min(ratios) if ratios else None
    X0 = seq[-1]
    windows = _sample_windows(X0, M, k=6, seed=seed)
    lsc = lsc_check(seq, X0, windows)
    warnings = []
    if beta is not None and beta < 1.0 - beta_tol:
        warnings.append("beta estimate %.4f below 1 - %.2f; sequence may "
                        "concentrate below unit density" % (beta, beta_tol))
    return {"beta": beta, "reifenberg": reif, "lsc": lsc,
            "warnings": warnings, "areas": [s.area for s in states]}


def _sample_windows(X: FaceComplex, M: BoundarySystem, k: int, seed: int):
    rng = np.random.default_rng(seed)
    centers = X.face_centers()
    if len(centers) == 0:
        return []
    out = []
    h = X.domain.h
    picks = rng.choice(len(centers), size=min(k, len(centers)), replace=False)
    for pi in picks:
        c = centers[pi]
        r = 3.0 * h
        if min_distance_to_system(c[None, :], M)[0] < r + 2 * h:
            continue
        out.append((tuple(c - r), tuple(c + r)))
    return out
