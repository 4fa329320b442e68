"""Exact linking numbers of polygonal loops in R^3.

linking_number projects along a pseudo-random generic direction and sums
signed over-crossings; all predicates run in exact rational arithmetic on
the projected coordinates, and the direction is re-drawn until the
configuration is generic.  gauss_linking evaluates the Gauss integral in
closed form per segment pair as a cross-check.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

Point3 = Tuple[float, float, float]


class IntersectionError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class Loop:
    """Closed oriented polygonal curve; simple (no self-intersection)."""

    def __init__(self, points: Sequence[Sequence[float]], validate: bool = True):
        pts = [tuple(float(x) for x in p) for p in points]
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise ValueError("a loop needs at least 3 distinct vertices")
        for i in range(len(pts)):
            if pts[i] == pts[(i + 1) % len(pts)]:
                raise ValueError("consecutive vertices coincide at index %d" % i)
        self.points: List[Point3] = pts
        if validate:
            self.check_simple()

    def __len__(self):
        return len(self.points)

    def segments(self):
        pts = self.points
        for i in range(len(pts)):
            yield pts[i], pts[(i + 1) % len(pts)]

    def check_simple(self):
        segs = list(self.segments())
        m = len(segs)
        for i in range(m):
            for j in range(i + 1, m):
                adjacent = (j == i + 1) or (i == 0 and j == m - 1)
                if adjacent:
                    continue
                if _segments_intersect_exact(segs[i][0], segs[i][1], segs[j][0], segs[j][1]):
                    raise IntersectionError(
                        "loop self-intersects between segments %d and %d" % (i, j),
                        witness=(segs[i], segs[j]),
                    )

    def translated(self, v):
        return Loop([[p[0] + v[0], p[1] + v[1], p[2] + v[2]] for p in self.points], validate=False)

    def scaled(self, s):
        return Loop([[s * x for x in p] for p in self.points], validate=False)

    def length(self) -> float:
        return sum(math.dist(a, b) for a, b in self.segments())


class BoundarySystem:
    """Disjoint union of oriented loops M = M_1 | ... | M_c."""

    def __init__(self, components: Sequence[Loop], validate: bool = True):
        self.components = list(components)
        if validate:
            for i in range(len(self.components)):
                for j in range(i + 1, len(self.components)):
                    w = _loops_intersection(self.components[i], self.components[j])
                    if w is not None:
                        raise IntersectionError("components %d and %d intersect" % (i, j), witness=w)

    def __len__(self):
        return len(self.components)

    @property
    def loops(self):
        return self.components

    def all_points(self):
        return [p for c in self.components for p in c.points]


# ---------------------------------------------------------------------------
# exact predicates (rational arithmetic on float inputs)


def _fr(p):
    return tuple(Fraction(x) for x in p)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _orient2d(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment_1d(a, b, c):
    return min(a, b) <= c <= max(a, b)


def _seg2d_intersect(p1, p2, q1, q2) -> bool:
    d1 = _orient2d(q1, q2, p1)
    d2 = _orient2d(q1, q2, p2)
    d3 = _orient2d(p1, p2, q1)
    d4 = _orient2d(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return True
    for (a, b, c, d) in ((q1, q2, p1, d1), (q1, q2, p2, d2), (p1, p2, q1, d3), (p1, p2, q2, d4)):
        if d == 0 and _on_segment_1d(a[0], b[0], c[0]) and _on_segment_1d(a[1], b[1], c[1]):
            return True
    return False


def _segments_intersect_exact(a1, a2, b1, b2) -> bool:
    """Exact 3D segment intersection on rationalized float coordinates."""
    for ax in range(3):
        if max(a1[ax], a2[ax]) < min(b1[ax], b2[ax]) or max(b1[ax], b2[ax]) < min(a1[ax], a2[ax]):
            return False
    A1, A2, B1, B2 = _fr(a1), _fr(a2), _fr(b1), _fr(b2)
    u = _sub(A2, A1)
    v = _sub(B2, B1)
    w = _sub(B1, A1)
    n = _cross(u, v)
    if any(x != 0 for x in n):
        if _dot(n, w) != 0:
            return False  # skew, not coplanar
        # coplanar, non-parallel: project out the largest normal component
        ax = max(range(3), key=lambda i: abs(n[i]))
        keep = [i for i in range(3) if i != ax]
        pr = lambda p: (p[keep[0]], p[keep[1]])
        return _seg2d_intersect(pr(A1), pr(A2), pr(B1), pr(B2))
    # parallel; collinear only if w parallel to u as well
    if any(x != 0 for x in _cross(u, w)):
        return False
    # collinear: 1D overlap along the dominant axis of u
    ax = max(range(3), key=lambda i: abs(u[i]))
    lo, hi = sorted((A1[ax], A2[ax]))
    lo2, hi2 = sorted((B1[ax], B2[ax]))
    return not (hi < lo2 or hi2 < lo)


def _loops_intersection(A: Loop, B: Loop):
    for sa in A.segments():
        for sb in B.segments():
            if _segments_intersect_exact(sa[0], sa[1], sb[0], sb[1]):
                return (sa, sb)
    return None


def _nearest_witness(A: Loop, B: Loop):
    best = None
    for a1, a2 in A.segments():
        for b1, b2 in B.segments():
            p, q, d = _closest_points_seg(a1, a2, b1, b2)
            if best is None or d < best[2]:
                best = (p, q, d)
    return best


def _closest_points_seg(a1, a2, b1, b2):
    a1 = np.array(a1); a2 = np.array(a2); b1 = np.array(b1); b2 = np.array(b2)
    u = a2 - a1; v = b2 - b1; w = a1 - b1
    a = u @ u; b = u @ v; c = v @ v; d = u @ w; e = v @ w
    den = a * c - b * b
    s = 0.0 if den < 1e-300 else max(0.0, min(1.0, (b * e - c * d) / den))
    t = max(0.0, min(1.0, (b * s + e) / c)) if c > 1e-300 else 0.0
    # one refinement pass for the clamped case
    if a > 1e-300:
        s = max(0.0, min(1.0, (b * t - d) / a))
    p = a1 + s * u
    q = b1 + t * v
    return tuple(p), tuple(q), float(np.linalg.norm(p - q))


# ---------------------------------------------------------------------------
# linking number by signed crossings


class GenericityError(RuntimeError):
    pass


def _random_rotation(attempt: int):
    rng = np.random.default_rng(977 + attempt)
    m = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(m)
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _crossing_sum(A: Loop, B: Loop, R) -> int:
    """Signed over-crossings of A over B in the projection along R's
    third row; raises GenericityError on any degeneracy."""
    ra = [_fr(tuple(float(x) for x in (R @ np.array(p)))) for p in A.points]
    rb = [_fr(tuple(float(x) for x in (R @ np.array(p)))) for p in B.points]
    total = 0
    na, nb = len(ra), len(rb)
    for i in range(na):
        p1, p2 = ra[i], ra[(i + 1) % na]
        for j in range(nb):
            q1, q2 = rb[j], rb[(j + 1) % nb]
            d1 = _orient2d(q1, q2, p1)
            d2 = _orient2d(q1, q2, p2)
            d3 = _orient2d(p1, p2, q1)
            d4 = _orient2d(p1, p2, q2)
            if d1 == 0 or d2 == 0 or d3 == 0 or d4 == 0:
                if _seg2d_intersect(p1[:2] + (0,), p2[:2] + (0,), q1[:2] + (0,), q2[:2] + (0,)):
                    raise GenericityError("degenerate crossing")
                continue
            if (d1 > 0) == (d2 > 0) or (d3 > 0) == (d4 > 0):
                continue
            # proper crossing: parameters s on A-segment, t on B-segment
            s = d1 / (d1 - d2)
            t = d3 / (d3 - d4)
            za = p1[2] + s * (p2[2] - p1[2])
            zb = q1[2] + t * (q2[2] - q1[2])
            if za == zb:
                raise GenericityError("projected crossing at equal depth")
            if za > zb:
                u = (p2[0] - p1[0], p2[1] - p1[1])
                v = (q2[0] - q1[0], q2[1] - q1[1])
                cz = u[0] * v[1] - u[1] * v[0]
                total += 1 if cz > 0 else -1
    return total


def linking_number(A: Loop, B: Loop) -> int:
    w = _loops_intersection(A, B)
    if w is not None:
        near = _nearest_witness(A, B)
        raise IntersectionError("loops intersect", witness=near)
    for attempt in range(64):
        R = _random_rotation(attempt)
        try:
            return _crossing_sum(A, B, R)
        except GenericityError:
            continue
    raise RuntimeError("no generic projection found after 64 attempts")


# ---------------------------------------------------------------------------
# Gauss integral, closed form per segment pair


def _tri_solid_angle(a, b, c):
    """van Oosterom-Strackee signed solid angle of the spherical triangle
    spanned by unit vectors a, b, c (numpy arrays, last axis 3)."""
    num = np.einsum("...i,...i->...", a, np.cross(b, c))
    den = (1.0 + np.einsum("...i,...i->...", a, b)
           + np.einsum("...i,...i->...", b, c)
           + np.einsum("...i,...i->...", c, a))
    return 2.0 * np.arctan2(num, den)


def segment_pair_solid_angle(p1, p2, q1, q2):
    """Signed spherical-quadrilateral area swept by (p(s)-q(t))-hat."""
    corners = []
    for pp, qq in ((p1, q1), (p1, q2), (p2, q2), (p2, q1)):
        v = np.asarray(pp, dtype=float) - np.asarray(qq, dtype=float)
        nv = np.linalg.norm(v, axis=-1, keepdims=True)
        corners.append(v / nv)
    a, b, c, d = corners
    return _tri_solid_angle(a, b, c) + _tri_solid_angle(a, c, d)


def gauss_linking(A: Loop, B: Loop, tol: float = 1e-6) -> float:
    """Closed-form Gauss linking integral (sum of segment-pair spherical
    quadrilateral areas over 4*pi)."""
    if _loops_intersection(A, B) is not None:
        raise IntersectionError("loops intersect", witness=_nearest_witness(A, B))
    pa = np.array(A.points)
    pb = np.array(B.points)
    a1 = pa
    a2 = np.roll(pa, -1, axis=0)
    b1 = pb
    b2 = np.roll(pb, -1, axis=0)
    P1 = a1[:, None, :]
    P2 = a2[:, None, :]
    Q1 = b1[None, :, :]
    Q2 = b2[None, :, :]
    omega = segment_pair_solid_angle(P1, P2, Q1, Q2)
    return float(np.sum(omega)) / (4.0 * math.pi)


def linking_cochain(edges_a, edges_b, curve_pts) -> np.ndarray:
    """Per-edge Gauss contributions against a closed polygonal curve:
    returns, for directed segments (edges_a[i] -> edges_b[i]), the value
    whose sum over a closed edge cycle is 4*pi * linking number."""
    pb = np.asarray(curve_pts)
    b1 = pb
    b2 = np.roll(pb, -1, axis=0)
    out = np.zeros(len(edges_a))
    chunk = 2048
    ea = np.asarray(edges_a, dtype=float)
    eb = np.asarray(edges_b, dtype=float)
    for s in range(0, len(ea), chunk):
        P1 = ea[s:s + chunk, None, :]
        P2 = eb[s:s + chunk, None, :]
        om = segment_pair_solid_angle(P1, P2, b1[None, :, :], b2[None, :, :])
        out[s:s + chunk] = np.sum(om, axis=1)
    return out


# ---------------------------------------------------------------------------
# classification and meridians


class LinkClass:
    def __init__(self, vector: List[int]):
        self.vector = list(vector)

    @property
    def simple_link(self) -> bool:
        ones = sum(1 for v in self.vector if abs(v) == 1)
        zeros = sum(1 for v in self.vector if v == 0)
        return ones == 1 and ones + zeros == len(self.vector)

    def l_link(self, i: int, ell: int) -> bool:
        return abs(self.vector[i]) == ell and all(v == 0 for j, v in enumerate(self.vector) if j != i)

    def __repr__(self):
        return "LinkClass(%r)" % (self.vector,)


def classify_link(S: Loop, M: BoundarySystem) -> LinkClass:
    return LinkClass([linking_number(S, Mi) for Mi in M.components])


def meridian_links(M: BoundarySystem, i: int, radius: float, count: int, seed: int = 0) -> List[Loop]:
    """Polygonal meridian circles of component i, each verified simple."""
    comp = M.components[i]
    for j, other in enumerate(M.components):
        if j == i:
            continue
        dmin = min(_closest_points_seg(a, b, c, d)[2] for a, b in comp.segments() for c, d in other.segments())
        if radius >= 0.5 * dmin:
            raise ValueError("radius too large versus distance to component %d" % j)
    rng = np.random.default_rng(seed)
    segs = list(comp.segments())
    out = []
    for m in range(count):
        a, b = segs[int(rng.integers(0, len(segs)))]
        t = rng.uniform(0.25, 0.75)
        p = (1 - t) * np.array(a) + t * np.array(b)
        tang = np.array(b) - np.array(a)
        tang /= np.linalg.norm(tang)
        ref = np.array([0.0, 0.0, 1.0]) if abs(tang[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        u = np.cross(tang, ref)
        u /= np.linalg.norm(u)
        v = np.cross(tang, u)
        pts = [p + radius * (math.cos(2 * math.pi * s / 16) * u + math.sin(2 * math.pi * s / 16) * v)
               for s in range(16)]
        loop = Loop(pts)
        cls = classify_link(loop, M)
        if not (cls.simple_link and abs(cls.vector[i]) == 1):
            raise ValueError("meridian verification failed; radius too large for the local reach")
        out.append(loop)
    return out


# ---------------------------------------------------------------------------
# integer kernel check for boundary-map collections


def stacked_kernel_trivial(rows: Sequence[Sequence[int]]) -> bool:
    """True iff the integer kernels of the given maps Z^c -> Z intersect
    trivially (exact fraction elimination on the stacked matrix)."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return False
    cols = len(m[0])
    rank = 0
    for col in range(cols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            return False
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / pv
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == cols:
            return True
    return rank == cols
