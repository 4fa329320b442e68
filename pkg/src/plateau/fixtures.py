"""Boundary systems and candidate surfaces used by experiments and tests.

Circles are regular polygons; surfaces are rasterized onto the grid
and trimmed to the certifier's 2h standoff from the boundary curves.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .linking import BoundarySystem, Loop
from .spanning import (FaceComplex, GridDomain, rasterize_triangles,
                       trim_near_system)


def circle_loop(center, radius: float, normal_axis: int = 2, segments: int = 64,
                phase: float = 0.0) -> Loop:
    c = np.asarray(center, dtype=float)
    o1, o2 = ((1, 2), (0, 2), (0, 1))[normal_axis]
    pts = []
    for t in range(segments):
        th = phase + 2.0 * math.pi * t / segments
        p = c.copy()
        p[o1] += radius * math.cos(th)
        p[o2] += radius * math.sin(th)
        pts.append(tuple(p))
    return Loop(pts)


def coaxial_circles(separation: float, radius: float = 1.0, segments: int = 64
                    ) -> BoundarySystem:
    z = separation / 2.0
    return BoundarySystem([circle_loop((0, 0, z), radius, segments=segments),
                           circle_loop((0, 0, -z), radius, segments=segments)])


def three_circles(s12: float, s23: float, radius: float = 1.0, segments: int = 64
                  ) -> BoundarySystem:
    """Coaxial stack: circle 1 on top, 2 in the middle, 3 below."""
    z2 = 0.0
    return BoundarySystem([
        circle_loop((0, 0, z2 + s12), radius, segments=segments),
        circle_loop((0, 0, z2), radius, segments=segments),
        circle_loop((0, 0, z2 - s23), radius, segments=segments),
    ])


# ---------------------------------------------------------------------------
# analytic surfaces as triangle soups


def disk_triangles(center, radius: float, normal_axis: int = 2, segments: int = 96):
    c = np.asarray(center, dtype=float)
    loop = circle_loop(center, radius, normal_axis, segments)
    pts = [np.array(p) for p in loop.points]
    return [(tuple(c), tuple(pts[i]), tuple(pts[(i + 1) % len(pts)]))
            for i in range(len(pts))]


def cylinder_triangles(radius: float, z0: float, z1: float, segments: int = 96,
                       rings: int = 8):
    zs = np.linspace(z0, z1, rings + 1)
    tris = []
    for zi in range(rings):
        for t in range(segments):
            a0 = 2 * math.pi * t / segments
            a1 = 2 * math.pi * (t + 1) / segments
            p00 = (radius * math.cos(a0), radius * math.sin(a0), zs[zi])
            p10 = (radius * math.cos(a1), radius * math.sin(a1), zs[zi])
            p01 = (radius * math.cos(a0), radius * math.sin(a0), zs[zi + 1])
            p11 = (radius * math.cos(a1), radius * math.sin(a1), zs[zi + 1])
            tris += [(p00, p10, p11), (p00, p11, p01)]
    return tris


def catenoid_triangles(radius: float, separation: float, waist: float,
                       segments: int = 96, rings: int = 24):
    """Surface of revolution r(z) = a cosh(z/a) between z = +-sep/2."""
    a = waist
    zs = np.linspace(-separation / 2.0, separation / 2.0, rings + 1)
    tris = []
    for zi in range(rings):
        r0 = a * math.cosh(zs[zi] / a)
        r1 = a * math.cosh(zs[zi + 1] / a)
        for t in range(segments):
            a0 = 2 * math.pi * t / segments
            a1 = 2 * math.pi * (t + 1) / segments
            p00 = (r0 * math.cos(a0), r0 * math.sin(a0), zs[zi])
            p10 = (r0 * math.cos(a1), r0 * math.sin(a1), zs[zi])
            p01 = (r1 * math.cos(a0), r1 * math.sin(a0), zs[zi + 1])
            p11 = (r1 * math.cos(a1), r1 * math.sin(a1), zs[zi + 1])
            tris += [(p00, p10, p11), (p00, p11, p01)]
    return tris


def moebius_band(radius: float = 1.0, width: float = 0.35, segments: int = 72,
                 strips: int = 6):
    def F(t, s):
        return ((radius + s * math.cos(t / 2)) * math.cos(t),
                (radius + s * math.cos(t / 2)) * math.sin(t),
                s * math.sin(t / 2))
    tris = []
    for i in range(segments):
        for j in range(strips):
            t0, t1 = 2 * math.pi * i / segments, 2 * math.pi * (i + 1) / segments
            s0 = -width + 2 * width * j / strips
            s1 = -width + 2 * width * (j + 1) / strips
            a, b, c, dd = F(t0, s0), F(t1, s0), F(t1, s1), F(t0, s1)
            tris += [(a, b, c), (a, c, dd)]
    return tris


def moebius_boundary(radius: float = 1.0, width: float = 0.35, segments: int = 128) -> BoundarySystem:
    def F(t, s):
        return ((radius + s * math.cos(t / 2)) * math.cos(t),
                (radius + s * math.cos(t / 2)) * math.sin(t),
                s * math.sin(t / 2))
    return BoundarySystem([Loop([F(4 * math.pi * t / segments, width) for t in range(segments)])])


# ---------------------------------------------------------------------------
# rasterized candidates


def raster_candidate(domain: GridDomain, triangles, M: BoundarySystem) -> FaceComplex:
    return trim_near_system(rasterize_triangles(domain, triangles), M)


def flat_disk(domain: GridDomain, M: BoundarySystem, center, radius: float,
              normal_axis: int = 2) -> FaceComplex:
    """Grid disk on a coordinate plane, trimmed near M."""
    d = domain
    h = d.h
    i = int(round((center[normal_axis] - d.lo[normal_axis]) / h))
    o1, o2 = ((1, 2), (0, 2), (0, 1))[normal_axis]
    faces = []
    for j in range(d.shape[o1]):
        for k in range(d.shape[o2]):
            f = (normal_axis, i, j, k)
            c = d.face_center(f)
            if math.hypot(c[o1] - center[o1], c[o2] - center[o2]) < radius:
                faces.append(f)
    return trim_near_system(FaceComplex(d, faces), M)


def fig_three_candidates(domain: GridDomain, M: BoundarySystem, s12: float,
                         s23: float, radius: float = 1.0) -> dict:
    """Named candidate pool for the coaxial three-circle system: the
    full tube over all three, tube-plus-disk in both pairings, and
    three flat disks."""
    z1, z2, z3 = s12, 0.0, -s23
    cyl = lambda a, b: cylinder_triangles(radius, a, b, rings=max(4, int((b - a) * 32)))
    pool = {
        "tube_all": raster_candidate(domain, cyl(z3, z1), M),
        "tube_top_disk_bottom": raster_candidate(domain, cyl(z2, z1), M).union(
            flat_disk(domain, M, (0, 0, z3), radius)),
        "tube_bottom_disk_top": raster_candidate(domain, cyl(z3, z2), M).union(
            flat_disk(domain, M, (0, 0, z1), radius)),
        "three_disks": flat_disk(domain, M, (0, 0, z1), radius).union(
            flat_disk(domain, M, (0, 0, z2), radius)).union(
            flat_disk(domain, M, (0, 0, z3), radius)),
    }
    return pool


def classify_three_circle(X: FaceComplex, M: BoundarySystem) -> str:
    """Topology label from face-adjacency components and which circles
    each component approaches."""
    from .spanning import boundary_incidence, face_components
    comps = face_components(X)
    incs = [boundary_incidence(c, M) for c in comps]
    total = X.area()
    # cluster pieces that approach a common circle: the certifier's
    # tube bridges the trim gaps around each boundary component
    parent = list(range(len(comps)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    by_circle: dict = {}
    for ci, inc in enumerate(incs):
        if not inc and comps[ci].area() > 0.01 * total:
            return "other"
        for circle in inc:
            by_circle.setdefault(circle, []).append(ci)
    for members in by_circle.values():
        for m in members[1:]:
            parent[find(m)] = find(members[0])
    clusters: dict = {}
    for ci, inc in enumerate(incs):
        if inc:
            clusters.setdefault(find(ci), set()).update(inc)
    labels = sorted(tuple(sorted(s)) for s in clusters.values())
    if labels == [(0, 1, 2)]:
        return "tube_all"
    if labels == [(0, 1), (2,)]:
        return "tube_top_disk_bottom"
    if labels == [(0,), (1, 2)]:
        return "tube_bottom_disk_top"
    if labels == [(0,), (1,), (2,)]:
        return "three_disks"
    return "other"


def tentacled_disk(domain: GridDomain, M: BoundarySystem, center, radius: float,
                   tentacle_mass: float) -> FaceComplex:
    """Flat disk plus thin vertical spikes of the requested total area.

    Each spike is a single-face-wide column rising from the disk, and
    the columns sit in distinct dyadic cells so that away from the disk
    they are sparse at scale 2h."""
    base = flat_disk(domain, M, center, radius)
    h = domain.h
    n = int(round(tentacle_mass / (h * h)))
    i0 = int(round((center[0] - domain.lo[0]) / h))
    j0 = int((center[1] - domain.lo[1]) / h)
    k0 = int(round((center[2] - domain.lo[2]) / h))
    height = domain.shape[2] - k0 - 1
    offsets = [(1, 0), (-2, 0), (1, 3), (-2, 3), (1, -3), (-2, -3),
               (4, 0), (-5, 0)]
    if height < 1:
        raise ValueError("domain too short for spikes")
    cols = (n + height - 1) // height
    if cols > len(offsets):
        raise ValueError("domain too short for the requested spike mass")
    per = [n // cols + (1 if c < n % cols else 0) for c in range(cols)]
    spikes = []
    for c in range(cols):
        di, dj = offsets[c]
        for kk in range(k0, k0 + per[c]):
            spikes.append((0, i0 + di, j0 + dj, kk))
    return base.union(FaceComplex(domain, spikes))
