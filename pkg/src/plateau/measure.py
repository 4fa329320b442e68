"""Area, sphere slicing, density ratios and regularity diagnostics.

Exact quantities live on FaceComplex candidates: area is |faces|*h^2,
sphere slices of grid faces are circular arcs clipped to rectangles
(analytic arc length), clipped ball areas come from polygon clipping.
Point-cloud estimators (spherical_upper) are sampling-based upper
bound estimates and are documented as non-certified.
"""

from __future__ import annotations

import csv
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from shapely.geometry import Point as _ShPoint, box as _sh_box

from .linking import BoundarySystem
from .spanning import FaceComplex, _others, min_distance_to_system

ALPHA = {0: 1.0, 1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}


def unit_ball_volume(m: int) -> float:
    if m in ALPHA:
        return ALPHA[m]
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)


def area(X: FaceComplex) -> float:
    return X.area()


# ---------------------------------------------------------------------------
# spherical measure estimator for point samples


def spherical_upper(P: np.ndarray, m: int, delta: float, levels: int = 24,
                    shrink: float = 0.4) -> float:
    """Upper-bound estimate of S^m_delta from a dense point sample.

    Multi-scale greedy cover: at radius r pick maximal 2r-separated
    centers among uncovered points, assign each center the points
    within r, then price the ball at its tight radius (half the spread
    of the assigned cluster), so balls mopping up small residues cost
    what the residue is worth.  Non-certified: quality depends on the
    sample covering radius.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P[None, :]
    if len(P) == 0:
        return 0.0
    if delta <= 0:
        raise ValueError("delta must be positive")
    am = unit_ball_volume(m)
    active = P
    total = 0.0
    r = delta / 2.0
    for level in range(levels):
        if len(active) == 0:
            break
        taken = np.zeros(len(active), dtype=bool)
        order = np.lexsort(active.T[::-1])
        chosen: List[np.ndarray] = []
        for i in order:
            if taken[i]:
                continue
            p = active[i]
            if any(float(np.sum((p - c) ** 2)) < 4.0 * r * r for c in chosen):
                continue
            chosen.append(p)
            d = np.linalg.norm(active - p, axis=1)
            grab = (d <= r) & ~taken
            pts = active[grab]
            mid = (pts.min(axis=0) + pts.max(axis=0)) / 2.0
            tight = float(np.max(np.linalg.norm(pts - mid, axis=1)))
            total += am * tight ** m
            taken |= grab
        active = active[~taken]
        r *= shrink
    # survivors beyond the level budget: one zero-radius ball each,
    # negligible for m >= 1 and exact for counting measure
    total += am * 0.0 ** m * len(active) if len(active) else 0.0
    return total


# ---------------------------------------------------------------------------
# sphere slicing


class SliceProfile:
    """Arc length of X on spheres around p, with its radial integral."""

    def __init__(self, center, radii: Sequence[float], lengths: Sequence[float]):
        self.center = tuple(float(x) for x in center)
        self.radii = [float(t) for t in radii]
        self.lengths = [float(x) for x in lengths]
        assert all(x >= -1e-12 for x in self.lengths)
        self.F = [0.0]
        for i in range(1, len(self.radii)):
            dt = self.radii[i] - self.radii[i - 1]
            self.F.append(self.F[-1] + 0.5 * dt * (self.lengths[i] + self.lengths[i - 1]))

    def to_csv(self, path: str):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "length", "F"])
            for r, L, F in zip(self.radii, self.lengths, self.F):
                w.writerow(["%.9g" % r, "%.9g" % L, "%.9g" % F])


def circle_rect_arcs(cx: float, cy: float, rho: float,
                     x0: float, x1: float, y0: float, y1: float) -> List[Tuple[float, float]]:
    """Angular intervals where the circle of radius rho about (cx,cy)
    lies inside the closed rectangle."""
    if rho <= 0.0:
        return []
    # boundary angles where the circle crosses each rectangle side line
    angs = [0.0, 2.0 * math.pi]
    for bound in (x0, x1):
        u = (bound - cx) / rho
        if -1.0 < u < 1.0:
            a = math.acos(u)
            angs.extend([a, 2.0 * math.pi - a])
    for bound in (y0, y1):
        u = (bound - cy) / rho
        if -1.0 < u < 1.0:
            a = math.asin(u)
            angs.extend([a % (2.0 * math.pi), (math.pi - a) % (2.0 * math.pi)])
    angs = sorted(set(angs))
    out = []
    for a, b in zip(angs, angs[1:]):
        t = 0.5 * (a + b)
        px = cx + rho * math.cos(t)
        py = cy + rho * math.sin(t)
        if x0 - 1e-12 <= px <= x1 + 1e-12 and y0 - 1e-12 <= py <= y1 + 1e-12:
            out.append((a, b))
    return out


def circle_rect_arclength(cx: float, cy: float, rho: float,
                          x0: float, x1: float, y0: float, y1: float) -> float:
    """Length of the circle of radius rho about (cx,cy) inside the
    closed rectangle."""
    return rho * sum(b - a for a, b in circle_rect_arcs(cx, cy, rho, x0, x1, y0, y1))


def sphere_slice_length(X: FaceComplex, p, t: float) -> float:
    """Exact length of X intersected with the sphere of radius t."""
    if t <= 0.0:
        return 0.0
    d = X.domain
    h = d.h
    total = 0.0
    for f in X.sorted_faces():
        a = f[0]
        o1, o2 = _others(a)
        c = d.face_center(f)
        dist_n = abs(c[a] - p[a])
        if dist_n >= t:
            continue
        rho = math.sqrt(t * t - dist_n * dist_n)
        total += circle_rect_arclength(p[o1], p[o2], rho,
                                       c[o1] - h / 2, c[o1] + h / 2,
                                       c[o2] - h / 2, c[o2] + h / 2)
    return total


def sphere_slice_curves(X: FaceComplex, p, t: float, seg_angle: float = 0.15):
    """The slice circles of X on the sphere of radius t, sampled into
    polyline chords: list of point arrays, one per arc."""
    if t <= 0.0:
        return []
    d = X.domain
    h = d.h
    curves = []
    for f in X.sorted_faces():
        a = f[0]
        o1, o2 = _others(a)
        c = d.face_center(f)
        dist_n = abs(c[a] - p[a])
        if dist_n >= t:
            continue
        rho = math.sqrt(t * t - dist_n * dist_n)
        arcs = circle_rect_arcs(p[o1], p[o2], rho,
                                c[o1] - h / 2, c[o1] + h / 2,
                                c[o2] - h / 2, c[o2] + h / 2)
        for a0, a1 in arcs:
            n = max(2, int(math.ceil((a1 - a0) / seg_angle)) + 1)
            pts = np.zeros((n, 3))
            th = np.linspace(a0, a1, n)
            pts[:, a] = c[a]
            pts[:, o1] = p[o1] + rho * np.cos(th)
            pts[:, o2] = p[o2] + rho * np.sin(th)
            curves.append(pts)
    return curves


def slice(X: FaceComplex, p, r_max: float, K: int = 64) -> SliceProfile:
    if K < 2:
        raise ValueError("need K >= 2 radii")
    radii = [r_max * i / K for i in range(K + 1)]
    lengths = [sphere_slice_length(X, p, t) for t in radii]
    return SliceProfile(p, radii, lengths)


# ---------------------------------------------------------------------------
# clipped areas and density


def clipped_ball_area(X: FaceComplex, p, r: float) -> float:
    """Exact-in-class area of X inside the closed ball B(p, r): per face
    the planar disk section is clipped to the face square."""
    if r <= 0.0:
        return 0.0
    d = X.domain
    h = d.h
    total = 0.0
    for f in X.sorted_faces():
        a = f[0]
        o1, o2 = _others(a)
        c = d.face_center(f)
        dist_n = abs(c[a] - p[a])
        if dist_n >= r:
            continue
        rho = math.sqrt(r * r - dist_n * dist_n)
        rect = _sh_box(c[o1] - h / 2, c[o2] - h / 2, c[o1] + h / 2, c[o2] + h / 2)
        disk = _ShPoint(p[o1], p[o2]).buffer(rho, quad_segs=256)
        total += rect.intersection(disk).area
    return total


class PlanarSet:
    """Finite union of flat polygonal pieces in arbitrary planes; each
    piece is (origin, u, v, shapely polygon in (u, v) coordinates) with
    u, v an orthonormal in-plane frame."""

    def __init__(self, pieces):
        self.pieces = []
        for origin, u, v, poly in pieces:
            u = np.asarray(u, dtype=float)
            v = np.asarray(v, dtype=float)
            assert abs(u @ u - 1) < 1e-9 and abs(v @ v - 1) < 1e-9 and abs(u @ v) < 1e-9
            self.pieces.append((np.asarray(origin, dtype=float), u, v, poly))

    def clipped_ball_area(self, p, r: float) -> float:
        p = np.asarray(p, dtype=float)
        total = 0.0
        for origin, u, v, poly in self.pieces:
            w = np.cross(u, v)
            dist_n = abs(float((p - origin) @ w))
            if dist_n >= r:
                continue
            rho = math.sqrt(r * r - dist_n * dist_n)
            cx = float((p - origin) @ u)
            cy = float((p - origin) @ v)
            disk = _ShPoint(cx, cy).buffer(rho, quad_segs=256)
            total += poly.intersection(disk).area
        return total


class DensityTable:
    def __init__(self, rows: List[Tuple[Tuple[float, float, float], float, float]]):
        self.rows = rows  # (center, r, ratio)

    def ratios(self) -> List[float]:
        return [r for _, _, r in self.rows]

    def to_csv(self, path: str):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p_x", "p_y", "p_z", "r", "ratio"])
            for p, r, q in self.rows:
                w.writerow(["%.9g" % p[0], "%.9g" % p[1], "%.9g" % p[2], "%.9g" % r, "%.9g" % q])


def density_ratios(X: FaceComplex, M: Optional[BoundarySystem], U, balls) -> DensityTable:
    """Ratios S^2(X(p,r)) / (alpha_2 r^2) over admissible balls: each
    ball must avoid M and stay inside the open box U = (lo, hi)."""
    rows = []
    for p, r in balls:
        p = tuple(float(x) for x in p)
        r = float(r)
        if r <= 0:
            raise ValueError("ball radius must be positive")
        if U is not None:
            lo, hi = U
            if not all(a + r < x < b - r for x, a, b in zip(p, lo, hi)):
                raise ValueError("ball exits U")
        if M is not None:
            dm = float(np.min(min_distance_to_system(np.array([p]), M)))
            if dm <= r:
                raise ValueError("ball meets M")
        if isinstance(X, PlanarSet):
            sec = X.clipped_ball_area(p, r)
        else:
            sec = clipped_ball_area(X, p, r)
        rows.append((p, r, sec / (math.pi * r * r)))
    return DensityTable(rows)


# ---------------------------------------------------------------------------
# regularity and semicontinuity diagnostics


def reifenberg_regular_check(sequence: Sequence[FaceComplex], a: float,
                             eps_schedule: Optional[Sequence[float]] = None,
                             M: Optional[BoundarySystem] = None,
                             U=None, budget: int = 40, r_max: float = 0.5,
                             seed: int = 0) -> dict:
    """Empirical lower-density check: per element k, min over sampled
    admissible balls with r > eps_k of S^2(X_k(p,r)) / r^2, flagged
    against the threshold a."""
    if eps_schedule is None:
        eps_schedule = [2.0 ** (-k) for k in range(1, len(sequence) + 1)]
    rng = np.random.default_rng(seed)
    report = {"rows": [], "violations": [], "a": a}
    for k, X in enumerate(sequence):
        eps = eps_schedule[min(k, len(eps_schedule) - 1)]
        centers = X.face_centers()
        if len(centers) == 0 or eps >= r_max or budget == 0:
            report["rows"].append({"k": k, "eps": eps, "samples": 0, "min_ratio": None,
                                   "note": "no data"})
            continue
        worst = None
        tried = 0
        for _ in range(budget):
            p = centers[int(rng.integers(0, len(centers)))]
            r = float(rng.uniform(eps, r_max))
            if M is not None:
                if float(np.min(min_distance_to_system(np.array([p]), M))) <= r:
                    continue
            if U is not None:
                lo, hi = U
                if not all(av + r < x < bv - r for x, av, bv in zip(p, lo, hi)):
                    continue
            ratio = clipped_ball_area(X, p, r) / (r * r)
            tried += 1
            if worst is None or ratio < worst[0]:
                worst = (ratio, tuple(map(float, p)), r)
        if worst is None:
            report["rows"].append({"k": k, "eps": eps, "samples": 0, "min_ratio": None,
                                   "note": "no data"})
            continue
        row = {"k": k, "eps": eps, "samples": tried, "min_ratio": worst[0],
               "argmin_center": worst[1], "argmin_r": worst[2]}
        report["rows"].append(row)
        if worst[0] < a:
            report["violations"].append(row)
    return report


def window_area(X: FaceComplex, W) -> float:
    """Area of the faces whose centers lie in the open box W."""
    lo, hi = W
    total = 0
    for f in X.sorted_faces():
        c = X.domain.face_center(f)
        if all(a < x < b for x, a, b in zip(c, lo, hi)):
            total += 1
    return total * X.h * X.h


def lsc_check(sequence: Sequence[FaceComplex], X0: FaceComplex, windows,
              tol: float = 1e-12) -> dict:
    """Per window, area(X0 in W) against the tail infimum of
    area(X_k in W); a violation means the limit carries more area than
    the sequence eventually does."""
    report = {"rows": [], "violations": []}
    for W in windows:
        seq_areas = [window_area(X, W) for X in sequence]
        tails = [min(seq_areas[k:]) for k in range(len(seq_areas))] if seq_areas else []
        liminf = tails[0] if tails else 0.0
        a0 = window_area(X0, W)
        row = {"window": W, "area_limit": a0, "liminf": liminf,
               "sequence_areas": seq_areas, "ok": a0 <= liminf + tol}
        report["rows"].append(row)
        if not row["ok"]:
            report["violations"].append(row)
    return report
