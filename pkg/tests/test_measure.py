import math

import numpy as np
import pytest

from plateau.constructions import cone_area_bounds, cone_set
from plateau.fixtures import circle_loop, flat_disk
from plateau.linking import BoundarySystem, Loop
from plateau.measure import (clipped_ball_area, density_ratios, lsc_check,
                             slice, spherical_upper, unit_ball_volume,
                             window_area)
from plateau.spanning import FaceComplex, GridDomain


def disk_fixture(h=1.0 / 16):
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), h)
    return dom, M, flat_disk(dom, M, (0, 0, 0), 1.0)


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)


def test_clipped_ball_area_on_plane():
    _, _, X = disk_fixture()
    r = 0.5
    got = clipped_ball_area(X, (0.0, 0.0, 0.0), r)
    assert got == pytest.approx(math.pi * r * r, rel=2e-3)


def test_flat_density_ratio_near_one():
    dom, M, X = disk_fixture()
    h = dom.h
    tab = density_ratios(X, M, U=None,
                         balls=[((0, 0, 0), 8 * h), ((0.1875, 0.0, 0.0), 10 * h)])
    for q in tab.ratios():
        assert q == pytest.approx(1.0, abs=0.03)


def test_slice_integral_below_spherical_measure():
    dom, M, X = disk_fixture(h=1.0 / 32)
    p, r = (0.0, 0.0, 0.0), 0.5
    prof = slice(X, p, r, K=64)
    pts = []
    for f in X.sorted_faces():
        c = np.asarray(dom.face_center(f))
        if np.linalg.norm(c - np.asarray(p)) < r + dom.h:
            for du in (-0.25, 0.25):
                for dv in (-0.25, 0.25):
                    q = c.copy()
                    q[0] += du * dom.h
                    q[1] += dv * dom.h
                    pts.append(q)
    S2 = spherical_upper(np.asarray(pts), 2, delta=r)
    assert prof.F[-1] <= 1.02 * S2


def test_spherical_upper_matches_disk_area():
    rng = np.random.default_rng(0)
    t = rng.uniform(0, 2 * math.pi, size=6000)
    u = np.sqrt(rng.uniform(0, 1, size=6000))
    P = np.stack([u * np.cos(t), u * np.sin(t), np.zeros_like(t)], axis=1)
    coarse = spherical_upper(P, 2, delta=0.5)
    est = spherical_upper(P, 2, delta=0.25)
    assert est <= coarse + 1e-9
    assert math.pi * 0.9 <= est <= math.pi * 1.3


def test_cone_bounds_tight_identity():
    loop = circle_loop((0, 0, 0), 0.8, segments=48)
    cone = cone_set(loop, (0.0, 0.0, 0.6))
    out = cone_area_bounds(cone, r=1.0)
    assert out["tight_identity_gap"] <= 1e-12
    assert out["hausdorff_ok"]
    assert out["spherical_ok"]


def test_window_area_and_lsc():
    dom, M, X = disk_fixture()
    W = ((-0.5, -0.5, -0.25), (0.5, 0.5, 0.25))
    wa = window_area(X, W)
    assert wa == pytest.approx(1.0, abs=3 * dom.h)
    rep = lsc_check([X, X, X], X, [W])
    assert rep["violations"] == []
