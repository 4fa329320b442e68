import math

import numpy as np
import pytest

from plateau.fixtures import circle_loop, coaxial_circles
from plateau.linking import (BoundarySystem, Loop, classify_link,
                             gauss_linking, linking_number, meridian_links,
                             stacked_kernel_trivial)


def hopf_pair(phase=0.0):
    a = circle_loop((0, 0, 0), 1.0, normal_axis=2, segments=80, phase=phase)
    b = circle_loop((1, 0, 0), 1.0, normal_axis=1, segments=80, phase=phase)
    return a, b


def torus_link_pair(wind=2, segments=240):
    # two parallel (1, wind) curves on a torus; pairwise linking = wind
    R, r = 2.0, 0.6
    loops = []
    for phase in (0.0, math.pi):
        pts = []
        for i in range(segments):
            t = 2 * math.pi * i / segments
            w = wind * t + phase
            pts.append(((R + r * math.cos(w)) * math.cos(t),
                        (R + r * math.cos(w)) * math.sin(t),
                        r * math.sin(w)))
        loops.append(Loop(pts))
    return loops


def rotated(loop, Q):
    return Loop([tuple(Q @ np.asarray(p)) for p in loop.points])


def test_hopf_link_is_plus_minus_one():
    a, b = hopf_pair()
    lk = linking_number(a, b)
    assert abs(lk) == 1
    assert linking_number(b, a) == lk
    rev = Loop(list(reversed(b.points)))
    assert linking_number(a, rev) == -lk


def test_split_circles_unlinked():
    a = circle_loop((0, 0, 0), 1.0)
    b = circle_loop((4, 0, 0), 1.0)
    assert linking_number(a, b) == 0


def test_torus_link_two_four():
    a, b = torus_link_pair(wind=2)
    assert abs(linking_number(a, b)) == 2


def test_gauss_estimate_matches_integer():
    fixtures = [hopf_pair(), torus_link_pair(wind=2),
                (circle_loop((0, 0, 0), 1.0), circle_loop((4, 0, 0), 1.0))]
    for a, b in fixtures:
        lk = linking_number(a, b)
        assert gauss_linking(a, b) == pytest.approx(lk, abs=1e-4)


def test_rotation_invariance_twenty_directions():
    a, b = hopf_pair()
    base = linking_number(a, b)
    rng = np.random.default_rng(12)
    for _ in range(20):
        A = rng.normal(size=(3, 3))
        Q, _ = np.linalg.qr(A)
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        assert linking_number(rotated(a, Q), rotated(b, Q)) == base


def test_classify_link_vector():
    M = coaxial_circles(2.0, 1.0)
    # meridian of the top circle: links it once, misses the bottom one
    top_center = np.mean(M.components[0].points, axis=0)
    s = circle_loop((1.0, 0.0, float(top_center[2])), 0.4, normal_axis=1,
                    segments=64)
    cls = classify_link(s, M)
    assert sorted(abs(v) for v in cls.vector) == [0, 1]
    assert cls.simple_link


def test_meridians_are_simple_links():
    M = coaxial_circles(1.0, 1.0)
    for i in range(2):
        for loop in meridian_links(M, i, 0.25, 6, seed=3):
            cls = classify_link(loop, M)
            assert abs(cls.vector[i]) == 1
            assert cls.vector[1 - i] == 0


def test_kernel_matrix_triviality():
    assert stacked_kernel_trivial([[1, 0], [0, 1]])
    assert stacked_kernel_trivial([[2, 0], [0, 1], [1, 1]])
    assert not stacked_kernel_trivial([[1, 1], [2, 2]])
    assert not stacked_kernel_trivial([[0, 0]])
