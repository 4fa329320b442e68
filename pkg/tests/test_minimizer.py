import math

import numpy as np
import pytest
from scipy.integrate import quad

from plateau.fixtures import circle_loop, coaxial_circles, flat_disk
from plateau.linking import BoundarySystem
from plateau.minimizer import (best_spanning_area, catenoid_area,
                               catenoid_waist, cone_baseline, local_search,
                               lower_bound_a0, mincut_exact,
                               polygonal_max_curvature, prune_redundant,
                               replay_search, sequence_diagnostics)
from plateau.spanning import GridDomain, certify_spanning

H = 1.0 / 8


def disk_setup():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), H)
    X = prune_redundant(flat_disk(dom, M, (0, 0, 0), 1.0), M)
    return dom, M, X


def test_catenoid_waist_satisfies_shape_equation():
    for sep in (0.3, 0.5, 0.8, 1.0):
        a = catenoid_waist(1.0, sep)
        assert a is not None
        assert a * math.cosh(sep / (2 * a)) == pytest.approx(1.0, abs=1e-9)


def test_catenoid_area_matches_surface_integral():
    # independent oracle: 2 pi integral of y sqrt(1 + y'^2) for y = a cosh(z/a)
    for sep in (0.4, 0.8):
        a = catenoid_waist(1.0, sep)
        want, _ = quad(lambda z: 2 * math.pi * a * math.cosh(z / a)
                       * math.sqrt(1 + math.sinh(z / a) ** 2),
                       -sep / 2, sep / 2)
        assert catenoid_area(1.0, sep) == pytest.approx(want, rel=1e-9)


def test_best_area_crossover():
    area, kind = best_spanning_area(1.0, 0.5)
    assert kind == "catenoid"
    area2, kind2 = best_spanning_area(1.0, 2.0)
    assert kind2 == "two_disks"
    assert area2 == pytest.approx(2 * math.pi, rel=1e-9)


def test_no_catenoid_beyond_critical_separation():
    assert catenoid_waist(1.0, 1.4) is None


def test_curvature_of_polygonal_circle():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=256)])
    assert polygonal_max_curvature(M) == pytest.approx(1.0, rel=5e-3)


def test_lower_bound_positive_and_scaling():
    M = coaxial_circles(1.0, 1.0, segments=128)
    a0 = lower_bound_a0(M, 0, 0.2)
    assert a0 > 0
    assert lower_bound_a0(M, 0, 0.1) < a0


def test_cone_baseline_certifies():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), H)
    X, verdict, c0 = cone_baseline(M, (0.0, 0.0, 0.25), dom)
    assert verdict.spans
    assert X.area() <= c0 + 1e-9


def test_pruned_disk_is_locally_minimal():
    dom, M, X = disk_setup()
    final = local_search(M, X, moves=("face_delete",), budget=50, seed=0)
    assert len(final.moves) == 0
    assert final.complex.area() == pytest.approx(X.area())
    assert final.verdict.spans


def test_replay_reproduces_search():
    dom, M, X = disk_setup()
    final = local_search(M, X, moves=("face_delete",), budget=50, seed=0)
    again = replay_search(M, X, final.log())
    assert again.complex.sorted_faces() == final.complex.sorted_faces()


def test_mincut_single_circle_is_pruned_disk_area():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), H)
    X, verdict = mincut_exact(M, dom)
    assert verdict.spans
    _, _, ref = disk_setup()
    assert X.area() <= ref.area() + 1e-9


def test_mincut_rejects_multicomponent_input():
    M = coaxial_circles(1.0, 1.0)
    dom = GridDomain((-1.75, -1.75, -1.0), (1.75, 1.75, 1.0), H)
    with pytest.raises(ValueError):
        mincut_exact(M, dom)


def test_sequence_diagnostics_reports():
    dom, M, X = disk_setup()
    final = local_search(M, X, moves=("face_delete",), budget=10, seed=0)
    U = ((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75))
    rep = sequence_diagnostics([final], M, U, seed=1)
    assert set(rep) >= {"beta", "reifenberg", "lsc", "warnings", "areas"}
    assert rep["lsc"]["violations"] == []
