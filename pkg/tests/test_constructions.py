import numpy as np
import pytest

from plateau.constructions import (PolyCone, SurgeryRecord, cone_set,
                                   cut_and_cone, grid_squash, haircut,
                                   hull_clamp, raster_tol)
from plateau.fixtures import circle_loop, flat_disk, tentacled_disk
from plateau.linking import BoundarySystem
from plateau.spanning import GridDomain, certify_spanning

H = 1.0 / 8


def disk_setup():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), H)
    return dom, M, flat_disk(dom, M, (0, 0, 0), 1.0)


def test_raster_tol_scales_with_h():
    assert raster_tol(1.0 / 8) == pytest.approx(2 * raster_tol(1.0 / 16))


def test_cone_rasterizes_and_spans():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), H)
    cone = cone_set(M.components[0], (0.0, 0.0, 0.25))
    from plateau.spanning import trim_near_system
    X = trim_near_system(cone.rasterize(dom), M)
    assert X.area() > 0
    assert certify_spanning(X, M).spans


def test_cut_and_cone_keeps_certificate():
    dom, M, X = disk_setup()
    Y, rec = cut_and_cone(X, (0.0, 0.0, 0.0), 0.35, (0.0, 0.0, 0.125), M)
    assert isinstance(rec, SurgeryRecord)
    assert certify_spanning(Y, M).spans
    assert rec.replay(X).sorted_faces() == Y.sorted_faces()


def test_grid_squash_keeps_certificate_and_replays():
    dom, M, X = disk_setup()
    Y, rec = grid_squash(X, (-0.25, -0.25, -0.25), 0.5, M)
    assert certify_spanning(Y, M).spans
    assert rec.replay(X).sorted_faces() == Y.sorted_faces()


def test_hull_clamp_noop_inside_hull():
    dom, M, X = disk_setup()
    Y, rec = hull_clamp(X, M)
    assert Y.area() <= X.area() + 1e-12
    assert certify_spanning(Y, M).spans


def test_haircut_level_must_divide_grid():
    dom, M, X = disk_setup()
    with pytest.raises(ValueError):
        haircut(X, M, 4, 5)


def test_haircut_removes_thin_spikes():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 2.25), H)
    X = tentacled_disk(dom, M, (0, 0, 0), 1.0, tentacle_mass=0.5)
    base = flat_disk(dom, M, (0, 0, 0), 1.0)
    assert X.area() == pytest.approx(base.area() + 0.5, abs=1e-9)
    Y, recs = haircut(X, M, 2, 3, mass_frac=0.5)
    drop = X.area() - Y.area()
    assert drop >= 0.8 * 0.5
    assert certify_spanning(Y, M).spans
