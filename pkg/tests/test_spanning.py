import numpy as np
import pytest

from plateau.fixtures import circle_loop, coaxial_circles, flat_disk
from plateau.linking import BoundarySystem
from plateau.spanning import (FaceComplex, GridDomain, PreconditionError,
                              boundary_incidence, certify_spanning, deform,
                              face_components, hnf_rows, in_lattice,
                              lattice_solve, sampled_spanning)

H = 1.0 / 8


def disk_setup(h=H):
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.75, -1.75, -0.75), (1.75, 1.75, 0.75), h)
    X = flat_disk(dom, M, (0, 0, 0), 1.0)
    return dom, M, X


def test_grid_domain_rejects_misaligned_box():
    with pytest.raises(ValueError):
        GridDomain((0, 0, 0), (1.0, 1.0, 0.95), 1.0 / 8)


def test_disk_spans_single_circle():
    _, M, X = disk_setup()
    v = certify_spanning(X, M)
    assert v.spans
    assert v.reverify()


def test_punctured_disk_not_spanning_with_witness():
    dom, M, X = disk_setup()
    hole = [f for f in X.sorted_faces()
            if np.linalg.norm(np.asarray(dom.face_center(f))[:2]) < 0.3]
    Y = X.difference(hole)
    v = certify_spanning(Y, M)
    assert v.status == "NotSpanning"
    assert v.witness is not None
    assert v.reverify()


def test_empty_complex_reports_witness():
    dom, M, X = disk_setup()
    v = certify_spanning(FaceComplex(dom, []), M)
    assert v.status == "NotSpanning"
    assert v.witness is not None


def test_precondition_near_frontier():
    M = BoundarySystem([circle_loop((0, 0, 0), 1.0, segments=96)])
    dom = GridDomain((-1.125, -1.125, -0.5), (1.125, 1.125, 0.5), H)
    with pytest.raises(PreconditionError):
        certify_spanning(FaceComplex(dom, []), M)


def test_sampled_check_consistent_with_certificate():
    _, M, X = disk_setup()
    res = sampled_spanning(X, M, k=30, seed=5)
    assert res.status == "NoWitnessFound"
    assert res.witness is None
    assert res.tried == 30


def test_deform_preserves_verdict():
    dom, M, X = disk_setup()
    for phi in ({"kind": "radial_sphere", "center": (0.0, 0.0, 0.25), "radius": 0.4},
                {"kind": "cube_squash", "cube_lo": (-0.25, -0.25, -0.25), "size": 0.5},
                {"kind": "collapse_free_face", "center": (0.0, 0.0, 0.0), "radius": 0.5}):
        Y = deform(X, phi, M)
        assert certify_spanning(Y, M).spans, phi["kind"]


def test_face_components_and_incidence():
    dom, M, X = disk_setup()
    comps = face_components(X)
    assert len(comps) == 1
    assert boundary_incidence(comps[0], M) == frozenset({0})
    far = [(2, 0, 0, 0), (2, 0, 2, 2)]
    two = FaceComplex(dom, [far[0], far[1], (2, 0, 10, 10)])
    assert len(face_components(two)) >= 2


def test_hnf_and_lattice_membership():
    gens = [[2, 0], [0, 3]]
    assert in_lattice(gens, [4, 3])
    assert not in_lattice(gens, [1, 0])
    sol = lattice_solve(gens, [4, 3])
    assert sol is not None
    got = np.asarray(sol) @ np.asarray(gens)
    assert list(got) == [4, 3]
    Hm, U = hnf_rows([[2, 4], [1, 3]])
    assert (np.asarray(U) @ np.asarray([[2, 4], [1, 3]])).tolist() == Hm
    assert abs(round(np.linalg.det(np.asarray(U, dtype=float)))) == 1


def test_two_component_cylinder_spans():
    M = coaxial_circles(0.5, 1.0, segments=96)
    dom = GridDomain((-1.75, -1.75, -1.0), (1.75, 1.75, 1.0), H)
    from plateau.fixtures import cylinder_triangles, raster_candidate
    tris = cylinder_triangles(1.0, -0.25, 0.25, segments=120, rings=6)
    X = raster_candidate(dom, tris, M)
    v = certify_spanning(X, M)
    assert v.spans
