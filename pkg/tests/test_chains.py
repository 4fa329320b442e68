import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plateau import chains as ch
from plateau.exterior import KVector
from plateau.identities import _basis_prederive, random_chain


@st.composite
def chain_cases(draw):
    n = draw(st.integers(2, 4))
    k = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2 ** 16))
    rng = np.random.default_rng(seed)
    return random_chain(rng, n, k, m=4)


@settings(max_examples=50, deadline=None)
@given(chain_cases())
def test_boundary_squared_zero(J):
    if J.k < 2:
        return
    bb = ch.boundary(ch.boundary(J))
    assert bb.close_to(ch.JetChain.zero(J.n, J.k - 2))


@settings(max_examples=50, deadline=None)
@given(chain_cases())
def test_extrude_retract_anticommutator(J):
    # E_V Ed_W + Ed_W E_V = <V, W> Id for constant fields
    rng = np.random.default_rng(J.n + 17)
    v = rng.normal(size=J.n)
    w = rng.normal(size=J.n)
    V, W = ch.ConstantField(v), ch.ConstantField(w)
    lhs = ch.JetChain.zero(J.n, J.k)
    if J.k < J.n:
        lhs = ch.retract(W, ch.extrude(V, J))
    if J.k > 0:
        lhs = lhs + ch.extrude(V, ch.retract(W, J))
    assert lhs.close_to(float(np.dot(v, w)) * J)


def test_cartan_identity_constant_field():
    rng = np.random.default_rng(23)
    for _ in range(30):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, n))
        J = random_chain(rng, n, k, m=3, maxorder=2)
        v = rng.normal(size=n)
        X = ch.ConstantField(v)
        lhs = ch.extrude(X, ch.boundary(J)) + ch.boundary(ch.extrude(X, J))
        assert lhs.close_to(_basis_prederive(v, J), rel=1e-12)


def test_prederivative_linear_in_direction():
    rng = np.random.default_rng(2)
    J = random_chain(rng, 3, 2, m=4)
    v = rng.normal(size=3)
    assert _basis_prederive(v, J).close_to(_basis_prederive(v, J))
    two = _basis_prederive(2.0 * v, J)
    assert two.close_to(2.0 * _basis_prederive(v, J))


def test_pushforward_respects_composition():
    # points and jets of the two composites differ by float rounding, so
    # compare weakly through pairings instead of element keys
    rng = np.random.default_rng(31)
    prng = random.Random(31)
    J = random_chain(rng, 3, 1, m=4, maxorder=0)
    A1, b1 = rng.normal(size=(3, 3)), rng.normal(size=3)
    A2, b2 = rng.normal(size=(3, 3)), rng.normal(size=3)
    F1 = ch.MapWithJacobian.affine_map(A1, b1)
    F2 = ch.MapWithJacobian.affine_map(A2, b2)
    F21 = ch.MapWithJacobian.affine_map(A2 @ A1, A2 @ b1 + b2)
    lhs = ch.pushforward(F2, ch.pushforward(F1, J))
    rhs = ch.pushforward(F21, J)
    for _ in range(5):
        omega = ch.random_polyform(3, 1, prng, degree=2)
        assert ch.pair(lhs, omega) == pytest.approx(ch.pair(rhs, omega),
                                                    rel=1e-9, abs=1e-9)


def test_box_volume_and_kuhn_split():
    cell = ch.AffineCell.box([0.0, 0.0, 0.0], [2.0, 1.0, 0.5])
    assert cell.volume() == pytest.approx(1.0, rel=1e-12)
    parts = cell.as_simplices()
    assert sum(s.volume() for s in parts) == pytest.approx(1.0, rel=1e-12)


def test_stokes_on_random_cells():
    rng = random.Random(9)
    nrng = np.random.default_rng(9)
    for _ in range(10):
        n = int(nrng.integers(2, 4))
        k = int(nrng.integers(1, n + 1))
        pts = nrng.normal(size=(k + 1, n))
        cell = ch.AffineCell.simplex(pts)
        omega = ch.random_polyform(n, k - 1, rng, degree=3)
        lhs = ch.pair_cells(cell.boundary_cells(), omega)
        rhs = ch.pair_cells([cell], omega.d())
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_cone_join_closes_boundary():
    cell = ch.AffineCell.simplex(np.eye(3)[:, :3][:3])
    q = [0.3, 0.2, 0.1]
    cone = ch.cone_join(cell, q)
    total = ch.boundary_chain(cone)
    # boundary of the cone over sigma = sigma - cone over boundary sigma
    expect = [cell] + [c for f in cell.boundary_cells() for c in ch.cone_join(f, q)]
    vol = sum(abs(c.volume()) for c in total)
    evol = sum(abs(c.volume()) for c in expect)
    assert vol == pytest.approx(evol, rel=1e-9)


def test_canonical_merge_and_close_to():
    a = KVector.basis(2, (1,))
    J1 = ch.JetChain(2, 1, [((0.0, 0.0), a, ()), ((0.0, 0.0), a, ())])
    J2 = ch.JetChain(2, 1, [((0.0, 0.0), 2.0 * a, ())])
    assert J1.close_to(J2)
    assert (J1 + (-1.0) * J2).is_zero()
