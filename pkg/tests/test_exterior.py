import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plateau.exterior import (KVector, basis_indices, comass_numeric,
                              gram_inner, inner, mass, wedge)


def rand_kvector(rng, n, k):
    return KVector(n, k, {idx: float(rng.normal())
                          for idx in basis_indices(n, k)})


@st.composite
def kvector_pairs(draw):
    n = draw(st.integers(2, 4))
    k = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2 ** 16))
    rng = np.random.default_rng(seed)
    return rand_kvector(rng, n, k), rand_kvector(rng, n, k)


@settings(max_examples=60, deadline=None)
@given(kvector_pairs(), st.floats(-3, 3))
def test_wedge_bilinear(pair, c):
    a, b = pair
    if 2 * a.k > a.n:
        return
    lhs = wedge(c * a + b, b)
    rhs = c * wedge(a, b) + wedge(b, b)
    assert lhs.close_to(rhs, rel=1e-10, abs_tol=1e-10)


@settings(max_examples=60, deadline=None)
@given(kvector_pairs())
def test_wedge_graded_anticommutative(pair):
    a, b = pair
    if 2 * a.k > a.n:
        return
    sign = (-1.0) ** (a.k * b.k)
    assert wedge(a, b).close_to(sign * wedge(b, a))


def test_wedge_associative():
    rng = np.random.default_rng(3)
    for _ in range(40):
        n = int(rng.integers(3, 6))
        ks = rng.integers(0, 2, size=3)
        a, b, c = (rand_kvector(rng, n, int(k)) for k in ks)
        assert wedge(wedge(a, b), c).close_to(wedge(a, wedge(b, c)),
                                              rel=1e-10, abs_tol=1e-10)


def test_inner_matches_gram_determinant():
    rng = np.random.default_rng(5)
    for _ in range(40):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, n + 1))
        us = rng.normal(size=(k, n))
        vs = rng.normal(size=(k, n))
        a = KVector.simple(us, n)
        b = KVector.simple(vs, n)
        assert inner(a, b) == pytest.approx(gram_inner(us, vs), rel=1e-9, abs=1e-9)


def test_mass_of_simple_is_euclidean_norm():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, n + 1))
        us = rng.normal(size=(k, n))
        a = KVector.simple(us, n)
        lo, hi = mass(a)
        want = math.sqrt(max(gram_inner(us, us), 0.0))
        assert lo <= want + 1e-9
        assert hi == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_mass_comass_duality():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, n))
        a = rand_kvector(rng, n, k)
        b = rand_kvector(rng, n, k)
        _, amass = mass(a)
        bco = comass_numeric(b)
        assert abs(inner(a, b)) <= amass * bco + 1e-7


def test_grade_mismatch_rejected():
    a = KVector.basis(3, (1,))
    b = KVector.basis(3, (1, 2))
    with pytest.raises(Exception):
        inner(a, b)
