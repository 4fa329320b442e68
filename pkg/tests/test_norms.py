import math

import numpy as np
import pytest

from plateau import chains as ch
from plateau.exterior import KVector
from plateau.norms import (b1_flat_exact, br_estimate, br_lower, br_upper,
                           inequality_suite, mass_norm)


def two_point_chain(p, q, wp=1.0, wq=-1.0):
    n = len(p)
    return ch.JetChain(n, 0, [(tuple(p), KVector.scalar(n, wp), ()),
                              (tuple(q), KVector.scalar(n, wq), ())])


def test_mass_norm_of_dirac_sum():
    a = KVector.basis(3, (1, 2))
    J = ch.JetChain(3, 2, [((0, 0, 0), 2.0 * a, ()), ((1, 0, 0), -3.0 * a, ())])
    lo, hi = mass_norm(J)
    assert lo <= 5.0 + 1e-12
    assert hi == pytest.approx(5.0, rel=1e-9)


def test_flat_norm_dipole_is_min_of_distance_and_two():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(2, 4))
        p = rng.uniform(-2, 2, size=n)
        q = rng.uniform(-2, 2, size=n)
        d = float(np.linalg.norm(p - q))
        if d < 1e-9:
            continue
        est = b1_flat_exact(two_point_chain(p, q))
        assert est.value == pytest.approx(min(d, 2.0), rel=1e-9, abs=1e-9)


def test_flat_norm_single_point():
    J = ch.JetChain(2, 0, [((0.3, 0.4), KVector.scalar(2, 2.5), ())])
    assert b1_flat_exact(J).value == pytest.approx(2.5, rel=1e-9)


def test_br_bounds_bracket():
    rng = np.random.default_rng(4)
    for t in range(10):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(0, n + 1))
        els = []
        for _ in range(4):
            p = tuple(rng.uniform(-1, 1, size=n))
            a = KVector(n, k, {idx: float(rng.normal())
                               for idx in __import__("plateau.exterior",
                                                     fromlist=["basis_indices"]).basis_indices(n, k)})
            els.append((p, a, ()))
        J = ch.JetChain(n, k, els)
        for r in (0, 1):
            lo = br_lower(J, r, seed=t)
            up = br_upper(J, r)
            assert lo <= up + 1e-9 * max(1.0, up)


def test_br_decreasing_in_r():
    rng = np.random.default_rng(6)
    p = tuple(rng.uniform(-1, 1, size=3))
    q = tuple(rng.uniform(-1, 1, size=3))
    J = two_point_chain(p, q)
    assert br_upper(J, 1) <= br_upper(J, 0) + 1e-9


def test_inequality_suite_all_sound():
    rows = inequality_suite(seed=2, count=10)
    bad = [r for r in rows if not r["ok"]]
    assert not bad, bad


def test_estimate_interval_ordering():
    J = two_point_chain((0.0, 0.0), (0.5, 0.0))
    est = br_estimate(J, 1, seed=0)
    assert est.lower <= est.upper + 1e-12
