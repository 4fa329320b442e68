"""Randomized operator-identity suites over finite chains.

Structural identities are checked exactly on the chain coefficients;
integral identities (Stokes, the cone homotopy) are checked by pairing
cells against random polynomial forms.
"""

from __future__ import annotations

import random
from typing import Dict, List, Sequence

import numpy as np

from . import chains as ch
from .exterior import KVector, basis_indices

STRUCT_TOL = 1e-12
PAIR_TOL = 1e-9


def random_chain(rng: np.random.Generator, n: int, k: int, m: int = 5,
                 maxorder: int = 2) -> ch.JetChain:
    els = []
    for _ in range(m):
        p = tuple(rng.normal(size=n))
        a = KVector(n, k, {idx: float(rng.normal())
                           for idx in basis_indices(n, k)})
        o = int(rng.integers(0, maxorder + 1))
        dirs = tuple(tuple(rng.normal(size=n)) for _ in range(o))
        els.append((p, a, dirs))
    return ch.JetChain(n, k, els)


def _basis_prederive(v, J: ch.JetChain) -> ch.JetChain:
    """P_v decomposed over coordinate directions: the jet bookkeeping
    stores directions verbatim, so linearity in v is applied by hand."""
    out = ch.JetChain.zero(J.n, J.k)
    for i, vi in enumerate(v):
        if vi == 0.0:
            continue
        e = tuple(1.0 if j == i else 0.0 for j in range(J.n))
        out = out + float(vi) * ch.prederive(e, J)
    return out


def check_boundary_squared(rng, trials: int) -> dict:
    fails = 0
    for _ in range(trials):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(2, n + 1))
        J = random_chain(rng, n, k)
        if not ch.boundary(ch.boundary(J)).close_to(ch.JetChain.zero(n, k - 2),
                                                    rel=STRUCT_TOL):
            fails += 1
    return {"name": "boundary_squared_zero", "trials": trials, "failures": fails}


def check_cartan(rng, trials: int) -> dict:
    fails = 0
    for _ in range(trials):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, n))
        J = random_chain(rng, n, k)
        v = tuple(rng.normal(size=n))
        X = ch.ConstantField(v)
        lhs = ch.extrude(X, ch.boundary(J)) + ch.boundary(ch.extrude(X, J))
        if not lhs.close_to(_basis_prederive(v, J), rel=STRUCT_TOL):
            fails += 1
    return {"name": "extrude_boundary_anticommutator", "trials": trials,
            "failures": fails}


def check_clifford(rng, trials: int) -> dict:
    fails = 0
    for t in range(trials):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, n))
        if t % 2 == 0:
            V = ch.ConstantField(tuple(rng.normal(size=n)))
            W = ch.ConstantField(tuple(rng.normal(size=n)))
            J = random_chain(rng, n, k)
        else:
            V = ch.AffineField(rng.normal(size=(n, n)).tolist(),
                               tuple(rng.normal(size=n)))
            W = ch.AffineField(rng.normal(size=(n, n)).tolist(),
                               tuple(rng.normal(size=n)))
            J = random_chain(rng, n, k, maxorder=0)
        lhs = ch.retract(W, ch.extrude(V, J)) + ch.extrude(V, ch.retract(W, J))
        rhs = ch.JetChain(n, k, [(p, float(np.dot(V(p), W(p))) * a, d)
                                 for p, a, d in J.elements])
        if not lhs.close_to(rhs, rel=STRUCT_TOL):
            fails += 1
    return {"name": "retract_extrude_anticommutator", "trials": trials,
            "failures": fails}


def _random_cell(rng, n: int, k: int) -> ch.AffineCell:
    if rng.random() < 0.5:
        verts = rng.normal(size=(k + 1, n))
        return ch.AffineCell.simplex([tuple(v) for v in verts])
    lo = rng.normal(size=n)
    hi = lo.copy()
    axes = rng.choice(n, size=k, replace=False)
    for a in axes:
        hi[a] += float(rng.uniform(0.2, 1.0))
    return ch.AffineCell.box(tuple(lo), tuple(hi))


def check_cone_homotopy(rng, trials: int) -> dict:
    fails = 0
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, n))
        sig = _random_cell(rng, n, k)
        q = tuple(rng.normal(size=n))
        om = ch.random_polyform(n, k, random.Random(int(rng.integers(1 << 31))),
                                degree=3)
        kd = ch.cone_join(sig, q)
        v1 = ch.pair_cells(ch.boundary_chain(kd), om)
        kdk: List[ch.AffineCell] = []
        for c in ch.boundary_chain([sig]):
            if c.k >= 1:
                kdk.extend(ch.cone_join(c, q))
            else:
                kdk.append(c)
        v2 = ch.pair_cells(kdk, om) if k >= 2 else ch.pair_cells(
            [cc for cc in kdk if cc.k == k], om)
        if k == 1:
            # boundary of an edge is a 0-chain; its cone is degenerate,
            # the homotopy contributes the endpoints coned to segments
            v2 = ch.pair_cells([s for c in ch.boundary_chain([sig])
                                for s in ch.cone_join(c, q)], om)
        v0 = ch.pair_cells([sig], om)
        err = abs(v1 + v2 - v0) / max(1.0, abs(v0))
        worst = max(worst, err)
        if err > PAIR_TOL:
            fails += 1
    return {"name": "cone_homotopy_identity", "trials": trials,
            "failures": fails, "max_rel_err": worst}


def check_stokes(rng, trials: int) -> dict:
    fails = 0
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, n))
        sig = _random_cell(rng, n, k)
        om = ch.random_polyform(n, k - 1, random.Random(int(rng.integers(1 << 31))),
                                degree=int(rng.integers(1, 5)))
        lhs = ch.pair_cells(ch.boundary_chain([sig]), om)
        rhs = ch.pair_cells([sig], om.d())
        err = abs(lhs - rhs) / max(1.0, abs(rhs))
        worst = max(worst, err)
        if err > PAIR_TOL:
            fails += 1
    return {"name": "stokes_on_cells", "trials": trials, "failures": fails,
            "max_rel_err": worst}


SUITES = {
    "boundary": check_boundary_squared,
    "cartan": check_cartan,
    "clifford": check_clifford,
    "cone": check_cone_homotopy,
    "stokes": check_stokes,
}


def run_suite(suite: str = "all", seed: int = 0, trials: int = 125) -> List[dict]:
    rng = np.random.default_rng(seed)
    names = list(SUITES) if suite == "all" else [suite]
    out = []
    for name in names:
        if name not in SUITES:
            raise ValueError("unknown suite %r" % (name,))
        out.append(SUITES[name](rng, trials))
    return out
