"""Mass and B^r norm machinery: sound upper bounds via decomposition
search, certified lower bounds via dual test forms, and an exact LP flat
norm for scalar 0-chains."""

from __future__ import annotations

import itertools
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import chains as ch
from .exterior import KVector, basis_indices, inner, mass


class NormEstimate:
    def __init__(self, lower: float, upper: float, witness_decomposition=None, witness_form=None):
        if lower > upper + 1e-12 * max(1.0, abs(upper)):
            raise ValueError("lower bound exceeds upper bound")
        self.lower = lower
        self.upper = upper
        self.witness_decomposition = witness_decomposition
        self.witness_form = witness_form

    @property
    def value(self) -> float:
        return self.upper

    def __repr__(self):
        return "NormEstimate[%.9g, %.9g]" % (self.lower, self.upper)


# ---------------------------------------------------------------------------
# mass norm


def mass_norm(A: ch.JetChain) -> Tuple[float, float]:
    if A.order > 0:
        raise ValueError("mass norm defined for order-0 chains")
    lo = up = 0.0
    for _, alpha, _ in A.elements:
        l, u = mass(alpha)
        lo += l
        up += u
    return (lo, up)


# ---------------------------------------------------------------------------
# B^r upper bound by greedy germ pairing

_PAIR_RADIUS = 2.0
_DEFAULT_BUDGET = 10 ** 4


class _Germ:
    __slots__ = ("p", "alpha", "us", "mass_up")

    def __init__(self, p, alpha, us, mass_up):
        self.p = p
        self.alpha = alpha
        self.us = us  # multiset (sorted tuple) of difference vectors
        self.mass_up = mass_up

    @property
    def cost(self) -> float:
        c = self.mass_up
        for u in self.us:
            c *= math.dist(u, [0.0] * len(u))
        return c


def br_upper(A: ch.JetChain, r: int, budget: int = _DEFAULT_BUDGET) -> float:
    """Certified upper bound for the B^r norm of an order-0 chain, from
    the best decomposition found by greedy difference-germ pairing."""
    if A.order > 0:
        raise ValueError("br_upper takes order-0 chains")
    best = float("inf")
    for depth in range(r + 1):
        best = min(best, _greedy_depth(A, depth, budget))
    return best


def _greedy_depth(A: ch.JetChain, depth: int, budget: int) -> float:
    germs = [_Germ(p, a, (), mass(a)[1]) for p, a, _ in A.elements]
    nodes = 0
    for level in range(depth):
        improved = True
        while improved and nodes < budget:
            improved = False
            best_gain = 0.0
            best_pair = None
            for i in range(len(germs)):
                gi = germs[i]
                if len(gi.us) != level:
                    continue
                for j in range(i + 1, len(germs)):
                    gj = germs[j]
                    nodes += 1
                    if len(gj.us) != level or gi.us != gj.us:
                        continue
                    if not gj.alpha.close_to(-1.0 * gi.alpha, rel=1e-9):
                        continue
                    d = math.dist(gi.p, gj.p)
                    if d > _PAIR_RADIUS or d == 0.0:
                        continue
                    gain = gi.cost + gj.cost - d * gi.cost
                    if gain > best_gain + 1e-15:
                        best_gain = gain
                        best_pair = (i, j)
                    if nodes >= budget:
                        break
                if nodes >= budget:
                    break
            if best_pair is not None:
                i, j = best_pair
                gi, gj = germs[i], germs[j]
                u = tuple(b - a for a, b in zip(gj.p, gi.p))
                merged = _Germ(gj.p, gi.alpha, tuple(sorted(gi.us + (u,))), gi.mass_up)
                germs = [g for idx, g in enumerate(germs) if idx not in (i, j)] + [merged]
                improved = True
    return sum(g.cost for g in germs)


# ---------------------------------------------------------------------------
# certified dual forms and the B^r lower bound


class DualForm:
    """Scalar profile times a constant basis covector, with certified
    bounds per derivative order: values stored in declared_bounds."""

    def __init__(self, n: int, k: int, idx: tuple, sign: float, declared_bounds: Dict[int, float]):
        self.n = n
        self.k = k
        self.idx = tuple(idx)
        self.sign = float(sign)
        self.declared_bounds = dict(declared_bounds)

    def profile(self, p) -> float:
        return 1.0

    def profile_jet(self, p, dirs) -> float:
        if not dirs:
            return self.profile(p)
        raise ValueError("no derivative oracle for this form")

    def eval_jet(self, p, alpha: KVector, dirs) -> float:
        c = alpha.coeffs.get(self.idx, 0.0)
        if c == 0.0:
            return 0.0
        return self.sign * c * self.profile_jet(p, dirs)


class ConstForm(DualForm):
    def __init__(self, n, k, idx, sign=1.0):
        super().__init__(n, k, idx, sign, {j: (1.0 if j == 0 else 0.0) for j in range(0, 9)})

    def profile_jet(self, p, dirs):
        return 1.0 if not dirs else 0.0


class ClipForm(DualForm):
    """clamp(<u, x - x0>, -1, 1) profile: comass <= 1, Lipschitz <= 1.
    Certified only up to order 1."""

    def __init__(self, n, k, idx, u, x0, sign=1.0):
        super().__init__(n, k, idx, sign, {0: 1.0, 1: 1.0})
        nu = math.sqrt(sum(x * x for x in u))
        self.u = tuple(x / nu for x in u)
        self.x0 = tuple(x0)

    def profile(self, p):
        s = sum(a * (x - y) for a, x, y in zip(self.u, p, self.x0))
        return max(-1.0, min(1.0, s))


class SinForm(DualForm):
    """sin(<u,x> + phase) profile with |u| = 1: every derivative order is
    bounded by 1, so the form is B^r-certified for all r."""

    def __init__(self, n, k, idx, u, phase, sign=1.0):
        super().__init__(n, k, idx, sign, {j: 1.0 for j in range(0, 9)})
        nu = math.sqrt(sum(x * x for x in u))
        self.u = tuple(x / nu for x in u)
        self.phase = float(phase)

    def profile(self, p):
        return math.sin(sum(a * x for a, x in zip(self.u, p)) + self.phase)

    def profile_jet(self, p, dirs):
        t = sum(a * x for a, x in zip(self.u, p)) + self.phase
        j = len(dirs)
        fac = 1.0
        for v in dirs:
            fac *= sum(a * x for a, x in zip(self.u, v))
        cyc = [math.sin, math.cos, lambda s: -math.sin(s), lambda s: -math.cos(s)]
        return cyc[j % 4](t) * fac


def default_form_family(A: ch.JetChain, r: int, seed: int = 0, count: int = 64) -> List[DualForm]:
    rng = np.random.default_rng(seed)
    n, k = A.n, A.k
    forms: List[DualForm] = []
    for idx in basis_indices(n, k):
        forms.append(ConstForm(n, k, idx, 1.0))
        forms.append(ConstForm(n, k, idx, -1.0))
    pts = [p for p, _, _ in A.elements]
    if r >= 1 and A.order == 0:
        for (pa, pb) in itertools.combinations(pts, 2):
            u = [b - a for a, b in zip(pa, pb)]
            if all(x == 0.0 for x in u):
                continue
            mid = [(a + b) / 2 for a, b in zip(pa, pb)]
            for idx in basis_indices(n, k):
                forms.append(ClipForm(n, k, idx, u, mid, 1.0))
                forms.append(ClipForm(n, k, idx, u, mid, -1.0))
    for _ in range(count):
        u = rng.normal(size=n)
        u /= np.linalg.norm(u)
        phase = rng.uniform(0, 2 * math.pi)
        for idx in basis_indices(n, k):
            forms.append(SinForm(n, k, idx, tuple(u), phase))
    return forms


def br_lower(A: ch.JetChain, r: int, forms: Optional[Sequence[DualForm]] = None, seed: int = 0) -> float:
    """Certified lower bound: max pairing over forms with certified
    B^r bounds <= 1."""
    if forms is None:
        forms = default_form_family(A, r, seed=seed)
    best = 0.0
    for w in forms:
        bounds = getattr(w, "declared_bounds", None)
        if not bounds or any(j not in bounds for j in range(r + 1)):
            raise ValueError("form lacks certified bounds up to order %d" % r)
        if max(bounds[j] for j in range(r + 1)) > 1.0 + 1e-12:
            raise ValueError("form bounds exceed 1; not admissible")
        if A.order > 0 and not isinstance(w, (SinForm, ConstForm)):
            continue
        try:
            val = sum(w.eval_jet(p, a, d) for p, a, d in A.elements)
        except ValueError:
            continue
        best = max(best, val)
    return best


def br_estimate(A: ch.JetChain, r: int, budget: int = _DEFAULT_BUDGET, seed: int = 0) -> NormEstimate:
    return NormEstimate(br_lower(A, r, seed=seed), br_upper(A, r, budget))


# ---------------------------------------------------------------------------
# exact flat norm for scalar 0-chains


def b1_flat_exact(A: ch.JetChain) -> NormEstimate:
    """LP optimum of min sum |t_ab| d(a,b) + sum |r_a| reproducing A;
    the flat (bounded-Lipschitz) norm of a scalar Dirac chain."""
    from scipy.optimize import linprog

    if A.k != 0 or A.order > 0:
        raise ValueError("b1_flat_exact takes scalar order-0 chains")
    pts = [p for p, _, _ in A.elements]
    w = [a.coeffs.get((), 0.0) for _, a, _ in A.elements]
    m = len(pts)
    if m == 0:
        return NormEstimate(0.0, 0.0, witness_form={})
    pairs = [(i, j) for i in range(m) for j in range(m) if i != j]
    nt = len(pairs)
    # variables: t_ab >= 0 (one per ordered pair), r+_a, r-_a >= 0
    c = [math.dist(pts[i], pts[j]) for i, j in pairs] + [1.0] * (2 * m)
    aeq = np.zeros((m, nt + 2 * m))
    for col, (i, j) in enumerate(pairs):
        aeq[i, col] += 1.0
        aeq[j, col] -= 1.0
    for a in range(m):
        aeq[a, nt + a] = 1.0
        aeq[a, nt + m + a] = -1.0
    res = linprog(c, A_eq=aeq, b_eq=w, bounds=[(0, None)] * (nt + 2 * m), method="highs")
    if not res.success:
        raise RuntimeError("flat norm LP failed: %s" % res.message)
    dual = {tuple(pts[a]): float(y) for a, y in zip(range(m), res.eqlin.marginals)}
    val = float(res.fun)
    return NormEstimate(val, val, witness_form=dual)


# ---------------------------------------------------------------------------
# operator-norm inequality suite


def _rand_chain(rng, n, k, npts=4, order0=True) -> ch.JetChain:
    elems = []
    for _ in range(npts):
        p = tuple(rng.uniform(-1, 1, size=n))
        coeffs = {}
        for idx in basis_indices(n, k):
            if rng.random() < 0.6:
                coeffs[idx] = rng.uniform(-1, 1)
        alpha = KVector(n, k, coeffs)
        if not alpha.is_zero():
            elems.append((p, alpha, ()))
    if not elems:
        p = tuple(rng.uniform(-1, 1, size=n))
        elems.append((p, KVector.basis(n, tuple(range(1, k + 1))) if k else KVector.scalar(n, 1.0), ()))
    return ch.JetChain(n, k, elems)


def inequality_suite(seed: int = 0, count: int = 20) -> List[dict]:
    """Sound interval checks of the five operator-norm inequalities:
    lower bound of the left side vs. constant times upper bound of the
    right side."""
    rng = np.random.default_rng(seed)
    rows: List[dict] = []
    for t in range(count):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, n + 1))
        r = int(rng.integers(0, 2))
        A = _rand_chain(rng, n, k)
        up = br_upper(A, r)
        xv = rng.uniform(-1, 1, size=n)
        xnorm = float(np.linalg.norm(xv))

        lhs = br_lower(ch.boundary(A), r + 1, seed=t)
        rows.append(_row("boundary", lhs, k * n * up, t))

        if k < n:
            lo = br_lower(ch.extrude(ch.ConstantField(xv), A), r, seed=t)
            rows.append(_row("extrude", lo, (n ** 2) * (2 ** r) * xnorm * up, t))
        lo = br_lower(ch.retract(ch.ConstantField(xv), A), r, seed=t)
        rows.append(_row("retract", lo, k * math.comb(n, k) * xnorm * up, t))

        v = rng.uniform(-1, 1, size=n)
        lo = br_lower(ch.prederive(v, A), r + 1, seed=t)
        rows.append(_row("prederive", lo, float(np.linalg.norm(v)) * up, t))

        a, b = sorted(rng.uniform(-1, 1, size=2))
        if b - a > 1e-9:
            seg = ch.dirac_quadrature(ch.AffineCell.box([a], [b]))
            wed = ch.cartesian_wedge(seg, A)
            lo = br_lower(wed, r, seed=t)
            rows.append(_row("interval_wedge", lo, (b - a) * up, t))
    return rows


def _row(name, lhs, rhs, trial):
    return {"name": name, "lhs_lower": float(lhs), "rhs_bound": float(rhs),
            "ok": bool(lhs <= rhs + 1e-9 * max(1.0, abs(rhs))), "trial": trial}
