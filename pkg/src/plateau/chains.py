"""Finite differential chains and their operator algebra.

A JetChain is a finite sum of elements (p; alpha; [v1..vj]): a point, a
k-vector weight, and an ordered multiset of prederivative directions.
Order-0 chains are Dirac chains.  The module implements pushforward,
extrusion, retraction, prederivative, boundary, Cartesian wedge and the
cone join on affine cells, together with a pairing against test forms
(exact for polynomial forms via Gauss quadrature).
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .exterior import DimensionError, GradeError, KVector, wedge

Point = Tuple[float, ...]


# ---------------------------------------------------------------------------
# vector fields


class VectorField:
    """Base class; subclasses say whether jets can pass through them."""

    affine = False

    def __call__(self, p: Sequence[float]) -> Tuple[float, ...]:
        raise NotImplementedError

    def jacobian_apply(self, u: Sequence[float]) -> Tuple[float, ...]:
        raise NotImplementedError


class ConstantField(VectorField):
    affine = True

    def __init__(self, v: Sequence[float]):
        self.v = tuple(float(x) for x in v)

    def __call__(self, p):
        return self.v

    def jacobian_apply(self, u):
        return tuple(0.0 for _ in self.v)


class AffineField(VectorField):
    """X(p) = A p + b."""

    affine = True

    def __init__(self, A: Sequence[Sequence[float]], b: Sequence[float]):
        self.A = [tuple(float(x) for x in row) for row in A]
        self.b = tuple(float(x) for x in b)

    def __call__(self, p):
        return tuple(sum(a * x for a, x in zip(row, p)) + bb for row, bb in zip(self.A, self.b))

    def jacobian_apply(self, u):
        return tuple(sum(a * x for a, x in zip(row, u)) for row in self.A)


class CallableField(VectorField):
    """General field; usable on order-0 chains only."""

    def __init__(self, fn: Callable[[Sequence[float]], Sequence[float]]):
        self.fn = fn

    def __call__(self, p):
        return tuple(float(x) for x in self.fn(p))


def as_field(X) -> VectorField:
    if isinstance(X, VectorField):
        return X
    if callable(X):
        return CallableField(X)
    return ConstantField(X)


# ---------------------------------------------------------------------------
# jet chains


def _canon_dirs(dirs: Sequence[Sequence[float]]) -> Tuple[Tuple[float, ...], ...]:
    return tuple(sorted(tuple(float(x) for x in d) for d in dirs))


class JetChain:
    """Finite chain of jet elements; canonical form merges equal (p, dirs)."""

    __slots__ = ("n", "k", "elements")

    def __init__(self, n: int, k: int, elements: Sequence[Tuple[Point, KVector, tuple]] = ()):
        merged: Dict[tuple, KVector] = {}
        for p, alpha, dirs in elements:
            p = tuple(float(x) for x in p)
            if len(p) != n:
                raise DimensionError("point dimension mismatch")
            if alpha.n != n or alpha.k != k:
                raise GradeError("k-vector does not match chain signature")
            dirs = _canon_dirs(dirs)
            key = (p, dirs)
            merged[key] = merged[key] + alpha if key in merged else alpha
        elems = [(p, a, d) for (p, d), a in merged.items() if not a.is_zero()]
        elems.sort(key=lambda e: (e[0], e[2]))
        self.n = n
        self.k = k
        self.elements = elems

    # -- constructors --

    @staticmethod
    def dirac(p: Sequence[float], alpha: KVector) -> "JetChain":
        return JetChain(alpha.n, alpha.k, [(tuple(p), alpha, ())])

    @staticmethod
    def zero(n: int, k: int) -> "JetChain":
        return JetChain(n, k, [])

    # -- structure --

    @property
    def order(self) -> int:
        return max((len(d) for _, _, d in self.elements), default=0)

    def is_zero(self) -> bool:
        return not self.elements

    def __add__(self, other: "JetChain") -> "JetChain":
        if (self.n, self.k) != (other.n, other.k):
            raise GradeError("chain signature mismatch")
        return JetChain(self.n, self.k, self.elements + other.elements)

    def __sub__(self, other: "JetChain") -> "JetChain":
        return self + (-1.0) * other

    def __rmul__(self, s: float) -> "JetChain":
        return JetChain(self.n, self.k, [(p, s * a, d) for p, a, d in self.elements])

    __mul__ = __rmul__

    def __neg__(self):
        return (-1.0) * self

    def close_to(self, other: "JetChain", rel: float = 1e-12) -> bool:
        diff = self - other
        if diff.is_zero():
            return True
        scale = max(
            [max(abs(c) for c in a.coeffs.values()) for _, a, _ in self.elements]
            + [max(abs(c) for c in a.coeffs.values()) for _, a, _ in other.elements]
            + [0.0]
        )
        worst = max(max(abs(c) for c in a.coeffs.values()) for _, a, _ in diff.elements)
        return worst <= rel * max(scale, 1e-300)

    def __repr__(self):
        return "JetChain(n=%d, k=%d, %d elements, order %d)" % (self.n, self.k, len(self.elements), self.order)


# ---------------------------------------------------------------------------
# operators


def extrude(X, J: JetChain) -> JetChain:
    """E_X: (p; alpha) -> (p; X(p) ^ alpha), Leibniz expansion through jets."""
    X = as_field(X)
    if J.k + 1 > J.n:
        raise GradeError("grade overflow")
    out: List[Tuple[Point, KVector, tuple]] = []
    for p, alpha, dirs in J.elements:
        out.extend(_extrude_elem(X, p, alpha, list(dirs), J.n))
    return JetChain(J.n, J.k + 1, out)


def _extrude_elem(X: VectorField, p, alpha, dirs, n):
    if not dirs:
        xv = KVector.from_vector(X(p))
        return [(p, wedge(xv, alpha), ())]
    if not X.affine:
        raise ValueError("unsupported field order")
    # element = P_v(inner); E_X P_v = P_v E_X - E_{DX(v)}
    v = dirs[-1]
    rest = dirs[:-1]
    out = []
    for q, a, d in _extrude_elem(X, p, alpha, rest, n):
        out.append((q, a, tuple(d) + (v,)))
    dxv = X.jacobian_apply(v)
    if any(x != 0.0 for x in dxv):
        for q, a, d in _extrude_elem(ConstantField(dxv), p, alpha, rest, n):
            out.append((q, -1.0 * a, d))
    return out


def _retract_kv(xv: Sequence[float], alpha: KVector) -> KVector:
    out: Dict[tuple, float] = {}
    for idx, c in alpha.coeffs.items():
        for pos, i in enumerate(idx):
            ci = xv[i - 1]
            if ci == 0.0:
                continue
            rem = idx[:pos] + idx[pos + 1:]
            s = (-1.0) ** pos
            out[rem] = out.get(rem, 0.0) + s * ci * c
    return KVector(alpha.n, alpha.k - 1, out)


def retract(X, J: JetChain) -> JetChain:
    """E_X-dagger: termwise interior multiplication by X(p)."""
    X = as_field(X)
    if J.k == 0:
        raise GradeError("grade underflow")
    out: List[Tuple[Point, KVector, tuple]] = []
    for p, alpha, dirs in J.elements:
        out.extend(_retract_elem(X, p, alpha, list(dirs)))
    return JetChain(J.n, J.k - 1, out)


def _retract_elem(X: VectorField, p, alpha, dirs):
    if not dirs:
        return [(p, _retract_kv(X(p), alpha), ())]
    if not X.affine:
        raise ValueError("unsupported field order")
    v = dirs[-1]
    rest = dirs[:-1]
    out = []
    for q, a, d in _retract_elem(X, p, alpha, rest):
        out.append((q, a, tuple(d) + (v,)))
    dxv = X.jacobian_apply(v)
    if any(x != 0.0 for x in dxv):
        for q, a, d in _retract_elem(ConstantField(dxv), p, alpha, rest):
            out.append((q, -1.0 * a, d))
    return out


def prederive(v: Sequence[float], J: JetChain) -> JetChain:
    v = tuple(float(x) for x in v)
    return JetChain(J.n, J.k, [(p, a, d + (v,)) for p, a, d in J.elements])


def boundary(J: JetChain) -> JetChain:
    """∂ = sum_i P_{e_i} E_{e_i}-dagger."""
    if J.k == 0:
        raise GradeError("grade underflow")
    n = J.n
    out = JetChain.zero(n, J.k - 1)
    for i in range(n):
        e = tuple(1.0 if j == i else 0.0 for j in range(n))
        out = out + prederive(e, retract(ConstantField(e), J))
    return out


class MapWithJacobian:
    """Differentiable map with a Jacobian oracle; affine flag gates jets."""

    def __init__(self, fn, jac, affine: bool = False, nout: int | None = None):
        self.fn = fn
        self.jac = jac
        self.affine = affine
        self.nout = nout

    def __call__(self, p):
        return tuple(float(x) for x in self.fn(p))

    @staticmethod
    def affine_map(A: Sequence[Sequence[float]], b: Sequence[float]) -> "MapWithJacobian":
        A = [list(map(float, r)) for r in A]
        b = list(map(float, b))
        return MapWithJacobian(
            fn=lambda p: [sum(a * x for a, x in zip(row, p)) + bb for row, bb in zip(A, b)],
            jac=lambda p: A,
            affine=True,
            nout=len(b),
        )

    @staticmethod
    def scaling(n: int, s: float) -> "MapWithJacobian":
        return MapWithJacobian.affine_map([[s if i == j else 0.0 for j in range(n)] for i in range(n)], [0.0] * n)


def _lambda_k(jac: Sequence[Sequence[float]], alpha: KVector, nout: int) -> KVector:
    """k-th exterior power of the Jacobian applied to alpha."""
    cols = list(zip(*jac))  # cols[i] = image of e_{i+1}
    out = KVector.zero(nout, alpha.k)
    for idx, c in alpha.coeffs.items():
        if alpha.k == 0:
            out = out + KVector.scalar(nout, c)
            continue
        img = KVector.simple([cols[i - 1] for i in idx], nout)
        out = out + c * img
    return out


def pushforward(F: MapWithJacobian, J: JetChain) -> JetChain:
    if J.order > 0 and not F.affine:
        raise ValueError("unsupported field order")
    nout = F.nout if F.nout is not None else J.n
    out = []
    for p, alpha, dirs in J.elements:
        jac = F.jac(p)
        a2 = _lambda_k(jac, alpha, nout)
        d2 = tuple(tuple(sum(r * x for r, x in zip(row, v)) for row in jac) for v in dirs)
        out.append((F(p), a2, d2))
    return JetChain(nout, J.k, out)


def _embed_kv(alpha: KVector, n_total: int, offset: int) -> KVector:
    return KVector(n_total, alpha.k, {tuple(i + offset for i in idx): c for idx, c in alpha.coeffs.items()})


def cartesian_wedge(P: JetChain, Q: JetChain) -> JetChain:
    if P.order > 0 or Q.order > 0:
        raise ValueError("cartesian wedge requires order-0 chains")
    n = P.n + Q.n
    out = []
    for p, a, _ in P.elements:
        for q, b, _ in Q.elements:
            ab = wedge(_embed_kv(a, n, 0), _embed_kv(b, n, P.n))
            out.append((p + q, ab, ()))
    return JetChain(n, P.k + Q.k, out)


# ---------------------------------------------------------------------------
# affine cells


class AffineCell:
    """Oriented affine k-cell: a simplex or an axis-aligned box."""

    def __init__(self, kind: str, data, sign: int = 1, n: int | None = None):
        self.kind = kind
        self.sign = int(sign)
        if kind == "simplex":
            self.vertices = [tuple(float(x) for x in v) for v in data]
            self.n = n or len(self.vertices[0])
            self.k = len(self.vertices) - 1
        elif kind == "box":
            lo, hi = data
            self.lo = tuple(float(x) for x in lo)
            self.hi = tuple(float(x) for x in hi)
            if any(a > b for a, b in zip(self.lo, self.hi)):
                raise ValueError("box corners must satisfy lo <= hi per axis")
            self.n = n or len(self.lo)
            self.axes = [i for i in range(self.n) if self.hi[i] > self.lo[i]]
            self.k = len(self.axes)
        else:
            raise ValueError("unknown cell kind %r" % kind)

    @staticmethod
    def simplex(vertices, sign: int = 1) -> "AffineCell":
        return AffineCell("simplex", vertices, sign)

    @staticmethod
    def box(lo, hi, sign: int = 1) -> "AffineCell":
        return AffineCell("box", (lo, hi), sign)

    def as_simplices(self) -> List["AffineCell"]:
        if self.kind == "simplex":
            return [self]
        # Kuhn triangulation of the box along its free axes
        out = []
        import itertools

        for perm in itertools.permutations(self.axes):
            verts = [self.lo]
            cur = list(self.lo)
            for ax in perm:
                cur = list(cur)
                cur[ax] = self.hi[ax]
                verts.append(tuple(cur))
            s = _perm_sign([self.axes.index(a) for a in perm])
            out.append(AffineCell.simplex(verts, sign=self.sign * s))
        return out

    def boundary_cells(self) -> List["AffineCell"]:
        out = []
        for s in self.as_simplices():
            vs = s.vertices
            for i in range(len(vs)):
                face = vs[:i] + vs[i + 1:]
                out.append(AffineCell.simplex(face, sign=s.sign * ((-1) ** i)))
        return out

    def volume(self) -> float:
        if self.kind == "box":
            v = 1.0
            for i in self.axes:
                v *= self.hi[i] - self.lo[i]
            return v
        vs = np.array(self.vertices)
        e = vs[1:] - vs[0]
        g = e @ e.T
        return math.sqrt(max(0.0, float(np.linalg.det(g)))) / math.factorial(self.k)


def _perm_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


CellChain = List[AffineCell]


def cone_join(sigma: AffineCell, q: Sequence[float]) -> List[AffineCell]:
    """Join with apex q, oriented so kappa*boundary + boundary*kappa = Id."""
    q = tuple(float(x) for x in q)
    out = []
    for s in sigma.as_simplices():
        verts = [q] + s.vertices
        vs = np.array(verts)
        e = vs[1:] - vs[0]
        g = e @ e.T
        if math.sqrt(max(0.0, float(np.linalg.det(g)))) < 1e-14:
            continue
        out.append(AffineCell.simplex(verts, sign=s.sign))
    return out


def boundary_chain(cells: Sequence[AffineCell]) -> List[AffineCell]:
    out: List[AffineCell] = []
    for c in cells:
        out.extend(c.boundary_cells())
    return out


# ---------------------------------------------------------------------------
# polynomials and test forms


class Poly:
    """Sparse multivariate polynomial: {exponent tuple: coefficient}."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[tuple, float] | None = None):
        self.n = n
        self.terms = {tuple(e): float(c) for e, c in (terms or {}).items() if c != 0.0}

    @staticmethod
    def const(n: int, c: float) -> "Poly":
        return Poly(n, {tuple([0] * n): c})

    @staticmethod
    def var(n: int, i: int) -> "Poly":
        e = [0] * n
        e[i] = 1
        return Poly(n, {tuple(e): 1.0})

    def __add__(self, o):
        if isinstance(o, (int, float)):
            o = Poly.const(self.n, o)
        t = dict(self.terms)
        for e, c in o.terms.items():
            t[e] = t.get(e, 0.0) + c
        return Poly(self.n, t)

    def __sub__(self, o):
        return self + (-1.0) * o

    def __mul__(self, o):
        if isinstance(o, (int, float)):
            return Poly(self.n, {e: c * o for e, c in self.terms.items()})
        t: Dict[tuple, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0.0) + c1 * c2
        return Poly(self.n, t)

    __rmul__ = __mul__

    def diff(self, i: int) -> "Poly":
        t: Dict[tuple, float] = {}
        for e, c in self.terms.items():
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = t.get(tuple(e2), 0.0) + c * e[i]
        return Poly(self.n, t)

    def dd(self, v: Sequence[float]) -> "Poly":
        out = Poly(self.n, {})
        for i, vi in enumerate(v):
            if vi != 0.0:
                out = out + vi * self.diff(i)
        return out

    def __call__(self, p: Sequence[float]) -> float:
        total = 0.0
        for e, c in self.terms.items():
            term = c
            for x, a in zip(p, e):
                if a:
                    term *= x ** a
            total += term
        return total

    def compose(self, maps: Sequence["Poly"]) -> "Poly":
        nn = maps[0].n
        out = Poly(nn, {})
        for e, c in self.terms.items():
            term = Poly.const(nn, c)
            for i, a in enumerate(e):
                for _ in range(a):
                    term = term * maps[i]
            out = out + term
        return out

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)


class TestForm:
    """Differential k-form used in pairings.

    comps maps strictly increasing index tuples (1-based) to scalar
    callables; polynomial forms get exact derivative oracles and an exact
    exterior derivative.  declared_bounds[j] bounds the sup of the j-th
    derivative (comass for j = 0).
    """

    def __init__(self, n: int, k: int, comps: Dict[tuple, "Poly"], declared_bounds: Dict[int, float] | None = None):
        self.n = n
        self.k = k
        self.comps = {tuple(i): p for i, p in comps.items()}
        self.declared_bounds = dict(declared_bounds or {})

    def eval(self, p: Sequence[float], alpha: KVector) -> float:
        total = 0.0
        for idx, c in alpha.coeffs.items():
            poly = self.comps.get(idx)
            if poly is not None:
                total += c * poly(p)
        return total

    def eval_jet(self, p: Sequence[float], alpha: KVector, dirs: Sequence[Sequence[float]]) -> float:
        total = 0.0
        for idx, c in alpha.coeffs.items():
            poly = self.comps.get(idx)
            if poly is None:
                continue
            for v in dirs:
                poly = poly.dd(v)
            total += c * poly(p)
        return total

    def d(self) -> "TestForm":
        """Exterior derivative (exact on polynomial components)."""
        from .exterior import _sort_sign

        comps: Dict[tuple, Poly] = {}
        for idx, poly in self.comps.items():
            for j in range(1, self.n + 1):
                if j in idx:
                    continue
                dp = poly.diff(j - 1)
                if not dp.terms:
                    continue
                sign, sidx = _sort_sign((j,) + idx)
                cur = comps.get(sidx, Poly.const(self.n, 0.0))
                comps[sidx] = cur + float(sign) * dp
        return TestForm(self.n, self.k + 1, comps)

    def pullback(self, component_polys: Sequence["Poly"]) -> "TestForm":
        """Pullback under a polynomial map with the given component polys."""
        import itertools

        nn = component_polys[0].n
        jac = [[component_polys[j].diff(i) for j in range(len(component_polys))] for i in range(nn)]
        comps: Dict[tuple, Poly] = {}
        for I in itertools.combinations(range(1, nn + 1), self.k):
            acc = Poly(nn, {})
            for J, poly in self.comps.items():
                minor = _poly_det([[jac[i - 1][j - 1] for j in J] for i in I], nn)
                if minor.terms:
                    acc = acc + poly.compose(component_polys) * minor
            if acc.terms:
                comps[I] = acc
        return TestForm(nn, self.k, comps)

    @property
    def degree(self) -> int:
        return max((p.degree for p in self.comps.values()), default=0)


def _poly_det(m: List[List[Poly]], n: int) -> Poly:
    k = len(m)
    if k == 0:
        return Poly.const(n, 1.0)
    if k == 1:
        return m[0][0]
    total = Poly(n, {})
    for j in range(k):
        minor = [[m[i][jj] for jj in range(k) if jj != j] for i in range(1, k)]
        total = total + float((-1) ** j) * (m[0][j] * _poly_det(minor, n))
    return total


def random_polyform(n: int, k: int, rng, degree: int = 3) -> TestForm:
    import itertools

    comps = {}
    for I in itertools.combinations(range(1, n + 1), k):
        terms = {}
        for _ in range(4):
            e = tuple(rng.randrange(0, degree + 1) for _ in range(n))
            if sum(e) <= degree:
                terms[e] = rng.uniform(-1, 1)
        comps[I] = Poly(n, terms)
    return TestForm(n, k, comps)


# ---------------------------------------------------------------------------
# pairing and cell quadrature

_GAUSS_CACHE: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}


def _gauss01(m: int):
    if m not in _GAUSS_CACHE:
        x, w = np.polynomial.legendre.leggauss(m)
        _GAUSS_CACHE[m] = ((x + 1.0) / 2.0, w / 2.0)
    return _GAUSS_CACHE[m]


def simplex_quadrature(cell: AffineCell, degree: int):
    """Nodes/weights exact for polynomials of total degree <= degree,
    via the Duffy map from the unit cube."""
    vs = np.array(cell.vertices)
    k = cell.k
    if k == 0:
        return [tuple(vs[0])], [float(cell.sign)]
    m = max(1, (degree + k) // 2 + 1)
    x, w = _gauss01(m)
    nodes = []
    weights = []
    import itertools

    for combo in itertools.product(range(m), repeat=k):
        ts = []
        remaining = 1.0
        wt = 1.0
        for j, ci in enumerate(combo):
            t = x[ci] * remaining
            ts.append(t)
            wt *= w[ci] * remaining
            remaining -= t
        p = vs[0] + sum(t * (vs[j + 1] - vs[0]) for j, t in enumerate(ts))
        nodes.append(tuple(p))
        weights.append(cell.sign * wt)
    return nodes, weights


def cell_kvector(cell: AffineCell) -> KVector:
    """Unnormalized k-vector of the parametrization (edge wedge)."""
    s = cell.as_simplices()[0] if cell.kind == "box" else cell
    vs = s.vertices
    if cell.kind == "box":
        # use the box axes directly
        kv = KVector.scalar(cell.n, 1.0)
        for ax in cell.axes:
            kv = wedge(kv, KVector.basis(cell.n, (ax + 1,)))
        return kv
    edges = [[b - a for a, b in zip(vs[0], v)] for v in vs[1:]]
    return KVector.simple(edges, cell.n)


def pair_cell(cell: AffineCell, omega: TestForm, degree: int | None = None) -> float:
    """Integral of omega over the oriented cell, exact for polynomials."""
    deg = degree if degree is not None else max(6, omega.degree + 1)
    total = 0.0
    for s in ([cell] if cell.kind == "simplex" else cell.as_simplices()):
        kv = cell_kvector(s)
        nodes, weights = simplex_quadrature(s, deg)
        total += sum(w * omega.eval(p, kv) for p, w in zip(nodes, weights))
    return total


def pair_cells(cells: Sequence[AffineCell], omega: TestForm, degree: int | None = None) -> float:
    return sum(pair_cell(c, omega, degree) for c in cells)


def pair(J, omega: TestForm, degree: int | None = None) -> float:
    """Pairing <J, omega> for jet chains, single cells or cell chains."""
    if isinstance(J, AffineCell):
        return pair_cell(J, omega, degree)
    if isinstance(J, (list, tuple)):
        return pair_cells(J, omega, degree)
    total = 0.0
    for p, alpha, dirs in J.elements:
        total += omega.eval_jet(p, alpha, dirs)
    return total


def dirac_quadrature(cell: AffineCell, degree: int = 6) -> JetChain:
    """Dirac-quadrature chain representing the cell at pairing level
    for polynomial forms up to the given degree."""
    out = []
    for s in ([cell] if cell.kind == "simplex" else cell.as_simplices()):
        kv = cell_kvector(s)
        nodes, weights = simplex_quadrature(s, degree)
        for p, w in zip(nodes, weights):
            out.append((p, w * kv, ()))
    return JetChain(cell.n, cell.k, out)


def dipole_cell(cell: AffineCell, v: Sequence[float], degree: int = 6) -> JetChain:
    """Pairing-level derivative of translation: d/dt|_0 of (cell + t v)."""
    if all(x == 0.0 for x in v):
        raise ValueError("dipole direction must be nonzero")
    base = dirac_quadrature(cell, degree)
    return prederive(v, base)


# ---------------------------------------------------------------------------
# film chains


def curve_quadrature(loops, degree: int = 2) -> JetChain:
    """Dirac 1-chain quadrature of polygonal loops (weights = tangents)."""
    n = 3
    out = []
    m = max(1, (degree + 1) // 2 + 1)
    x, w = _gauss01(m)
    for loop in loops:
        pts = loop.points if hasattr(loop, "points") else [tuple(map(float, p)) for p in loop]
        for i in range(len(pts)):
            a = np.array(pts[i])
            b = np.array(pts[(i + 1) % len(pts)])
            t = b - a
            for xi, wi in zip(x, w):
                p = a + xi * t
                out.append((tuple(p), wi * KVector.from_vector(t), ()))
    return JetChain(n, 1, out)


def film_chain_quadrature(X, M, Y):
    """(J_X, S_X): positive area-weighted 3-chain of face centroids and the
    film 2-chain S_X = boundary(J_X) + E_Y(M-tilde)."""
    centers = X.face_centers()
    if len(centers) == 0:
        raise ValueError("empty face complex")
    h2 = X.h * X.h
    e123 = KVector.basis(3, (1, 2, 3))
    J = JetChain(3, 3, [(tuple(c), h2 * e123, ()) for c in centers])
    Mt = curve_quadrature(M.loops if hasattr(M, "loops") else M)
    S = boundary(J) + extrude(as_field(Y), Mt)
    return J, S
