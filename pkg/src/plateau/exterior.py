"""Exterior algebra of R^n: grade-k vectors, wedge, inner product, mass.

K-vectors are stored over the lexicographic basis {e_I : I strictly
increasing, I subset of 1..n}.  The inner product extends the Euclidean one
by Gram determinants; the mass norm is reported as a sound interval since
exact mass of a non-simple k-vector is an optimization problem.
"""

from __future__ import annotations

import itertools
import math
from typing import Dict, Iterable, Sequence, Tuple

Index = Tuple[int, ...]

_DROP_REL = 1e-14


class GradeError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class KVector:
    """Immutable grade-k element of Λ^k(R^n)."""

    __slots__ = ("n", "k", "coeffs")

    def __init__(self, n: int, k: int, coeffs: Dict[Index, float] | None = None):
        if n < 1:
            raise DimensionError("ambient dimension must be >= 1")
        if not (0 <= k <= n):
            raise GradeError("grade must satisfy 0 <= k <= n")
        clean: Dict[Index, float] = {}
        if coeffs:
            for idx, c in coeffs.items():
                idx = tuple(idx)
                if len(idx) != k:
                    raise GradeError("index tuple %r has wrong length for grade %d" % (idx, k))
                if any(not (1 <= i <= n) for i in idx):
                    raise DimensionError("index out of range in %r" % (idx,))
                if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
                    raise ValueError("index tuple %r not strictly increasing" % (idx,))
                if c != 0.0:
                    clean[idx] = clean.get(idx, 0.0) + float(c)
        if clean:
            m = max(abs(c) for c in clean.values())
            clean = {i: c for i, c in clean.items() if abs(c) >= _DROP_REL * m and c != 0.0}
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "coeffs", dict(clean))

    def __setattr__(self, *a):
        raise AttributeError("KVector is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(n: int, k: int) -> "KVector":
        return KVector(n, k, {})

    @staticmethod
    def scalar(n: int, value: float) -> "KVector":
        return KVector(n, 0, {(): float(value)})

    @staticmethod
    def basis(n: int, idx: Sequence[int]) -> "KVector":
        return KVector(n, len(idx), {tuple(idx): 1.0})

    @staticmethod
    def from_vector(v: Sequence[float]) -> "KVector":
        n = len(v)
        return KVector(n, 1, {(i + 1,): float(v[i]) for i in range(n) if v[i] != 0.0})

    @staticmethod
    def simple(vectors: Sequence[Sequence[float]], n: int | None = None) -> "KVector":
        """v1 ∧ ... ∧ vk for grade-1 inputs."""
        if n is None:
            n = len(vectors[0])
        out = KVector.scalar(n, 1.0)
        for v in vectors:
            out = out.wedge(KVector.from_vector(list(v)))
        return out

    # -- basic algebra ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "KVector") -> "KVector":
        self._check_match(other)
        c = dict(self.coeffs)
        for i, v in other.coeffs.items():
            c[i] = c.get(i, 0.0) + v
        return KVector(self.n, self.k, c)

    def __sub__(self, other: "KVector") -> "KVector":
        return self + (-1.0) * other

    def __neg__(self) -> "KVector":
        return (-1.0) * self

    def __rmul__(self, s: float) -> "KVector":
        return KVector(self.n, self.k, {i: s * v for i, v in self.coeffs.items()})

    def __mul__(self, s: float) -> "KVector":
        return self.__rmul__(s)

    def _check_match(self, other: "KVector"):
        if self.n != other.n:
            raise DimensionError("ambient dimension mismatch")
        if self.k != other.k:
            raise GradeError("grade mismatch")

    def __eq__(self, other) -> bool:
        if not isinstance(other, KVector):
            return NotImplemented
        return self.n == other.n and self.k == other.k and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, self.k, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        if not self.coeffs:
            return "KVector(n=%d, k=%d, 0)" % (self.n, self.k)
        terms = " + ".join("%.6g*e%s" % (c, "".join(map(str, i))) for i, c in sorted(self.coeffs.items()))
        return "KVector(n=%d, k=%d, %s)" % (self.n, self.k, terms)

    def close_to(self, other: "KVector", rel: float = 1e-12, abs_tol: float = 1e-12) -> bool:
        self._check_match(other)
        keys = set(self.coeffs) | set(other.coeffs)
        scale = max([abs(c) for c in self.coeffs.values()] + [abs(c) for c in other.coeffs.values()] + [0.0])
        tol = max(abs_tol, rel * scale)
        return all(abs(self.coeffs.get(i, 0.0) - other.coeffs.get(i, 0.0)) <= tol for i in keys)


def wedge(a: KVector, b: KVector) -> KVector:
    """Exterior product.  Errors on grade overflow."""
    if a.n != b.n:
        raise DimensionError("ambient dimension mismatch")
    k = a.k + b.k
    if k > a.n:
        raise GradeError("grade overflow")
    out: Dict[Index, float] = {}
    for ia, ca in a.coeffs.items():
        sa = set(ia)
        for ib, cb in b.coeffs.items():
            if sa & set(ib):
                continue
            merged = ia + ib
            sign, sorted_idx = _sort_sign(merged)
            out[sorted_idx] = out.get(sorted_idx, 0.0) + sign * ca * cb
    return KVector(a.n, k, out)


KVector.wedge = lambda self, other: wedge(self, other)  # type: ignore[attr-defined]


def _sort_sign(idx: Index) -> Tuple[int, Index]:
    """Sign of the permutation sorting idx, with the sorted tuple."""
    idx = list(idx)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


def inner(a: KVector, b: KVector) -> float:
    """Inner product; on basis elements e_I . e_J = delta_IJ."""
    a._check_match(b)
    return sum(c * b.coeffs.get(i, 0.0) for i, c in a.coeffs.items())


def gram_inner(us: Sequence[Sequence[float]], vs: Sequence[Sequence[float]]) -> float:
    """det(<u_i, v_j>) for lists of grade-1 vectors (oracle for inner)."""
    k = len(us)
    g = [[sum(ui * vi for ui, vi in zip(u, v)) for v in vs] for u in us]
    return _det(g, k)


def _det(m, k):
    if k == 0:
        return 1.0
    if k == 1:
        return m[0][0]
    total = 0.0
    for j in range(k):
        minor = [[m[i][jj] for jj in range(k) if jj != j] for i in range(1, k)]
        total += ((-1) ** j) * m[0][j] * _det(minor, k - 1)
    return total


def mass(a: KVector) -> Tuple[float, float]:
    """Mass norm interval [lower, upper].

    lower is the Euclidean norm; upper comes from a simple decomposition
    when one is found (exact closed form for grade 2 in R^4), otherwise
    the sum of absolute basis coefficients.  Any k-vector with
    k in {0, 1, n-1, n} is simple, so there lower == upper.
    """
    k, n = a.k, a.n
    lo = math.sqrt(max(0.0, inner(a, a)))
    if k in (0, 1, n - 1, n):
        return (lo, lo)
    if k == 2 and n == 4:
        # alpha splits into two orthogonal simples with masses l1, l2:
        # l1^2 + l2^2 = |alpha|^2 and 2*l1*l2 = |alpha ^ alpha| (4-vector mass)
        sq = inner(a, a)
        pf = mass(wedge(a, a))[0]
        up = math.sqrt(max(0.0, sq + pf))
        return (lo, max(lo, up))
    up = sum(abs(c) for c in a.coeffs.values())
    return (lo, max(lo, up))


def comass_numeric(a: KVector, tries: int = 400, seed: int = 0) -> float:
    """Numeric comass: max <a, simple unit k-vector>, by random restarts
    with coordinate-ascent refinement.  Test oracle, not certified."""
    import random

    rng = random.Random(seed)
    n, k = a.n, a.k
    best = 0.0
    for _ in range(tries):
        vs = [[rng.gauss(0, 1) for _ in range(n)] for _ in range(k)]
        for _ in range(60):
            for i in range(k):
                # optimal v_i given the rest: linear functional on R^n
                grad = []
                for d in range(n):
                    vs_i = list(vs)
                    vs_i[i] = [1.0 if j == d else 0.0 for j in range(n)]
                    grad.append(inner(a, KVector.simple(vs_i, n)))
                norm = math.sqrt(sum(g * g for g in grad))
                if norm < 1e-15:
                    break
                vs[i] = [g / norm for g in grad]
            vs = _orthonormalize(vs)
            if vs is None:
                break
        if vs is not None:
            val = inner(a, KVector.simple(vs, n))
            best = max(best, abs(val))
    return best


def _orthonormalize(vs):
    out = []
    for v in vs:
        w = list(v)
        for u in out:
            d = sum(a * b for a, b in zip(w, u))
            w = [a - d * b for a, b in zip(w, u)]
        norm = math.sqrt(sum(a * a for a in w))
        if norm < 1e-12:
            return None
        out.append([a / norm for a in w])
    return out


def basis_indices(n: int, k: int) -> Iterable[Index]:
    return itertools.combinations(range(1, n + 1), k)
