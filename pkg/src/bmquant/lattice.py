"""Exact integer and rational polyhedral machinery.

Everything here works over ``int`` and ``fractions.Fraction``; no floating
point enters any decision.  Polytopes are given by halfspaces
``<n, y> >= b`` (or ``>`` when the halfspace is open), and lattice points are
enumerated by recursive coordinate bounding with Fourier-Motzkin projections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import UnboundedError

IntVec = tuple[int, ...]


# ---------------------------------------------------------------------------
# integer vectors


def primitive(v: Sequence[int]) -> IntVec:
    """Divide an integer vector by the gcd of its entries."""
    v = tuple(int(x) for x in v)
    g = math.gcd(*v)
    if g == 0:
        raise ValueError("primitive() of the zero vector")
    return tuple(x // g for x in v)


def is_primitive(v: Sequence[int]) -> bool:
    return math.gcd(*[int(x) for x in v]) == 1


def positive_direction(v: Sequence[int]) -> IntVec:
    """The primitive vector spanning the same line as ``v`` whose first
    nonzero entry is positive."""
    p = primitive(v)
    for x in p:
        if x != 0:
            return p if x > 0 else tuple(-y for y in p)
    raise AssertionError("unreachable")


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def column_hermite(rows: Sequence[Sequence[int]], ncols: int) -> tuple[list[list[int]], list[list[int]], int]:
    """Column-style echelon form of an integer matrix.

    Applies unimodular column operations ``U`` so that ``A @ U`` is lower
    echelon.  Returns ``(A @ U, U, rank)``; the last ``ncols - rank`` columns
    of ``U`` are a basis of the integer kernel of ``A``.
    """
    A = [list(map(int, r)) for r in rows]
    U = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def colop(i: int, j: int, a: int, b: int, c: int, d: int) -> None:
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for M in (A, U):
            for r in M:
                ci, cj = r[i], r[j]
                r[i], r[j] = a * ci + b * cj, c * ci + d * cj

    piv = 0
    for r in range(len(A)):
        if piv >= ncols:
            break
        for j in range(piv + 1, ncols):
            a, b = A[r][piv], A[r][j]
            if b == 0:
                continue
            g, x, y = _xgcd(a, b)
            # new piv col = x*piv + y*j, new j col = -(b/g)*piv + (a/g)*j
            colop(piv, j, x, y, -(b // g), a // g)
        if A[r][piv] != 0:
            if A[r][piv] < 0:
                colop(piv, piv, -1, 0, -1, 0)  # negate column
            piv += 1
    return A, U, piv


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[IntVec]:
    """Basis of ``{y in Z^ncols : A y = 0}``."""
    if not rows:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    _, U, rank = column_hermite(rows, ncols)
    return [tuple(U[i][j] for i in range(ncols)) for j in range(rank, ncols)]


def _lll(basis: list[IntVec], delta: Fraction = Fraction(3, 4)) -> list[IntVec]:
    """Textbook LLL with exact Gram-Schmidt; only used on tiny bases."""
    b = [list(v) for v in basis]
    n = len(b)
    if n <= 1:
        return [tuple(v) for v in b]

    def gso():
        bs, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bs[j])) / dot(bs[j], bs[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
        return bs, mu

    k = 1
    bs, mu = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bs, mu = gso()
        if dot(bs[k], bs[k]) >= (delta - mu[k][k - 1] ** 2) * dot(bs[k - 1], bs[k - 1]):
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bs, mu = gso()
            k = max(k - 1, 1)
    return [tuple(v) for v in b]


@lru_cache(maxsize=4096)
def transverse_functional(u: IntVec) -> IntVec:
    """Integer covector ``g`` with ``g(u) = 1``.

    The choice is deterministic: an extended-gcd solution is size-reduced
    against an LLL-reduced basis of ``u``'s annihilator, then the shortest
    candidate in a small neighbourhood wins, ties broken lexicographically.
    """
    u = tuple(int(x) for x in u)
    if not is_primitive(u):
        raise ValueError(f"transverse_functional needs a primitive vector, got {list(u)}")
    n = len(u)
    _, U, _ = column_hermite([u], n)
    g0 = [U[i][0] for i in range(n)]
    if n == 1:
        return tuple(g0)
    kernel = _lll([tuple(U[i][j] for i in range(n)) for j in range(1, n)])
    for w in reversed(kernel):
        q = round(Fraction(dot(g0, w), dot(w, w)))
        g0 = [a - q * b for a, b in zip(g0, w)]
    best = None
    for coeffs in itertools.product(range(-2, 3), repeat=len(kernel)):
        g = list(g0)
        for c, w in zip(coeffs, kernel):
            if c:
                g = [a + c * b for a, b in zip(g, w)]
        key = (dot(g, g), tuple(g))
        if best is None or key < best:
            best = key
    return best[1]


# ---------------------------------------------------------------------------
# exact rational linear algebra


def rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    M = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    return len(rref(rows, ncols)[1]) if rows else 0


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Rational basis of the right kernel."""
    R, piv = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def integer_scaled(v: Sequence[Fraction]) -> IntVec:
    """Smallest integer vector positively proportional to a rational one."""
    den = math.lcm(*[Fraction(x).denominator for x in v])
    return primitive([int(Fraction(x) * den) for x in v])


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int) -> list[Fraction] | None:
    """Unique solution of a square-rank system, or None if singular."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    R, piv = rref(aug, ncols + 1)
    if len(piv) != ncols or ncols in piv:
        return None
    return [R[i][ncols] for i in range(ncols)]


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Halfspace:
    """``<normal, y> >= bound``; strict ``>`` when ``closed`` is False."""

    normal: IntVec
    bound: Fraction
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(int(x) for x in self.normal))
        object.__setattr__(self, "bound", Fraction(self.bound))
        if not any(self.normal):
            raise ValueError("halfspace normal must be nonzero")

    def value(self, y: Sequence) -> Fraction:
        return dot(self.normal, y) - self.bound

    def contains(self, y: Sequence) -> bool:
        s = self.value(y)
        return s >= 0 if self.closed else s > 0


@dataclass(frozen=True)
class HPolytope:
    halfspaces: tuple[Halfspace, ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", tuple(self.halfspaces))
        for h in self.halfspaces:
            if len(h.normal) != self.dim:
                raise ValueError(f"normal {h.normal} does not live in dimension {self.dim}")

    @classmethod
    def box(cls, lo: Sequence, hi: Sequence) -> "HPolytope":
        d = len(lo)
        hs = []
        for i in range(d):
            e = tuple(int(i == j) for j in range(d))
            hs.append(Halfspace(e, Fraction(lo[i])))
            hs.append(Halfspace(tuple(-x for x in e), -Fraction(hi[i])))
        return cls(tuple(hs), d)

    @classmethod
    def point(cls, p: Sequence[int]) -> "HPolytope":
        return cls.box(p, p)

    def contains(self, y: Sequence) -> bool:
        return all(h.contains(y) for h in self.halfspaces)

    def closure(self) -> "HPolytope":
        return HPolytope(tuple(Halfspace(h.normal, h.bound, True) for h in self.halfspaces), self.dim)

    def translate(self, v: Sequence[int]) -> "HPolytope":
        return HPolytope(
            tuple(Halfspace(h.normal, h.bound + dot(h.normal, v), h.closed) for h in self.halfspaces),
            self.dim,
        )

    def _constraints(self) -> list["_Cons"]:
        return [_Cons(tuple(Fraction(x) for x in h.normal), h.bound, not h.closed) for h in self.halfspaces]


@dataclass(frozen=True)
class _Cons:
    a: tuple[Fraction, ...]
    b: Fraction
    strict: bool

    def trivial_ok(self) -> bool:
        # all-zero row: 0 >= b  (or 0 > b)
        return self.b < 0 if self.strict else self.b <= 0


def _normalize(c: _Cons) -> _Cons:
    s = next((abs(x) for x in c.a if x != 0), None)
    if s is None or s == 1:
        return c
    return _Cons(tuple(x / s for x in c.a), c.b / s, c.strict)


def _dedupe(cons: Iterable[_Cons]) -> list[_Cons] | None:
    """Drop duplicates, keep the tightest bound per normal; None if a
    trivial row is violated."""
    best: dict[tuple, _Cons] = {}
    for c in cons:
        if not any(c.a):
            if not c.trivial_ok():
                return None
            continue
        c = _normalize(c)
        old = best.get(c.a)
        if old is None or c.b > old.b or (c.b == old.b and c.strict and not old.strict):
            best[c.a] = c
    return list(best.values())


def _eliminate(cons: list[_Cons], j: int) -> list[_Cons] | None:
    pos = [c for c in cons if c.a[j] > 0]
    neg = [c for c in cons if c.a[j] < 0]
    out = [c for c in cons if c.a[j] == 0]
    for p in pos:
        for n in neg:
            fp, fn = -n.a[j], p.a[j]
            a = tuple(fp * x + fn * y for x, y in zip(p.a, n.a))
            out.append(_Cons(a, fp * p.b + fn * n.b, p.strict or n.strict))
    return _dedupe(out)


def _feasible(cons: list[_Cons] | None, nvars: int) -> bool:
    cons = _dedupe(cons) if cons is not None else None
    for j in range(nvars):
        if cons is None:
            return False
        cons = _eliminate(cons, j)
    return cons is not None and all(c.trivial_ok() for c in cons)


@lru_cache(maxsize=None)
def polytope_nonempty(p: HPolytope) -> bool:
    """Exact rational feasibility by Fourier-Motzkin elimination."""
    return _feasible(p._constraints(), p.dim)


@lru_cache(maxsize=None)
def is_bounded(p: HPolytope) -> bool:
    """True iff the recession cone ``{n_i . y >= 0}`` is trivial."""
    rec = [_Cons(tuple(Fraction(x) for x in h.normal), Fraction(0), False) for h in p.halfspaces]
    for i in range(p.dim):
        for s in (1, -1):
            e = tuple(Fraction(s * int(i == j)) for j in range(p.dim))
            if _feasible(rec + [_Cons(e, Fraction(1), False)], p.dim):
                return False
    return True


def _var_range(cons: list[_Cons], k: int) -> tuple[int, int] | None:
    """Integer range of variable 0 after projecting out variables 1..k-1."""
    proj = cons
    for j in range(1, k):
        proj = _eliminate(proj, j)
        if proj is None:
            return None
    lo = hi = None
    for c in proj:
        a = c.a[0]
        if a == 0:
            if not c.trivial_ok():
                return None
            continue
        q = c.b / a
        if a > 0:
            v = floor_frac(q) + 1 if c.strict and q.denominator == 1 else ceil_frac(q)
            lo = v if lo is None else max(lo, v)
        else:
            v = ceil_frac(q) - 1 if c.strict and q.denominator == 1 else floor_frac(q)
            hi = v if hi is None else min(hi, v)
    if lo is None or hi is None:
        raise UnboundedError("not compact")
    return lo, hi


def _substitute(cons: list[_Cons], value: int) -> list[_Cons] | None:
    out = []
    for c in cons:
        nc = _Cons(c.a[1:], c.b - c.a[0] * value, c.strict)
        if not any(nc.a) and not nc.trivial_ok():
            return None
        out.append(nc)
    return out


def _enumerate(cons: list[_Cons], k: int, prefix: tuple) -> Iterator[IntVec]:
    if k == 0:
        if all(c.trivial_ok() for c in cons):
            yield prefix
        return
    rng = _var_range(cons, k)
    if rng is None:
        return
    for v in range(rng[0], rng[1] + 1):
        sub = _substitute(cons, v)
        if sub is not None:
            yield from _enumerate(sub, k - 1, prefix + (v,))


@lru_cache(maxsize=None)
def enumerate_lattice_points(p: HPolytope) -> frozenset[IntVec]:
    """All integer points of ``p``, honouring strict facets.

    Raises UnboundedError for a nonempty polytope with nontrivial recession
    cone.
    """
    if not polytope_nonempty(p):
        return frozenset()
    if not is_bounded(p):
        raise UnboundedError("not compact")
    cons = _dedupe(p._constraints())
    if cons is None:
        return frozenset()
    return frozenset(_enumerate(cons, p.dim, ()))


def bounding_box_scan(p: HPolytope, lo: Sequence[int], hi: Sequence[int]) -> frozenset[IntVec]:
    """Naive membership scan, kept as an oracle for the enumerator."""
    axes = [range(a, b + 1) for a, b in zip(lo, hi)]
    return frozenset(y for y in itertools.product(*axes) if p.contains(y))


# ---------------------------------------------------------------------------
# vertices, affine hulls


@lru_cache(maxsize=None)
def implicit_equalities(p: HPolytope) -> tuple[Halfspace, ...]:
    """Halfspaces of the closure that hold with equality everywhere on it."""
    q = p.closure()
    base = q._constraints()
    out = []
    for h in q.halfspaces:
        strictly = _Cons(tuple(Fraction(x) for x in h.normal), h.bound, True)
        if not _feasible(base + [strictly], p.dim):
            out.append(h)
    return tuple(out)


@lru_cache(maxsize=None)
def vertices(p: HPolytope) -> tuple[tuple[Fraction, ...], ...]:
    """Vertices of the closure of a compact polytope (sorted)."""
    q = p.closure()
    if not polytope_nonempty(q):
        return []
    if not is_bounded(q):
        raise UnboundedError("not compact")
    hs = q.halfspaces
    found = set()
    for idx in itertools.combinations(range(len(hs)), p.dim):
        rows = [hs[i].normal for i in idx]
        sol = solve(rows, [hs[i].bound for i in idx], p.dim)
        if sol is not None and q.contains(sol):
            found.add(tuple(sol))
    return tuple(sorted(found))


def affine_directions(points: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Rational basis of the linear span of point differences."""
    if len(points) <= 1:
        return []
    p0 = points[0]
    diffs = [[Fraction(a) - Fraction(b) for a, b in zip(p, p0)] for p in points[1:]]
    R, _ = rref(diffs, len(p0))
    return R


def lattice_basis_of_span(directions: Sequence[Sequence[Fraction]], d: int) -> list[IntVec]:
    """Integer basis of ``span(directions) & Z^d``."""
    if not directions:
        return []
    perp = [integer_scaled(v) for v in nullspace(directions, d)]
    return integer_kernel(perp, d)


# ---------------------------------------------------------------------------
# prisms and shifts


@dataclass(frozen=True)
class Prism:
    """``{x + t u : x in cross_section, t >= start}`` restricted to lattice
    slabs.  ``cross_section`` sits in a lattice hyperplane ``{g = c0}`` and
    ``g(u) = 1``."""

    cross_section: HPolytope
    direction: IntVec
    transverse: IntVec
    start: int

    def __post_init__(self):
        if dot(self.transverse, self.direction) != 1:
            raise ValueError("transverse functional must take the value 1 on the direction")
        if not is_primitive(self.direction):
            raise ValueError("prism direction must be primitive")

    @cached_property
    def level(self) -> Fraction:
        vs = vertices(self.cross_section)
        return dot(self.transverse, vs[0]) if vs else Fraction(0)

    def contains(self, y: Sequence[int]) -> bool:
        t = dot(self.transverse, y) - self.level
        if t.denominator != 1 or t < self.start:
            return False
        t = int(t)
        return self.cross_section.contains([a - t * b for a, b in zip(y, self.direction)])


def prism_first_slab(pr: Prism) -> frozenset[IntVec]:
    """Lattice points of the cross-section moved to the starting slab."""
    u, t = pr.direction, pr.start
    return frozenset(
        tuple(a + t * b for a, b in zip(x, u)) for x in enumerate_lattice_points(pr.cross_section)
    )


def generic_shift(level: Sequence[int], p: HPolytope, reverse: bool = False) -> bool:
    """Membership of ``level`` in ``p`` after an infinitesimal shift.

    The shift is ``t * (1, e, e^2, ...)`` with ``0 < e << 1`` and ``t -> 0+``
    (negated when ``reverse``), so a boundary point is decided by the sign of
    the first nonzero entry of each tight facet normal.
    """
    sgn = -1 if reverse else 1
    for h in p.halfspaces:
        s = h.value(level)
        if s > 0:
            continue
        if s < 0:
            return False
        lead = next(x for x in h.normal if x != 0)
        if sgn * lead < 0:
            return False
    return True


def shift_sensitive(level: Sequence[int], p: HPolytope) -> bool:
    """True when the two opposite shift directions disagree."""
    return generic_shift(level, p) != generic_shift(level, p, reverse=True)
