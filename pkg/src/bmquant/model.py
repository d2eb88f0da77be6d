"""Combinatorial description of a fully toric b^m-symplectic manifold.

``M \\ Z`` is a set of pieces, each carrying the compact parts of its moment
image as rational polytopes; every component of ``Z`` carries its modular
ratios, the primitive leading direction ``a_hat`` and the Delzant polytope of
its symplectic leaf.  Pieces and Z components form a multigraph whose
connectivity and parity drive the orientation signs.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import NonOrientableError, UnboundedError
from .lattice import (
    HPolytope,
    IntVec,
    affine_directions,
    dot,
    enumerate_lattice_points,
    implicit_equalities,
    integer_scaled,
    is_bounded,
    is_primitive,
    lattice_basis_of_span,
    nullspace,
    polytope_nonempty,
    primitive,
    vertices,
)


@dataclass(frozen=True)
class Piece:
    id: str
    regions: tuple[HPolytope, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))


@dataclass(frozen=True)
class ZComponent:
    """One component of Z with its collar data.

    ``side_plus_piece`` lies on the ``x > 0`` side of the collar.  The
    optional ``leaf_polytope_minus`` only exists so that inconsistent data
    can be represented and rejected; valid specs leave it unset.
    """

    id: str
    modular_ratios: tuple[Fraction, ...]
    a_hat: IntVec
    leaf_polytope: HPolytope
    side_plus_piece: str
    side_minus_piece: str
    threshold_override: Fraction | None = None
    leaf_polytope_minus: HPolytope | None = None

    def __post_init__(self):
        object.__setattr__(self, "modular_ratios", tuple(Fraction(r) for r in self.modular_ratios))
        object.__setattr__(self, "a_hat", tuple(int(x) for x in self.a_hat))
        if self.threshold_override is not None:
            object.__setattr__(self, "threshold_override", Fraction(self.threshold_override))

    @property
    def m(self) -> int:
        return len(self.modular_ratios)

    def leaf(self, side: int) -> HPolytope:
        if side < 0 and self.leaf_polytope_minus is not None:
            return self.leaf_polytope_minus
        return self.leaf_polytope

    def modular_weights(self) -> list[tuple[Fraction, ...]]:
        return [tuple(r * a for a in self.a_hat) for r in self.modular_ratios]


@dataclass(frozen=True)
class ManifoldSpec:
    m: int
    d: int
    pieces: tuple[Piece, ...] = ()
    z_components: tuple[ZComponent, ...] = ()
    base_piece: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "z_components", tuple(self.z_components))

    def piece(self, pid: str) -> Piece:
        for p in self.pieces:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def z(self, zid: str) -> ZComponent:
        for z in self.z_components:
            if z.id == zid:
                return z
        raise KeyError(zid)


@dataclass(frozen=True)
class Issue:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, location: str, message: str) -> None:
        self.issues.append(Issue(location, message))

    def messages(self) -> list[str]:
        return [str(i) for i in self.issues]

    def __contains__(self, text: str) -> bool:
        return any(text in str(i) for i in self.issues)

    def __str__(self) -> str:
        return "OK" if self.ok else "\n".join(self.messages())


OrientationAssignment = dict


# ---------------------------------------------------------------------------
# Delzant condition


@lru_cache(maxsize=None)
def delzant_check(p: HPolytope) -> bool:
    """Delzant condition in the lattice of the polytope's affine span.

    At every vertex, the primitive inward normals of the facets through it
    (restricted to the span) must form a lattice basis.  A point is Delzant.
    """
    q = p.closure()
    if not polytope_nonempty(q):
        raise ValueError("empty polytope")
    if not is_bounded(q):
        raise UnboundedError("not compact")
    verts = vertices(q)
    dirs = affine_directions(verts)
    k = len(dirs)
    if k == 0:
        return True
    basis = lattice_basis_of_span(dirs, p.dim)
    implicit = {(h.normal, h.bound) for h in implicit_equalities(q)}
    facets: dict[frozenset, IntVec] = {}
    for h in q.halfspaces:
        if (h.normal, h.bound) in implicit:
            continue
        tight = frozenset(v for v in verts if dot(h.normal, v) == h.bound)
        if len(tight) < k:
            continue
        if len(affine_directions(sorted(tight))) != k - 1:
            continue
        restricted = tuple(dot(h.normal, b) for b in basis)
        facets.setdefault(tight, primitive(restricted))
    for v in verts:
        normals = [n for tight, n in facets.items() if v in tight]
        if len(normals) != k:
            return False
        det = _int_det([list(n) for n in normals])
        if abs(det) != 1:
            return False
    return True


def _int_det(M: list[list[int]]) -> int:
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    return sum((-1) ** j * M[0][j] * _int_det([row[:j] + row[j + 1 :] for row in M[1:]]) for j in range(n))


@lru_cache(maxsize=None)
def leaf_functional(z: ZComponent, d: int) -> IntVec | None:
    """Primitive integer covector constant on the leaf polytope, normalised
    so that it takes a positive value on ``a_hat``.  None if the leaf is not
    a hyperplane section."""
    verts = vertices(z.leaf_polytope)
    dirs = affine_directions(verts)
    if len(dirs) != d - 1:
        return None
    normal = nullspace(dirs, d) if dirs else [[Fraction(1)]]
    g = integer_scaled(normal[0])
    s = dot(g, z.a_hat)
    if s == 0:
        return None
    return g if s > 0 else tuple(-x for x in g)


def leaf_level(z: ZComponent, d: int) -> Fraction | None:
    g = leaf_functional(z, d)
    verts = vertices(z.leaf_polytope)
    if g is None or not verts:
        return None
    return dot(g, verts[0])


# ---------------------------------------------------------------------------
# signs


def _edges(spec: ManifoldSpec) -> list[tuple[str, str, str]]:
    return [(z.id, z.side_plus_piece, z.side_minus_piece) for z in spec.z_components]


def propagate_signs(spec: ManifoldSpec, rng: random.Random | None = None) -> OrientationAssignment:
    """Orientation signs of the pieces relative to the base piece.

    Crossing a Z component multiplies the sign by ``(-1)**m``.  A spec may
    be a disjoint union; each component without the base piece is pinned at
    its first listed piece.  ``rng`` shuffles the traversal order, which must
    not change the result.
    """
    if not spec.pieces:
        return {}
    flip = -1 if spec.m % 2 else 1
    adj: dict[str, list[str]] = {p.id: [] for p in spec.pieces}
    for _, a, b in _edges(spec):
        adj[a].append(b)
        if a != b:
            adj[b].append(a)
    for v in adj.values():
        if rng is not None:
            rng.shuffle(v)
    signs: OrientationAssignment = {}
    # components not containing the base piece are pinned at their first listed piece
    roots = [spec.base_piece] + [p.id for p in spec.pieces]
    for root in roots:
        if root in signs:
            continue
        signs[root] = 1
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in signs:
                    signs[w] = signs[u] * flip
                    queue.append(w)
    for zid, a, b in _edges(spec):
        if a in signs and b in signs and signs[a] * flip != signs[b]:
            raise NonOrientableError(f"non-orientable configuration: crossing {zid} is inconsistent")
    return signs


# ---------------------------------------------------------------------------
# integrality and validation


def _integral_vertices(p: HPolytope) -> bool:
    return all(x.denominator == 1 for v in vertices(p) for x in v)


def integrality_issues(spec: ManifoldSpec) -> list[Issue]:
    out = []
    for z in spec.z_components:
        for j, w in enumerate(z.modular_weights(), start=1):
            if any(x.denominator != 1 for x in w):
                out.append(Issue(f"z[{z.id}]", f"modular weight a_{j} = {[str(x) for x in w]} is not integral"))
        for side in (1, -1):
            leaf = z.leaf(side)
            try:
                if polytope_nonempty(leaf) and is_bounded(leaf) and not _integral_vertices(leaf):
                    out.append(Issue(f"z[{z.id}]", "leaf polytope has a non-lattice vertex"))
            except UnboundedError:
                pass
            if z.leaf_polytope_minus is None:
                break
    for p in spec.pieces:
        for i, r in enumerate(p.regions):
            if polytope_nonempty(r) and is_bounded(r) and not _integral_vertices(r):
                out.append(Issue(f"piece[{p.id}].regions[{i}]", "region has a non-lattice vertex"))
    return out


def check_integrality(spec: ManifoldSpec) -> bool:
    return not integrality_issues(spec)


def _polytope_issues(p: HPolytope, d: int, where: str, report: ValidationReport) -> bool:
    if p.dim != d:
        report.add(where, f"polytope lives in dimension {p.dim}, expected {d}")
        return False
    if not polytope_nonempty(p):
        report.add(where, "polytope is empty")
        return False
    if not is_bounded(p):
        report.add(where, "polytope is not compact")
        return False
    if not delzant_check(p):
        report.add(where, "polytope is not Delzant")
        return False
    return True


def validate_spec(spec: ManifoldSpec, check_overlaps: bool = True) -> ValidationReport:
    """Every violated standing hypothesis, with its location."""
    report = ValidationReport()
    if spec.m < 1:
        report.add("spec", "m must be a positive integer")
    if spec.d < 1:
        report.add("spec", "d must be a positive integer")
    if not report.ok:
        return report

    ids = [p.id for p in spec.pieces]
    if len(set(ids)) != len(ids):
        report.add("pieces", "piece identifiers are not unique")
    zids = [z.id for z in spec.z_components]
    if len(set(zids)) != len(zids):
        report.add("z_components", "Z component identifiers are not unique")
    if spec.pieces and spec.base_piece not in ids:
        report.add("spec", f"base_piece {spec.base_piece!r} is not a piece")
    for z in spec.z_components:
        for name in (z.side_plus_piece, z.side_minus_piece):
            if name not in ids:
                report.add(f"z[{z.id}]", f"references unknown piece {name!r}")

    for p in spec.pieces:
        good = []
        for i, r in enumerate(p.regions):
            if _polytope_issues(r, spec.d, f"piece[{p.id}].regions[{i}]", report):
                good.append((i, r))
        for a in range(len(good)):
            for b in range(a + 1, len(good)):
                (i, r), (j, s) = good[a], good[b]
                if enumerate_lattice_points(r) & enumerate_lattice_points(s):
                    report.add(f"piece[{p.id}]", f"regions {i} and {j} are not lattice-disjoint")

    for z in spec.z_components:
        where = f"z[{z.id}]"
        if z.m != spec.m:
            report.add(where, f"expected {spec.m} modular ratios, got {z.m}")
        elif z.modular_ratios[-1] == 0:
            report.add(where, "leading modular weight is zero")
        if len(z.a_hat) != spec.d:
            report.add(where, f"a_hat must have {spec.d} entries")
            continue
        if not any(z.a_hat) or not is_primitive(z.a_hat):
            report.add(where, "a_hat not primitive")
        if z.threshold_override is not None and z.threshold_override <= 0:
            report.add(where, "threshold_override must be positive")
        if _polytope_issues(z.leaf_polytope, spec.d, f"{where}.leaf_polytope", report):
            g = leaf_functional(z, spec.d)
            if g is None:
                report.add(where, "leaf polytope must span a hyperplane transverse to a_hat")
            elif dot(g, z.a_hat) != 1:
                report.add(where, "leaf hyperplane is not a lattice complement of a_hat")
        if z.leaf_polytope_minus is not None:
            same = (
                z.leaf_polytope_minus.dim == spec.d
                and polytope_nonempty(z.leaf_polytope_minus)
                and is_bounded(z.leaf_polytope_minus)
                and enumerate_lattice_points(z.leaf_polytope_minus) == enumerate_lattice_points(z.leaf_polytope)
            )
            if not same:
                report.add(where, "leaf polytopes differ across the two sides")

    for issue in integrality_issues(spec):
        report.issues.append(issue)

    if report.ok and spec.pieces:
        try:
            propagate_signs(spec)
        except NonOrientableError as exc:
            report.add("spec", str(exc))

    if report.ok and check_overlaps:
        from .quantize import overlap_issues

        for issue in overlap_issues(spec):
            report.issues.append(issue)
    return report
