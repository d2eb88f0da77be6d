"""Formal quantization of a fully toric spec and the theorem checkers.

``Q(M)`` is assembled from two kinds of contributions:

* pieces: every lattice point of every compact region, weighted by the
  piece's orientation sign;
* ends: near each side of each Z component the moment image is the leaf
  polytope swept along ``escape * a_hat``; every integral slab beyond the
  certified collar radius is a copy of the leaf, so each leaf lattice point
  starts a ray.

The checkers compare the canonical module against brute-force evaluations
of the raw contributions, which never go through canonicalisation.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import FinitenessViolation, NonProperRestrictionError, OverlapError, SpecError
from .laurent import collar_form, collar_start, escape_direction, monotonicity_threshold
from .lattice import HPolytope, IntVec, Prism, dot, enumerate_lattice_points, prism_first_slab, rank
from .model import Issue, ManifoldSpec, ZComponent, leaf_functional, propagate_signs, validate_spec
from .virtmod import (
    AsymptoticProfile,
    Infinite,
    Ray,
    VirtualTModule,
    _ray_index,
    asymptotic_profile,
    canonicalize,
    dim,
    pair_with_finite,
    restrict,
    sum_modules,
)


@dataclass(frozen=True)
class EndContribution:
    z_id: str
    side: int
    prism: Prism
    sign: int

    def rays(self) -> list[Ray]:
        return [Ray(p, self.prism.direction, self.sign) for p in sorted(prism_first_slab(self.prism))]

    def module(self, d: int) -> VirtualTModule:
        return canonicalize(d, {}, self.rays())


def _piece_on(z: ZComponent, side: int) -> str:
    return z.side_plus_piece if side > 0 else z.side_minus_piece


def end_prism(spec: ManifoldSpec, z: ZComponent, side: int, signs: dict | None = None) -> EndContribution:
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    signs = signs if signs is not None else propagate_signs(spec)
    cf = collar_form(z)
    e = escape_direction(cf, side)
    radius = z.threshold_override if z.threshold_override is not None else monotonicity_threshold(cf)
    start = collar_start(cf, side, radius)
    if spec.m % 2:
        # both ends escape the same way; cut the collar at a common moment
        # level so the neighbourhood of Z is a superlevel set of the profile
        start = max(start, collar_start(cf, -side, radius))
    g = leaf_functional(z, spec.d)
    u = tuple(e * a for a in z.a_hat)
    prism = Prism(z.leaf(side), u, tuple(e * x for x in g), start)
    return EndContribution(z.id, side, prism, signs[_piece_on(z, side)])


def end_contribution(spec: ManifoldSpec, z: ZComponent | str, side: int) -> VirtualTModule:
    z = spec.z(z) if isinstance(z, str) else z
    return end_prism(spec, z, side).module(spec.d)


def piece_contribution(spec: ManifoldSpec, piece, signs: dict | None = None) -> VirtualTModule:
    piece = spec.piece(piece) if isinstance(piece, str) else piece
    signs = signs if signs is not None else propagate_signs(spec)
    s = signs[piece.id]
    fin: dict[IntVec, int] = {}
    for r in piece.regions:
        for x in enumerate_lattice_points(r):
            fin[x] = fin.get(x, 0) + s
    return canonicalize(spec.d, fin, ())


def overlap_issues(spec: ManifoldSpec) -> list[Issue]:
    """Regions of a piece must not meet each other nor the piece's ends.

    Ends may overlap each other: a piece whose moment map folds back covers
    those levels twice, and both preimages count.
    """
    out = []
    signs = propagate_signs(spec)
    ends = [end_prism(spec, z, s, signs) for z in spec.z_components for s in (1, -1)]
    for p in spec.pieces:
        pts = [(i, enumerate_lattice_points(r)) for i, r in enumerate(p.regions)]
        for (i, a), (j, b) in itertools.combinations(pts, 2):
            if a & b:
                out.append(Issue(f"piece[{p.id}]", f"overlapping regions: regions[{i}] and regions[{j}]"))
        mine = [e for e in ends if _piece_on(spec.z(e.z_id), e.side) == p.id]
        for i, a in pts:
            for e in mine:
                hit = sorted(x for x in a if e.prism.contains(x))
                if hit:
                    out.append(
                        Issue(
                            f"piece[{p.id}]",
                            f"overlapping regions: regions[{i}] and end ({e.z_id}, side {e.side:+d}) share {list(hit[0])}",
                        )
                    )
    return out


def raw_contributions(spec: ManifoldSpec) -> list[tuple[str, dict[IntVec, int], list[Ray]]]:
    """Uncanonicalised pieces and ends, as (label, finite map, rays)."""
    signs = propagate_signs(spec)
    out = []
    for p in spec.pieces:
        fin: dict[IntVec, int] = {}
        for r in p.regions:
            for x in enumerate_lattice_points(r):
                fin[x] = fin.get(x, 0) + signs[p.id]
        out.append((f"piece:{p.id}", fin, []))
    for z in spec.z_components:
        for side in (1, -1):
            out.append((f"end:{z.id}:{side:+d}", {}, end_prism(spec, z, side, signs).rays()))
    return out


def raw_multiplicity(contribs, alpha: Sequence[int]) -> int:
    """Per-contribution sum at one weight."""
    x = tuple(alpha)
    total = 0
    for _, fin, rays in contribs:
        total += fin.get(x, 0)
        total += sum(r.value for r in rays if _ray_index(r.base, r.dir, x) is not None)
    return total


def raw_window_support(contribs, R: int, d: int) -> dict[IntVec, int]:
    """Nonzero raw multiplicities inside ``[-R, R]^d``, walking every ray
    until it leaves the box."""
    acc: dict[IntVec, int] = {}
    inside = lambda x: all(-R <= c <= R for c in x)
    for _, fin, rays in contribs:
        for x, v in fin.items():
            if inside(x):
                acc[x] = acc.get(x, 0) + v
        for r in rays:
            # a ray enters and leaves a box at most once
            for k in range(0, 2 * R + 2 + _entry_steps(r, R)):
                x = tuple(b + k * u for b, u in zip(r.base, r.dir))
                if inside(x):
                    acc[x] = acc.get(x, 0) + r.value
    return {x: v for x, v in acc.items() if v}


def _entry_steps(r: Ray, R: int) -> int:
    far = max(abs(b) for b in r.base)
    return far + R


def quantize(spec: ManifoldSpec) -> VirtualTModule:
    """Canonical ``Q(M)``; raises SpecError or OverlapError on bad input."""
    report = validate_spec(spec, check_overlaps=False)
    if not report.ok:
        raise SpecError("invalid spec:\n" + str(report), report)
    overlaps = overlap_issues(spec)
    if overlaps:
        raise OverlapError(str(overlaps[0]), pair=overlaps[0])
    signs = propagate_signs(spec)
    mods = [piece_contribution(spec, p, signs) for p in spec.pieces]
    for z in spec.z_components:
        for side in (1, -1):
            mods.append(end_prism(spec, z, side, signs).module(spec.d))
    return sum_modules(mods, spec.d)


# ---------------------------------------------------------------------------
# theorem checkers


@dataclass
class FinitenessReport:
    finite: bool
    dim: int
    window_sums: dict[int, int]
    oracle_sums: dict[int, int]

    @property
    def ok(self) -> bool:
        sums = set(self.window_sums.values()) | set(self.oracle_sums.values())
        return self.finite and sums == {self.dim}


def check_finiteness(spec: ManifoldSpec, radii: Sequence[int] = (20, 40, 80)) -> FinitenessReport:
    if spec.m % 2 == 0:
        raise ValueError("check_finiteness applies to odd m")
    q = quantize(spec)
    if q.rays:
        raise FinitenessViolation(f"odd m={spec.m} but rays survive: {list(q.rays)}")
    contribs = raw_contributions(spec)
    window, oracle = {}, {}
    for R in radii:
        window[R] = sum(v for x, v in q.finite if all(-R <= c <= R for c in x))
        oracle[R] = sum(raw_window_support(contribs, R, spec.d).values())
    return FinitenessReport(True, dim(q), window, oracle)


@dataclass
class AsymptoticReport:
    profile: AsymptoticProfile
    oracle_ok: bool
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.oracle_ok and self.profile.off_axis_clean


def check_asymptotics(spec: ManifoldSpec, span: int = 25, n_eta: int = 10, seed: int = 0) -> AsymptoticReport:
    if spec.m % 2:
        raise ValueError("check_asymptotics applies to even m")
    q = quantize(spec)
    prof = asymptotic_profile(q)
    contribs = raw_contributions(spec)
    failures = []
    if prof.xi is None:
        return AsymptoticReport(prof, True)
    xi = prof.xi
    lams = range(prof.lambda0 + 1, prof.lambda0 + span + 1)
    rng = random.Random(seed)
    etas = []
    while len(etas) < n_eta:
        eta = tuple(rng.randint(-4, 4) for _ in range(spec.d))
        if any(eta) and math.gcd(*eta) == 1 and eta not in (xi, tuple(-x for x in xi)):
            etas.append(eta)
        elif spec.d == 1:
            break
    for lam in lams:
        for sgn, c in ((1, prof.c_plus), (-1, prof.c_minus)):
            w = tuple(sgn * lam * x for x in xi)
            got = raw_multiplicity(contribs, w)
            if got != c:
                failures.append(f"mult({list(w)}) = {got}, expected {c}")
        for eta in etas:
            w = tuple(lam * x for x in eta)
            got = raw_multiplicity(contribs, w)
            if got:
                failures.append(f"mult({list(w)}) = {got}, expected 0")
    return AsymptoticReport(prof, not failures, failures)


def z_cancellation_check(spec: ManifoldSpec, z_id: str) -> bool:
    z = spec.z(z_id)
    return (end_contribution(spec, z, 1) + end_contribution(spec, z, -1)).is_zero()


@dataclass
class StagesReport:
    equal: bool
    checked: int
    mismatches: list[tuple[IntVec, int, int]]


def stages_check(spec: ManifoldSpec, proj: Sequence[Sequence[int]], radii: Sequence[int] = (20, 40)) -> StagesReport:
    """Restriction of ``Q(M)`` versus fibre sums of raw multiplicities.

    A weight ``beta`` is checked at radius R only when every raw support
    point over it lies inside ``[-R, R]^d``.
    """
    P = [tuple(int(x) for x in row) for row in proj]
    if rank(P, spec.d) != len(P):
        raise ValueError("projection must have full row rank")
    for z in spec.z_components:
        if not any(dot(row, z.a_hat) for row in P):
            raise NonProperRestrictionError(
                f"non-proper restriction: projection kills a_hat of {z.id} (leading modular weight of T' is zero)"
            )
    q = quantize(spec)
    restricted = restrict(q, P)
    contribs = raw_contributions(spec)
    apply = lambda x: tuple(dot(row, x) for row in P)
    mismatches, checked = [], 0
    for R in radii:
        inside = lambda x: all(-R <= c <= R for c in x)
        sums: dict[IntVec, int] = {}
        for x, v in raw_window_support(contribs, R, spec.d).items():
            y = apply(x)
            sums[y] = sums.get(y, 0) + v
        near = itertools.product(range(-5, 6), repeat=len(P))
        candidates = set(sums) | {k for k, _ in restricted.finite} | set(near)
        for beta in sorted(candidates):
            if not _fibre_inside(contribs, P, beta, inside):
                continue
            checked += 1
            want = sums.get(beta, 0)
            got = restricted(beta)
            if want != got:
                mismatches.append((beta, got, want))
    return StagesReport(not mismatches, checked, mismatches)


def _fibre_inside(contribs, P, beta, inside) -> bool:
    for _, fin, rays in contribs:
        for x in fin:
            if not inside(x) and tuple(dot(row, x) for row in P) == beta:
                return False
        for r in rays:
            pb = [dot(row, r.base) for row in P]
            pu = [dot(row, r.dir) for row in P]
            k = None
            for a, b, t in zip(pb, pu, beta):
                if b:
                    k = Fraction(t - a, b)
                    break
            if k is None or k < 0 or k.denominator != 1:
                continue
            k = int(k)
            if all(a + k * b == t for a, b, t in zip(pb, pu, beta)):
                x = tuple(b + k * u for b, u in zip(r.base, r.dir))
                if not inside(x):
                    return False
    return True


@dataclass
class QRReport:
    lhs: int
    rhs: int
    mixed_signs: bool

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


def qr_check(spec: ManifoldSpec, n_polytope: HPolytope) -> QRReport:
    """``(Q(M) (x) Q(N))^T`` against a direct count of signed pairs."""
    pts = enumerate_lattice_points(n_polytope)
    N = canonicalize(spec.d, {b: 1 for b in pts}, ())
    lhs = pair_with_finite(quantize(spec), N)
    contribs = raw_contributions(spec)
    rhs, seen = 0, set()
    for beta in pts:
        alpha = tuple(-b for b in beta)
        for _, fin, rays in contribs:
            v = fin.get(alpha, 0) + sum(r.value for r in rays if _ray_index(r.base, r.dir, alpha) is not None)
            if v:
                seen.add(v > 0)
                rhs += v
    return QRReport(lhs, rhs, len(seen) > 1)


def is_infinite(x) -> bool:
    return isinstance(x, Infinite)
