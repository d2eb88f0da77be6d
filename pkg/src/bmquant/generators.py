"""Built-in example specs and a seeded random spec generator."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Sequence

from .lattice import Halfspace, HPolytope, IntVec, column_hermite, dot, enumerate_lattice_points, rank
from .model import ManifoldSpec, Piece, ZComponent, validate_spec


def _point_leaf(level: int) -> HPolytope:
    return HPolytope.point([level])


def s2(m: int = 2, coeffs: Sequence | None = None, leaf_level: int = 0) -> ManifoldSpec:
    """The sphere with Z the equator, circle acting by rotation.

    The north cap sits on the ``x > 0`` side and is the base piece.
    """
    ratios = tuple(Fraction(c) for c in coeffs) if coeffs is not None else (0,) * (m - 1) + (1,)
    if len(ratios) != m:
        raise ValueError(f"s2 with m={m} needs {m} coefficients")
    z = ZComponent("Z", ratios, (1,), _point_leaf(leaf_level), "N", "S")
    return ManifoldSpec(m, 1, (Piece("N"), Piece("S")), (z,), "N")


def s2xs2(m: int = 2) -> ManifoldSpec:
    """``S^2`` with a b^m equator times a standard sphere of area 1."""
    leaf = HPolytope(
        (
            Halfspace((1, 0), 0),
            Halfspace((-1, 0), 0),
            Halfspace((0, 1), 0),
            Halfspace((0, -1), -1),
        ),
        2,
    )
    z = ZComponent("Z", (0,) * (m - 1) + (1,), (1, 0), leaf, "N", "S")
    return ManifoldSpec(m, 2, (Piece("N"), Piece("S")), (z,), "N")


def chain(pieces: int = 3, m: int = 3) -> ManifoldSpec:
    """Pieces ``P1 .. Pk`` separated by ``k-1`` parallel copies of Z.

    Interior pieces carry compact collar-interior segments; leaf levels are
    placed so that no segment meets an end of its own piece.
    """
    if pieces < 1:
        raise ValueError("a chain needs at least one piece")
    ids = [f"P{i}" for i in range(1, pieces + 1)]
    plist = []
    for j, pid in enumerate(ids):
        regions = ()
        if 0 < j < pieces - 1:
            lo = 3 * (j - 1)
            regions = (HPolytope.box([lo], [lo + 2]),)
        plist.append(Piece(pid, regions))
    zs = []
    ratios = (0,) * (m - 1) + (1,)
    for i in range(1, pieces):
        level = 3 * (i - 1) if m % 2 == 0 else -1
        zs.append(ZComponent(f"Z{i}", ratios, (1,), _point_leaf(level), ids[i], ids[i - 1]))
    return ManifoldSpec(m, 1, tuple(plist), tuple(zs), ids[0])


EXAMPLES = {"s2": s2, "s2xs2": s2xs2, "chain": chain}


# ---------------------------------------------------------------------------
# random specs


def unimodular_dual_basis(a: Sequence[int]) -> tuple[IntVec, list[IntVec]]:
    """Covectors ``g, h_2 .. h_d`` forming a lattice basis with ``g(a) = 1``
    and ``h_i(a) = 0``."""
    d = len(a)
    _, U, _ = column_hermite([a], d)
    cols = [tuple(U[i][j] for i in range(d)) for j in range(d)]
    return cols[0], cols[1:]


def _box(g: IntVec, hs: list[IntVec], g_range, h_ranges) -> HPolytope:
    out = [Halfspace(g, g_range[0]), Halfspace(tuple(-x for x in g), -g_range[1])]
    for h, (lo, hi) in zip(hs, h_ranges):
        out.append(Halfspace(h, lo))
        out.append(Halfspace(tuple(-x for x in h), -hi))
    return HPolytope(tuple(out), len(g))


def _random_primitive(rng: random.Random, d: int, span: int = 2) -> IntVec:
    while True:
        v = tuple(rng.randint(-span, span) for _ in range(d))
        if any(v) and math.gcd(*v) == 1:
            return v


def random_spec(rng: random.Random, m: int, d: int, max_pieces: int = 3, support: int = 15) -> ManifoldSpec:
    """A valid random spec whose compact data fits in ``[-support, support]^d``.

    All Z components share one leading direction up to sign.  Pieces form a
    chain; for even m a closing edge or self-loop is sometimes added.
    """
    for _ in range(500):
        a = _random_primitive(rng, d)
        g, hs = unimodular_dual_basis(a)
        lo_pieces = 2 if m % 2 else 1
        n = rng.randint(lo_pieces, max(lo_pieces, max_pieces))
        ids = [f"P{i}" for i in range(n)]
        edges = [(ids[i + 1], ids[i]) for i in range(n - 1)]
        if m % 2 == 0 and (n == 1 or rng.random() < 0.3):
            edges.append((ids[0], ids[-1]))
        zs = []
        for k, (plus, minus) in enumerate(edges):
            ratios = [rng.choice((-1, 0, 0, 1)) for _ in range(m - 1)] + [rng.choice((-2, -1, 1, 2))]
            sign = rng.choice((1, -1))
            a_hat = tuple(sign * x for x in a)
            gg = tuple(sign * x for x in g)
            level = rng.randint(-3, 3)
            leaf = _box(gg, hs, (level, level), [(0, rng.randint(0, 2)) for _ in hs])
            override = None
            if rng.random() < 0.15:
                override = Fraction(rng.randint(1, 4), rng.randint(4, 8))
            zs.append(ZComponent(f"Z{k}", tuple(ratios), a_hat, leaf, plus, minus, override))
        pieces = []
        for pid in ids:
            regions = []
            for _ in range(rng.randint(0, 2)):
                glo = rng.randint(-4, 4)
                h_ranges = []
                for _h in hs:
                    s = rng.randint(-3, 3)
                    h_ranges.append((s, s + rng.randint(0, 2)))
                regions.append(_box(g, hs, (glo, glo + rng.randint(0, 2)), h_ranges))
            pieces.append(Piece(pid, tuple(regions)))
        spec = ManifoldSpec(m, d, tuple(pieces), tuple(zs), ids[0])
        if not validate_spec(spec).ok:
            continue
        pts = [x for p in pieces for r in p.regions for x in enumerate_lattice_points(r)]
        pts += [x for z in zs for x in enumerate_lattice_points(z.leaf_polytope)]
        if all(abs(c) <= support for x in pts for c in x):
            return spec
    raise RuntimeError("could not generate a valid random spec")


def random_projection(rng: random.Random, spec: ManifoldSpec) -> list[list[int]]:
    """Full-row-rank integer matrix not killing any ``a_hat``."""
    d = spec.d
    while True:
        dp = rng.randint(1, d)
        P = [[rng.randint(-2, 2) for _ in range(d)] for _ in range(dp)]
        if rank(P, d) != dp:
            continue
        if all(any(dot(row, z.a_hat) for row in P) for z in spec.z_components):
            return P


def random_delzant_box(rng: random.Random, d: int, max_points: int = 200) -> HPolytope:
    while True:
        lo = [rng.randint(-6, 6) for _ in range(d)]
        hi = [x + rng.randint(0, 5) for x in lo]
        if math.prod(b - a + 1 for a, b in zip(lo, hi)) <= max_points:
            return HPolytope.box(lo, hi)
