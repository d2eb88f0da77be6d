"""Virtual torus modules as exact signed multiplicity functions on Z^d.

A module is a finite map plus finitely many lattice rays carrying constant
values.  Rays produced by quantization have primitive directions; images
under a restriction map may be strided (``dir = s * primitive``, covering
every ``s``-th lattice point of the line).

Canonical form, per line ``L`` carrying rays:

* tail values are read off per residue class and stored with the minimal
  period, one ray per nonzero residue class and sense;
* every ray starts right after the last point of ``L`` where the function
  disagrees with its tail (points where another ray line crosses ``L`` are
  ignored for this purpose);
* when both tails agree on a stretch, the split between the ``+`` and ``-``
  rays is put as close to the line's origin as the stretch allows;
* everything else is the finite part.

The form depends only on the multiplicity function, so semantic equality is
structural equality.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import NonProperRestrictionError
from .lattice import IntVec, dot, positive_direction, primitive, transverse_functional


class Ray(NamedTuple):
    base: IntVec
    dir: IntVec
    value: int

    def contains(self, x: Sequence[int]) -> bool:
        return _ray_index(self.base, self.dir, x) is not None


def _ray_index(base, step, x) -> int | None:
    """k >= 0 with x = base + k*step, or None."""
    k = None
    for b, s, y in zip(base, step, x):
        diff = y - b
        if s == 0:
            if diff != 0:
                return None
            continue
        q, r = divmod(diff, s)
        if r or q < 0 or (k is not None and q != k):
            return None
        k = q
    return k


@dataclass(frozen=True)
class Infinite:
    """Marker returned by :func:`dim` for modules with surviving rays."""

    directions: tuple[IntVec, ...]


class _Line(NamedTuple):
    pos: IntVec
    offset: IntVec


def _line_of(point: Sequence[int], step: Sequence[int]) -> tuple[_Line, int, int, int]:
    """(line, param t, stride, sense) of a ray."""
    pos = positive_direction(step)
    stride = math.gcd(*step)
    sense = 1 if primitive(step) == pos else -1
    g = transverse_functional(pos)
    t = dot(g, point)
    offset = tuple(p - t * u for p, u in zip(point, pos))
    return _Line(pos, offset), t, stride, sense


def _param_on(line: _Line, x: Sequence[int]) -> int | None:
    t = dot(transverse_functional(line.pos), x)
    if all(a - t * u == o for a, u, o in zip(x, line.pos, line.offset)):
        return t
    return None


def _point(line: _Line, t: int) -> IntVec:
    return tuple(o + t * u for o, u in zip(line.offset, line.pos))


def _minimal_period(values: Sequence[int]) -> int:
    n = len(values)
    for p in range(1, n + 1):
        if n % p == 0 and all(values[i] == values[i % p] for i in range(n)):
            return p
    return n


def _cross_param(line: _Line, other: _Line) -> int | None:
    """Param on ``line`` of its single intersection with a non-parallel
    ``other``, if that intersection is a lattice point."""
    if line.pos == other.pos:
        return None
    # offset + t pos = other.offset + s other.pos; solve on two coordinates
    d = len(line.pos)
    for i in range(d):
        for j in range(i + 1, d):
            det = line.pos[i] * (-other.pos[j]) - (-other.pos[i]) * line.pos[j]
            if det == 0:
                continue
            ri = other.offset[i] - line.offset[i]
            rj = other.offset[j] - line.offset[j]
            tn = ri * (-other.pos[j]) - (-other.pos[i]) * rj
            if tn % det:
                return None
            t = tn // det
            x = _point(line, t)
            return t if _param_on(other, x) is not None else None
    return None


@dataclass(frozen=True)
class VirtualTModule:
    """Exact signed multiplicity function on Z^d in canonical form.

    Build through :func:`canonicalize` (or :meth:`build`); the raw
    constructor trusts its input.
    """

    d: int
    finite: tuple[tuple[IntVec, int], ...] = ()
    rays: tuple[Ray, ...] = ()

    @classmethod
    def build(cls, d: int, finite: Mapping | Iterable = (), rays: Iterable = ()) -> "VirtualTModule":
        return canonicalize(d, finite, rays)

    @classmethod
    def zero(cls, d: int) -> "VirtualTModule":
        return cls(d)

    @property
    def finite_map(self) -> dict[IntVec, int]:
        return dict(self.finite)

    def is_zero(self) -> bool:
        return not self.finite and not self.rays

    def is_finite(self) -> bool:
        return not self.rays

    def __call__(self, alpha: Sequence[int]) -> int:
        return multiplicity(self, alpha)

    def __add__(self, other: "VirtualTModule") -> "VirtualTModule":
        return add(self, other)

    def __neg__(self) -> "VirtualTModule":
        return negate(self)

    def __sub__(self, other: "VirtualTModule") -> "VirtualTModule":
        return add(self, negate(other))


def _raw_value(finite: Mapping[IntVec, int], rays: Sequence[Ray], x: IntVec) -> int:
    return finite.get(x, 0) + sum(r.value for r in rays if _ray_index(r.base, r.dir, x) is not None)


def canonicalize(d: int, finite: Mapping | Iterable = (), rays: Iterable = ()) -> VirtualTModule:
    items = finite.items() if isinstance(finite, Mapping) else finite
    raw_finite: dict[IntVec, int] = {}
    for k, v in items:
        k = tuple(int(x) for x in k)
        if len(k) != d:
            raise ValueError(f"weight {k} is not {d}-dimensional")
        raw_finite[k] = raw_finite.get(k, 0) + int(v)
    raw_rays: list[Ray] = []
    for r in rays:
        base, step, value = tuple(map(int, r[0])), tuple(map(int, r[1])), int(r[2])
        if len(base) != d or len(step) != d:
            raise ValueError("ray dimension mismatch")
        if not any(step):
            raise ValueError("ray direction must be nonzero")
        if value:
            raw_rays.append(Ray(base, step, value))

    # group rays by line
    groups: dict[_Line, list[tuple[int, int, int, int]]] = {}
    for r in raw_rays:
        line, t, stride, sense = _line_of(r.base, r.dir)
        groups.setdefault(line, []).append((t, stride, sense, r.value))

    def tails(entries, sense):
        es = [(t, s, v) for t, s, sn, v in entries if sn == sense]
        if not es:
            return 1, (0,)
        L = math.lcm(*[s for _, s, _ in es])
        vals = [sum(v for t, s, v in es if (r - t) % s == 0) for r in range(L)]
        p = _minimal_period(vals)
        return p, tuple(vals[:p])

    tail_info = {line: (tails(es, 1), tails(es, -1)) for line, es in groups.items()}
    live = [ln for ln, ((_, vp), (_, vm)) in tail_info.items() if any(vp) or any(vm)]

    def F(x: IntVec) -> int:
        return _raw_value(raw_finite, raw_rays, x)

    new_rays: list[Ray] = []
    spans: dict[_Line, tuple[int, int]] = {}
    for line, es in groups.items():
        (p, vp), (q, vm) = tail_info[line]
        params = [t for t, *_ in es]
        params += [t for x in raw_finite if (t := _param_on(line, x)) is not None]
        crossing = set()
        for other in groups:
            c = _cross_param(line, other)
            if c is not None:
                params.append(c)
                if other in live:
                    crossing.add(c)
        period = math.lcm(p, q)
        t_min, t_max = min(params) - period - 1, max(params) + period + 1
        spans[line] = (t_min, t_max)
        if line not in live:
            continue
        vals = {t: F(_point(line, t)) for t in range(t_min, t_max + 1) if t not in crossing}
        hi = max((t for t, v in vals.items() if v != vp[t % p]), default=None)
        lo = min((t for t, v in vals.items() if v != vm[t % q]), default=None)
        if hi is None or lo is None or lo - 1 > hi:
            # both tails agree on a stretch (hi, lo); split nearest the origin
            lower = hi if hi is not None else -math.inf
            upper = lo - 1 if lo is not None else math.inf
            split = int(min(max(-1, lower), upper))
            plus_from, minus_to = split + 1, split
        else:
            plus_from, minus_to = hi + 1, lo - 1
        for r in range(p):
            if vp[r]:
                t = plus_from + (r - plus_from) % p
                new_rays.append(Ray(_point(line, t), tuple(p * u for u in line.pos), vp[r]))
        for r in range(q):
            if vm[r]:
                t = minus_to - (minus_to - r) % q
                new_rays.append(Ray(_point(line, t), tuple(-q * u for u in line.pos), vm[r]))

    candidates = set(raw_finite)
    for line, (a, b) in spans.items():
        candidates.update(_point(line, t) for t in range(a, b + 1))
    new_finite = {}
    for x in candidates:
        v = F(x) - sum(r.value for r in new_rays if _ray_index(r.base, r.dir, x) is not None)
        if v:
            new_finite[x] = v
    return VirtualTModule(d, tuple(sorted(new_finite.items())), tuple(sorted(new_rays)))


def add(a: VirtualTModule, b: VirtualTModule) -> VirtualTModule:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    fin = a.finite_map
    for k, v in b.finite:
        fin[k] = fin.get(k, 0) + v
    return canonicalize(a.d, fin, a.rays + b.rays)


def negate(a: VirtualTModule) -> VirtualTModule:
    return VirtualTModule(a.d, tuple((k, -v) for k, v in a.finite), tuple(Ray(r.base, r.dir, -r.value) for r in a.rays))


def scale(a: VirtualTModule, c: int) -> VirtualTModule:
    if c == 0:
        return VirtualTModule.zero(a.d)
    return VirtualTModule(a.d, tuple((k, c * v) for k, v in a.finite), tuple(Ray(r.base, r.dir, c * r.value) for r in a.rays))


def sum_modules(mods: Iterable[VirtualTModule], d: int) -> VirtualTModule:
    fin: dict[IntVec, int] = {}
    rays: list[Ray] = []
    for m in mods:
        if m.d != d:
            raise ValueError(f"dimension mismatch: {m.d} vs {d}")
        for k, v in m.finite:
            fin[k] = fin.get(k, 0) + v
        rays.extend(m.rays)
    return canonicalize(d, fin, rays)


def multiplicity(v: VirtualTModule, alpha: Sequence[int]) -> int:
    x = tuple(int(a) for a in alpha)
    return v.finite_map.get(x, 0) + sum(r.value for r in v.rays if _ray_index(r.base, r.dir, x) is not None)


def dim(v: VirtualTModule) -> int | Infinite:
    if v.rays:
        return Infinite(tuple(sorted({primitive(r.dir) for r in v.rays})))
    return sum(val for _, val in v.finite)


def restrict(v: VirtualTModule, proj: Sequence[Sequence[int]]) -> VirtualTModule:
    """Push weights forward along an integer matrix (``d' x d``)."""
    P = [tuple(int(x) for x in row) for row in proj]
    if any(len(row) != v.d for row in P):
        raise ValueError(f"projection must have {v.d} columns")
    from .lattice import rank

    if rank(P, v.d) != len(P):
        raise ValueError("projection must have full row rank")

    def apply(x):
        return tuple(dot(row, x) for row in P)

    fin: dict[IntVec, int] = {}
    for k, val in v.finite:
        y = apply(k)
        fin[y] = fin.get(y, 0) + val
    rays = []
    for r in v.rays:
        step = apply(r.dir)
        if not any(step):
            raise NonProperRestrictionError(
                f"non-proper restriction: ray direction {list(r.dir)} is killed by the projection"
            )
        rays.append(Ray(apply(r.base), step, r.value))
    return canonicalize(len(P), fin, rays)


def pair_with_finite(v: VirtualTModule, n: VirtualTModule) -> int:
    """``sum_alpha v(alpha) * n(-alpha)``."""
    if n.rays:
        raise ValueError("pair_with_finite needs a finite second argument")
    return sum(val * multiplicity(v, tuple(-x for x in k)) for k, val in n.finite)


@dataclass(frozen=True)
class AsymptoticProfile:
    xi: IntVec | None
    c_plus: int
    c_minus: int
    lambda0: int
    off_axis_clean: bool = True
    multi_direction: bool = False
    periodic: bool = False
    directions: tuple[tuple[IntVec, int, int], ...] = field(default=())


def _minors_gcd(b: Sequence[int], u: Sequence[int]) -> int:
    n = len(b)
    return math.gcd(*[b[i] * u[j] - b[j] * u[i] for i in range(n) for j in range(i + 1, n)], 0)


def _largest_scale_hit(r: Ray) -> int:
    """Largest ``lam`` such that ``lam * eta`` lies on the ray for some
    integer ``eta``, for a ray whose line misses the origin."""
    G = _minors_gcd(r.base, r.dir)
    best = 0
    for lam in range(1, G + 1):
        if G % lam:
            continue
        if any(all((b + k * u) % lam == 0 for b, u in zip(r.base, r.dir)) for k in range(lam)):
            best = lam
    return best


def asymptotic_profile(v: VirtualTModule) -> AsymptoticProfile:
    """Stable multiplicities along ``+-xi`` and a certified ``lambda0``.

    For ``lam > lambda0`` the module satisfies ``v(lam*xi) = c_plus``,
    ``v(-lam*xi) = c_minus`` and ``v(lam*eta) = 0`` for every primitive
    ``eta`` other than ``+-xi`` (the latter only when ``off_axis_clean``).
    """
    bound = 1
    for k, _ in v.finite:
        bound = max(bound, math.gcd(*k))
    if not v.rays:
        return AsymptoticProfile(None, 0, 0, bound)

    lines: dict[IntVec, list[Ray]] = {}
    for r in v.rays:
        lines.setdefault(positive_direction(r.dir), []).append(r)

    def through_origin(r: Ray) -> bool:
        return _minors_gcd(r.base, r.dir) == 0

    per_dir = []
    for u, rs in sorted(lines.items()):
        g = transverse_functional(u)
        cp = sum(r.value for r in rs if through_origin(r) and math.gcd(*r.dir) == 1 and dot(g, r.dir) > 0)
        cm = sum(r.value for r in rs if through_origin(r) and math.gcd(*r.dir) == 1 and dot(g, r.dir) < 0)
        per_dir.append((u, cp, cm))
    # the axis is the line direction with the largest total weight, ties by order
    xi = max(per_dir, key=lambda e: (sum(abs(r.value) for r in lines[e[0]]), [-x for x in e[0]]))[0]
    g = transverse_functional(xi)
    c_plus = c_minus = 0
    clean, periodic = True, False
    for r in v.rays:
        if through_origin(r):
            if positive_direction(r.dir) != xi:
                clean = False
                continue
            bound = max(bound, abs(dot(g, r.base)))
            if math.gcd(*r.dir) != 1:
                periodic = True
            elif dot(g, r.dir) > 0:
                c_plus += r.value
            else:
                c_minus += r.value
        else:
            bound = max(bound, _largest_scale_hit(r))
    return AsymptoticProfile(
        xi,
        c_plus,
        c_minus,
        bound,
        off_axis_clean=clean,
        multi_direction=len(lines) > 1,
        periodic=periodic,
        directions=tuple(per_dir),
    )


def window_values(v: VirtualTModule, lo: Sequence[int], hi: Sequence[int]) -> dict[IntVec, int]:
    """Multiplicities over an integer box, zeros included."""
    import itertools

    axes = [range(a, b + 1) for a, b in zip(lo, hi)]
    return {x: multiplicity(v, x) for x in itertools.product(*axes)}


def random_primitive(rng: random.Random, d: int, exclude: Iterable[IntVec] = (), span: int = 4) -> IntVec:
    ex = set(exclude)
    while True:
        v = tuple(rng.randint(-span, span) for _ in range(d))
        if any(v) and math.gcd(*v) == 1 and v not in ex:
            return v
