"""Laurent-plus-log calculus in the collar coordinate ``x`` around Z.

A function ``c log|x| + sum_k a_k x^k`` with finitely many rational
coefficients is the scalar shape of both the collar one-form density and the
moment profile along the leading modular weight.  Absolute values are never
evaluated symbolically: functions are evaluated per side at ``x = side * r``
with ``r > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

from .lattice import ceil_frac

Rational = Fraction | int


def _frac_items(coeffs: Mapping[int, Rational]) -> tuple[tuple[int, Fraction], ...]:
    return tuple(sorted((int(k), Fraction(v)) for k, v in coeffs.items() if v != 0))


@dataclass(frozen=True)
class LaurentLogFn:
    """``log_coeff * log|x| + sum(coeff * x**k)``, canonical (no zeros)."""

    log_coeff: Fraction = Fraction(0)
    laurent: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "log_coeff", Fraction(self.log_coeff))
        object.__setattr__(self, "laurent", _frac_items(dict(self.laurent)))

    @classmethod
    def from_coeffs(cls, coeffs: Mapping[int, Rational], log_coeff: Rational = 0) -> "LaurentLogFn":
        return cls(Fraction(log_coeff), tuple(coeffs.items()))

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self.laurent)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs.get(k, Fraction(0))

    def __add__(self, other: "LaurentLogFn") -> "LaurentLogFn":
        c = self.coeffs
        for k, v in other.laurent:
            c[k] = c.get(k, 0) + v
        return LaurentLogFn.from_coeffs(c, self.log_coeff + other.log_coeff)

    def __neg__(self) -> "LaurentLogFn":
        return LaurentLogFn.from_coeffs({k: -v for k, v in self.laurent}, -self.log_coeff)

    def __sub__(self, other: "LaurentLogFn") -> "LaurentLogFn":
        return self + (-other)

    def reflect(self) -> "LaurentLogFn":
        """Substitute ``x -> -x``: odd powers change sign, ``log|x|`` does not."""
        return LaurentLogFn.from_coeffs({k: (-v if k % 2 else v) for k, v in self.laurent}, self.log_coeff)

    def laurent_value(self, x: Rational) -> Fraction:
        x = Fraction(x)
        if x == 0 and any(k < 0 for k, _ in self.laurent):
            raise ZeroDivisionError("Laurent part is singular at 0")
        return sum((v * x**k for k, v in self.laurent), Fraction(0))

    def value_bounds(self, x: Rational, terms: int = 8) -> tuple[Fraction, Fraction]:
        """Rational enclosure of the value at ``x != 0``."""
        base = self.laurent_value(x)
        if self.log_coeff == 0:
            return base, base
        lo, hi = log_bounds(abs(Fraction(x)), terms)
        a, b = self.log_coeff * lo, self.log_coeff * hi
        return base + min(a, b), base + max(a, b)

    def __str__(self) -> str:
        parts = []
        if self.log_coeff:
            parts.append(f"{self.log_coeff}*log|x|")
        parts += [f"{v}*x^{k}" if k else f"{v}" for k, v in self.laurent]
        return " + ".join(parts) or "0"


def log_bounds(x: Fraction, terms: int = 8) -> tuple[Fraction, Fraction]:
    """Rational interval containing ``log(x)`` for rational ``x > 0``.

    Uses ``log x = 2 atanh(z)``, ``z = (x-1)/(x+1)``; the series tail is
    bounded by a geometric majorant.
    """
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a non-positive number")
    if x == 1:
        return Fraction(0), Fraction(0)
    if x > 1:
        lo, hi = log_bounds(1 / x, terms)
        return -hi, -lo
    z = (x - 1) / (x + 1)  # in (-1, 0)
    s = Fraction(0)
    for k in range(terms):
        s += 2 * z ** (2 * k + 1) / (2 * k + 1)
    n = 2 * terms + 1
    tail = 2 * abs(z) ** n / (n * (1 - z * z))
    return s - tail, s


@dataclass(frozen=True)
class CollarFormData:
    """Collar one-form density ``sum_j c_j x^{-j} dx`` (j = 1..m)."""

    m: int
    c: tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(Fraction(v) for v in self.c))
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if len(self.c) != self.m:
            raise ValueError(f"expected {self.m} collar coefficients, got {len(self.c)}")
        if self.c[-1] == 0:
            raise ValueError("leading collar coefficient must be nonzero")

    @property
    def leading(self) -> Fraction:
        return self.c[-1]

    def density(self) -> LaurentLogFn:
        return LaurentLogFn.from_coeffs({-(j + 1): cj for j, cj in enumerate(self.c)})


def derivative(f: LaurentLogFn) -> LaurentLogFn:
    """d/dx, returned as a pure Laurent density (log part zero)."""
    out: dict[int, Fraction] = {}
    if f.log_coeff:
        out[-1] = f.log_coeff
    for k, v in f.laurent:
        if k:
            out[k - 1] = out.get(k - 1, 0) + k * v
    return LaurentLogFn.from_coeffs(out)


def moment_from_form(cf: CollarFormData) -> LaurentLogFn:
    """Antiderivative of the collar density, normalised with zero constant."""
    coeffs = {-(j - 1): -cj / (j - 1) for j, cj in enumerate(cf.c, start=1) if j >= 2}
    return LaurentLogFn.from_coeffs(coeffs, cf.c[0])


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def escape_direction(cf: CollarFormData, side: int) -> int:
    """Sign of the limit of the moment profile as ``x -> 0`` from ``side``."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    if cf.m == 1:
        return -_sign(cf.c[0])
    return -_sign(cf.leading) * side ** (cf.m - 1)


def monotonicity_threshold(cf: CollarFormData) -> Fraction:
    """A radius below which the leading term dominates the density."""
    rest = sum((abs(v) for v in cf.c[:-1]), Fraction(0))
    return min(Fraction(1), abs(cf.leading) / (1 + rest))


def collar_start(cf: CollarFormData, side: int, radius: Rational | None = None, profile: LaurentLogFn | None = None) -> int:
    """First integer slab index ``t`` on ``side`` reached inside the collar.

    The end covers moment levels ``s`` with ``escape * s >= escape * mu(side *
    radius)``; the returned value is ``ceil(escape * mu(side * radius))``,
    computed exactly (the log term is enclosed and refined until the ceiling
    is certain).
    """
    r = Fraction(radius) if radius is not None else monotonicity_threshold(cf)
    if r <= 0:
        raise ValueError("collar radius must be positive")
    mu = profile if profile is not None else moment_from_form(cf)
    e = escape_direction(cf, side)
    terms = 8
    while True:
        lo, hi = mu.value_bounds(side * r, terms)
        lo, hi = sorted((e * lo, e * hi))
        if ceil_frac(lo) == ceil_frac(hi) or lo == hi:
            return ceil_frac(hi)
        terms *= 2
        if terms > 1 << 14:
            # only reachable for values within 2**-many of an integer; round outward
            return ceil_frac(hi)


class MazzeoMelrose(NamedTuple):
    smooth_class: object
    one_form_classes: tuple[tuple[Fraction, ...], ...]
    integral: bool


def collar_form(z) -> CollarFormData:
    """Collar data of a Z component.  The density coefficients are the
    modular ratios themselves (circle period normalised to 1)."""
    return CollarFormData(len(z.modular_ratios), tuple(z.modular_ratios))


def mazzeo_melrose_decompose(z) -> MazzeoMelrose:
    """Split the degree-2 class near ``z`` into its smooth part and the m
    one-form classes ``a_j = r_j * a_hat``."""
    classes = tuple(tuple(Fraction(r) * a for a in z.a_hat) for r in z.modular_ratios)
    integral = all(x.denominator == 1 for cls in classes for x in cls)
    return MazzeoMelrose(z.leaf_polytope, classes, integral)


def hamiltonian_check(z, profile: LaurentLogFn | None = None) -> bool:
    """Exact identity ``d(mu)/dx == collar density``.

    ``profile`` defaults to the engine's own moment profile; passing another
    one checks that instead.
    """
    cf = collar_form(z)
    mu = profile if profile is not None else moment_from_form(cf)
    return derivative(mu) == cf.density()
