import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bmquant.generators import s2
from bmquant.laurent import (
    CollarFormData,
    LaurentLogFn,
    collar_start,
    derivative,
    escape_direction,
    hamiltonian_check,
    log_bounds,
    mazzeo_melrose_decompose,
    moment_from_form,
    monotonicity_threshold,
)
from bmquant.lattice import HPolytope
from bmquant.model import ZComponent

F = Fraction
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def L(coeffs, log=0):
    return LaurentLogFn.from_coeffs(coeffs, log)


def test_derivative_rules():
    assert derivative(L({}, 1)) == L({-1: 1})
    assert derivative(L({-2: F(-1, 2)})) == L({-3: 1})
    assert derivative(L({-2: F(-1, 2)}, 2)) == L({-1: 2, -3: 1})
    assert derivative(L({0: 7})) == L({})


def test_canonical_form_drops_zeros():
    assert L({-2: 0, 3: 1}) == L({3: 1})
    assert L({-2: 1}) - L({-2: 1}) == L({})


@pytest.mark.parametrize(
    "m,c,expected",
    [
        (3, (0, 0, 1), L({-2: F(-1, 2)})),
        (2, (0, 1), L({-1: -1})),
        (2, (2, 1), L({-1: -1}, 2)),
    ],
)
def test_moment_from_form_examples(m, c, expected):
    assert moment_from_form(CollarFormData(m, c)) == expected


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda m: st.lists(rationals, min_size=m, max_size=m)))
def test_derivative_inverts_moment(c):
    if c[-1] == 0:
        c[-1] = F(1)
    cf = CollarFormData(len(c), c)
    assert derivative(moment_from_form(cf)) == cf.density()


def test_collar_form_validation():
    with pytest.raises(ValueError):
        CollarFormData(2, (1, 0))
    with pytest.raises(ValueError):
        CollarFormData(2, (1,))


@pytest.mark.parametrize(
    "m,c,side,expected",
    [
        (2, (0, 1), 1, -1),
        (2, (0, 1), -1, 1),
        (3, (0, 0, 1), 1, -1),
        (3, (0, 0, 1), -1, -1),
        (1, (1,), 1, -1),
        (1, (1,), -1, -1),
        (1, (-2,), 1, 1),
    ],
)
def test_escape_direction(m, c, side, expected):
    assert escape_direction(CollarFormData(m, c), side) == expected


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6).flatmap(lambda m: st.lists(rationals, min_size=m, max_size=m)))
def test_escape_parity(c):
    if c[-1] == 0:
        c[-1] = F(-3)
    cf = CollarFormData(len(c), c)
    same = escape_direction(cf, 1) == escape_direction(cf, -1)
    assert same == (cf.m % 2 == 1)


def _mu_float(mu: LaurentLogFn, x: float) -> float:
    return float(mu.log_coeff) * math.log(abs(x)) + sum(float(v) * x**k for k, v in mu.laurent)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5).flatmap(lambda m: st.lists(rationals, min_size=m, max_size=m)), st.sampled_from([1, -1]))
def test_escape_matches_limit(c, side):
    if c[-1] == 0:
        c[-1] = F(1)
    cf = CollarFormData(len(c), c)
    mu = moment_from_form(cf)
    v = _mu_float(mu, side * 1e-7)
    assert (v > 0) - (v < 0) == escape_direction(cf, side)


@pytest.mark.parametrize("m,c,expected", [(3, (0, 0, 1), 1), (2, (1, 1), F(1, 2)), (3, (4, 0, 1), F(1, 5))])
def test_threshold_examples(m, c, expected):
    assert monotonicity_threshold(CollarFormData(m, c)) == expected


def test_threshold_dominates_at_sampled_points():
    rng = random.Random(3)
    for _ in range(100):
        m = rng.randint(1, 5)
        c = [F(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(m)]
        if c[-1] == 0:
            c[-1] = F(1, 3)
        cf = CollarFormData(m, c)
        xs = monotonicity_threshold(cf)
        for _ in range(5):
            x = xs * F(rng.randint(1, 999), 1000) * rng.choice((1, -1))
            lead = abs(c[-1] * x ** (-m))
            rest = abs(sum(c[j] * x ** (-(j + 1)) for j in range(m - 1)))
            assert lead > rest


def test_log_bounds_enclose():
    for x in [F(1, 5), F(1, 2), F(3, 1), F(7, 3), F(1, 1000)]:
        lo, hi = log_bounds(x)
        assert lo <= hi
        assert float(lo) <= math.log(x) + 1e-12 and math.log(x) <= float(hi) + 1e-12


@settings(max_examples=150, deadline=None)
@given(
    st.integers(1, 4).flatmap(lambda m: st.lists(st.integers(-3, 3), min_size=m, max_size=m)),
    st.sampled_from([1, -1]),
    st.fractions(min_value=F(1, 20), max_value=1, max_denominator=20),
)
def test_collar_start_against_float(c, side, r):
    if c[-1] == 0:
        c[-1] = 1
    cf = CollarFormData(len(c), c)
    e = escape_direction(cf, side)
    v = e * _mu_float(moment_from_form(cf), side * float(r))
    if abs(v - round(v)) < 1e-9:
        return  # too close to call in floating point
    assert collar_start(cf, side, r) == math.ceil(v)


def _z(ratios, a_hat):
    d = len(a_hat)
    return ZComponent("Z", tuple(ratios), tuple(a_hat), HPolytope.point([0] * d), "A", "B")


@pytest.mark.parametrize(
    "ratios,a_hat,classes,integral",
    [
        ((0, 2), (1, 0), ((0, 0), (2, 0)), True),
        ((F(1, 2), 1), (1, 0), ((F(1, 2), 0), (1, 0)), False),
        ((0, 0, 1), (0, 1), ((0, 0), (0, 0), (0, 1)), True),
    ],
)
def test_mazzeo_melrose(ratios, a_hat, classes, integral):
    mm = mazzeo_melrose_decompose(_z(ratios, a_hat))
    assert mm.one_form_classes == classes
    assert mm.integral is integral


def test_hamiltonian_check():
    z = _z((2, 0, 1), (1,))
    assert hamiltonian_check(z)
    assert moment_from_form(CollarFormData(3, (2, 0, 1))) == L({-2: F(-1, 2)}, 2)
    zs = s2(2).z_components[0]
    good = moment_from_form(CollarFormData(2, zs.modular_ratios))
    assert hamiltonian_check(zs, good)
    tampered = LaurentLogFn(good.log_coeff + 1, good.laurent)
    assert not hamiltonian_check(zs, tampered)
