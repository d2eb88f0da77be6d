import random
from dataclasses import replace
from fractions import Fraction

import pytest

from bmquant.errors import NonOrientableError
from bmquant.generators import chain, random_spec, s2, s2xs2
from bmquant.lattice import Halfspace, HPolytope
from bmquant.model import ManifoldSpec, Piece, ZComponent, check_integrality, propagate_signs, validate_spec


def _with_z(spec, **changes):
    z = replace(spec.z_components[0], **changes)
    return replace(spec, z_components=(z,) + spec.z_components[1:])


@pytest.mark.parametrize("spec", [s2(1, (1,)), s2(2), s2(3), s2xs2(2), chain(3, 3), chain(4, 2)])
def test_examples_validate(spec):
    report = validate_spec(spec)
    assert report.ok, str(report)
    assert str(report) == "OK"


def test_zero_leading_weight_reported():
    spec = _with_z(s2(2), modular_ratios=(1, 0))
    assert "leading modular weight is zero" in validate_spec(spec)


def test_non_primitive_a_hat_reported():
    spec = _with_z(s2xs2(2), a_hat=(2, 4))
    assert "a_hat not primitive" in validate_spec(spec)


def test_unknown_piece_reported():
    spec = _with_z(s2(2), side_minus_piece="nowhere")
    assert "references unknown piece" in validate_spec(spec)


def test_disjoint_union_components_pinned_separately():
    a = chain(2, 3)
    extra = ZComponent("W", (0, 0, 1), (1,), HPolytope.point([40]), "Q2", "Q1")
    spec = replace(a, pieces=a.pieces + (Piece("Q1"), Piece("Q2")), z_components=a.z_components + (extra,))
    assert validate_spec(spec).ok
    assert propagate_signs(spec) == {"P1": 1, "P2": -1, "Q1": 1, "Q2": -1}


def test_mismatched_leaf_reported():
    spec = _with_z(s2(3), leaf_polytope_minus=HPolytope.point([1]))
    assert "leaf polytopes differ across the two sides" in validate_spec(spec)


def test_overlapping_regions_reported():
    base = s2(2)
    n = Piece("N", (HPolytope.box([-5], [-3]), HPolytope.box([-3], [0])))
    spec = replace(base, pieces=(n, base.pieces[1]))
    assert "not lattice-disjoint" in validate_spec(spec)


def test_region_meeting_own_end_reported():
    base = s2(2)
    # the north end runs over levels <= -1
    n = Piece("N", (HPolytope.box([-6], [-4]),))
    spec = replace(base, pieces=(n, base.pieces[1]))
    assert "overlapping regions" in validate_spec(spec)


def test_non_delzant_region_reported():
    tri = HPolytope((Halfspace((1, 0), 0), Halfspace((0, 1), 0), Halfspace((-2, -1), -2)), 2)
    base = s2xs2(2)
    spec = replace(base, pieces=(Piece("N", (tri.translate((5, 5)),)), base.pieces[1]))
    assert "not Delzant" in validate_spec(spec)


def test_propagate_signs_chain():
    assert propagate_signs(chain(3, 3)) == {"P1": 1, "P2": -1, "P3": 1}
    assert propagate_signs(chain(3, 2)) == {"P1": 1, "P2": 1, "P3": 1}


def test_self_loop_odd_is_non_orientable():
    z = ZComponent("Z", (1,), (1,), HPolytope.point([0]), "P", "P")
    spec = ManifoldSpec(1, 1, (Piece("P"),), (z,), "P")
    with pytest.raises(NonOrientableError, match="non-orientable configuration"):
        propagate_signs(spec)
    assert "non-orientable configuration" in validate_spec(spec)


def test_self_loop_even_is_fine():
    z = ZComponent("Z", (0, 1), (1,), HPolytope.point([0]), "P", "P")
    spec = ManifoldSpec(2, 1, (Piece("P"),), (z,), "P")
    assert propagate_signs(spec) == {"P": 1}


def test_signs_independent_of_traversal():
    rng = random.Random(11)
    for seed in range(30):
        m = rng.choice([1, 2, 3, 4])
        spec = random_spec(random.Random(seed), m, rng.randint(1, 2), max_pieces=5)
        ref = propagate_signs(spec)
        assert ref[spec.base_piece] == 1
        for _ in range(5):
            assert propagate_signs(spec, random.Random(rng.random())) == ref
        assert propagate_signs(spec) == ref
        if m % 2 == 0:
            assert set(ref.values()) == {1}


@pytest.mark.parametrize(
    "ratios,ok", [((0, 1), True), ((0, Fraction(1, 2)), False), ((Fraction(1, 3), 1), False), ((-2, 3), True)]
)
def test_integrality_ratios(ratios, ok):
    assert check_integrality(_with_z(s2(2), modular_ratios=ratios)) is ok


def test_integrality_rational_vertex():
    base = s2xs2(2)
    sq = HPolytope.box([Fraction(1, 3), 5], [2, 6])
    spec = replace(base, pieces=(Piece("N", (sq,)), base.pieces[1]))
    assert not check_integrality(spec)
    assert "non-lattice vertex" in validate_spec(spec)
