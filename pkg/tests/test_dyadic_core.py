"""Tests for exact dyadic-interval combinatorics and supporting-tree checks."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haarshift import (
    DomainError,
    DyadicInterval,
    IncompleteFamilyError,
    NestedFamily,
    PointSet,
    Rearrangement,
    level_intervals,
    make_interval,
    pointset_measure,
    q_collection,
    union_of,
    verify_dyadic_tree,
    verify_supporting_tree,
)

GRID = 1 << 12  # raster oracle resolution: all test endpoints are coarser


def raster_measure(ps: PointSet) -> Fraction:
    """Independent oracle: rasterize onto a fixed fine grid and count cells."""
    cells = set()
    for a, b in ps.as_fractions():
        lo, hi = int(a * GRID), int(b * GRID)
        assert lo == a * GRID and hi == b * GRID, "oracle grid too coarse"
        cells.update(range(lo, hi))
    return Fraction(len(cells), GRID)


intervals_st = st.integers(0, 8).flatmap(
    lambda j: st.tuples(st.just(j), st.integers(1, 1 << j))).map(
    lambda jk: DyadicInterval(*jk))


def pointsets_st():
    return st.lists(intervals_st, max_size=6).map(union_of)


# -- make_interval -----------------------------------------------------------

def test_make_interval_unit():
    I = make_interval(0, 1)
    assert (I.left, I.right) == (0, 1)


def test_make_interval_2_3():
    I = make_interval(2, 3)
    assert (I.left, I.right) == (Fraction(1, 2), Fraction(3, 4))


def test_make_interval_out_of_range():
    with pytest.raises(DomainError):
        make_interval(3, 9)
    with pytest.raises(DomainError):
        make_interval(-1, 1)
    with pytest.raises(DomainError):
        make_interval(2, 0)


def test_parent_children_roundtrip():
    I = make_interval(4, 7)
    lo, hi = I.children()
    assert lo.parent() == I and hi.parent() == I
    assert I.contains(lo) and I.contains(hi)
    assert lo.left == I.left and hi.right == I.right and lo.right == hi.left == I.midpoint


# -- q_collection ------------------------------------------------------------

def test_q_collection_unit_depth1():
    got = set(q_collection(make_interval(0, 1), 1))
    assert got == {make_interval(0, 1), make_interval(1, 1), make_interval(1, 2)}


def test_q_collection_count_example():
    assert len(q_collection(make_interval(1, 1), 3)) == 7


def test_q_collection_right_half_depth1():
    assert q_collection(make_interval(1, 2), 1) == [make_interval(1, 2)]


def test_q_collection_bad_depth():
    with pytest.raises(DomainError):
        q_collection(make_interval(2, 1), 1)


@given(intervals_st, st.integers(0, 4))
def test_q_collection_count_formula(I, extra):
    J = I.j + extra
    got = q_collection(I, J)
    assert len(got) == (1 << (J - I.j + 1)) - 1
    assert len(set(got)) == len(got)
    assert all(I.contains(Jv) for Jv in got)


@given(intervals_st, st.integers(0, 4))
def test_q_collection_level_slices_tile_I(I, extra):
    J = I.j + extra
    members = q_collection(I, J)
    for l in range(I.j, J + 1):
        slice_l = [m for m in members if m.j == l]
        assert pointset_measure(slice_l) == I.length


# -- pointset_measure --------------------------------------------------------

def test_measure_containment_counts_once():
    c = [make_interval(1, 1), make_interval(2, 2)]
    assert pointset_measure(c) == Fraction(1, 2)


def test_measure_disjoint_union():
    c = [make_interval(2, 1), make_interval(2, 3)]
    assert pointset_measure(c) == Fraction(1, 2)


def test_measure_empty():
    assert pointset_measure([]) == 0


@given(st.lists(intervals_st, max_size=8))
def test_measure_matches_raster_oracle(intervals):
    assert pointset_measure(intervals) == raster_measure(union_of(intervals))


# -- PointSet algebra --------------------------------------------------------

@given(pointsets_st(), pointsets_st())
def test_inclusion_exclusion(A, B):
    assert A.union(B).measure + A.intersect(B).measure == A.measure + B.measure


@given(pointsets_st(), pointsets_st())
def test_union_commutes_and_contains(A, B):
    U = A.union(B)
    assert U == B.union(A)
    assert U.contains_set(A) and U.contains_set(B)
    assert A.intersect(B) == B.intersect(A)


@given(pointsets_st(), st.integers(0, 4), st.integers(0, 15))
def test_translate_preserves_measure(A, s, num):
    q = Fraction(num, 1 << s)
    assert A.translate(q).measure == A.measure
    assert A.translate(q).translate(-q) == A


@given(pointsets_st(), pointsets_st())
def test_intersect_measure_oracle(A, B):
    got = A.intersect(B)
    assert got.measure == raster_measure(got)
    assert A.contains_set(got) and B.contains_set(got)


def test_distance_and_hull():
    A = PointSet.of(make_interval(2, 1))          # [0, 1/4)
    B = PointSet.of(make_interval(2, 3))          # [1/2, 3/4)
    assert A.distance(B) == Fraction(1, 4)
    assert A.distance(A) == 0
    U = A.union(B)
    assert U.hull() == (Fraction(0), Fraction(3, 4))
    assert U.diameter == Fraction(3, 4)
    with pytest.raises(DomainError):
        A.distance(PointSet.empty())


def test_translate_rejects_non_dyadic():
    with pytest.raises(DomainError):
        PointSet.of(make_interval(0, 1)).translate(Fraction(1, 3))


# -- Rearrangement -----------------------------------------------------------

def test_identity_rearrangement():
    tau = Rearrangement.identity(3)
    for I in level_intervals(3):
        assert tau.image(I) == I


def test_swap_rearrangement_level1():
    tau = Rearrangement.from_level_maps(2, {1: (2, 1)})
    assert tau.image(make_interval(1, 1)) == make_interval(1, 2)
    assert tau.image(make_interval(2, 1)) == make_interval(2, 1)


def test_rearrangement_depth_error():
    tau = Rearrangement.identity(2)
    with pytest.raises(DomainError):
        tau.image(make_interval(3, 1))


def test_rearrangement_rejects_non_permutation():
    with pytest.raises(DomainError):
        Rearrangement(1, ((1,), (1, 1)))


# -- verify_supporting_tree --------------------------------------------------

def identity_family(F):
    return NestedFamily({I: PointSet.of(I) for I in F})


def test_identity_tree_certificate():
    F = q_collection(make_interval(0, 1), 3)
    cert = verify_supporting_tree(Rearrangement.identity(3), F, identity_family(F))
    assert cert.verdict and cert.C == 1 and cert.delta == 1 and cert.nested


@given(st.lists(intervals_st, min_size=1, max_size=10, unique=True))
@settings(max_examples=50)
def test_identity_tree_certificate_property(F):
    cert = verify_supporting_tree(Rearrangement.identity(8), F, identity_family(F))
    assert cert.verdict and cert.C == 1 and cert.delta == 1


def test_nestedness_violation_reported():
    I, J = make_interval(2, 1), make_interval(2, 2)
    # A_I = [0, 3/8), A_J = [1/4, 1/2): overlap, neither contains the other
    A = NestedFamily({
        I: PointSet.from_fractions([(Fraction(0), Fraction(3, 8))]),
        J: PointSet.from_fractions([(Fraction(1, 4), Fraction(1, 2))]),
    })
    cert = verify_supporting_tree(Rearrangement.identity(2), [I, J], A)
    assert not cert.verdict and not cert.nested
    assert set(cert.nested_witnesses[0]) == {I, J}


def test_zero_overlap_fails():
    I = make_interval(1, 1)
    A = NestedFamily({I: PointSet.of(make_interval(1, 2))})
    cert = verify_supporting_tree(Rearrangement.identity(1), [I], A)
    assert cert.delta == 0 and not cert.verdict


def test_missing_entry_raises():
    F = [make_interval(1, 1), make_interval(1, 2)]
    A = NestedFamily({make_interval(1, 1): PointSet.of(make_interval(1, 1))})
    with pytest.raises(IncompleteFamilyError):
        verify_supporting_tree(Rearrangement.identity(1), F, A)


def test_certificate_records_image_overlap():
    tau = Rearrangement.from_level_maps(1, {1: (2, 1)})
    I = make_interval(1, 1)
    A = NestedFamily({I: PointSet.of(make_interval(0, 1))})  # covers I and tau(I)
    cert = verify_supporting_tree(tau, [I], A)
    assert cert.verdict and cert.delta == 1 and cert.C == 2
    rec = cert.records[0]
    assert rec.self_overlap == 1 and rec.image_overlap == 1 and rec.size_ratio == 2


def test_nested_verdict_forms_forest():
    # Chain plus a disjoint branch: containment must sort into a forest.
    F = [make_interval(0, 1), make_interval(1, 1), make_interval(2, 1), make_interval(2, 3)]
    A = identity_family(F)
    ok, bad = A.check_nested()
    assert ok and not bad
    sets = sorted(A.entries.values(), key=lambda s: -s.measure)
    for i, small in enumerate(sets):
        parents = [big for big in sets[:i] if big.contains_set(small) and big != small]
        for p1 in parents:
            for p2 in parents:
                assert p1.contains_set(p2) or p2.contains_set(p1)


# -- verify_dyadic_tree ------------------------------------------------------

def test_dyadic_tree_identity_passes():
    E = {I: PointSet.of(I) for I in q_collection(make_interval(0, 1), 2)}
    ok, problems = verify_dyadic_tree(E, Fraction(1))
    assert ok and not problems


def test_dyadic_tree_size_violation():
    E = {make_interval(1, 1): PointSet.of(make_interval(3, 1))}  # far too small
    ok, problems = verify_dyadic_tree(E, Fraction(2))
    assert not ok and "size" in problems[0]


def test_dyadic_tree_children_escape():
    I = make_interval(0, 1)
    lo, hi = I.children()
    E = {
        I: PointSet.of(lo),                     # parent set misses hi's set
        lo: PointSet.of(lo),
        hi: PointSet.of(hi),
    }
    ok, problems = verify_dyadic_tree(E, Fraction(2))
    assert not ok and any("escape" in p for p in problems)
