"""Tests for the supporting-tree builder.

Oracles come first: the quarter-copy separation law and the split
exclusions are re-verified here with independent arithmetic (plain
interval endpoints and the cyclic shift map) before the builder's own
checkers are trusted, and the stage invariants of finished builds are
recomputed from the recorded stage snapshots rather than believed.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haarshift.dyadic_core import (
    DomainError,
    DyadicInterval,
    MAX_LEVEL,
    PointSet,
    level_intervals,
)
from haarshift.shift_analysis import (
    Decomposition,
    ShiftSequence,
    extract_decomposition,
    select_levels,
    shift_map,
)
from haarshift.tree_builder import (
    LevelTranslation,
    build_supporting_tree,
    horizontal_split,
    phi,
    psi,
    split_exclusion_violations,
    tree_report_to_wire,
)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def interval_distance(A: DyadicInterval, B: DyadicInterval) -> Fraction:
    """Distance between two intervals from bare endpoints."""
    return max(B.left - A.right, A.left - B.right, Fraction(0))


def naive_split_check(plan, level: int, m: int) -> list[str]:
    """Re-verify the split exclusions through the actual shift map."""
    probe = ShiftSequence(tuple(0 if j != level else m for j in range(1, level + 1)))
    n = 1 << level
    problems = []
    for cls in plan.classes:
        members = {DyadicInterval(level, k) for k in cls}
        for I in members:
            neighbours = [DyadicInterval(level, (I.k % n) + 1),
                          DyadicInterval(level, ((I.k - 2) % n) + 1)]
            tau_I = shift_map(probe, I) if level >= 1 else I
            shifted = [tau_I]
            for off in (1, -1, 2, -2):
                shifted.append(DyadicInterval(level, ((tau_I.k - 1 + off) % n) + 1))
            for other in neighbours + shifted:
                if other != I and other in members:
                    problems.append(f"{I} conflicts with {other}")
    return problems


def stage_halo_factor(gap: int) -> Fraction:
    return 2 * sum((Fraction(1, 4 ** i) for i in range(1, gap + 1)), Fraction(0))


# ---------------------------------------------------------------------------
# phi / psi
# ---------------------------------------------------------------------------

def test_phi_of_unit_interval():
    img = phi(DyadicInterval(0, 1))
    assert img == DyadicInterval(2, 2)
    assert (img.left, img.right) == (Fraction(1, 4), Fraction(1, 2))


def test_phi_geometry_everywhere():
    for j in range(0, 6):
        for I in level_intervals(j):
            img = phi(I)
            assert img.length == I.length / 4
            assert img.right == I.midpoint
            assert I.contains(img)


def test_psi_inverts_phi():
    for j in range(0, 5):
        for I in level_intervals(j):
            assert psi(phi(I)) == I


def test_psi_is_the_grandparent():
    I = DyadicInterval(5, 19)
    assert psi(I) == I.ancestor(3)
    assert psi(I).contains(I)


def test_psi_rejects_shallow_levels():
    with pytest.raises(DomainError):
        psi(DyadicInterval(1, 2))
    with pytest.raises(DomainError):
        psi(DyadicInterval(0, 1))


def test_phi_rejects_levels_near_the_cap():
    with pytest.raises(DomainError):
        phi(DyadicInterval(MAX_LEVEL - 1, 1))


def test_phi_images_of_the_two_halves_are_far_apart():
    J1 = phi(DyadicInterval(1, 1))
    J2 = phi(DyadicInterval(1, 2))
    assert interval_distance(J1, J2) >= J1.length


def test_phi_separation_trichotomy_exhaustive():
    """Quarter copies of any two intervals (levels <= 5) are nested, or at
    least the shorter copy's length apart — except that the copy of an
    interval touches the copy of its own left child (distance exactly 0,
    still disjoint).  This characterizes the exception completely."""
    pool = [I for j in range(0, 6) for I in level_intervals(j)]
    copies = {I: phi(I) for I in pool}
    for A in pool:
        for B in pool:
            J1, J2 = copies[A], copies[B]
            if J1 == J2 or J1.length > J2.length:
                continue
            if J2.contains(J1):
                continue
            d = interval_distance(J1, J2)
            if d >= J1.length:
                continue
            # the single exception: A is the left child of B
            assert d == 0
            assert A.j == B.j + 1 and A == B.children()[0]


# ---------------------------------------------------------------------------
# horizontal_split
# ---------------------------------------------------------------------------

def test_split_zero_shift_level_three():
    plan = horizontal_split(3, 0)
    assert split_exclusion_violations(plan) == []
    assert naive_split_check(plan, 3, 0) == []
    assert sorted(k for cls in plan.classes for k in cls) == list(range(1, 9))


def test_split_unit_shift_level_four():
    plan = horizontal_split(4, 1)
    assert plan.class_count <= 512
    assert split_exclusion_violations(plan) == []
    assert naive_split_check(plan, 4, 1) == []


def test_split_level_one_is_trivial():
    for m in (-2, -1, 0, 1, 2):
        plan = horizontal_split(1, m)
        assert plan.class_count <= 2
        assert split_exclusion_violations(plan) == []


def test_split_level_zero_single_class():
    plan = horizontal_split(0, 0)
    assert plan.classes == ((1,),)


def test_split_rejects_oversized_shift():
    with pytest.raises(DomainError):
        horizontal_split(3, 9)


@settings(max_examples=60, deadline=None)
@given(level=st.integers(min_value=0, max_value=7), seed=st.integers(0, 2 ** 30))
def test_split_properties_random(level, seed):
    rng = random.Random(seed)
    m = rng.randint(-(1 << level), 1 << level)
    plan = horizontal_split(level, m)
    # partition of the level
    assert sorted(k for cls in plan.classes for k in cls) == \
        list(range(1, (1 << level) + 1))
    # within the stated bounds
    assert plan.class_count <= 512
    assert all(c <= 8 for c in plan.colour_counts)
    # exclusions hold, via both the packaged and the independent check
    assert split_exclusion_violations(plan) == []
    assert naive_split_check(plan, level, m) == []


# ---------------------------------------------------------------------------
# LevelTranslation
# ---------------------------------------------------------------------------

def test_translation_images_and_domain():
    t = LevelTranslation(((3, 2), (5, 7)))
    img = t.image_set(DyadicInterval(3, 1))
    assert img == PointSet.of(DyadicInterval(3, 3))
    assert t.shift_by(5) == Fraction(7, 32)
    with pytest.raises(DomainError):
        t.offset_at(4)


def test_translation_validation():
    with pytest.raises(DomainError):
        LevelTranslation(((3, 2), (3, 4)))       # duplicate level
    with pytest.raises(DomainError):
        LevelTranslation(((3, -1),))              # leaves the ambient interval
    with pytest.raises(DomainError):
        LevelTranslation(((3, 9),))


# ---------------------------------------------------------------------------
# build_supporting_tree: degenerate and example shapes
# ---------------------------------------------------------------------------

def test_build_all_zero_shift():
    M = ShiftSequence.from_list([0] * 8)
    res = extract_decomposition(M)
    assert res.status == "trivial"
    report = build_supporting_tree(M, res.decomposition, 8)
    assert report.status == "ok" and report.ok
    assert report.pieces == ()
    # one still-level piece per level 0..8
    assert [p.key for p in report.level_pieces] == \
        [f"level j={t} class=1" for t in range(9)]
    for piece in report.level_pieces:
        assert piece.certificate.verdict
        assert piece.certificate.C == 2
        assert piece.certificate.delta == 1
        # every set is the interval next to its unit translate
        I = piece.members[0]
        A = piece.family.get(I)
        assert A.measure == 2 * I.length
        assert A.contains_set(PointSet.of(I))


def test_build_one_band_example():
    M = ShiftSequence.from_list([0, 0, 0, 1, 1, 1, 0, 0])
    res = extract_decomposition(M)
    assert res.status == "ok"
    report = build_supporting_tree(M, res.decomposition, 8)
    assert report.status == "ok" and report.ok
    assert report.pieces, "the nonzero band must produce quarter-copy pieces"
    for piece in report.pieces + report.level_pieces:
        assert piece.certificate.verdict
        assert piece.certificate.delta >= Fraction(1, 2)
        assert piece.size_min >= 2
        assert piece.size_max <= Fraction(20, 3)
    # band members are quarter copies: positions sit at 2 mod 4
    for piece in report.pieces:
        for I in piece.members:
            assert I.k % 4 == 2
    # the translation realizes both band values exactly (x equals the
    # cluster on every band level here, so no fallback notes appear)
    assert report.sigma.offset_at(6) == 4
    assert report.sigma.offset_at(7) == 4
    assert report.notes == ()


def test_build_thin_bands_multi_stage():
    M = ShiftSequence.from_list([1] * 10)
    res = extract_decomposition(M)
    assert res.status == "ok"
    report = build_supporting_tree(M, res.decomposition, 10)
    assert report.status == "ok" and report.ok
    multi = [p for p in report.pieces if len(p.stages) > 1]
    assert multi, "bands six apart must stack into multi-stage pieces"
    merged = sum(len(s.attached_core) + len(s.attached_shadow)
                 for p in multi for s in p.stages)
    assert merged > 0, "later stages must merge seeds into existing sets"
    for piece in report.pieces + report.level_pieces:
        assert piece.ok, piece.key


def test_stage_records_support_independent_replay():
    """Re-verify the recorded stages of every multi-stage piece: members
    keep their interval and its shifted copy, grown sets stay inside the
    geometric halo of their origin, and spans are pairwise disjoint or
    nested.  This recomputes the invariants from the snapshots instead of
    trusting the builder's own flags."""
    M = ShiftSequence.from_list([1] * 10)
    res = extract_decomposition(M)
    report = build_supporting_tree(M, res.decomposition, 10)
    checked = 0
    for piece in report.pieces:
        if len(piece.stages) < 2:
            continue
        entry_stage: dict[DyadicInterval, int] = {}
        entry_shift: dict[DyadicInterval, Fraction] = {}
        for stage in piece.stages:
            for I in stage.entered:
                entry_stage[I] = stage.n
                entry_shift[I] = stage.a
            assert stage.ok and stage.separation_ok
            spans = {}
            for I, core in stage.core.items():
                shadow = stage.shadow[I]
                base = PointSet.of(I)
                shifted = base.translate(entry_shift[I])
                assert core.contains_set(base)
                assert shadow.contains_set(shifted)
                slack = stage_halo_factor(stage.n - entry_stage[I]) * I.length
                lo, hi = core.hull()
                assert lo >= I.left - slack and hi <= I.right + slack
                lo, hi = shadow.hull()
                slo, shi = shifted.hull()
                assert lo >= slo - slack and hi <= shi + slack
                spans[I] = core.union(shadow)
                checked += 1
            items = list(spans.values())
            for i in range(len(items)):
                for q in range(i + 1, len(items)):
                    inter = items[i].intersect(items[q])
                    if not inter.is_empty:
                        assert (items[i].contains_set(items[q])
                                or items[q].contains_set(items[i]))
    assert checked > 0


def test_build_touching_copies_keep_certificates():
    """A band spanning two levels puts an interval's copy right next to
    its left child's copy: the stated separation margin fails (recorded),
    but the sets stay disjoint and every certificate passes."""
    M = ShiftSequence.from_list([0, 0, 1, 2, 1, 0, 0, 0])
    res = extract_decomposition(M)
    assert res.status == "ok"
    assert res.decomposition.jk == (3, 5)       # one band over levels 3 and 4
    report = build_supporting_tree(M, res.decomposition, 8)
    assert report.status == "ok" and report.ok
    assert any("margin" in n for n in report.notes)
    soft = [s for p in report.pieces for s in p.stages if not s.separation_ok]
    assert soft, "the touching pair must be recorded as a margin shortfall"
    assert all(s.dichotomy_ok for p in report.pieces for s in p.stages)
    # locate the touching pair: copies of I(3,1) and of its left child I(4,1)
    J_parent, J_child = DyadicInterval(5, 2), DyadicInterval(6, 2)
    owner = next(p for p in report.pieces if J_parent in p.members)
    assert J_child in owner.members
    A1 = owner.family.get(J_parent)
    A2 = owner.family.get(J_child)
    assert A1.intersect(A2).is_empty
    assert A1.distance(A2) == 0
    assert owner.certificate.verdict


def test_build_fallback_translation_note_for_small_regime_level():
    """A band level in the small regime sits far from the cluster value;
    the translation then ignores that level's own shift and targets the
    band value directly, recording a note."""
    M = ShiftSequence.from_list([0, 0, 1, 2, 1, 0, 0, 0])
    D = Decomposition((Fraction(1, 8),), (3, 6))   # level 5 is small, not near
    report = build_supporting_tree(M, D, 8)
    assert report.status == "ok" and report.ok
    assert report.sigma.offset_at(7) == 16         # nearest to (1/8) * 128
    assert any("level 7" in n and "nearest" in n for n in report.notes)


def test_build_giant_band_chain():
    """One band covering every level: all quarter copies of one class form
    a single piece whose chains nest or touch; exact certificates still
    come out at C = 2, delta = 1."""
    M = ShiftSequence.from_list([1, 2, 4, 8, 16, 32, 64, 128])
    D = Decomposition((Fraction(1, 2),), (1, 9))
    report = build_supporting_tree(M, D, 8)
    assert report.status == "ok" and report.ok
    sizes = [len(p.members) for p in report.pieces]
    assert sum(sizes) == sum(1 << t for t in range(1, 9))
    for piece in report.pieces:
        assert piece.certificate.verdict
        assert piece.size_min == 2 and piece.size_max == 2


def test_build_prefix_and_tail_levels_are_covered():
    M = ShiftSequence.from_list([0, 0, 1, 2, 1, 0, 0, 0])
    res = extract_decomposition(M)
    report = build_supporting_tree(M, res.decomposition, 8)
    level_of = {}
    for piece in report.level_pieces:
        t = piece.members[0].j
        level_of.setdefault(t, []).append(piece)
    # bands cover levels 3..4; everything else appears as level pieces
    assert sorted(level_of) == [0, 1, 2, 5, 6, 7, 8]
    # tail level 5 still moves (m = 1), so its pieces pair I with tau(I)
    probe = DyadicInterval(5, 1)
    owner = next(p for p in level_of[5] if probe in p.members)
    A = owner.family.get(probe)
    assert A.contains_set(PointSet.of(shift_map(M, probe)))
    assert A.measure == 2 * probe.length


def test_build_refuses_invalid_bands():
    M = ShiftSequence.from_list([0, 2, 0, 0])
    D = Decomposition((Fraction(1, 4),), (1, 5))
    report = build_supporting_tree(M, D, 4)
    assert report.status == "refused"
    assert "band" in report.reason
    assert report.pieces == () and report.level_pieces == ()


def test_build_refuses_non_dyadic_cluster():
    M = ShiftSequence.from_list([0, 0, 0, 0])
    D = Decomposition((Fraction(1, 3),), (1, 5))
    report = build_supporting_tree(M, D, 4)
    assert report.status == "refused"
    assert "dyadic" in report.reason


def test_build_partial_when_band_values_shrink_too_slowly():
    """Stages six bands apart must bring much smaller seeds; with loose
    slack widths a constant band value survives validation, the precheck
    fails, and the piece reports its leftover bands instead of guessing."""
    M = ShiftSequence.from_list([1, 2, 4, 8, 16, 32, 64, 128])
    D = Decomposition((Fraction(1, 2),) * 7, tuple(range(1, 9)),
                      w1=Fraction(128), w2=Fraction(1))
    report = build_supporting_tree(M, D, 8)
    assert report.status == "partial"
    truncated = [p for p in report.pieces if p.unprocessed_bands]
    assert truncated
    assert any(7 in p.unprocessed_bands for p in truncated)
    assert any("truncated" in n for n in report.notes)
    # everything that was built is still verified
    for piece in report.pieces:
        assert piece.certificate.verdict


def test_build_level_selection_pipeline():
    """Restricting to selected sparse levels yields a decomposable shift
    whose tree certifies end to end."""
    M = ShiftSequence.from_list([1] * 12)
    sel = select_levels(M, 12)
    assert sel.ok
    res = extract_decomposition(sel.selected_shift, 12)
    assert res.applicable and res.decomposition is not None
    report = build_supporting_tree(sel.selected_shift, res.decomposition, 12)
    assert report.status in ("ok", "partial")
    for piece in report.pieces + report.level_pieces:
        assert piece.certificate.verdict
        assert piece.certificate.delta >= Fraction(1, 2)
        assert piece.size_max <= Fraction(20, 3)


def test_build_depth_validation():
    M = ShiftSequence.from_list([0] * 4)
    with pytest.raises(DomainError):
        build_supporting_tree(M, Decomposition((), ()), 9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 30))
def test_build_random_decomposable_shifts(seed):
    """Random shifts whose extraction succeeds must build verified trees."""
    rng = random.Random(seed)
    depth = rng.randint(5, 8)
    m = [0] * depth
    j = rng.randint(1, 3)
    while j <= depth:
        m[j - 1] = min(rng.choice([1, 2, 1, 3]), 1 << j)
        j += rng.randint(2, 4)
    M = ShiftSequence.from_list(m)
    res = extract_decomposition(M)
    if res.status != "ok":
        return
    report = build_supporting_tree(M, res.decomposition, depth)
    assert report.status in ("ok", "partial")
    for piece in report.pieces + report.level_pieces:
        assert piece.certificate.verdict, (m, piece.key)
        assert piece.certificate.nested
        assert piece.certificate.delta >= Fraction(1, 2)
        assert piece.size_min >= 2
        assert piece.size_max <= Fraction(20, 3)
    if report.status == "ok":
        assert all(s.dichotomy_ok for p in report.pieces for s in p.stages)


# ---------------------------------------------------------------------------
# wire form
# ---------------------------------------------------------------------------

def test_wire_summary_is_json_ready():
    M = ShiftSequence.from_list([0, 0, 0, 1, 1, 1, 0, 0])
    res = extract_decomposition(M)
    report = build_supporting_tree(M, res.decomposition, 8)
    wire = tree_report_to_wire(report)
    blob = json.loads(json.dumps(wire))
    assert blob["status"] == "ok" and blob["ok"] is True
    assert blob["decomposition"]["jk"] == [4, 5, 6]
    assert blob["sigma"]["6"] == 4
    assert all(set(row) >= {"key", "kind", "members", "ok", "C", "delta"}
               for row in blob["pieces"])
    assert not any("sets" in row for row in blob["pieces"])


def test_wire_member_sets_round_trip_measures():
    M = ShiftSequence.from_list([0, 0, 0, 1, 1, 1, 0, 0])
    res = extract_decomposition(M)
    report = build_supporting_tree(M, res.decomposition, 8)
    wire = tree_report_to_wire(report, include_members=True)
    row = next(r for r in wire["pieces"] if r["kind"] == "band")
    piece = next(p for p in report.all_pieces if p.key == row["key"])
    total = sum((Fraction(b) - Fraction(a)
                 for parts in row["sets"].values() for a, b in parts),
                Fraction(0))
    expected = sum((piece.family.get(I).measure for I in piece.members), Fraction(0))
    assert total == expected
