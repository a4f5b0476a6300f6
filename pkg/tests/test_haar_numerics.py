"""Tests for Haar expansions, norms, and rearrangement-operator reports."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from haarshift import (
    DomainError,
    DyadicInterval,
    GridFunction,
    NestedFamily,
    PointSet,
    Rearrangement,
    apply_rearrangement,
    blocked_equivalence_report,
    estimate_norm,
    figiel_shift,
    figiel_trend,
    haar_analyze,
    haar_synthesize,
    level_intervals,
    lp_norm,
    make_interval,
    q_collection,
    restricted_isomorphism_report,
    square_function,
)
from haarshift.haar_numerics import HaarCoefficients, _heap_apply, _heap_synthesize

RNG = np.random.default_rng(12345)


def random_rearrangement(depth, rng=RNG):
    perms = [(1,)]
    for l in range(1, depth + 1):
        p = rng.permutation(1 << l) + 1
        perms.append(tuple(int(v) for v in p))
    return Rearrangement(depth, tuple(perms))


def haar_on_grid(I: DyadicInterval, J: int) -> np.ndarray:
    v = np.zeros(1 << J)
    lo = (I.k - 1) << (J - I.j)
    mid = lo + (1 << (J - I.j - 1))
    hi = I.k << (J - I.j)
    v[lo:mid] = 1.0
    v[mid:hi] = -1.0
    return v


def coeff_oracle(values: np.ndarray, I: DyadicInterval, J: int) -> float:
    """a_I = <f, h_I>/|I| computed as a plain grid inner product."""
    h = haar_on_grid(I, J)
    return float(np.sum(values * h) * 2.0 ** (-J) / float(I.length))


# -- analyze / synthesize ------------------------------------------------------

def test_analyze_constant():
    c = haar_analyze(GridFunction(4, np.ones(16)))
    assert c.mean == 1.0
    assert all(v == 0.0 for v in c.coeff.values())


def test_analyze_single_haar():
    c = haar_analyze(GridFunction(3, haar_on_grid(make_interval(0, 1), 3)))
    assert c.mean == 0.0
    assert c.coeff[make_interval(0, 1)] == 1.0
    assert all(v == 0.0 for I, v in c.coeff.items() if I != make_interval(0, 1))


def test_analyze_matches_inner_product_oracle():
    J = 6
    values = RNG.standard_normal(1 << J)
    c = haar_analyze(GridFunction(J, values))
    for j in range(J):
        for I in level_intervals(j):
            assert c.coeff[I] == pytest.approx(coeff_oracle(values, I, J), abs=1e-12)


def test_roundtrip_random():
    J = 10
    values = RNG.standard_normal(1 << J)
    back = haar_synthesize(haar_analyze(GridFunction(J, values)))
    assert np.max(np.abs(back.values - values)) < 1e-12


def test_synthesize_sparse_coefficients():
    c = HaarCoefficients(2, 0.5, {make_interval(1, 2): 2.0})
    f = haar_synthesize(c)
    assert list(f.values) == [0.5, 0.5, 2.5, -1.5]


# -- square function -----------------------------------------------------------

def test_square_function_single():
    c = HaarCoefficients(3, 0.0, {make_interval(0, 1): 1.0})
    assert list(square_function(c).values) == [1.0] * 8


def test_square_function_left_child():
    c = HaarCoefficients(2, 0.0, {make_interval(1, 1): 1.0})
    assert list(square_function(c).values) == [1.0, 1.0, 0.0, 0.0]


def test_square_function_two_terms():
    c = HaarCoefficients(2, 5.0, {make_interval(0, 1): 1.0, make_interval(1, 1): 1.0})
    got = square_function(c).values
    assert got[0] == got[1] == pytest.approx(math.sqrt(2.0))
    assert got[2] == got[3] == 1.0          # the mean never enters


def test_square_function_cellwise_oracle():
    J = 5
    values = RNG.standard_normal(1 << J)
    c = haar_analyze(GridFunction(J, values))
    S = square_function(c).values
    for cell in range(1 << J):
        total = 0.0
        for j in range(J):
            k = (cell >> (J - j)) + 1
            total += c.coeff[DyadicInterval(j, k)] ** 2
        assert S[cell] == pytest.approx(math.sqrt(total), abs=1e-12)


# -- lp_norm ---------------------------------------------------------------------

def test_lp_norm_constant():
    f = GridFunction(3, np.ones(8))
    for p in (1, 1.5, 2, 3, 7):
        assert lp_norm(f, p) == pytest.approx(1.0)


def test_lp_norm_haar_p2():
    f = GridFunction(3, haar_on_grid(make_interval(0, 1), 3))
    assert lp_norm(f, 2) == pytest.approx(1.0)


def test_lp_norm_half_indicator():
    v = np.zeros(8)
    v[:4] = 1.0
    assert lp_norm(GridFunction(3, v), 3) == pytest.approx(0.5 ** (1 / 3))


def test_lp_norm_rejects_small_p():
    with pytest.raises(DomainError):
        lp_norm(GridFunction(1, np.ones(2)), 0.5)


def test_parseval():
    J = 8
    values = RNG.standard_normal(1 << J)
    f = GridFunction(J, values)
    c = haar_analyze(f)
    rhs = c.mean ** 2 + sum(a * a * float(I.length) for I, a in c.coeff.items())
    assert lp_norm(f, 2) ** 2 == pytest.approx(rhs, rel=1e-10)


def test_square_function_ratio_envelope():
    J = 9
    for p in (1.5, 3.0, 4.0):
        for trial in range(10):
            rng = np.random.default_rng(100 * trial + int(p * 10))
            f = GridFunction(J, rng.standard_normal(1 << J))
            ratio = lp_norm(square_function(haar_analyze(f)), p) / lp_norm(f, p)
            assert 0.01 < ratio < 100.0


# -- apply_rearrangement --------------------------------------------------------

def test_apply_identity():
    c = haar_analyze(GridFunction(4, RNG.standard_normal(16)))
    out = apply_rearrangement(c, Rearrangement.identity(4))
    assert out.coeff == c.coeff and out.mean == c.mean


def test_apply_is_l2_isometry():
    J = 6
    tau = random_rearrangement(J)
    c = haar_analyze(GridFunction(J, RNG.standard_normal(1 << J)))
    f, g = haar_synthesize(c), haar_synthesize(apply_rearrangement(c, tau))
    assert lp_norm(g, 2) == pytest.approx(lp_norm(f, 2), rel=1e-12)


def test_apply_single_swap():
    tau = Rearrangement.from_level_maps(1, {1: (2, 1)})
    c = HaarCoefficients(2, 0.0, {make_interval(1, 1): 3.0})
    out = apply_rearrangement(c, tau)
    assert out.coeff == {make_interval(1, 2): 3.0}


def test_apply_roundtrip_inverse():
    J = 5
    tau = random_rearrangement(J)
    inverse = Rearrangement(J, tuple(
        tuple(p.index(k) + 1 for k in range(1, len(p) + 1)) for p in tau.perms))
    c = haar_analyze(GridFunction(J, RNG.standard_normal(1 << J)))
    back = apply_rearrangement(apply_rearrangement(c, tau), inverse)
    assert back.coeff == c.coeff


def test_apply_level_gap():
    c = HaarCoefficients(4, 0.0, {make_interval(3, 1): 1.0})
    with pytest.raises(DomainError):
        apply_rearrangement(c, Rearrangement.identity(2))


def test_heap_path_agrees_with_dict_path():
    J = 5
    tau = random_rearrangement(J)
    heap = RNG.standard_normal(1 << J)
    heap[0] = 0.0
    c = HaarCoefficients(J, 0.7, {
        DyadicInterval(j, k): float(heap[(1 << j) + k - 1])
        for j in range(J) for k in range(1, (1 << j) + 1)})
    via_dict = haar_synthesize(apply_rearrangement(c, tau)).values
    via_heap = _heap_synthesize(0.7, _heap_apply(tau, heap, J), J)
    assert np.max(np.abs(via_dict - via_heap)) < 1e-12


# -- estimate_norm ----------------------------------------------------------------

def test_estimate_identity_is_one():
    rep = estimate_norm(Rearrangement.identity(5), 4.0, 5, budget=60, seed=1)
    assert rep.value == 1.0


def test_estimate_p2_is_exactly_one():
    tau = random_rearrangement(6)
    rep = estimate_norm(tau, 2.0, 6, budget=80, seed=2)
    assert rep.value == 1.0


def test_estimate_at_least_one():
    tau = random_rearrangement(6)
    rep = estimate_norm(tau, 4.0, 6, budget=40, seed=3)
    assert rep.value >= 1.0


def test_estimate_monotone_in_budget():
    tau = figiel_shift(4, 8).as_rearrangement()
    small = estimate_norm(tau, 4.0, 8, budget=50, seed=11)
    large = estimate_norm(tau, 4.0, 8, budget=250, seed=11)
    assert small.value <= large.value


def test_estimate_deterministic():
    tau = figiel_shift(2, 7).as_rearrangement()
    a = estimate_norm(tau, 3.0, 7, budget=100, seed=5)
    b = estimate_norm(tau, 3.0, 7, budget=100, seed=5)
    assert a.value == b.value and a.witness_coeffs == b.witness_coeffs


def test_estimate_rejects_p_at_most_one():
    with pytest.raises(DomainError):
        estimate_norm(Rearrangement.identity(3), 1.0, 3)


# -- figiel trend ------------------------------------------------------------------

def test_figiel_shift_reduces_mod_level():
    M = figiel_shift(16, 6)
    assert M.m == (0, 0, 0, 0, 16, 16)
    M.as_rearrangement()                    # must be a valid permutation table


def test_figiel_trend_smoke():
    rep = figiel_trend(ms=(1, 2, 4), p=4.0, J=8, budget=60, seed=7)
    assert [e.m for e in rep.entries] == [1, 2, 4]
    assert all(e.value >= 1.0 for e in rep.entries)
    assert rep.nondecreasing


# -- blocked systems ----------------------------------------------------------------

def test_blocked_singleton_identity():
    H = {I: [I] for I in level_intervals(2)}
    rep = blocked_equivalence_report(H, Rearrangement.identity(3), 3.0,
                                     trials=20, seed=0)
    assert rep.ok
    assert rep.transformed_over_block == (1.0, 1.0)
    assert rep.block_over_haar == (1.0, 1.0)


def test_blocked_children_p2_exact():
    # Blocks of the two children: exact Parseval makes both ratios 1.
    H = {I: list(I.children()) for I in level_intervals(2)}
    rep = blocked_equivalence_report(H, Rearrangement.identity(3), 2.0,
                                     trials=50, seed=1)
    assert rep.ok
    assert rep.transformed_over_block == (1.0, 1.0)
    assert rep.block_over_haar == (1.0, 1.0)


def test_blocked_rejects_mixed_lengths():
    I = make_interval(1, 1)
    H = {I: [make_interval(2, 1), make_interval(3, 3)]}
    rep = blocked_equivalence_report(H, Rearrangement.identity(3), 2.0)
    assert not rep.ok and "mixes" in rep.witness


def test_blocked_rejects_shared_member():
    shared = make_interval(3, 1)
    H = {make_interval(1, 1): [shared], make_interval(1, 2): [shared]}
    rep = blocked_equivalence_report(H, Rearrangement.identity(3), 2.0)
    assert not rep.ok and "both" in rep.witness


def test_blocked_single_family_random_tau():
    H = {make_interval(0, 1): [make_interval(3, k) for k in (1, 3, 5, 7)]}
    rep = blocked_equivalence_report(H, random_rearrangement(4), 4.0,
                                     trials=40, seed=2)
    assert rep.ok
    lo, hi = rep.transformed_over_block
    assert 0.125 < lo <= hi < 8.0


# -- restricted isomorphism -----------------------------------------------------------

def identity_family(F):
    return NestedFamily({I: PointSet.of(I) for I in F})


def test_restricted_identity_ratios_one():
    F = q_collection(make_interval(0, 1), 3)
    rep = restricted_isomorphism_report(Rearrangement.identity(3), F,
                                        identity_family(F), 4.0, trials=25, seed=0)
    assert not rep.refused
    assert rep.ratio_min == rep.ratio_max == 1.0


def test_restricted_p2_exact():
    F = level_intervals(3)
    tau = random_rearrangement(3)
    whole = PointSet.of(make_interval(0, 1))
    A = NestedFamily({I: whole for I in F})   # equal sets are trivially nested
    rep = restricted_isomorphism_report(tau, F, A, 2.0, trials=25, seed=1)
    assert not rep.refused
    assert (rep.ratio_min, rep.ratio_max) == (1.0, 1.0)


def test_restricted_refuses_without_certificate():
    F = [make_interval(1, 1)]
    A = NestedFamily({make_interval(1, 1): PointSet.of(make_interval(1, 2))})
    rep = restricted_isomorphism_report(Rearrangement.identity(1), F, A, 4.0)
    assert rep.refused
    assert not rep.certificate.verdict
