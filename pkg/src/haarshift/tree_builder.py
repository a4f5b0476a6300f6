"""Supporting nested collections for decomposable shift rearrangements.

Given a shift sequence whose levels decompose into bands with one cluster
value a_k per band, this module builds, for every dyadic interval of the
truncated system, a containing set A(I) such that the family {A(I)} splits
into a bounded number of pieces, each of which is nested (any two sets are
comparable by inclusion or disjoint), every A(I) has measure comparable to
|I|, and A(I) captures at least half of a shifted copy of I.

The construction works on the quarter-length copies produced by `phi`
(one per interval, anchored at the interval's midpoint), because any two
such copies are either nested or well separated.  Band levels are certified
through their phi-copies against the per-level translation `sigma` that
realizes the band's cluster value; levels outside every band (below the
first band, or in the small tail after the last) are certified directly
against the shift itself, one level per piece.

Pieces are indexed by a residue r in 1..6 (bands six apart are processed
together, so consecutive stages of a piece act at well-separated scales)
and a class index from the horizontal split, which separates an interval
from its neighbours and from the shifted copies of its classmates.  Within
a piece the sets grow stage by stage: each new interval contributes a seed
(the interval plus its shifted copy), and seeds landing close to an
existing set are merged into it.  Every stage is verified exactly: seeds
stay inside a geometrically shrinking halo of their origin, and the
current sets are pairwise nested-or-separated at the stage's scale.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .dyadic_core import (
    MAX_LEVEL,
    DomainError,
    DyadicInterval,
    NestedFamily,
    PointSet,
    SupportCertificate,
    verify_supporting_tree,
)
from .shift_analysis import Decomposition, ShiftSequence, is_decomposable

__all__ = [
    "LevelTranslation",
    "SplitPlan",
    "TreePiece",
    "TreeReport",
    "TreeStage",
    "build_supporting_tree",
    "horizontal_split",
    "phi",
    "psi",
    "split_exclusion_violations",
    "tree_report_to_wire",
]

#: Number of band indices between consecutive stages of one piece.
STAGE_GAP = 6

#: Hard bound on the number of classes a horizontal split may produce.
MAX_CLASSES = 512

#: Measure bounds every finished set is checked against: 2|I| <= |A(I)| <= (20/3)|I|.
SIZE_LOWER = Fraction(2)
SIZE_UPPER = Fraction(20, 3)


# ---------------------------------------------------------------------------
# The quarter-length copy and its inverse
# ---------------------------------------------------------------------------

def phi(I: DyadicInterval) -> DyadicInterval:
    """The quarter-length copy of I whose right endpoint is I's midpoint.

    Copies of distinct intervals are either nested (when one original
    contains the other strictly) or separated by at least the shorter
    copy's length, which is what makes them usable as seeds below.
    """
    if I.j + 2 > MAX_LEVEL:
        raise DomainError(f"quarter copy of level {I.j} exceeds level {MAX_LEVEL}")
    return DyadicInterval(I.j + 2, 4 * I.k - 2)


def psi(I: DyadicInterval) -> DyadicInterval:
    """The ancestor two levels up; inverse of `phi` on its image."""
    if I.j < 2:
        raise DomainError(f"level {I.j} has no ancestor two levels up")
    return I.ancestor(I.j - 2)


# ---------------------------------------------------------------------------
# Horizontal split: separating a level from its own shifted copies
# ---------------------------------------------------------------------------

def _greedy_colouring(n: int, deltas: Iterable[int]) -> list[int]:
    """Greedy proper colouring of the circulant graph on Z_n with the given
    connection differences (taken mod n; zero differences are dropped)."""
    eff = sorted({d % n for d in deltas if d % n})
    colours = [0] * n
    for r in range(n):
        seen = set()
        for d in eff:
            for t in ((r + d) % n, (r - d) % n):
                if colours[t]:
                    seen.add(colours[t])
        c = 1
        while c in seen:
            c += 1
        colours[r] = c
    return colours


@dataclass(frozen=True)
class SplitPlan:
    """Partition of one dyadic level into classes that keep an interval
    away from its immediate neighbours and from the shifted copies (and
    their neighbours up to two lengths) of every other member of its class.

    `classes` holds 1-based positions; together they partition the level.
    `colour_counts` records how many colours each of the three greedy
    passes used (each is at most 8, so there are at most 512 classes).
    """

    level: int
    shift: int
    classes: tuple[tuple[int, ...], ...]
    colour_counts: tuple[int, int, int]

    def __post_init__(self):
        if len(self.classes) > MAX_CLASSES:
            raise DomainError(
                f"split produced {len(self.classes)} classes (limit {MAX_CLASSES})")

    @property
    def class_count(self) -> int:
        return len(self.classes)


def split_exclusion_violations(plan: SplitPlan) -> list[str]:
    """Exhaustively check every class of the plan.

    A class containing position k must not contain k +- 1 (the neighbours),
    k + m (the shifted copy), k + m +- 1, or k + m +- 2 — all cyclically,
    skipping relations that point back at k itself.
    """
    n = 1 << plan.level
    m = plan.shift
    problems = []
    for ci, cls in enumerate(plan.classes):
        members = {k - 1 for k in cls}
        for r in sorted(members):
            for d in (1, -1, m, m + 1, m - 1, m + 2, m - 2):
                t = (r + d) % n
                if t == r:
                    continue
                if t in members:
                    problems.append(
                        f"class {ci + 1}: positions {r + 1} and {t + 1} "
                        f"conflict (offset {d})")
    return problems


def horizontal_split(level: int, m: int) -> SplitPlan:
    """Split the level into at most 512 classes separating each interval
    from its neighbours and its classmates' shifted copies.

    Three greedy colourings are combined, one for each of the shifts
    m - 2, m and m + 2; the pass for shift c separates positions that
    differ by 1, c or c + 1, so the product of the three separates all
    the offsets checked by `split_exclusion_violations`.
    """
    if level < 0:
        raise DomainError("level must be nonnegative")
    if level > MAX_LEVEL:
        raise DomainError(f"level {level} exceeds {MAX_LEVEL}")
    if abs(m) > (1 << level):
        raise DomainError(f"|shift| = {abs(m)} exceeds the level width {1 << level}")
    n = 1 << level
    if n == 1:
        plan = SplitPlan(level, m, ((1,),), (1, 1, 1))
        return plan
    passes = [_greedy_colouring(n, (1, c, c + 1)) for c in (m - 2, m, m + 2)]
    counts = tuple(max(p) for p in passes)
    if any(c > 8 for c in counts):
        raise DomainError(f"greedy pass used {max(counts)} colours (expected <= 8)")
    buckets: dict[tuple[int, int, int], list[int]] = {}
    for r in range(n):
        buckets.setdefault((passes[0][r], passes[1][r], passes[2][r]), []).append(r + 1)
    classes = tuple(tuple(buckets[key]) for key in sorted(buckets))
    plan = SplitPlan(level, m, classes, counts)
    problems = split_exclusion_violations(plan)
    if problems:
        raise DomainError(f"horizontal split failed its own exclusion check: "
                          f"{problems[0]}")
    return plan


# ---------------------------------------------------------------------------
# The adjusted per-level translation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelTranslation:
    """A translation acting level by level: every interval of a covered
    level moves right by the level's offset (in units of the interval
    length).  Images are plain translates — nothing wraps around — so they
    live in the ambient [0, 2)."""

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        levels = [lv for lv, _ in self.offsets]
        if len(set(levels)) != len(levels):
            raise DomainError("duplicate level in translation table")
        for lv, units in self.offsets:
            if not (0 <= lv <= MAX_LEVEL):
                raise DomainError(f"level {lv} out of range")
            if not (0 <= units <= (1 << lv)):
                raise DomainError(f"offset {units} at level {lv} leaves [0, 2)")

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(sorted(lv for lv, _ in self.offsets))

    def offset_at(self, level: int) -> int:
        for lv, units in self.offsets:
            if lv == level:
                return units
        raise DomainError(f"translation not defined at level {level}")

    def shift_by(self, level: int) -> Fraction:
        return Fraction(self.offset_at(level), 1 << level)

    def image_set(self, I: DyadicInterval) -> PointSet:
        return PointSet.of(I).translate(self.shift_by(I.j))


def _translation_units(M: ShiftSequence, a: Fraction, level: int) -> tuple[int, bool]:
    """Offset (in units of 2^-level) placing a translate of any level
    interval over at least half of its copy shifted by the band value a.

    Members at `level` are quarter copies of intervals two levels up, so
    the first preference is that original level's own shift (four units
    per original position) adjusted by at most one unit, ties resolved
    towards no adjustment, then towards -1.  When no adjusted value lands
    within half a unit of the band value — the original shift may sit in
    the band's small regime, far from the cluster — the offset nearest to
    the band value is used instead (ties rounded down).  Returns
    (units, adjusted_used).
    """
    target = a * (1 << level)
    orig = level - 2
    if 1 <= orig <= M.depth:
        base = 4 * (M.m_at(orig) % (1 << orig))
        best_s = None
        best_err = None
        for delta in (0, -1, 1):
            err = abs(Fraction(base + delta) - target)
            if best_err is None or err < best_err:
                best_s, best_err = base + delta, err
        if best_err is not None and best_err <= Fraction(1, 2):
            return best_s, True
    return math.ceil(target - Fraction(1, 2)), False


# ---------------------------------------------------------------------------
# Stage records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeStage:
    """One verified growth stage of a piece.

    `core` maps every member seen so far to the part of its set grown
    around the member itself; `shadow` to the part grown around the
    member's shifted copy.  The member's current full set is their union.
    `attached_core`/`attached_shadow` list the (existing member, new
    member) merges performed at this stage.
    """

    n: int
    band: int
    a: Fraction
    entered: tuple[DyadicInterval, ...]
    core: dict
    shadow: dict
    attached_core: tuple[tuple[DyadicInterval, DyadicInterval], ...]
    attached_shadow: tuple[tuple[DyadicInterval, DyadicInterval], ...]
    halo_ok: bool
    dichotomy_ok: bool
    separation_ok: bool
    diameter_ok: bool
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        """Hard stage validity: failing the separation margin alone (sets
        disjoint but closer than the stage scale, as happens for touching
        copies of an interval and its left child) does not fail the stage —
        the final nesting check remains authoritative for those pairs."""
        return self.halo_ok and self.dichotomy_ok and self.diameter_ok

    def span_at(self, I: DyadicInterval) -> PointSet:
        return self.core[I].union(self.shadow[I])


@dataclass(frozen=True)
class TreePiece:
    """One finished piece: members, their sets, and the verification
    outcome.  Band pieces certify quarter copies against the adjusted
    translation; level pieces certify one level directly against the
    shift itself."""

    key: str
    kind: str                       # "band" or "level"
    residue: int | None
    class_index: int
    members: tuple[DyadicInterval, ...]
    family: NestedFamily
    certificate: SupportCertificate
    tau: object                     # the image map the certificate was checked against
    stages: tuple[TreeStage, ...]
    size_min: Fraction
    size_max: Fraction
    overlap_min: Fraction
    bounds_ok: bool
    unprocessed_bands: tuple[int, ...]
    notes: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return (self.certificate.verdict and self.bounds_ok
                and not self.unprocessed_bands
                and all(s.ok for s in self.stages))


@dataclass(frozen=True)
class TreeReport:
    """Outcome of a full build: the adjusted translation, the band pieces
    (quarter copies, indexed by residue and split class) and the per-level
    pieces covering levels outside every band."""

    status: str                     # "ok" | "partial" | "refused"
    reason: str | None
    depth: int
    decomposition: Decomposition | None
    sigma: LevelTranslation | None
    pieces: tuple[TreePiece, ...]
    level_pieces: tuple[TreePiece, ...]
    notes: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return (self.status == "ok"
                and all(p.ok for p in self.pieces)
                and all(p.ok for p in self.level_pieces))

    @property
    def all_pieces(self) -> tuple[TreePiece, ...]:
        return self.pieces + self.level_pieces

    @property
    def certificates(self) -> tuple[SupportCertificate, ...]:
        return tuple(p.certificate for p in self.all_pieces)


# ---------------------------------------------------------------------------
# Internal node bookkeeping
# ---------------------------------------------------------------------------

class _Node:
    __slots__ = ("member", "stage", "band", "base", "shifted",
                 "core", "shadow", "core_hull", "shadow_hull")

    def __init__(self, member: DyadicInterval, stage: int, band: int, a: Fraction):
        self.member = member
        self.stage = stage
        self.band = band
        self.base = PointSet.of(member)
        self.shifted = self.base.translate(a)
        self.core = self.base
        self.shadow = self.shifted
        self.core_hull = self.core.hull()
        self.shadow_hull = self.shadow.hull()

    def span(self) -> PointSet:
        return self.core.union(self.shadow)

    def absorb_core(self, addition: PointSet) -> None:
        self.core = self.core.union(addition)
        self.core_hull = self.core.hull()

    def absorb_shadow(self, addition: PointSet) -> None:
        self.shadow = self.shadow.union(addition)
        self.shadow_hull = self.shadow.hull()


def _halo_factor(gap: int) -> Fraction:
    """2 * sum_{i=1..gap} 4^-i; zero at gap 0, always below 2/3."""
    return 2 * sum((Fraction(1, 4 ** i) for i in range(1, gap + 1)), Fraction(0))


def _dichotomy_problems(nodes: list[_Node],
                        theta: Fraction) -> tuple[list[str], list[str]]:
    """Check that current spans are pairwise comparable or theta-separated.

    Returns (hard, margin): a pair that overlaps without nesting is a hard
    violation; a pair that is disjoint but closer than theta only misses
    the stated margin (touching quarter copies of an interval and its left
    child do this whenever a band spans two or more levels).  Hull pruning
    keeps the scan near-linear when the spans are spread out.
    """
    spans = []
    for node in nodes:
        s = node.span()
        lo, hi = s.hull()
        spans.append((lo, hi, s, node.member))
    spans.sort(key=lambda item: (item[0], item[1]))
    hard: list[str] = []
    margin: list[str] = []
    active: list[tuple[Fraction, Fraction, PointSet, DyadicInterval]] = []
    for lo, hi, s, member in spans:
        still = []
        for other in active:
            if other[1] + theta <= lo:
                continue
            still.append(other)
            olo, ohi, os, om = other
            if os.contains_set(s) or s.contains_set(os):
                continue
            d = s.distance(os)
            if d >= theta:
                continue
            if s.intersect(os).is_empty:
                margin.append(
                    f"sets of {om} and {member} are disjoint but only {d} apart "
                    f"(margin {theta})")
            else:
                hard.append(
                    f"sets of {om} and {member} overlap without nesting")
        active = still
        active.append((lo, hi, s, member))
    return hard, margin


# ---------------------------------------------------------------------------
# The builder
# ---------------------------------------------------------------------------

def _band_levels(D: Decomposition, k: int, J: int) -> range:
    return range(D.jk[k - 1], min(D.jk[k], J + 1))


def _build_band_piece(residue: int, class_index: int,
                      stage_bands: list[int], D: Decomposition,
                      buckets: dict[int, dict[int, list[list[int]]]],
                      sigma: LevelTranslation, J: int) -> TreePiece | None:
    """Grow one piece stage by stage and verify it; None when empty."""
    nodes: list[_Node] = []
    stages: list[TreeStage] = []
    unprocessed: list[int] = []
    notes: list[str] = []

    for s, k in enumerate(stage_bands):
        a = D.a[k - 1]
        fresh_members: list[DyadicInterval] = []
        for t in _band_levels(D, k, J):
            level_buckets = buckets[k][t]
            if class_index <= len(level_buckets):
                for q in level_buckets[class_index - 1]:
                    fresh_members.append(DyadicInterval(t + 2, 4 * q - 2))
        if not fresh_members:
            continue

        problems: list[str] = []

        diameter_ok = True
        if nodes:
            k_ref = max(node.band for node in nodes)
            diameter_bound = Fraction(1, 1 << (D.jk[k_ref] + 3))
            for member in fresh_members:
                diam = a + member.length
                if diam > diameter_bound:
                    diameter_ok = False
                    problems.append(
                        f"seed of {member} has diameter {diam} > {diameter_bound} "
                        f"required at the previous stage's scale")
            if not diameter_ok:
                stages.append(TreeStage(
                    n=s, band=k, a=a, entered=(),
                    core={n.member: n.core for n in nodes},
                    shadow={n.member: n.shadow for n in nodes},
                    attached_core=(), attached_shadow=(),
                    halo_ok=True, dichotomy_ok=True, separation_ok=True,
                    diameter_ok=False, problems=tuple(problems)))
                unprocessed.extend(stage_bands[s:])
                notes.append(
                    f"piece truncated before band {k}: new seeds too large "
                    f"for the existing sets' scale")
                break

        theta = Fraction(1, 1 << (D.jk[k] + 1))
        new_nodes = [_Node(member, s, k, a) for member in fresh_members]

        attached_core: list[tuple[DyadicInterval, DyadicInterval]] = []
        attached_shadow: list[tuple[DyadicInterval, DyadicInterval]] = []
        if nodes:
            seeds = []
            for nn in new_nodes:
                sp = nn.span()
                lo, hi = sp.hull()
                seeds.append((lo, hi, sp, nn.member))
            seeds.sort(key=lambda item: item[0])
            seed_los = [item[0] for item in seeds]
            max_diam = max(item[1] - item[0] for item in seeds)

            def _candidates(hull: tuple[Fraction, Fraction]):
                lo = bisect.bisect_left(seed_los, hull[0] - theta - max_diam)
                hi = bisect.bisect_right(seed_los, hull[1] + theta)
                return seeds[lo:hi]

            core_adds: list[PointSet] = [PointSet.empty() for _ in nodes]
            shadow_adds: list[PointSet] = [PointSet.empty() for _ in nodes]
            for idx, node in enumerate(nodes):
                for slo, shi, span, member in _candidates(node.core_hull):
                    if node.core.distance(span) <= theta:
                        core_adds[idx] = core_adds[idx].union(span)
                        attached_core.append((node.member, member))
                for slo, shi, span, member in _candidates(node.shadow_hull):
                    if node.shadow.distance(span) <= theta:
                        shadow_adds[idx] = shadow_adds[idx].union(span)
                        attached_shadow.append((node.member, member))
            for idx, node in enumerate(nodes):
                if not core_adds[idx].is_empty:
                    node.absorb_core(core_adds[idx])
                if not shadow_adds[idx].is_empty:
                    node.absorb_shadow(shadow_adds[idx])

        nodes.extend(new_nodes)

        halo_ok = True
        for node in nodes:
            gap = s - node.stage
            slack = _halo_factor(gap) * node.member.length
            blo, bhi = node.core_hull
            if blo < node.member.left - slack or bhi > node.member.right + slack:
                halo_ok = False
                problems.append(f"grown set around {node.member} leaves its halo")
            clo, chi = node.shadow_hull
            slo, shi = node.shifted.hull()
            if clo < slo - slack or chi > shi + slack:
                halo_ok = False
                problems.append(
                    f"grown set around the shifted copy of {node.member} "
                    f"leaves its halo")
            if not node.core.contains_set(node.base):
                halo_ok = False
                problems.append(f"set of {node.member} lost its own interval")
            if not node.shadow.contains_set(node.shifted):
                halo_ok = False
                problems.append(f"set of {node.member} lost its shifted copy")

        hard, margin = _dichotomy_problems(nodes, theta)
        problems.extend(hard)
        problems.extend("margin: " + p for p in margin)

        stages.append(TreeStage(
            n=s, band=k, a=a, entered=tuple(fresh_members),
            core={n.member: n.core for n in nodes},
            shadow={n.member: n.shadow for n in nodes},
            attached_core=tuple(attached_core),
            attached_shadow=tuple(attached_shadow),
            halo_ok=halo_ok, dichotomy_ok=not hard, separation_ok=not margin,
            diameter_ok=True, problems=tuple(problems)))

    if not nodes:
        return None

    short = sum(1 for st in stages if not st.separation_ok)
    if short:
        notes.append(
            f"piece r={residue} class={class_index}: {short} stage(s) miss the "
            f"stated separation margin (touching copies); sets stay disjoint "
            f"and the final nesting check is exact")

    members = tuple(node.member for node in nodes)
    family = NestedFamily({node.member: node.span() for node in nodes})
    certificate = verify_supporting_tree(sigma, members, family)
    ratios = [r.size_ratio for r in certificate.records]
    overlaps = [r.image_overlap for r in certificate.records]
    size_min, size_max = min(ratios), max(ratios)
    overlap_min = min(overlaps)
    bounds_ok = (size_min >= SIZE_LOWER and size_max <= SIZE_UPPER
                 and certificate.delta >= Fraction(1, 2))
    return TreePiece(
        key=f"phi r={residue} class={class_index}",
        kind="band", residue=residue, class_index=class_index,
        members=members, family=family, certificate=certificate, tau=sigma,
        stages=tuple(stages), size_min=size_min, size_max=size_max,
        overlap_min=overlap_min, bounds_ok=bounds_ok,
        unprocessed_bands=tuple(unprocessed), notes=tuple(notes))


class _IdentityImage:
    """Image map for levels where nothing moves: tau(I) = I."""

    def image_set(self, I: DyadicInterval) -> PointSet:
        return PointSet.of(I)


class _CyclicLevelImage:
    """Image map for one level of the original shift: cyclic by m units."""

    def __init__(self, m: int):
        self.m = m

    def image_set(self, I: DyadicInterval) -> PointSet:
        n = 1 << I.j
        return PointSet.of(DyadicInterval(I.j, ((I.k - 1 + self.m) % n) + 1))


def _build_level_pieces(M: ShiftSequence, levels: Iterable[int],
                        J: int) -> list[TreePiece]:
    """Per-level pieces for levels outside every band.

    Moving levels pair each interval with its true shifted image; classes
    keep an interval and its image apart from classmates, so the sets
    I ∪ tau(I) are pairwise disjoint within a class.  Still levels pair
    each interval with its translate one unit to the right instead, which
    keeps every set at twice the interval's measure.
    """
    pieces: list[TreePiece] = []
    for t in sorted(levels):
        n = 1 << t
        m_eff = (M.m_at(t) % n) if 1 <= t <= M.depth else 0
        if m_eff == 0:
            tau = _IdentityImage()
            classes = [list(range(1, n + 1))]
        else:
            tau = _CyclicLevelImage(m_eff)
            colours = _greedy_colouring(n, (m_eff,))
            classes = [[] for _ in range(max(colours))]
            for r, c in enumerate(colours):
                classes[c - 1].append(r + 1)
        for ci, cls in enumerate(classes, start=1):
            members = tuple(DyadicInterval(t, q) for q in cls)
            entries = {}
            for I in members:
                base = PointSet.of(I)
                if m_eff == 0:
                    entries[I] = base.union(base.translate(Fraction(1)))
                else:
                    entries[I] = base.union(tau.image_set(I))
            family = NestedFamily(entries)
            certificate = verify_supporting_tree(tau, members, family)
            ratios = [r.size_ratio for r in certificate.records]
            overlaps = [r.image_overlap for r in certificate.records]
            size_min, size_max = min(ratios), max(ratios)
            bounds_ok = (size_min >= SIZE_LOWER and size_max <= SIZE_UPPER
                         and certificate.delta >= Fraction(1, 2))
            pieces.append(TreePiece(
                key=f"level j={t} class={ci}",
                kind="level", residue=None, class_index=ci,
                members=members, family=family, certificate=certificate,
                tau=tau, stages=(), size_min=size_min, size_max=size_max,
                overlap_min=min(overlaps), bounds_ok=bounds_ok,
                unprocessed_bands=(), notes=()))
    return pieces


def build_supporting_tree(M: ShiftSequence, D: Decomposition,
                          J: int | None = None) -> TreeReport:
    """Build and verify the full supporting collection for tau_M up to depth J.

    Refuses (status "refused") when the band structure does not validate
    against M, when a cluster value is not dyadic, or when the quarter
    copies would exceed the level limit.  A build whose stages could not
    all be processed is reported as "partial" with the leftover bands
    listed per piece; everything that was built is still fully verified.
    """
    J = M.depth if J is None else J
    if not (1 <= J <= M.depth):
        raise DomainError(f"need 1 <= depth <= {M.depth}")

    def refusal(reason: str) -> TreeReport:
        return TreeReport("refused", reason, J, D, None, (), (), ())

    ok, violations = is_decomposable(M, D, J)
    if not ok:
        return refusal("band structure fails validation: " + "; ".join(violations[:3]))
    for k, a in enumerate(D.a, start=1):
        if a.denominator & (a.denominator - 1):
            return refusal(f"cluster value a_{k} = {a} is not dyadic")
        if not (0 <= a < 1):
            return refusal(f"cluster value a_{k} = {a} outside [0, 1)")
    if D.jk and min(D.jk) < 0:
        return refusal("negative band level")
    if J + 2 > MAX_LEVEL:
        return refusal(f"depth {J} leaves no room for quarter copies "
                       f"(limit {MAX_LEVEL})")

    notes: list[str] = []
    K = len(D.a)
    band_count = 0
    splits: dict[int, SplitPlan] = {}
    buckets: dict[int, dict[int, list[list[int]]]] = {}
    offsets: dict[int, tuple[int, bool]] = {}

    for k in range(1, K + 1):
        levels = _band_levels(D, k, J)
        if not levels:
            continue
        band_count = k
        top = D.jk[k - 1]
        m_top = M.m_at(top) if 1 <= top <= M.depth else 0
        plan = horizontal_split(top, m_top)
        splits[k] = plan
        lookup = {}
        for ci, cls in enumerate(plan.classes):
            for q in cls:
                lookup[q - 1] = ci
        buckets[k] = {}
        for t in levels:
            per_class: list[list[int]] = [[] for _ in plan.classes]
            shift = t - top
            for q0 in range(1 << t):
                per_class[lookup[q0 >> shift]].append(q0 + 1)
            buckets[k][t] = per_class
        a = D.a[k - 1]
        for t in levels:
            lam = t + 2
            units, adjusted = _translation_units(M, a, lam)
            offsets[lam] = (units, adjusted)
            if not adjusted and 1 <= t <= M.depth:
                notes.append(
                    f"translation at level {lam} ignores the shift of level {t} "
                    f"(too far from the band value {a}) and uses the nearest "
                    f"offset instead")

    sigma = LevelTranslation(tuple(sorted((lv, u) for lv, (u, _) in offsets.items())))

    pieces: list[TreePiece] = []
    if band_count:
        max_classes = max(plan.class_count for plan in splits.values())
        for residue in range(1, STAGE_GAP + 1):
            stage_bands = [k for k in range(residue, band_count + 1, STAGE_GAP)
                           if k in splits]
            if not stage_bands:
                continue
            for class_index in range(1, max_classes + 1):
                piece = _build_band_piece(residue, class_index, stage_bands,
                                          D, buckets, sigma, J)
                if piece is not None:
                    pieces.append(piece)
                    notes.extend(piece.notes)

    covered: set[int] = set()
    for k in range(1, K + 1):
        covered.update(_band_levels(D, k, J))
    outside = [t for t in range(0, J + 1) if t not in covered]
    level_pieces = _build_level_pieces(M, outside, J)

    truncated = any(p.unprocessed_bands for p in pieces)
    status = "partial" if truncated else "ok"
    return TreeReport(status, None, J, D, sigma, tuple(pieces),
                      tuple(level_pieces), tuple(notes))


# ---------------------------------------------------------------------------
# Wire form
# ---------------------------------------------------------------------------

def _fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def tree_report_to_wire(report: TreeReport, *, include_members: bool = False) -> dict:
    """JSON-ready summary of a build; with include_members, each piece also
    carries the interval -> set map as lists of endpoint pairs."""
    out = {
        "status": report.status,
        "ok": report.ok,
        "depth": report.depth,
        "reason": report.reason,
        "notes": list(report.notes),
    }
    if report.decomposition is not None:
        out["decomposition"] = {
            "a": [_fraction_str(q) for q in report.decomposition.a],
            "jk": list(report.decomposition.jk),
        }
    if report.sigma is not None:
        out["sigma"] = {str(lv): units for lv, units in report.sigma.offsets}
    rows = []
    for piece in report.all_pieces:
        row = {
            "key": piece.key,
            "kind": piece.kind,
            "members": len(piece.members),
            "ok": piece.ok,
            "C": _fraction_str(piece.certificate.C),
            "delta": _fraction_str(piece.certificate.delta),
            "nested": piece.certificate.nested,
            "size_min": _fraction_str(piece.size_min),
            "size_max": _fraction_str(piece.size_max),
            "overlap_min": _fraction_str(piece.overlap_min),
            "unprocessed_bands": list(piece.unprocessed_bands),
        }
        if include_members:
            row["sets"] = {
                str(I): [[_fraction_str(a), _fraction_str(b)]
                         for a, b in piece.family.get(I).as_fractions()]
                for I in piece.members
            }
        rows.append(row)
    out["pieces"] = rows
    return out
