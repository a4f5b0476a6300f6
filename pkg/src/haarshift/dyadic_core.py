"""Exact combinatorics of dyadic intervals.

Conventions used throughout the package:

  * level j >= 0, position 1 <= k <= 2^j, and I(j, k) = [(k-1)/2^j, k/2^j)
  * all endpoints are dyadic rationals, kept exact via integer arithmetic
  * point sets (finite unions of intervals) live in the ambient [0, 2):
    the unit interval holds the dyadic grid itself, the right half hosts
    translated copies that supporting-tree constructions need.

Everything here is pure integer / Fraction arithmetic; floats never enter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

MAX_LEVEL = 30
AMBIENT_RIGHT = Fraction(2)


class DomainError(ValueError):
    """Raised when an argument is outside an operation's documented domain."""


class IncompleteFamilyError(KeyError):
    """Raised when a nested family lacks an entry for a requested interval."""


# ---------------------------------------------------------------------------
# Dyadic intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval I(j, k) = [(k-1)/2^j, k/2^j), half open, inside [0, 1)."""

    j: int
    k: int

    def __post_init__(self):
        if not (0 <= self.j <= MAX_LEVEL):
            raise DomainError(f"level {self.j} outside [0, {MAX_LEVEL}]")
        if not (1 <= self.k <= 1 << self.j):
            raise DomainError(f"position {self.k} outside [1, 2^{self.j}]")

    @property
    def left(self) -> Fraction:
        return Fraction(self.k - 1, 1 << self.j)

    @property
    def right(self) -> Fraction:
        return Fraction(self.k, 1 << self.j)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.j)

    @property
    def midpoint(self) -> Fraction:
        return Fraction(2 * self.k - 1, 1 << (self.j + 1))

    def parent(self) -> DyadicInterval:
        if self.j == 0:
            raise DomainError("the unit interval has no parent")
        return DyadicInterval(self.j - 1, (self.k + 1) // 2)

    def children(self) -> tuple[DyadicInterval, DyadicInterval]:
        return (DyadicInterval(self.j + 1, 2 * self.k - 1),
                DyadicInterval(self.j + 1, 2 * self.k))

    def ancestor(self, level: int) -> DyadicInterval:
        """The unique dyadic interval of the given coarser level containing self."""
        if level > self.j:
            raise DomainError(f"level {level} is finer than {self.j}")
        return DyadicInterval(level, ((self.k - 1) >> (self.j - level)) + 1)

    def contains(self, other: DyadicInterval) -> bool:
        return other.j >= self.j and other.ancestor(self.j) == self

    def __str__(self) -> str:
        return f"I({self.j},{self.k})=[{self.left},{self.right})"


def make_interval(j: int, k: int) -> DyadicInterval:
    """Construct I(j, k), raising DomainError if (j, k) is out of range."""
    return DyadicInterval(j, k)


def level_intervals(j: int) -> list[DyadicInterval]:
    """All of D_j, left to right."""
    return [DyadicInterval(j, k) for k in range(1, (1 << j) + 1)]


def q_collection(I: DyadicInterval, J: int) -> list[DyadicInterval]:
    """Q(I) truncated at level J: every dyadic subinterval of I of level <= J.

    The count is 2^(J - j + 1) - 1 (a full binary tree of J - j + 1 levels).
    """
    if J < I.j:
        raise DomainError(f"truncation level {J} above interval level {I.j}")
    out = []
    for l in range(I.j, J + 1):
        width = 1 << (l - I.j)
        base = (I.k - 1) * width
        out.extend(DyadicInterval(l, base + t) for t in range(1, width + 1))
    return out


# ---------------------------------------------------------------------------
# Exact point sets (finite unions of half-open intervals in [0, 2))
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointSet:
    """A finite union of half-open intervals with dyadic endpoints.

    Endpoints are stored as integer multiples of 2^-scale; `parts` is sorted,
    pairwise disjoint and non-adjacent, so equality of canonical forms is
    set equality.  All measures and distances are exact Fractions.
    """

    scale: int
    parts: tuple[tuple[int, int], ...]

    @staticmethod
    def _canonical(scale: int, pairs: Iterable[tuple[int, int]]) -> PointSet:
        items = sorted((a, b) for a, b in pairs if a < b)
        merged: list[list[int]] = []
        for a, b in items:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        # strip powers of two shared by every endpoint so forms are unique
        while scale > 0 and all(a % 2 == 0 and b % 2 == 0 for a, b in merged):
            merged = [[a // 2, b // 2] for a, b in merged]
            scale -= 1
        return PointSet(scale, tuple((a, b) for a, b in merged))

    @classmethod
    def empty(cls) -> PointSet:
        return cls(0, ())

    @classmethod
    def of(cls, I: DyadicInterval) -> PointSet:
        return cls._canonical(I.j, [(I.k - 1, I.k)])

    @classmethod
    def from_fractions(cls, pairs: Iterable[tuple[Fraction, Fraction]]) -> PointSet:
        pairs = list(pairs)
        scale = 0
        for a, b in pairs:
            for q in (Fraction(a), Fraction(b)):
                d = q.denominator
                if d & (d - 1):
                    raise DomainError(f"non-dyadic endpoint {q}")
                scale = max(scale, d.bit_length() - 1)
        scaled = []
        for a, b in pairs:
            scaled.append((int(Fraction(a) * (1 << scale)), int(Fraction(b) * (1 << scale))))
        return cls._canonical(scale, scaled)

    def _at_scale(self, scale: int) -> tuple[tuple[int, int], ...]:
        shift = scale - self.scale
        assert shift >= 0
        return tuple((a << shift, b << shift) for a, b in self.parts)

    def union(self, other: PointSet) -> PointSet:
        s = max(self.scale, other.scale)
        return PointSet._canonical(s, self._at_scale(s) + other._at_scale(s))

    def intersect(self, other: PointSet) -> PointSet:
        s = max(self.scale, other.scale)
        xs, ys = self._at_scale(s), other._at_scale(s)
        out, i, q = [], 0, 0
        while i < len(xs) and q < len(ys):
            a = max(xs[i][0], ys[q][0])
            b = min(xs[i][1], ys[q][1])
            if a < b:
                out.append((a, b))
            if xs[i][1] <= ys[q][1]:
                i += 1
            else:
                q += 1
        return PointSet._canonical(s, out)

    @property
    def measure(self) -> Fraction:
        return Fraction(sum(b - a for a, b in self.parts), 1 << self.scale)

    @property
    def is_empty(self) -> bool:
        return not self.parts

    def contains_set(self, other: PointSet) -> bool:
        return other.intersect(self) == other

    def distance(self, other: PointSet) -> Fraction:
        """inf |x - y| over the two sets (0 if they touch or overlap)."""
        if self.is_empty or other.is_empty:
            raise DomainError("distance to the empty set is undefined")
        s = max(self.scale, other.scale)
        best = None
        for a, b in self._at_scale(s):
            for c, e in other._at_scale(s):
                gap = max(c - b, a - e, 0)
                if best is None or gap < best:
                    best = gap
                if best == 0:
                    return Fraction(0)
        return Fraction(best, 1 << s)

    def translate(self, q: Fraction) -> PointSet:
        q = Fraction(q)
        d = q.denominator
        if d & (d - 1):
            raise DomainError(f"non-dyadic translation {q}")
        s = max(self.scale, d.bit_length() - 1)
        off = int(q * (1 << s))
        return PointSet._canonical(s, [(a + off, b + off) for a, b in self._at_scale(s)])

    def hull(self) -> tuple[Fraction, Fraction]:
        if self.is_empty:
            raise DomainError("the empty set has no hull")
        return (Fraction(self.parts[0][0], 1 << self.scale),
                Fraction(self.parts[-1][1], 1 << self.scale))

    @property
    def diameter(self) -> Fraction:
        lo, hi = self.hull()
        return hi - lo

    def as_fractions(self) -> list[tuple[Fraction, Fraction]]:
        den = 1 << self.scale
        return [(Fraction(a, den), Fraction(b, den)) for a, b in self.parts]


def union_of(intervals: Iterable[DyadicInterval]) -> PointSet:
    """The pointset E* = union of a collection of dyadic intervals."""
    by_scale: dict[int, list[tuple[int, int]]] = {}
    top = 0
    for I in intervals:
        by_scale.setdefault(I.j, []).append((I.k - 1, I.k))
        top = max(top, I.j)
    pairs = []
    for s, items in by_scale.items():
        shift = top - s
        pairs.extend((a << shift, b << shift) for a, b in items)
    return PointSet._canonical(top, pairs)


def pointset_measure(intervals: Iterable[DyadicInterval]) -> Fraction:
    """Exact measure of the union; overlapping intervals count once."""
    return union_of(intervals).measure


# ---------------------------------------------------------------------------
# Rearrangements (level-preserving permutations of the dyadic grid)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rearrangement:
    """tau acting on D_0 .. D_J by a permutation of positions at each level.

    perms[l][k - 1] is the position of tau(I(l, k)); |tau(I)| = |I| always.
    """

    depth: int
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not (0 <= self.depth <= MAX_LEVEL):
            raise DomainError(f"depth {self.depth} outside [0, {MAX_LEVEL}]")
        if len(self.perms) != self.depth + 1:
            raise DomainError("need one permutation per level 0..depth")
        for l, p in enumerate(self.perms):
            if sorted(p) != list(range(1, (1 << l) + 1)):
                raise DomainError(f"level {l} table is not a permutation")

    @classmethod
    def identity(cls, depth: int) -> Rearrangement:
        return cls(depth, tuple(tuple(range(1, (1 << l) + 1)) for l in range(depth + 1)))

    @classmethod
    def from_level_maps(cls, depth: int, maps: Mapping[int, Iterable[int]]) -> Rearrangement:
        perms = []
        for l in range(depth + 1):
            perms.append(tuple(maps[l]) if l in maps else tuple(range(1, (1 << l) + 1)))
        return cls(depth, tuple(perms))

    def image(self, I: DyadicInterval) -> DyadicInterval:
        if I.j > self.depth:
            raise DomainError(f"interval level {I.j} exceeds rearrangement depth {self.depth}")
        return DyadicInterval(I.j, self.perms[I.j][I.k - 1])

    def image_set(self, I: DyadicInterval) -> PointSet:
        return PointSet.of(self.image(I))


# ---------------------------------------------------------------------------
# Nested families and supporting-tree certificates
# ---------------------------------------------------------------------------

@dataclass
class NestedFamily:
    """A map I -> A_I assigning each interval of a collection a point set."""

    entries: dict[DyadicInterval, PointSet] = field(default_factory=dict)

    def get(self, I: DyadicInterval) -> PointSet:
        try:
            return self.entries[I]
        except KeyError:
            raise IncompleteFamilyError(f"no entry for {I}") from None

    def check_nested(self) -> tuple[bool, list[tuple[DyadicInterval, DyadicInterval]]]:
        """Pairwise: sets that intersect must be comparable by inclusion."""
        live = [(I, A) for I, A in self.entries.items() if not A.is_empty]
        if not live:
            return (True, [])
        # Every set is a union of cells at a common scale, so a bitmask over
        # the cells represents it exactly.  Scanning sets largest-first while
        # recording, per cell, the smallest set seen so far reduces pairwise
        # laminarity to one containment check per distinct owner: any earlier
        # set meeting S contains the owner of the shared cell, so S nested in
        # each of its owners means S nested in everything it meets.
        s = max(A.scale for _, A in live)
        items = []
        top = 0
        for I, A in live:
            shift = s - A.scale
            mask = 0
            parts = []
            for a, b in A.parts:
                a <<= shift
                b <<= shift
                parts.append((a, b))
                mask |= ((1 << (b - a)) - 1) << a
            top = max(top, parts[-1][1])
            items.append((mask.bit_count(), parts, mask, I))
        items.sort(key=lambda t: -t[0])
        owner = [-1] * top
        bad = []
        for idx, (_, parts, mask, I) in enumerate(items):
            hit: set[int] = set()
            for a, b in parts:
                hit.update(owner[a:b])
            hit.discard(-1)
            for t in sorted(hit):
                if mask & ~items[t][2]:
                    bad.append((items[t][3], I))
            for a, b in parts:
                owner[a:b] = [idx] * (b - a)
        return (not bad, bad)


@dataclass(frozen=True)
class SupportRecord:
    interval: DyadicInterval
    size_ratio: Fraction        # |A_I| / |I|
    self_overlap: Fraction      # |I ∩ A_I| / |I|
    image_overlap: Fraction     # |tau(I) ∩ A_I| / |I|


@dataclass(frozen=True)
class SupportCertificate:
    """Outcome of checking a nested family against a rearrangement.

    delta is the best (largest) lower bound valid for every record, C the
    smallest upper bound on |A_I|/|I|.  verdict is true iff delta > 0 and
    the family is nested.
    """

    records: tuple[SupportRecord, ...]
    C: Fraction
    delta: Fraction
    nested: bool
    nested_witnesses: tuple[tuple[DyadicInterval, DyadicInterval], ...]
    verdict: bool


def _image_pointset(tau, I: DyadicInterval) -> PointSet:
    """Image of I under tau, as a point set; tau may be any object with
    image_set(I) (Rearrangement, or a translation map from the tree builder)."""
    return tau.image_set(I)


def verify_supporting_tree(tau, F: Iterable[DyadicInterval],
                           A: NestedFamily) -> SupportCertificate:
    """Check the supporting-tree conditions for tau on the collection F.

    For each I in F the family must supply A_I; the certificate records
    |A_I|/|I|, |I ∩ A_I|/|I| and |tau(I) ∩ A_I|/|I| and reports the best
    constants achieved.  Missing entries raise IncompleteFamilyError.
    """
    F = list(F)
    missing = [I for I in F if I not in A.entries]
    if missing:
        raise IncompleteFamilyError(
            f"family lacks entries for {len(missing)} interval(s), first: {missing[0]}")
    records = []
    for I in F:
        AI = A.entries[I]
        h = I.length
        records.append(SupportRecord(
            interval=I,
            size_ratio=AI.measure / h,
            self_overlap=PointSet.of(I).intersect(AI).measure / h,
            image_overlap=_image_pointset(tau, I).intersect(AI).measure / h,
        ))
    nested, witnesses = A.check_nested()
    if records:
        C = max(r.size_ratio for r in records)
        delta = min(min(r.self_overlap, r.image_overlap) for r in records)
    else:
        C, delta = Fraction(1), Fraction(1)
    verdict = bool(delta > 0 and nested)
    return SupportCertificate(tuple(records), C, delta, nested,
                              tuple(witnesses), verdict)


def verify_dyadic_tree(E: Mapping[DyadicInterval, PointSet],
                       C: Fraction) -> tuple[bool, list[str]]:
    """Check the dyadic-tree-of-sets conditions for {E_I}.

    Conditions: |I|/C <= |E_I| <= C|I| for every I, and whenever both
    children of I carry sets, those are disjoint and contained in E_I.
    This is a genuinely different notion from NestedFamily.check_nested
    (the two are kept separate on purpose; neither implies the other).
    """
    C = Fraction(C)
    problems = []
    for I, EI in E.items():
        if not (I.length / C <= EI.measure <= C * I.length):
            problems.append(f"size of E at {I}: |E|={EI.measure}, |I|={I.length}")
    for I in E:
        if I.j >= MAX_LEVEL:
            continue
        lo, hi = I.children()
        if lo in E and hi in E:
            if not E[lo].intersect(E[hi]).is_empty:
                problems.append(f"children of {I} overlap")
            if not E[I].contains_set(E[lo].union(E[hi])):
                problems.append(f"children of {I} escape the parent set")
    return (not problems, problems)
