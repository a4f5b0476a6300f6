"""Two-player colouring game on the level-j dyadic intervals.

A position is a collection C of level-j dyadic intervals, each carrying one
of d colours.  The collection is (eta, d)-homogeneous when every dyadic
testing interval L with |L| >= 2^-j satisfies

  * rho(C, L) <= d  ->  no colour appears twice among the members inside L;
  * rho(C, L) >  d  ->  eta * max_i rho_i(C, L) <= min_i rho_i(C, L),

where rho counts members contained in L and rho_i those of colour i.  Player
A repeatedly adds uncoloured level-j intervals; Player B must colour the
additions without touching existing colours so the whole collection stays
homogeneous.  B wins by colouring all of D_j; A wins by reaching a position
with no homogeneous extension.

The module provides exact checkers (homogeneity and previsibility, all
rationals compared by cross-multiplication), the round-robin colouring, a
constructive extension strategy for Player B, a brute-force oracle, a
scripted adversary family for which A wins in exactly n moves, and the game
state machine driven by the CLI and the HTTP service.

The constructive strategy works level by level.  Below the coarsest level
where a testing interval can hold more than d members it either fills
exactly-full intervals bijectively or defers; walking upward it resolves
each interval whose count first reaches d by explicit colour-set
bookkeeping on its two halves.  Deferred members are coloured at the first
saturated ancestor, or at the root if the whole position stays below d.
The strategy needs eta <= 1/2 and previsibility of the added set: whenever
one half of a testing interval is saturated and the other is not, the
additions must avoid the saturated half.
"""

from __future__ import annotations

import itertools
import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .dyadic_core import MAX_LEVEL, DomainError, DyadicInterval, make_interval

DEFAULT_ENGINE_CAP = 1 << 20
DEFAULT_ENGINE_TIMEOUT_S = 10.0

STATUS_AWAITING_A = "awaiting-A"
STATUS_AWAITING_B = "awaiting-B"
STATUS_A_WINS = "A-wins"
STATUS_B_WINS = "B-wins"
STATUS_UNDECIDED = "undecided"


class StrategyInapplicable(Exception):
    """The constructive strategy does not cover this position."""

    def __init__(self, reason: str, witnesses: Sequence["PrevisibilityWitness"] = ()):
        super().__init__(reason)
        self.reason = reason
        self.witnesses = tuple(witnesses)


class CapExceeded(ValueError):
    """Exhaustive enumeration would exceed the configured cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(
            f"exhaustive search needs {required} evaluations, cap is {cap}")
        self.required = required
        self.cap = cap


class EngineTimeout(RuntimeError):
    """Exhaustive enumeration ran past its deadline."""


class DefectError(RuntimeError):
    """An invariant the construction guarantees was violated (a bug)."""


# ---------------------------------------------------------------------------
# Coloured collections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColouredCollection:
    """Level-j intervals, each with a colour in 1..d or still uncoloured.

    ``members`` holds (position, colour) pairs, positions 1-based at level
    ``level``, kept sorted; ``colour`` is None for uncoloured members.  eta
    is the exact homogeneity ratio used by the balance condition.
    """

    level: int
    d: int
    eta: Fraction
    members: tuple[tuple[int, int | None], ...] = ()

    def __post_init__(self):
        if not 0 <= self.level <= MAX_LEVEL:
            raise DomainError(f"level must lie in [0, {MAX_LEVEL}], got {self.level}")
        if self.d < 1:
            raise DomainError(f"colour count must be >= 1, got {self.d}")
        eta = Fraction(self.eta)
        if not 0 < eta <= 1:
            raise DomainError(f"eta must lie in (0, 1], got {eta}")
        width = 1 << self.level
        seen: set[int] = set()
        norm: list[tuple[int, int | None]] = []
        for pos, colour in self.members:
            pos = int(pos)
            if not 1 <= pos <= width:
                raise DomainError(f"position {pos} outside 1..{width} at level {self.level}")
            if pos in seen:
                raise DomainError(f"duplicate member at position {pos}")
            seen.add(pos)
            if colour is not None:
                colour = int(colour)
                if not 1 <= colour <= self.d:
                    raise DomainError(f"colour {colour} outside 1..{self.d}")
            norm.append((pos, colour))
        norm.sort()
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "members", tuple(norm))

    @classmethod
    def from_colouring(cls, level: int, d: int, eta: Fraction,
                       colouring: Mapping[int, int | None]) -> ColouredCollection:
        return cls(level, d, eta, tuple(colouring.items()))

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(pos for pos, _ in self.members)

    @property
    def colour_map(self) -> dict[int, int | None]:
        return dict(self.members)

    @property
    def uncoloured(self) -> tuple[int, ...]:
        return tuple(pos for pos, colour in self.members if colour is None)

    @property
    def fully_coloured(self) -> bool:
        return all(colour is not None for _, colour in self.members)

    @property
    def intervals(self) -> tuple[DyadicInterval, ...]:
        return tuple(make_interval(self.level, pos) for pos, _ in self.members)

    def colour_of(self, pos: int) -> int | None:
        for p, colour in self.members:
            if p == pos:
                return colour
        raise DomainError(f"position {pos} is not a member")

    def with_colours(self, assignment: Mapping[int, int]) -> ColouredCollection:
        """Colour members; recolouring an already-coloured member is refused."""
        todo = dict(assignment)
        out: list[tuple[int, int | None]] = []
        for pos, colour in self.members:
            if pos in todo:
                new = todo.pop(pos)
                if colour is not None and colour != new:
                    raise DomainError(f"member {pos} already has colour {colour}")
                out.append((pos, new))
            else:
                out.append((pos, colour))
        if todo:
            raise DomainError(f"assignment targets non-members: {sorted(todo)}")
        return replace(self, members=tuple(out))

    def add_uncoloured(self, positions: Iterable[int]) -> ColouredCollection:
        have = set(self.positions)
        extra = []
        for pos in positions:
            if pos in have:
                raise DomainError(f"position {pos} is already a member")
            extra.append((int(pos), None))
        return replace(self, members=self.members + tuple(extra))


def _as_positions(level: int, items: Iterable) -> tuple[int, ...]:
    """Normalize intervals-or-positions to sorted unique 1-based positions."""
    width = 1 << level
    out = set()
    for item in items:
        if isinstance(item, DyadicInterval):
            if item.j != level:
                raise DomainError(f"interval at level {item.j}, expected {level}")
            pos = item.k
        else:
            pos = int(item)
        if not 1 <= pos <= width:
            raise DomainError(f"position {pos} outside 1..{width} at level {level}")
        out.add(pos)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# Counting pyramids
# ---------------------------------------------------------------------------

def _fold(row: list[int]) -> list[int]:
    return [row[i] + row[i + 1] for i in range(0, len(row), 2)]


def _total_pyramid(level: int, positions: Iterable[int]) -> list[list[int]]:
    """Member counts per node; result[nu][K-1] counts members inside I(nu,K)."""
    leaf = [0] * (1 << level)
    for pos in positions:
        leaf[pos - 1] = 1
    rows = [leaf]
    while len(rows[-1]) > 1:
        rows.append(_fold(rows[-1]))
    rows.reverse()
    return rows


# ---------------------------------------------------------------------------
# Homogeneity checker
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalCount:
    """Counts at one testing interval, with the verdict of its condition."""

    interval: DyadicInterval
    total: int
    per_colour: tuple[int, ...]
    condition: str  # "distinct" when total <= d, else "balanced"
    ok: bool


@dataclass(frozen=True)
class HomogeneityVerdict:
    ok: bool
    level: int
    d: int
    eta: Fraction
    max_testing_level: int
    violations: tuple[IntervalCount, ...]
    counts: tuple[IntervalCount, ...]


def check_homogeneous(collection: ColouredCollection, *,
                      max_testing_level: int | None = None) -> HomogeneityVerdict:
    """Exact homogeneity check over testing levels 0..max_testing_level.

    By default every dyadic interval down to the member level is tested.
    ``max_testing_level`` restricts the walk to coarser levels; with d in
    [2^alpha, 2^{alpha+1}) the restriction to level - alpha is equivalent to
    the full check, because finer intervals hold at most 2^alpha <= d
    members whose colours are already forced distinct by their ancestor.
    """
    j, d, eta = collection.level, collection.d, collection.eta
    cmap = collection.colour_map
    if any(colour is None for colour in cmap.values()):
        raise DomainError("collection has uncoloured members; colour them first")
    limit = j if max_testing_level is None else min(j, max(0, int(max_testing_level)))
    totals = _total_pyramid(j, cmap.keys())
    by_colour = [_total_pyramid(j, [p for p, c in cmap.items() if c == i])
                 for i in range(1, d + 1)]
    counts: list[IntervalCount] = []
    violations: list[IntervalCount] = []
    for nu in range(limit + 1):
        row = totals[nu]
        for node in range(1 << nu):
            total = row[node]
            per = tuple(by_colour[i][nu][node] for i in range(d))
            if total <= d:
                ok = total == 0 or max(per) <= 1
                condition = "distinct"
            else:
                mx, mn = max(per), min(per)
                ok = eta.numerator * mx <= eta.denominator * mn
                condition = "balanced"
            entry = IntervalCount(make_interval(nu, node + 1), total, per, condition, ok)
            counts.append(entry)
            if not ok:
                violations.append(entry)
    return HomogeneityVerdict(ok=not violations, level=j, d=d, eta=eta,
                              max_testing_level=limit,
                              violations=tuple(violations), counts=tuple(counts))


def _passes_quick(level: int, d: int, eta_num: int, eta_den: int,
                  leaf_colours: list[int]) -> bool:
    """Fast boolean homogeneity check on a leaf colour array (0 = absent)."""
    totals = [1 if c else 0 for c in leaf_colours]
    per = [[0] * len(leaf_colours) for _ in range(d)]
    for idx, colour in enumerate(leaf_colours):
        if colour:
            per[colour - 1][idx] = 1
    while True:
        for node, total in enumerate(totals):
            if total <= 1:
                continue
            if total <= d:
                for i in range(d):
                    if per[i][node] > 1:
                        return False
            else:
                values = [per[i][node] for i in range(d)]
                if eta_num * max(values) > eta_den * min(values):
                    return False
        if len(totals) == 1:
            return True
        totals = _fold(totals)
        per = [_fold(row) for row in per]


# ---------------------------------------------------------------------------
# Previsibility checker
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrevisibilityWitness:
    """A parent whose saturated half received additions while the other half
    stayed below d."""

    parent: DyadicInterval
    small_child: DyadicInterval
    big_child: DyadicInterval
    rho_all_small: int
    rho_all_big: int
    rho_added_big: int


@dataclass(frozen=True)
class PrevisibilityVerdict:
    ok: bool
    level: int
    d: int
    one_sided: bool
    witnesses: tuple[PrevisibilityWitness, ...]


def check_previsible(U: Iterable, C, *, level: int | None = None,
                     d: int | None = None,
                     one_sided: bool = False) -> PrevisibilityVerdict:
    """Check that the additions U avoid saturated halves of C union U.

    For every testing interval L above the member level with halves L', L'':
    if rho(U+C, L') < d <= rho(U+C, L'') then rho(U, L'') must be 0.  The
    default checks both orientations of the halves; ``one_sided`` restricts
    to the literal reading where the small half is the left one.
    """
    if isinstance(C, ColouredCollection):
        level = C.level if level is None else level
        d = C.d if d is None else d
        c_positions = C.positions
    else:
        if level is None or d is None:
            raise DomainError("level and d are required when C is a bare collection")
        c_positions = _as_positions(level, C)
    u_positions = _as_positions(level, U)
    overlap = set(u_positions) & set(c_positions)
    if overlap:
        raise DomainError(f"U and C overlap at positions {sorted(overlap)}")
    both = _total_pyramid(level, set(u_positions) | set(c_positions))
    added = _total_pyramid(level, u_positions)
    witnesses: list[PrevisibilityWitness] = []
    for nu in range(level):
        for node in range(1 << nu):
            left, right = 2 * node, 2 * node + 1
            h_left, h_right = both[nu + 1][left], both[nu + 1][right]
            u_left, u_right = added[nu + 1][left], added[nu + 1][right]
            oriented = [(h_left, h_right, u_right, left, right)]
            if not one_sided:
                oriented.append((h_right, h_left, u_left, right, left))
            for h_small, h_big, u_big, small, big in oriented:
                if h_small < d <= h_big and u_big > 0:
                    witnesses.append(PrevisibilityWitness(
                        parent=make_interval(nu, node + 1),
                        small_child=make_interval(nu + 1, small + 1),
                        big_child=make_interval(nu + 1, big + 1),
                        rho_all_small=h_small, rho_all_big=h_big,
                        rho_added_big=u_big))
    return PrevisibilityVerdict(ok=not witnesses, level=level, d=d,
                                one_sided=one_sided, witnesses=tuple(witnesses))


# ---------------------------------------------------------------------------
# Round-robin colouring
# ---------------------------------------------------------------------------

def round_robin(level: int, members: Iterable, d: int, *,
                eta: Fraction = Fraction(1, 2)) -> ColouredCollection:
    """Colour members left-to-right with colours 1, 2, ..., d, 1, 2, ...

    Members inside any testing interval form a consecutive run of that
    enumeration, so colour counts within the interval differ by at most one;
    the result is therefore homogeneous at every eta <= 1/2.
    """
    positions = _as_positions(level, members)
    pairs = tuple((pos, (idx % d) + 1) for idx, pos in enumerate(positions))
    return ColouredCollection(level, d, Fraction(eta), pairs)


# ---------------------------------------------------------------------------
# Player B's constructive extension
# ---------------------------------------------------------------------------

def player_b_extend(collection: ColouredCollection, U: Iterable) -> ColouredCollection:
    """Colour the additions U so that collection + U stays homogeneous.

    Requires eta <= 1/2, a homogeneous starting collection, and previsible
    additions; raises StrategyInapplicable (with previsibility witnesses)
    otherwise.  The output preserves every existing colour.  Failures of
    internal invariants raise DefectError and indicate a bug, not bad input.
    """
    j, d, eta = collection.level, collection.d, collection.eta
    if eta > Fraction(1, 2):
        raise StrategyInapplicable(
            f"the constructive strategy needs eta <= 1/2, got {eta}")
    if not check_homogeneous(collection).ok:
        raise DomainError("starting collection is not homogeneous")
    u_positions = _as_positions(j, U)
    if not u_positions:
        return collection
    overlap = set(u_positions) & set(collection.positions)
    if overlap:
        raise DomainError(f"additions overlap existing members: {sorted(overlap)}")
    previsible = check_previsible(u_positions, collection)
    if not previsible.ok:
        raise StrategyInapplicable(
            f"additions are not previsible ({len(previsible.witnesses)} witness(es))",
            witnesses=previsible.witnesses)

    cmap = {pos: colour for pos, colour in collection.members}
    alpha = d.bit_length() - 1          # 2^alpha <= d < 2^{alpha+1}
    base = max(0, j - alpha)            # coarsest level where counts stay <= d
    colours = range(1, d + 1)

    totals_all = _total_pyramid(j, list(cmap) + list(u_positions))
    totals_added = _total_pyramid(j, u_positions)
    by_colour = [_total_pyramid(j, [p for p, c in cmap.items() if c == i])
                 for i in range(1, d + 1)]

    assigned: dict[int, int] = {}

    def added_under(nu: int, node: int) -> list[int]:
        lo = (node << (j - nu)) + 1
        hi = (node + 1) << (j - nu)
        return list(u_positions[bisect_left(u_positions, lo):
                                bisect_right(u_positions, hi)])

    def colour_counts(nu: int, node: int) -> list[int]:
        return [by_colour[i][nu][node] for i in range(d)]

    def distinct_colours(nu: int, node: int) -> set[int]:
        counts = colour_counts(nu, node)
        if any(v > 1 for v in counts):
            raise DefectError("expected pairwise-distinct colours under a node "
                              "with count below the threshold")
        return {i + 1 for i, v in enumerate(counts) if v}

    def give(targets: list[int], palette: list[int]) -> None:
        if len(palette) < len(targets):
            raise DefectError("colour palette shorter than the members to colour")
        for pos, colour in zip(targets, palette):
            if pos in assigned:
                raise DefectError(f"position {pos} coloured twice")
            assigned[pos] = colour

    def resolve_two_small(nu: int, node: int) -> None:
        # Both halves below d: colour every addition under this interval.
        left, right = 2 * node, 2 * node + 1
        x = totals_added[nu + 1][left]
        y = totals_added[nu + 1][right]
        m = totals_all[nu + 1][left] - x
        n = totals_all[nu + 1][right] - y
        in_left = distinct_colours(nu + 1, left)
        in_right = distinct_colours(nu + 1, right)
        if m + n < d:
            if in_left & in_right:
                raise DefectError("colour repeated across the halves of a "
                                  "below-threshold interval")
            fresh = [c for c in colours if c not in in_left and c not in in_right]
            palette_left = (fresh + sorted(in_right))[:x]
            if m + n + x < d:
                palette_right = (fresh[x:] + sorted(in_left) + fresh[:x])[:y]
            else:
                palette_right = (sorted(in_left) + fresh)[:y]
        else:
            if set(colours) - (in_left | in_right):
                raise DefectError("a colour is missing from a saturated interval")
            palette_left = [c for c in colours if c not in in_left][:x]
            palette_right = sorted(in_left - in_right)[:y]
        if len(palette_left) != x or len(palette_right) != y:
            raise DefectError("palette sizes do not match the member counts")
        give(added_under(nu + 1, left), palette_left)
        give(added_under(nu + 1, right), palette_right)

    def resolve_mixed(nu: int, small: int, big: int) -> None:
        # One half saturated, the other not: previsibility keeps the
        # additions out of the saturated half; colour the small half with
        # the colours scarcest in the big one.
        if totals_added[nu][big] != 0:
            raise DefectError("additions inside a saturated half despite the "
                              "previsibility check")
        x = totals_added[nu][small]
        if x == 0:
            return
        present = distinct_colours(nu, small)
        big_counts = colour_counts(nu, big)
        scarce_first = sorted((c for c in colours if c not in present),
                              key=lambda c: (big_counts[c - 1], c))
        if x > len(scarce_first):
            raise DefectError("not enough free colours for the small half")
        give(added_under(nu, small), scarce_first[:x])

    # Finest pass: intervals here hold at most d members.
    for node in range(1 << base):
        here = totals_all[base][node]
        if here > d:
            raise DefectError("count above d at the base level")
        if here == d:
            pending = added_under(base, node)
            if not pending:
                continue
            missing = sorted(set(colours) - distinct_colours(base, node))
            if len(missing) != len(pending):
                raise DefectError("exactly-full interval has a colour mismatch")
            give(pending, missing)

    # Walk upward, resolving intervals whose count first reaches d.
    for nu in range(base - 1, -1, -1):
        for node in range(1 << nu):
            if totals_all[nu][node] < d:
                continue
            left, right = 2 * node, 2 * node + 1
            big_left = totals_all[nu + 1][left] >= d
            big_right = totals_all[nu + 1][right] >= d
            if big_left and big_right:
                continue  # both halves were resolved at a finer level
            if not big_left and not big_right:
                resolve_two_small(nu, node)
            elif big_right:
                resolve_mixed(nu + 1, small=left, big=right)
            else:
                resolve_mixed(nu + 1, small=right, big=left)

    # Members on all-below-d chains reach the root uncoloured; give them
    # colours unused anywhere (the total count is below d).
    rest = [pos for pos in u_positions if pos not in assigned]
    if rest:
        if totals_all[0][0] >= d:
            raise DefectError("uncoloured members left below a saturated root")
        free = sorted(set(colours) - distinct_colours(0, 0))
        give(rest, free[:len(rest)])

    result = collection.add_uncoloured(u_positions).with_colours(assigned)
    final = check_homogeneous(result)
    if not final.ok:
        raise DefectError("extension failed the homogeneity check at "
                          f"{len(final.violations)} testing interval(s)")
    return result


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def brute_force_extensions(collection: ColouredCollection, U: Iterable, *,
                           cap: int = DEFAULT_ENGINE_CAP,
                           deadline: float | None = None,
                           ) -> tuple[ColouredCollection, ...]:
    """All homogeneous colourings of the additions U, by exhaustive search.

    Enumerates every one of the d^|U| assignments and keeps those whose
    union with the collection passes the homogeneity check.  Raises
    CapExceeded when d^|U| > cap and EngineTimeout past the deadline
    (a time.monotonic value).
    """
    j, d, eta = collection.level, collection.d, collection.eta
    if not collection.fully_coloured:
        raise DomainError("collection has uncoloured members; colour them first")
    u_positions = _as_positions(j, U)
    overlap = set(u_positions) & set(collection.positions)
    if overlap:
        raise DomainError(f"additions overlap existing members: {sorted(overlap)}")
    required = d ** len(u_positions)
    if required > cap:
        raise CapExceeded(required, cap)
    base_leaf = [0] * (1 << j)
    for pos, colour in collection.members:
        base_leaf[pos - 1] = colour
    results: list[ColouredCollection] = []
    template = collection.add_uncoloured(u_positions)
    for step, combo in enumerate(itertools.product(range(1, d + 1),
                                                   repeat=len(u_positions))):
        if deadline is not None and step % 256 == 0 and time.monotonic() > deadline:
            raise EngineTimeout(f"stopped after {step} of {required} assignments")
        leaf = base_leaf[:]
        for pos, colour in zip(u_positions, combo):
            leaf[pos - 1] = colour
        if _passes_quick(j, d, eta.numerator, eta.denominator, leaf):
            results.append(template.with_colours(dict(zip(u_positions, combo))))
    return tuple(results)


# ---------------------------------------------------------------------------
# Game state machine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    player: str  # "A" or "B"
    added: tuple[int, ...] = ()
    colouring: tuple[tuple[int, int], ...] = ()
    method: str | None = None  # for B: "strategy" or "brute-force"


@dataclass(frozen=True)
class GameState:
    collection: ColouredCollection
    stage: int = 0
    pending: tuple[int, ...] = ()
    status: str = STATUS_AWAITING_A
    history: tuple[Move, ...] = ()
    detail: str | None = None

    @property
    def level(self) -> int:
        return self.collection.level

    @property
    def d(self) -> int:
        return self.collection.d

    @property
    def eta(self) -> Fraction:
        return self.collection.eta

    @property
    def board_full(self) -> bool:
        return len(self.collection.members) == 1 << self.collection.level


def new_game(level: int, d: int, eta: Fraction,
             initial: ColouredCollection | Mapping[int, int] | None = None,
             ) -> GameState:
    """Start a game from a fully coloured homogeneous initial collection."""
    if isinstance(initial, ColouredCollection):
        c0 = initial
        if (c0.level, c0.d, Fraction(c0.eta)) != (level, d, Fraction(eta)):
            raise DomainError("initial collection disagrees with the game parameters")
    else:
        c0 = ColouredCollection.from_colouring(level, d, Fraction(eta),
                                               dict(initial or {}))
    verdict = check_homogeneous(c0)
    if not verdict.ok:
        bad = verdict.violations[0]
        raise DomainError("initial collection is not homogeneous "
                          f"(first violation at level {bad.interval.j}, "
                          f"position {bad.interval.k})")
    full = len(c0.members) == 1 << level
    return GameState(collection=c0,
                     status=STATUS_B_WINS if full else STATUS_AWAITING_A)


def apply_move_A(state: GameState, added: Iterable) -> GameState:
    """Player A adds uncoloured intervals; the move must strictly enlarge."""
    if state.status != STATUS_AWAITING_A:
        raise DomainError(f"not awaiting Player A (status is {state.status})")
    positions = _as_positions(state.level, added)
    if not positions:
        raise DomainError("a move must add at least one interval")
    overlap = set(positions) & set(state.collection.positions)
    if overlap:
        raise DomainError(f"move re-adds existing members: {sorted(overlap)}")
    return replace(state, pending=positions, status=STATUS_AWAITING_B,
                   history=state.history + (Move("A", added=positions),),
                   detail=None)


def engine_turn(state: GameState, *, cap: int = DEFAULT_ENGINE_CAP,
                timeout_s: float | None = DEFAULT_ENGINE_TIMEOUT_S) -> GameState:
    """Player B's reply: constructive strategy first, brute force as fallback.

    Outcomes: a coloured reply (B-wins when the board is full), A-wins when
    no homogeneous extension exists, or undecided when the strategy does not
    apply and exhaustive search is refused by cap or deadline.
    """
    if state.status != STATUS_AWAITING_B:
        raise DomainError(f"not awaiting Player B (status is {state.status})")
    deadline = time.monotonic() + timeout_s if timeout_s else None
    method = "strategy"
    try:
        extended = player_b_extend(state.collection, state.pending)
    except StrategyInapplicable as strategy_exc:
        try:
            options = brute_force_extensions(state.collection, state.pending,
                                             cap=cap, deadline=deadline)
        except CapExceeded as cap_exc:
            return replace(state, status=STATUS_UNDECIDED,
                           detail=f"strategy inapplicable ({strategy_exc.reason}); "
                                  f"exhaustive search needs {cap_exc.required} "
                                  f"evaluations, cap is {cap_exc.cap}")
        except EngineTimeout as timeout_exc:
            return replace(state, status=STATUS_UNDECIDED,
                           detail=f"strategy inapplicable ({strategy_exc.reason}); "
                                  f"exhaustive search timed out ({timeout_exc})")
        if not options:
            return replace(state, status=STATUS_A_WINS,
                           detail="no homogeneous extension exists")
        extended = options[0]
        method = "brute-force"
    colouring = tuple((pos, extended.colour_map[pos]) for pos in state.pending)
    full = len(extended.members) == 1 << state.level
    return replace(state, collection=extended, stage=state.stage + 1, pending=(),
                   status=STATUS_B_WINS if full else STATUS_AWAITING_A,
                   history=state.history + (Move("B", colouring=colouring,
                                                 method=method),),
                   detail=None)


# ---------------------------------------------------------------------------
# Scripted adversary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdversaryScript:
    """An initial position and move script with which Player A wins.

    Geometry at level j with d = 2^a and eta = 1/n: a chain of nested
    intervals ``chain[0] c ... c chain[n+1]`` starting at the leftmost
    level-(j-a) interval, each ``brothers[i]`` the right half completing
    ``chain[i]`` to ``chain[i+1]``; ``anchors`` are the d-1 leftmost level-j
    positions (colours 2..d) and ``satellites[i]`` the leftmost level-j
    position inside ``brothers[i]``.  The initial collection colours the
    anchors and the last satellite (colour 1); the script adds the remaining
    satellites one per stage from the top down.  Every stage forces colour 1
    on the added interval until the last one admits no extension at all.
    """

    a: int
    n: int
    level: int
    d: int
    eta: Fraction
    chain: tuple[DyadicInterval, ...]
    brothers: tuple[DyadicInterval, ...]
    anchors: tuple[int, ...]
    satellites: tuple[int, ...]
    initial: GameState
    moves: tuple[tuple[int, ...], ...]


def adversary_instance(a: int, n: int, j: int) -> AdversaryScript:
    """Build the scripted adversary for d = 2^a, eta = 1/n at level j."""
    if a < 1:
        raise DomainError(f"a must be >= 1, got {a}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if j < n + a + 1:
        raise DomainError(f"level {j} too small: the chain needs j >= n + a + 1 "
                          f"= {n + a + 1}")
    d = 1 << a
    eta = Fraction(1, n)
    chain = tuple(make_interval(j - a - i + 1, 1) for i in range(1, n + 3))
    brothers = tuple(make_interval(j - a - i + 1, 2) for i in range(1, n + 2))
    anchors = tuple(range(1, d))
    satellites = tuple((1 << (a + i - 1)) + 1 for i in range(1, n + 2))
    colouring: dict[int, int] = {pos: i + 1 for i, pos in enumerate(anchors, start=1)}
    colouring[satellites[-1]] = 1
    initial = new_game(j, d, eta, colouring)
    moves = tuple((satellites[n - k - 1],) for k in range(n))
    return AdversaryScript(a=a, n=n, level=j, d=d, eta=eta, chain=chain,
                           brothers=brothers, anchors=anchors,
                           satellites=satellites, initial=initial, moves=moves)


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------

def collection_to_wire(collection: ColouredCollection) -> dict:
    return {
        "j": collection.level,
        "d": collection.d,
        "eta": {"num": collection.eta.numerator, "den": collection.eta.denominator},
        "members": [{"j": collection.level, "k": pos, "colour": colour}
                    for pos, colour in collection.members],
    }


def collection_from_wire(obj: Mapping) -> ColouredCollection:
    try:
        level = int(obj["j"])
        d = int(obj["d"])
        eta = Fraction(int(obj["eta"]["num"]), int(obj["eta"]["den"]))
        members = []
        for member in obj.get("members", ()):
            if int(member["j"]) != level:
                raise DomainError(f"member at level {member['j']}, expected {level}")
            members.append((int(member["k"]), member.get("colour")))
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed collection payload: {exc}") from exc
    return ColouredCollection(level, d, eta, tuple(members))


def state_to_wire(state: GameState) -> dict:
    members = [{"j": state.level, "k": pos, "colour": colour}
               for pos, colour in state.collection.members]
    members.extend({"j": state.level, "k": pos, "colour": None}
                   for pos in state.pending)
    members.sort(key=lambda m: m["k"])
    return {
        "stage": state.stage,
        "j": state.level,
        "d": state.d,
        "eta": {"num": state.eta.numerator, "den": state.eta.denominator},
        "members": members,
        "pending": list(state.pending),
        "status": state.status,
        "detail": state.detail,
    }


def state_from_wire(obj: Mapping) -> GameState:
    try:
        level = int(obj["j"])
        d = int(obj["d"])
        eta = Fraction(int(obj["eta"]["num"]), int(obj["eta"]["den"]))
        coloured = []
        pending = []
        for member in obj.get("members", ()):
            if int(member["j"]) != level:
                raise DomainError(f"member at level {member['j']}, expected {level}")
            colour = member.get("colour")
            if colour is None:
                pending.append(int(member["k"]))
            else:
                coloured.append((int(member["k"]), int(colour)))
        status = obj.get("status", STATUS_AWAITING_A)
        stage = int(obj.get("stage", 0))
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed game payload: {exc}") from exc
    collection = ColouredCollection(level, d, eta, tuple(coloured))
    return GameState(collection=collection, stage=stage,
                     pending=tuple(sorted(pending)), status=status,
                     detail=obj.get("detail"))
