"""Shift operators tau_M on the dyadic grid and their combinatorics.

A shift sequence M = (m_1, ..., m_J) with |m_j| <= 2^j moves every level-j
interval by m_j positions, cyclically: tau_M(I(j,k)) = I(j, ((k-1+m_j) mod
2^j) + 1).  The derived points x_j = m_j/2^j, taken mod 1 so they live on the
circle [0,1), drive everything else:

  * N_j(M) counts the level-j cells meeting {x_l : j <= l <= J};
  * the growth of the measure |tau_M(Q(I))*| is controlled by N_j via a
    two-sided sandwich, checked exhaustively at finite depth;
  * sequences whose N_j eventually stay <= 2 decompose into bands where x_j
    either is small or clusters near one value a_k per band — the extractor
    below recovers (a_k), (j_k) and validates them;
  * from any sequence with nonzero shifts one can select levels j_k so that
    the shift restricted to those levels has the two-cell N-profile.

All comparisons are exact rational arithmetic; "for all l >= j" quantifiers
run to the truncation depth J and results carry that depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .dyadic_core import (
    DomainError,
    DyadicInterval,
    Rearrangement,
    level_intervals,
    q_collection,
    union_of,
)

# ---------------------------------------------------------------------------
# Shift sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftSequence:
    """Integer shifts m_j for levels j = 1..J, with |m_j| <= 2^j."""

    m: tuple[int, ...]

    def __post_init__(self):
        for i, mj in enumerate(self.m):
            j = i + 1
            if abs(mj) > (1 << j):
                raise DomainError(f"|m_{j}| = {abs(mj)} exceeds 2^{j}")

    @classmethod
    def from_list(cls, values: Iterable[int]) -> ShiftSequence:
        return cls(tuple(int(v) for v in values))

    @classmethod
    def constant(cls, value: int, depth: int) -> ShiftSequence:
        return cls(tuple(value for _ in range(depth)))

    @property
    def depth(self) -> int:
        return len(self.m)

    def m_at(self, j: int) -> int:
        if not (1 <= j <= self.depth):
            raise DomainError(f"level {j} outside 1..{self.depth}")
        return self.m[j - 1]

    def x(self, j: int) -> Fraction:
        """Raw x_j = m_j / 2^j (may be negative or 1)."""
        return Fraction(self.m_at(j), 1 << j)

    def x_mod(self, j: int) -> Fraction:
        """x_j reduced mod 1 into [0,1) — the point the cell counts use."""
        return Fraction(self.m_at(j) % (1 << j), 1 << j)

    def cell_at(self, j: int, level: int) -> int:
        """1-based index of the level `level` cell containing x_mod(j); level <= j."""
        if level > j:
            raise DomainError("cell_at expects level <= j")
        r = self.m_at(j) % (1 << j)
        return (r >> (j - level)) + 1

    def as_rearrangement(self, J: int | None = None) -> Rearrangement:
        """tau_M as an explicit level-preserving permutation table."""
        J = self.depth if J is None else J
        if J > self.depth:
            raise DomainError(f"depth {J} exceeds sequence length {self.depth}")
        perms = [(1,)]
        for l in range(1, J + 1):
            n = 1 << l
            ml = self.m[l - 1]
            perms.append(tuple(((k - 1 + ml) % n) + 1 for k in range(1, n + 1)))
        return Rearrangement(J, tuple(perms))

    def to_list(self) -> list[int]:
        return list(self.m)


def shift_map(M: ShiftSequence, I: DyadicInterval) -> DyadicInterval:
    """tau_M(I): cyclic shift of I's position by m at I's level."""
    if I.j == 0:
        return I
    if I.j > M.depth:
        raise DomainError(f"level {I.j} beyond shift depth {M.depth}")
    n = 1 << I.j
    return DyadicInterval(I.j, ((I.k - 1 + M.m[I.j - 1]) % n) + 1)


def compute_Nj(M: ShiftSequence, j: int, J: int) -> int:
    """N_j(M): number of level-j cells meeting {x_l : j <= l <= J}."""
    if not (0 <= j <= J <= M.depth):
        raise DomainError(f"need 0 <= j <= J <= {M.depth}, got j={j}, J={J}")
    cells = {M.cell_at(l, j) for l in range(max(j, 1), J + 1)}
    return len(cells)


def n_profile(M: ShiftSequence, J: int | None = None) -> list[int]:
    """[N_1(M), ..., N_J(M)] at truncation depth J."""
    J = M.depth if J is None else J
    return [compute_Nj(M, j, J) for j in range(1, J + 1)]


# ---------------------------------------------------------------------------
# Semenov constant
# ---------------------------------------------------------------------------

def semenov_constant(tau: Rearrangement, J: int) -> tuple[Fraction, DyadicInterval]:
    """max over I of |tau(Q(I) truncated at J)*| / |I|, with a witness I.

    Exhaustive over every dyadic interval of level <= J.
    """
    if J > tau.depth:
        raise DomainError(f"depth {J} exceeds rearrangement depth {tau.depth}")
    best: Fraction | None = None
    witness = None
    for j in range(J + 1):
        for I in level_intervals(j):
            image = union_of(tau.image(Q) for Q in q_collection(I, J))
            ratio = image.measure / I.length
            if best is None or ratio > best:
                best, witness = ratio, I
    assert best is not None and witness is not None
    return best, witness


def shifted_q_measure(M: ShiftSequence, I: DyadicInterval, J: int) -> Fraction:
    """|tau_M(Q(I))*| with Q(I) truncated at level J."""
    tau = M.as_rearrangement(J)
    return union_of(tau.image(Q) for Q in q_collection(I, J)).measure


# ---------------------------------------------------------------------------
# Decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """Band structure for a shift sequence: levels j_0 < j_1 < ... and one
    cluster value a_k per band [j_{k-1}, j_k), with slack widths w1, w2.

    jk may end in a sentinel level J+1 when the last band was still open at
    the truncation depth.
    """

    a: tuple[Fraction, ...]
    jk: tuple[int, ...]
    w1: Fraction = Fraction(1)
    w2: Fraction = Fraction(1)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.jk, self.jk[1:])):
            raise DomainError("band levels must be strictly increasing")
        if self.jk and len(self.a) != len(self.jk) - 1:
            raise DomainError("need exactly one cluster value per band")


@dataclass(frozen=True)
class DecompositionResult:
    status: str                       # "ok" | "trivial" | "not-applicable"
    decomposition: Decomposition | None
    witness_level: int | None = None
    reason: str | None = None
    violations: tuple[str, ...] = ()
    depth: int = 0

    @property
    def applicable(self) -> bool:
        return self.status != "not-applicable"


def is_decomposable(M: ShiftSequence, D: Decomposition,
                    J: int | None = None) -> tuple[bool, list[str]]:
    """Check the band conditions of D against M up to depth J.

    Band k (levels j in [j_{k-1}, j_k)): x_j <= w1/2^j or |a_k - x_j| < w2/2^j.
    Tail of band k (levels j >= j_k):    x_j <= w1/2^(j_k - 1).
    Levels below j_0 are unconstrained.  All comparisons exact.
    """
    J = M.depth if J is None else J
    violations = []
    for k in range(1, len(D.jk)):
        lo, hi = D.jk[k - 1], D.jk[k]
        ak = D.a[k - 1]
        for j in range(max(lo, 1), min(hi - 1, J) + 1):
            xj = M.x_mod(j)
            if not (xj <= D.w1 / (1 << j) or abs(ak - xj) < D.w2 / (1 << j)):
                violations.append(
                    f"band {k} at level {j}: x={xj} neither small nor near a_{k}={ak}")
        bound = D.w1 / (1 << (hi - 1))
        for j in range(max(hi, 1), J + 1):
            xj = M.x_mod(j)
            if not (xj <= bound):
                violations.append(
                    f"tail of band {k} at level {j}: x={xj} > w1/2^{hi - 1}")
    return (not violations, violations)


def extract_decomposition(M: ShiftSequence, J: int | None = None) -> DecompositionResult:
    """Recover the band structure (a_k), (j_k) from the N-profile of M.

    j_0 is the first level where the profile has settled (N_i <= 2 from there
    on) and N_{j_0} = 2.  Each band then records the last level n with
    x_n >= 2^(-j_k) as its cluster value and closes at the next level with
    N = 2.  The result is validated with w1 = w2 = 1; a failed validation is
    reported as not-applicable together with the deepest level where N >= 3.
    """
    J = M.depth if J is None else J
    if not (1 <= J <= M.depth):
        raise DomainError(f"need 1 <= J <= {M.depth}")
    xs = {j: M.x_mod(j) for j in range(1, J + 1)}
    N = {j: compute_Nj(M, j, J) for j in range(1, J + 1)}

    if all(x == 0 for x in xs.values()):
        return DecompositionResult("trivial", Decomposition((), ()), depth=J,
                                   reason="all shifts vanish mod 1")

    settled = J + 1
    for j in range(J, 0, -1):
        if N[j] <= 2:
            settled = j
        else:
            break
    j0 = next((j for j in range(settled, J + 1) if N[j] == 2), None)
    bad = [j for j in range(1, J + 1) if N[j] >= 3]
    if j0 is None:
        return DecompositionResult(
            "not-applicable", None,
            witness_level=(max(bad) if bad else max(j for j, x in xs.items() if x != 0)),
            reason=("no level with a settled two-cell profile"
                    if bad else
                    "nonzero shifts but no two-cell level; accumulation point "
                    "may be nonzero — relabel and retry"),
            depth=J)

    a: list[Fraction] = []
    jk = [j0]
    truncated = False
    while True:
        prev = jk[-1]
        n = max((j for j in range(prev, J + 1) if xs[j] >= Fraction(1, 1 << prev)),
                default=None)
        if n is None:
            break
        nxt = next((j for j in range(n + 1, J + 1) if N[j] == 2), None)
        if nxt is None:
            if all(xs[j] <= Fraction(1, 1 << j) for j in range(prev, J + 1)):
                break                     # dangling band already w1-small: drop it
            a.append(xs[n])
            jk.append(J + 1)              # band stays open to the horizon
            truncated = True
            break
        a.append(xs[n])
        jk.append(nxt)

    D = Decomposition(tuple(a), tuple(jk))
    ok, violations = is_decomposable(M, D, J)
    if not ok:
        return DecompositionResult(
            "not-applicable", D,
            witness_level=max(bad) if bad else None,
            reason="extracted bands fail validation at w1 = w2 = 1",
            violations=tuple(violations), depth=J)
    note = "last band open at truncation depth" if truncated else None
    return DecompositionResult("ok", D, depth=J, reason=note)


# ---------------------------------------------------------------------------
# Level selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSelection:
    ok: bool
    levels: tuple[int, ...] = ()
    selected_shift: ShiftSequence | None = None
    n_values: tuple[int, ...] = ()        # N_j(M') for j = 1..J
    off_pattern_levels: tuple[int, ...] = ()
    reason: str | None = None


def select_levels(M: ShiftSequence, J: int | None = None) -> LevelSelection:
    """Pick levels j_1 < j_2 < ... with x_{j_k} != 0 so the shift restricted
    to them has N_{j_k} = 2 (below the truncation depth) and N_j <= 2 always.

    j_1 is the first level with a nonzero x; j_{k+1} the first later nonzero
    level from which every remaining nonzero x is below 2^(-j_k).  Returns
    the restricted sequence M' and its N-profile; unselected levels where
    N = 2 still occurs are reported, not forbidden.
    """
    J = M.depth if J is None else J
    candidates = [j for j in range(1, J + 1) if M.x_mod(j) != 0]
    if not candidates:
        return LevelSelection(False, reason="every level shifts by a multiple "
                                            "of its cell count; no nonzero x_j")
    levels = [candidates[0]]
    while True:
        thr = Fraction(1, 1 << levels[-1])
        nxt = next((n for n in candidates
                    if n > levels[-1] and all(M.x_mod(s) < thr
                                              for s in candidates if s >= n)),
                   None)
        if nxt is None:
            break
        levels.append(nxt)

    chosen = set(levels)
    M2 = ShiftSequence(tuple(M.m[j - 1] if j in chosen else 0 for j in range(1, J + 1)))
    Ns = [compute_Nj(M2, j, J) for j in range(1, J + 1)]
    for jkv in levels:
        want = 2 if jkv < J else 1
        assert Ns[jkv - 1] == want, f"N_{jkv}(M') = {Ns[jkv - 1]}, expected {want}"
    assert all(v <= 2 for v in Ns), "restricted shift exceeded two cells"
    off = tuple(j for j in range(1, J + 1) if j not in chosen and Ns[j - 1] != 1)
    return LevelSelection(True, tuple(levels), M2, tuple(Ns), off)
