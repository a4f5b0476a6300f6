/**
 * Pure render models for the board view.
 *
 * Everything the UI displays about the game — colours, counts, margins,
 * conditions, verdicts, statuses — is copied field-for-field from confirmed
 * server payloads.  The only things computed here are interaction state:
 * which cells sit in the move basket, whether a submission is allowed
 * (non-empty basket while the game awaits Player A), which cells the
 * engine's last reply just coloured, and plain string formatting.
 */

import {
  GameStatus,
  MemberWire,
  MoveReply,
  SessionPayload,
  TestingRowWire,
  isEngineColouring,
} from "./types";

export interface BoardCell {
  k: number;
  colour: number | null;
  pending: boolean;
  inBasket: boolean;
  justColoured: boolean;
  selectable: boolean;
}

export interface TestingRowView {
  j: number;
  k: number;
  label: string;
  rho: number;
  rhoI: number[];
  condition: "distinct" | "balanced";
  ok: boolean;
  minI: number;
  maxI: number;
  etaMaxLabel: string;
}

export interface BoardViewModel {
  id: string;
  level: number;
  d: number;
  etaLabel: string;
  status: GameStatus;
  detail: string | null;
  banner: string | null;
  replyMethod: string | null;
  cells: BoardCell[];
  testing: TestingRowView[];
  basket: number[];
  canSubmit: boolean;
}

const TERMINAL_BANNERS: Partial<Record<GameStatus, string>> = {
  "A-wins": "A wins",
  "B-wins": "B wins",
  undecided: "undecided",
};

export function formatEta(eta: { num: number; den: number }): string {
  return eta.den === 1 ? `${eta.num}` : `${eta.num}/${eta.den}`;
}

export function formatInterval(j: number, k: number): string {
  return `I(${j},${k})`;
}

function testingRowView(row: TestingRowWire): TestingRowView {
  return {
    j: row.j,
    k: row.k,
    label: formatInterval(row.j, row.k),
    rho: row.rho,
    rhoI: row.rho_i.slice(),
    condition: row.condition,
    ok: row.ok,
    minI: row.min_i,
    maxI: row.max_i,
    etaMaxLabel: formatEta(row.eta_max),
  };
}

/** Positions the engine coloured in its latest reply, for diff highlights. */
export function colouredPositions(reply: MoveReply | null): Set<number> {
  if (reply === null || !isEngineColouring(reply)) {
    return new Set();
  }
  return new Set(reply.colouring.map((member: MemberWire) => member.k));
}

export function buildBoardView(
  payload: SessionPayload,
  basket: number[],
  lastReply: MoveReply | null,
): BoardViewModel {
  const state = payload.state;
  const awaitingA = state.status === "awaiting-A";
  const justColoured = colouredPositions(lastReply);
  const byPosition = new Map<number, MemberWire>();
  for (const member of state.members) {
    byPosition.set(member.k, member);
  }
  const inBasket = new Set(basket);
  const cells: BoardCell[] = [];
  for (let k = 1; k <= 1 << state.j; k++) {
    const member = byPosition.get(k);
    const colour = member ? member.colour : null;
    const occupied = member !== undefined;
    cells.push({
      k,
      colour,
      pending: state.pending.includes(k),
      inBasket: inBasket.has(k),
      justColoured: justColoured.has(k),
      selectable: awaitingA && !occupied,
    });
  }
  return {
    id: payload.id,
    level: state.j,
    d: state.d,
    etaLabel: formatEta(state.eta),
    status: state.status,
    detail: state.detail,
    banner: TERMINAL_BANNERS[state.status] ?? null,
    replyMethod:
      lastReply !== null && isEngineColouring(lastReply)
        ? lastReply.method
        : null,
    cells,
    testing: (payload.testing ?? []).map(testingRowView),
    basket: basket.slice().sort((a, b) => a - b),
    canSubmit: awaitingA && basket.length > 0,
  };
}

/**
 * Toggle a cell in or out of the move basket.  Only selectable cells react;
 * an empty-basket submission stays impossible because canSubmit is derived
 * from the basket in buildBoardView.
 */
export function toggleBasket(
  model: BoardViewModel,
  basket: number[],
  k: number,
): number[] {
  const cell = model.cells.find((c) => c.k === k);
  if (!cell || !cell.selectable) {
    return basket;
  }
  return basket.includes(k) ? basket.filter((p) => p !== k) : [...basket, k];
}
